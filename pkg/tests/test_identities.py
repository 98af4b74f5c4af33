import pytest

from ringproof.identities import (
    OutOfScope, build_equivalence, build_identity, build_instance, expand, parse_expr, parse_identity,
    rebuild,
)
from ringproof.circuits import sig_value
from ringproof.oracle import bits, dpll, unit_propagate

from conftest import instance


def test_parse_and_expand():
    e = parse_expr("x*(y+z)")
    assert expand(e) == {("x", "y"): 1, ("x", "z"): 1}
    assert expand(parse_expr("(x+1)*(x+1)")) == {("x", "x"): 1, ("x",): 2, (): 1}


@pytest.mark.parametrize("text, exc", [
    ("x*y=y*x*x", OutOfScope),
    ("(x*y)*z=x*(y*z)", OutOfScope),
    ("x*y=x*z", ValueError),
    ("x+y=x*y", ValueError),
    ("x*y", ValueError),
    ("x*?=1", ValueError),
])
def test_parse_identity_rejects(text, exc):
    with pytest.raises(exc):
        parse_identity(text)


def test_comm_n1_is_one_cell_each_side():
    inst = instance("comm", "array", 1)
    cells = sorted(nm for nm in inst.formula.var_names.values() if nm.startswith("t"))
    assert cells == ["t^L_{0,0}", "t^R_{0,0}"]
    assert inst.out_left[1:] == inst.out_right[1:]
    assert not dpll(inst.formula).sat


@pytest.mark.parametrize("kind", ["array", "diagonal", "booth", "wallace"])
def test_comm_n2_unsat(kind):
    assert not dpll(instance("comm", kind, 2).formula).sat


def test_dist_faulted_is_sat_with_witness():
    inst = build_identity("dist", "array", 2, fault="L:3:flip-maj-clause")
    res = dpll(inst.formula)
    assert res.sat
    x, y, z = (sum(res.model[v] << i for i, v in enumerate(inst.inputs[nm])) for nm in "xyz")
    assert all(0 <= val < 4 for val in (x, y, z))
    assert inst.meta["fault"] == "L:3:flip-maj-clause"


def test_equivalence_array_wallace_unsat():
    assert not dpll(build_equivalence("array", "wallace", 2).formula).sat


def test_equivalence_array_array_isomorphic():
    inst = build_equivalence("array", "array", 3)
    a, b = inst.multipliers
    assert len(a.tableau) == len(b.tableau)
    assert not dpll(inst.formula).sat


def test_equivalence_faulty_sat():
    inst = build_equivalence("array", "array", 3, fault="R:4:swap-outputs")
    res = dpll(inst.formula)
    assert res.sat


@pytest.mark.parametrize("ident, n", [("comm", 3), ("dist", 2), ("xsq", 3), ("deg2:(x+y)*(x+y)=x*x+x*y+x*y+y*y", 2)])
def test_sides_agree_on_true_values(ident, n):
    inst = instance(ident, "array", n)
    names = sorted(inst.inputs)
    for value in range(1 << (n * len(names))):
        assign = {}
        for k, nm in enumerate(names):
            assign.update(bits(inst.inputs[nm], value >> (k * n) & ((1 << n) - 1)))
        left = _circuit_value(inst, assign, inst.out_left)
        right = _circuit_value(inst, assign, inst.out_right)
        assert left == right


def _circuit_value(inst, assign, outs):
    # drop the inequality block so the circuits alone determine every wire
    evars = set(inst.e)
    keep = [c for c in inst.formula.clauses if not any(abs(l) in evars for l in c)]
    vals = unit_propagate(inst.formula.with_clauses(keep), assign)
    return sum(sig_value(s, vals) << i for i, s in enumerate(outs))


def test_metadata_round_trip():
    inst = instance("dist", "wallace", 2)
    assert rebuild(inst.formula).formula == inst.formula
    with pytest.raises(ValueError):
        rebuild(inst.formula.with_clauses(inst.formula.clauses[1:]))


@pytest.mark.parametrize("spec", ["comm", "xsq", "deg2:x*y=y*x", "equiv:wallace,array"])
def test_build_instance_spellings(spec):
    inst = build_instance(spec, "array", 2)
    assert not dpll(inst.formula).sat


def test_unknown_inputs():
    with pytest.raises(ValueError):
        build_instance("assoc", "array", 2)
    with pytest.raises(ValueError):
        build_instance("comm", "dadda", 2)
    with pytest.raises(ValueError):
        build_instance("comm", "array", 2, fault="L:99:swap-outputs")
    with pytest.raises(ValueError):
        build_instance("comm", "array", 2, fault="L:0:melt")
