import pytest

from ringproof.bp import check_leaves, check_read_once, bp_to_resolution
from ringproof.check import check_refutation, check_regular
from ringproof.circuits import Net
from ringproof.cnf import FormulaBuilder
from ringproof.stepwise import (
    Branch, Merge, Propagate, ReadOnceViolation, StepError, TopDownBP, wallace_propagate_adder,
    wallace_propagate_pair,
)


def _formula(*clauses, n=3):
    b = FormulaBuilder()
    for i in range(n):
        b.new_var(f"v{i + 1}")
    for c in clauses:
        b.add_clause(c)
    return b.build()


def test_branch_children():
    t = TopDownBP(_formula((1, 2), n=3), {1: 1})
    lo, hi = t.apply_step(0, Branch(3))
    assert t.nodes[lo].assign == {1: 1, 3: 0}
    assert t.nodes[hi].assign == {1: 1, 3: 1}
    assert t.open_nodes() == [lo, hi]


def test_propagate_adds_conflict_leaf():
    f = _formula((-1, 3), n=3)  # a=1 forces c=1
    t = TopDownBP(f, {1: 1})
    (live,) = t.apply_step(0, Propagate(3, 0))
    assert t.nodes[live].assign == {1: 1, 3: 1}
    dead = t.nodes[0].lo
    assert t.nodes[dead].leaf == 0 and t.nodes[dead].assign[3] == 0


def test_propagate_requires_unit():
    t = TopDownBP(_formula((-1, 2, 3), n=3), {1: 1})
    with pytest.raises(StepError):
        t.apply_step(0, Propagate(3, 0))


def test_merge_on_common_assignment():
    # nodes {a=1,b=0} and {a=0,b=0} merge into one node labelled {b=0}
    t = TopDownBP(_formula((1, 2), n=2), {2: 0})
    a0, a1 = t.apply_step(0, Branch(1))
    (m,) = t.apply_step(a1, Merge((a1, a0), ((2, 0),)))
    assert t.nodes[m].assign == {2: 0}
    assert t.open_nodes() == [m]
    with pytest.raises(StepError):
        t.apply_step(m, Merge((m,), ((1, 1),)))


def test_read_once_enforced_after_merge():
    t = TopDownBP(_formula((1, 2), n=2))
    a0, a1 = t.apply_step(0, Branch(1))
    (m,) = t.apply_step(a0, Merge((a0, a1), ()))
    with pytest.raises(ReadOnceViolation):
        t.apply_step(m, Branch(1))


def test_close_and_flatten():
    f = _formula((1, 2), (1, -2), (-1,), n=2)
    t = TopDownBP(f)
    a0, a1 = t.apply_step(0, Branch(1))
    t.close(a1)
    b0, b1 = t.apply_step(a0, Branch(2))
    t.close(b0)
    t.close(b1)
    with pytest.raises(StepError):
        t.close(0, 0)
    bp = t.to_branching_program()
    assert check_read_once(bp)[0] and check_leaves(bp)[0]
    assert check_refutation(f, bp_to_resolution(bp)).ok


def test_flatten_rejects_open_nodes():
    t = TopDownBP(_formula((1, 2), n=2))
    t.apply_step(0, Branch(1))
    with pytest.raises(StepError):
        t.to_branching_program()


def _adders(count=1):
    net = Net()
    with net.circuit("W"):
        ins = net.input_vector("a", 3 * count)
        gates = [net.adder(ins[3 * i:3 * i + 3], f"s_{i}", f"c_{i}", i) for i in range(count)]
    return net, ins, gates


def test_adder_propagate_then_forget():
    net, (a, b, c), (g,) = _adders()
    t = TopDownBP(net.build(), {a: 1, b: 1, c: 0})
    (m,) = wallace_propagate_adder(t, 0, net, g)
    assert t.nodes[m].assign == {g.sum_out: 0, g.carry_out: 1}


def test_adder_with_two_free_carries():
    net, (a, b, c), (g,) = _adders()
    t = TopDownBP(net.build(), {a: 1})
    survivors = wallace_propagate_adder(t, 0, net, g, free=(b, c))
    labels = sorted(tuple(sorted(t.nodes[i].assign.items())) for i in survivors)
    # four input patterns collapse to the three distinct (sum, carry) outcomes
    assert labels == sorted({((g.sum_out, (1 + x + y) % 2), (g.carry_out, int(1 + x + y >= 2)))
                             for x in (0, 1) for y in (0, 1)})
    branches = [n for n in t.nodes if n.var in (b, c)]
    assert len(branches) == 3  # one node on b, two on c


def test_adder_rejects_unlisted_inputs():
    net, (a, b, c), (g,) = _adders()
    t = TopDownBP(net.build(), {})
    with pytest.raises(StepError):
        wallace_propagate_adder(t, 0, net, g, free=(a, b))
    with pytest.raises(StepError):
        wallace_propagate_adder(t, 0, net, g, free=(a, b, c))


def test_pair_processes_both_adders():
    net, ins, (g0, g1) = _adders(2)
    assign = dict(zip(ins, (1, 0, 1, 1, 1, 1)))
    t = TopDownBP(net.build(), assign)
    (m,) = wallace_propagate_pair(t, 0, net, g1, g0)
    assert t.nodes[m].assign == {g0.sum_out: 0, g0.carry_out: 1, g1.sum_out: 1, g1.carry_out: 1}


def test_stepwise_program_refutes_adder_formula():
    # full adder with s=0, c=0 and inputs forced to sum 2 is unsatisfiable
    net, (a, b, c), (g,) = _adders()
    f = net.build()
    extra = f.with_clauses(list(f.clauses) + [(-g.sum_out,), (-g.carry_out,), (a,), (b,)])
    t = TopDownBP(extra, {})
    x0, x1 = t.apply_step(0, Branch(a))
    t.close(x0)
    y0, y1 = t.apply_step(x1, Branch(b))
    t.close(y0)
    z0, z1 = t.apply_step(y1, Branch(g.carry_out))
    t.close(z1)
    t.close(z0)
    bp = t.to_branching_program()
    ref = bp_to_resolution(bp)
    assert check_refutation(extra, ref).ok and check_regular(ref).ok
