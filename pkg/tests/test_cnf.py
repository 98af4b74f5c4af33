import pytest
from hypothesis import given, strategies as st

from ringproof.cnf import (
    FALSIFIED, SATISFIED, UNRESOLVED, DimacsError, Formula, FormulaBuilder, Unit,
    canonical_clause, clause_status, read_dimacs, write_dimacs,
)

from conftest import formula, instance


@pytest.mark.parametrize("assign, expected", [
    ({1: 0, 2: 1}, FALSIFIED),
    ({2: 1}, Unit(1)),
    ({}, UNRESOLVED),
    ({1: 1}, SATISFIED),
    ({2: 0}, SATISFIED),
])
def test_clause_status(assign, expected):
    assert clause_status((1, -2), assign) == expected


def test_write_dimacs_plain():
    assert write_dimacs(formula(2, (1,), (-1,))) == "p cnf 2 2\n1 0\n-1 0\n"
    assert write_dimacs(formula(3, (1, -3))) == "p cnf 3 1\n1 -3 0\n"


def test_read_dimacs_basic():
    assert read_dimacs("p cnf 1 1\n1 0\n") == formula(1, (1,))


def test_read_dimacs_comments_ignored():
    f = read_dimacs("c hi\np cnf 1 0\n")
    assert f.num_vars == 1 and f.clauses == ()


@pytest.mark.parametrize("text, fragment", [
    ("p cnf 1 1\n2 0\n", "out of range"),
    ("1 0\n", "before header"),
    ("p cnf 2 1\n1 2\n", "terminator"),
    ("p cnf 2 2\n1 0\n", "declares 2"),
    ("p cnf 2 1\n1 -1 0\n", "tautological"),
    ("p cnf 2 1\n1 x 0\n", "bad literal"),
    ("p dnf 2 1\n1 0\n", "malformed header"),
    ("", "missing header"),
])
def test_read_dimacs_errors(text, fragment):
    with pytest.raises(DimacsError, match=fragment):
        read_dimacs(text)


def test_dimacs_error_line_number():
    with pytest.raises(DimacsError) as exc:
        read_dimacs("p cnf 1 2\n1 0\n\n3 0\n")
    assert exc.value.line == 4


def test_canonical_clause():
    assert canonical_clause([3, -1, 3]) == (-1, 3)
    with pytest.raises(ValueError):
        canonical_clause([2, -2])


def test_builder_rejects_duplicates():
    b = FormulaBuilder()
    x = b.new_var("x_0")
    with pytest.raises(ValueError):
        b.new_var("x_0")
    b.add_clause([x])
    with pytest.raises(ValueError):
        b.add_clause([x])
    assert b.build().var_names == {1: "x_0"}


def test_formula_rejects_out_of_range():
    with pytest.raises(ValueError):
        Formula(1, ((2,),))


clauses_st = st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.dictionaries(st.integers(1, n), st.booleans(), min_size=1, max_size=n), max_size=12),
))


@given(clauses_st)
def test_dimacs_round_trip_random(data):
    n, cls = data
    f = Formula(n, tuple(canonical_clause([v if s else -v for v, s in c.items()]) for c in cls),
                {v: f"v_{v}" for v in range(1, n + 1)}, {"kind": "random"})
    text = write_dimacs(f)
    assert read_dimacs(text) == f
    assert write_dimacs(read_dimacs(text)) == text


@pytest.mark.parametrize("ident, kind, n", [("comm", "array", 2), ("dist", "wallace", 2), ("xsq", "booth", 2),
                                           ("equiv:array,wallace", "array", 2)])
def test_dimacs_round_trip_generated(ident, kind, n):
    f = instance(ident, kind, n).formula
    text = write_dimacs(f)
    assert read_dimacs(text) == f
    assert write_dimacs(read_dimacs(text)) == text
