"""Independent checks for resolution refutations.

Nothing here depends on how a proof was produced: a trace is validated
against the formula line by line, then its DAG (restricted to the lines the
final empty clause depends on) is examined for regularity and for
consistency with one global variable order.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .cnf import Formula
from .trace import Refutation, TraceLine


@dataclass
class CheckResult:
    ok: bool
    line: int = 0  # trace line id of the first error, 0 when ok
    reason: str = ""
    witness: List[int] = field(default_factory=list)  # path of line ids, or a cycle of variables
    order: List[int] = field(default_factory=list)  # pivot order for ordered proofs
    pivots: Dict[int, int] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return f"line {self.line}: {self.reason}"


def _fail(line: int, reason: str, witness=None) -> CheckResult:
    return CheckResult(False, line, reason, list(witness or []))


def check_refutation(f: Formula, t: Refutation, allow_weakening: bool = True) -> CheckResult:
    """Every input line is a clause of ``f``, every derived line follows by
    resolution from two earlier lines on their unique clashing variable, and
    the last line is empty.

    A derived clause may be a superset of the computed resolvent when
    ``allow_weakening`` is set; it may never be tautological.
    """
    known = {frozenset(c) for c in f.clauses}
    clauses: Dict[int, frozenset] = {}
    pivots: Dict[int, int] = {}
    prev = 0
    for line in t.lines:
        if line.id <= prev:
            return _fail(line.id, f"id {line.id} not greater than previous id {prev}")
        prev = line.id
        c = frozenset(line.clause)
        if len(c) != len(line.clause):
            return _fail(line.id, "repeated literal")
        if any(-l in c for l in c):
            return _fail(line.id, "tautological clause")
        if 0 in c:
            return _fail(line.id, "literal 0")
        if line.is_input:
            if c not in known:
                return _fail(line.id, "input clause is not a clause of the formula")
            clauses[line.id] = c
            continue
        if len(line.ante) != 2:
            return _fail(line.id, f"expected 2 antecedents, got {len(line.ante)}")
        a, b = line.ante
        ca, cb = clauses.get(a), clauses.get(b)
        if ca is None or cb is None:
            return _fail(line.id, f"unknown antecedent {a if ca is None else b}")
        clash = [l for l in ca if -l in cb]
        if len(clash) != 1:
            return _fail(line.id, f"antecedents clash on {len(clash)} variables (pivot not complementary)")
        p = clash[0]
        res = (ca - {p}) | (cb - {-p})
        if res != c and not (allow_weakening and res < c):
            return _fail(line.id, "stated clause is not the resolvent of its antecedents")
        clauses[line.id] = c
        pivots[line.id] = abs(p)
    if not t.lines:
        return _fail(0, "empty trace")
    if clauses[t.lines[-1].id]:
        return _fail(t.lines[-1].id, "missing empty clause: last line is not empty")
    return CheckResult(True, pivots=pivots)


def _reachable(t: Refutation) -> Tuple[Dict[int, TraceLine], List[int]]:
    """Lines the final clause depends on, in trace order (antecedents first)."""
    by_id = {l.id: l for l in t.lines}
    need = set()
    stack = [t.lines[-1].id]
    while stack:
        i = stack.pop()
        if i in need:
            continue
        need.add(i)
        stack.extend(by_id[i].ante)
    return by_id, [l.id for l in t.lines if l.id in need]


def _pivot_of(by_id: Dict[int, TraceLine], lid: int) -> int:
    line = by_id[lid]
    if line.pivot is not None:
        return line.pivot
    a, b = line.ante
    sb = set(by_id[b].clause)
    return abs(next(l for l in by_id[a].clause if -l in sb))


def _path_down(by_id, start: int, var: int, pivot) -> List[int]:
    """A path of line ids from ``start`` to a descendant resolving on ``var``."""
    parent = {start: None}
    stack = [start]
    while stack:
        i = stack.pop()
        for a in by_id[i].ante:
            if a in parent:
                continue
            parent[a] = i
            if by_id[a].ante and pivot(a) == var:
                path = [a]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            stack.append(a)
    return [start]


def _path_up(by_id, order: List[int], target: int) -> List[int]:
    """A path of line ids from the final line down to ``target``."""
    parent = {order[-1]: None}
    for i in reversed(order):
        if i not in parent:
            continue
        for a in by_id[i].ante:
            parent.setdefault(a, i)
    path = [target]
    while parent.get(path[-1]) is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def check_regular(t: Refutation, method: str = "memo") -> CheckResult:
    """No path from the empty clause to an input resolves on a variable twice.

    ``memo`` keeps, per line, the set of pivots used anywhere below it (as a
    bitset) and is linear in the proof size.  ``dfs`` enumerates paths with
    an explicit path set; it is exponential and meant for cross-checking
    small proofs.
    """
    if not t.lines:
        return _fail(0, "empty trace")
    by_id, order = _reachable(t)
    memo_piv: Dict[int, int] = {}

    def pivot(lid):
        p = memo_piv.get(lid)
        if p is None:
            p = memo_piv[lid] = _pivot_of(by_id, lid)
        return p

    if method == "dfs":
        return _regular_dfs(by_id, order, pivot)
    below: Dict[int, int] = {}
    for lid in order:
        line = by_id[lid]
        if not line.ante:
            below[lid] = 0
            continue
        v = pivot(lid)
        bit = 1 << v
        a, b = line.ante
        for child in (a, b):
            if below[child] & bit:
                path = _path_up(by_id, order, lid)[:-1] + _path_down(by_id, lid, v, pivot)
                return _fail(lid, f"variable {v} is resolved twice on one path", path)
        below[lid] = below[a] | below[b] | bit
    return CheckResult(True)


def _regular_dfs(by_id, order, pivot) -> CheckResult:
    root = order[-1]
    path: List[int] = []
    on_path: Dict[int, int] = {}
    stack: List[Tuple[int, int]] = [(root, 0)]
    while stack:
        lid, state = stack.pop()
        if state == 1:
            path.pop()
            line = by_id[lid]
            if line.ante:
                v = pivot(lid)
                on_path[v] -= 1
            continue
        line = by_id[lid]
        path.append(lid)
        stack.append((lid, 1))
        if line.ante:
            v = pivot(lid)
            if on_path.get(v, 0):
                return _fail(lid, f"variable {v} is resolved twice on one path", list(path))
            on_path[v] = on_path.get(v, 0) + 1
            for a in reversed(line.ante):
                stack.append((a, 0))
    return CheckResult(True)


def check_ordered(t: Refutation) -> CheckResult:
    """The proof is regular and one total order of variables is consistent
    with the pivot order on every path.

    Adds the constraint ``pivot(line) < pivot(antecedent)`` for every derived
    antecedent and sorts the resulting digraph topologically; the returned
    order lists variables from the empty clause toward the inputs.
    """
    reg = check_regular(t)
    if not reg.ok:
        return reg
    by_id, order = _reachable(t)
    piv = {lid: _pivot_of(by_id, lid) for lid in order if by_id[lid].ante}
    graph: Dict[int, set] = {}
    where: Dict[Tuple[int, int], int] = {}
    for lid, v in piv.items():
        graph.setdefault(v, set())
        for a in by_id[lid].ante:
            if a in piv:
                u = piv[a]
                # u must come after v: record v as a predecessor of u
                graph.setdefault(u, set()).add(v)
                where.setdefault((v, u), lid)
    sorter = graphlib.TopologicalSorter(graph)
    try:
        result = list(sorter.static_order())
    except graphlib.CycleError as exc:
        cycle = list(exc.args[1])
        v, u = cycle[1], cycle[0]
        line = where.get((v, u), where.get((u, v), 0))
        return _fail(line, "pivot precedence has a cycle: " + " < ".join(map(str, cycle[::-1])), cycle[::-1])
    return CheckResult(True, order=result)


def check_all(f: Formula, t: Refutation, regular: bool = False, ordered: bool = False) -> CheckResult:
    res = check_refutation(f, t)
    if not res.ok:
        return res
    if ordered:
        return check_ordered(t)
    if regular:
        return check_regular(t)
    return res
