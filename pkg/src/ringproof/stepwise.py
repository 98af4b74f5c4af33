"""Top-down construction of branching programs by explicit steps.

This is the hand-driven counterpart to the levelized builder in
:mod:`ringproof.engine`.  Every node carries the partial assignment it
stands for; a step either branches on a variable, propagates a variable
forced by a unit clause (the other branch closing in a conflict leaf), or
merges several open nodes into one node labelled by their common
assignment.  The Wallace helpers drive these steps one adder at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from .bp import BranchingProgram
from .circuits import AdderGate, Net, is_const
from .cnf import Formula, falsifies


class StepError(ValueError):
    pass


class ReadOnceViolation(StepError):
    pass


@dataclass(frozen=True)
class Branch:
    var: int


@dataclass(frozen=True)
class Propagate:
    var: int
    clause: int  # index of the forcing clause


@dataclass(frozen=True)
class Merge:
    nodes: Tuple[int, ...]
    common: Tuple[Tuple[int, int], ...]  # (var, value) pairs every merged node agrees on


Step = Union[Branch, Propagate, Merge]


@dataclass
class StepNode:
    assign: Dict[int, int]
    queried: FrozenSet[int]  # variables queried on some path into this node
    var: Optional[int] = None
    lo: int = -1
    hi: int = -1
    leaf: Optional[int] = None  # clause index of a conflict leaf
    merged_into: Optional[int] = None

    @property
    def is_open(self) -> bool:
        return self.var is None and self.leaf is None and self.merged_into is None


class TopDownBP:
    def __init__(self, formula: Formula, assign: Optional[Dict[int, int]] = None):
        self.formula = formula
        self.nodes: List[StepNode] = [StepNode(dict(assign or {}), frozenset())]
        self.root = 0

    def open_nodes(self) -> List[int]:
        return [i for i, n in enumerate(self.nodes) if n.is_open]

    def _new(self, assign, queried) -> int:
        self.nodes.append(StepNode(assign, queried))
        return len(self.nodes) - 1

    def _resolve(self, i: int) -> int:
        while self.nodes[i].merged_into is not None:
            i = self.nodes[i].merged_into
        return i

    def conflict(self, i: int) -> Optional[int]:
        """Index of a clause falsified by the node's assignment, if any."""
        a = self.nodes[i].assign
        for ci, c in enumerate(self.formula.clauses):
            if all(abs(l) in a for l in c) and falsifies(a, c):
                return ci
        return None

    def close(self, i: int, clause: Optional[int] = None) -> int:
        """Turns an open node into a conflict leaf."""
        node = self.nodes[i]
        if clause is None:
            clause = self.conflict(i)
            if clause is None:
                raise StepError(f"node {i}: no clause is falsified")
        elif not falsifies(node.assign, self.formula.clauses[clause]):
            raise StepError(f"node {i}: clause {clause} is not falsified")
        node.leaf = clause
        return i

    def apply_step(self, i: int, step: Step) -> List[int]:
        """Applies ``step`` at open node ``i`` and returns the new open node ids."""
        node = self.nodes[i]
        if isinstance(step, Merge):
            return [self._merge(step)]
        if not node.is_open:
            raise StepError(f"node {i} is not open")
        v = step.var
        if v in node.queried:
            raise ReadOnceViolation(f"node {i}: variable {v} already queried on a path into it")
        if v in node.assign:
            raise StepError(f"node {i}: variable {v} already assigned")
        q = node.queried | {v}
        if isinstance(step, Branch):
            kids = [self._new({**node.assign, v: b}, q) for b in (0, 1)]
            node.var, node.lo, node.hi = v, kids[0], kids[1]
            return kids
        clause = self.formula.clauses[step.clause]
        lit = next((l for l in clause if abs(l) == v), None)
        rest = [l for l in clause if abs(l) != v]
        if lit is None or not falsifies(node.assign, rest):
            raise StepError(f"node {i}: clause {step.clause} is not unit on variable {v}")
        forced = int(lit > 0)
        live = self._new({**node.assign, v: forced}, q)
        dead = self._new({**node.assign, v: 1 - forced}, q)
        self.nodes[dead].leaf = step.clause
        node.var = v
        node.lo, node.hi = (dead, live) if forced else (live, dead)
        return [live]

    def _merge(self, step: Merge) -> int:
        common = dict(step.common)
        ids = [self._resolve(i) for i in step.nodes]
        queried = frozenset()
        for i in ids:
            n = self.nodes[i]
            if not n.is_open:
                raise StepError(f"node {i} is not open")
            for v, b in common.items():
                if n.assign.get(v) != b:
                    raise StepError(f"node {i} does not agree with the merged assignment on variable {v}")
            queried |= n.queried
        target = self._new(common, queried)
        for i in ids:
            self.nodes[i].merged_into = target
        return target

    def branch_all(self, i: int, vars_: Sequence[int]) -> List[int]:
        frontier = [i]
        for v in vars_:
            frontier = [k for j in frontier for k in self.apply_step(j, Branch(v))]
        return frontier

    def to_branching_program(self) -> BranchingProgram:
        """Flattens to a :class:`BranchingProgram`; every node must be closed."""
        bp = BranchingProgram()
        memo: Dict[int, int] = {}
        stack = [(self._resolve(self.root), False)]
        while stack:
            i, done = stack.pop()
            if i in memo:
                continue
            n = self.nodes[i]
            if n.leaf is not None:
                memo[i] = bp.leaf(self.formula.clauses[n.leaf])
                continue
            if n.var is None:
                raise StepError(f"node {i} is still open")
            lo, hi = self._resolve(n.lo), self._resolve(n.hi)
            if done:
                memo[i] = bp.node(n.var, memo[lo], memo[hi])
                continue
            stack.append((i, True))
            stack.extend(((hi, False), (lo, False)))
        bp.root = memo[self._resolve(self.root)]
        return bp


# Wallace-style adder steps


def _adder_clauses(formula: Formula, net: Net, adder: AdderGate) -> List[int]:
    return [ci for gi in adder.gates for ci in net.gates[gi].clauses]


def _forcing(formula: Formula, clauses: Sequence[int], assign: Dict[int, int], v: int) -> Optional[int]:
    for ci in clauses:
        c = formula.clauses[ci]
        if any(abs(l) == v for l in c) and falsifies(assign, [l for l in c if abs(l) != v]):
            return ci
    return None


def _outputs(adder: AdderGate) -> List[int]:
    return [abs(s) for s in (adder.sum_out, adder.carry_out) if not is_const(s)]


def _inputs(adder: AdderGate) -> List[int]:
    return [abs(s) for s in adder.inputs if not is_const(s)]


def _propagate_outputs(tbp: TopDownBP, node: int, net: Net, adders: Sequence[AdderGate]) -> int:
    clauses = [ci for a in adders for ci in _adder_clauses(tbp.formula, net, a)]
    for a in adders:
        for v in _outputs(a):
            n = tbp.nodes[node]
            if v in n.assign:
                continue
            ci = _forcing(tbp.formula, clauses, n.assign, v)
            if ci is None:
                raise StepError(f"node {node}: nothing forces adder output {v}")
            (node,) = tbp.apply_step(node, Propagate(v, ci))
    return node


def _forget(tbp: TopDownBP, nodes: Sequence[int], consumed: Sequence[int]) -> List[int]:
    groups: Dict[Tuple[Tuple[int, int], ...], List[int]] = {}
    gone = set(consumed)
    for i in nodes:
        key = tuple(sorted((v, b) for v, b in tbp.nodes[i].assign.items() if v not in gone))
        groups.setdefault(key, []).append(i)
    return [tbp.apply_step(ids[0], Merge(tuple(ids), key))[0] for key, ids in groups.items()]


def _propagate_group(tbp: TopDownBP, node: int, net: Net, adders: Sequence[AdderGate],
                     free: Sequence[int]) -> List[int]:
    ins = [v for a in adders for v in _inputs(a)]
    unknown = [v for v in dict.fromkeys(ins) if v not in tbp.nodes[node].assign]
    extra = [v for v in unknown if v not in free]
    if extra:
        raise StepError(f"node {node}: adder inputs {extra} are neither assigned nor free carries")
    if len(unknown) > 2:
        raise StepError(f"node {node}: more than two unrestricted carries")
    leaves = [_propagate_outputs(tbp, j, net, adders) for j in tbp.branch_all(node, unknown)]
    return _forget(tbp, leaves, ins)


def wallace_propagate_adder(tbp: TopDownBP, node: int, net: Net, adder: AdderGate,
                            free: Sequence[int] = ()) -> List[int]:
    """Branches on the adder's unrestricted inputs (at most two, taken from
    ``free``), propagates its sum and carry, then merges after forgetting
    the consumed inputs.  Returns the surviving open nodes."""
    return _propagate_group(tbp, node, net, [adder], free)


def wallace_propagate_pair(tbp: TopDownBP, node: int, net: Net, left: AdderGate, right: AdderGate,
                           free: Sequence[int] = ()) -> List[int]:
    """The same for two adders processed together (one per side), lowest column first."""
    pair = sorted([left, right], key=lambda a: a.column)
    return _propagate_group(tbp, node, net, pair, free)
