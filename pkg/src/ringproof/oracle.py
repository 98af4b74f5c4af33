"""Ground truth: unit-propagation simulation, a plain DPLL solver, fault injection."""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .circuits import Net, Signal, sig_value
from .cnf import Formula


class PropagationConflict(RuntimeError):
    pass


def _occurrences(f: Formula):
    occ: List[List[int]] = [[] for _ in range(2 * f.num_vars + 2)]
    for ci, c in enumerate(f.clauses):
        for lit in c:
            occ[2 * abs(lit) + (lit < 0)].append(ci)
    return occ


def unit_propagate(f: Formula, assign: Mapping[int, int], occ=None) -> Dict[int, int]:
    """Exhausts unit propagation; raises :class:`PropagationConflict` on a falsified clause."""
    occ = occ or _occurrences(f)
    vals = dict(assign)
    clauses = f.clauses
    queue = list(vals.items())
    for ci, c in enumerate(clauses):
        if len(c) == 1:
            queue.append((abs(c[0]), int(c[0] > 0)))
    while queue:
        v, val = queue.pop()
        cur = vals.get(v)
        if cur is None:
            vals[v] = val
        elif cur != val:
            raise PropagationConflict(f"variable {v} forced both ways")
        # clauses where the literal just became false
        for ci in occ[2 * v + (val == 1)]:
            unassigned = None
            count = 0
            sat = False
            for lit in clauses[ci]:
                x = vals.get(abs(lit))
                if x is None:
                    count += 1
                    unassigned = lit
                    if count > 1:
                        break
                elif (x == 1) == (lit > 0):
                    sat = True
                    break
            if sat or count > 1:
                continue
            if count == 0:
                raise PropagationConflict(f"clause {ci} falsified")
            u = abs(unassigned)
            want = int(unassigned > 0)
            if vals.get(u) is None:
                vals[u] = want
                queue.append((u, want))
    return vals


@dataclass
class Simulation:
    outputs: List[int]
    values: Dict[int, int]

    @property
    def value(self) -> int:
        return sum(b << i for i, b in enumerate(self.outputs))


def simulate(formula: Formula, inputs: Mapping[int, int], outputs: Sequence[Signal], occ=None) -> Simulation:
    """The unique model of ``formula`` extending ``inputs``, found by unit propagation."""
    vals = unit_propagate(formula, inputs, occ)
    if len(vals) != formula.num_vars:
        missing = [v for v in range(1, formula.num_vars + 1) if v not in vals]
        raise PropagationConflict(f"propagation stalls; {len(missing)} variables open, e.g. {missing[:3]}")
    return Simulation([sig_value(s, vals) for s in outputs], vals)


def bits(vec: Sequence[int], value: int) -> Dict[int, int]:
    return {v: value >> i & 1 for i, v in enumerate(vec)}


# DPLL


@dataclass
class SatResult:
    sat: bool
    model: Optional[Dict[int, int]] = None
    decisions: int = 0


def dpll(f: Formula) -> SatResult:
    """Unit propagation plus first-unassigned-variable branching; no learning.

    Only variables that occur in some clause are branched on (the rest are
    set to 0), since backtracking over a free variable would just repeat
    the search below it.  The returned model is checked against every
    clause before it is returned.
    """
    n = f.num_vars
    clauses = [list(c) for c in f.clauses]
    if any(not c for c in clauses):
        return SatResult(False)
    watches: Dict[int, List[int]] = {}
    for ci, c in enumerate(clauses):
        for lit in c[:2]:
            watches.setdefault(lit, []).append(ci)
    val = [None] * (n + 1)
    trail: List[int] = []

    def value(lit):
        x = val[abs(lit)]
        if x is None:
            return None
        return x if lit > 0 else 1 - x

    def enqueue(lit):
        val[abs(lit)] = int(lit > 0)
        trail.append(lit)

    def propagate(start):
        i = start
        while i < len(trail):
            false_lit = -trail[i]
            i += 1
            ws = watches.get(false_lit, [])
            keep = []
            j = 0
            while j < len(ws):
                ci = ws[j]
                j += 1
                c = clauses[ci]
                if len(c) == 1:
                    keep.append(ci)
                    keep.extend(ws[j:])
                    watches[false_lit] = keep
                    return False
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if value(c[0]) == 1:
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    if value(c[k]) != 0:
                        c[1], c[k] = c[k], c[1]
                        watches.setdefault(c[1], []).append(ci)
                        break
                else:
                    keep.append(ci)
                    if value(c[0]) == 0:
                        keep.extend(ws[j:])
                        watches[false_lit] = keep
                        return False
                    enqueue(c[0])
            watches[false_lit] = keep
        return True

    for c in clauses:
        if len(c) == 1:
            v = value(c[0])
            if v == 0:
                return SatResult(False)
            if v is None:
                enqueue(c[0])
    if not propagate(0):
        return SatResult(False)

    # explicit stack of (trail length, decision literal, tried both)
    stack: List[Tuple[int, int, bool]] = []
    decisions = 0
    used = sorted({abs(l) for c in clauses for l in c})
    pos = 0
    while True:
        while pos < len(used) and val[used[pos]] is not None:
            pos += 1
        if pos == len(used):
            model = {v: val[v] or 0 for v in range(1, n + 1)}
            for c in f.clauses:
                if not any(model[abs(l)] == (l > 0) for l in c):
                    raise AssertionError("dpll produced a non-model")
            return SatResult(True, model, decisions)
        nxt = used[pos]
        decisions += 1
        stack.append((len(trail), -nxt, False))
        start = len(trail)
        enqueue(-nxt)
        ok = propagate(start)
        while not ok:
            while stack and stack[-1][2]:
                stack.pop()
            if not stack:
                return SatResult(False, None, decisions)
            mark, lit, _ = stack.pop()
            for l in trail[mark:]:
                val[abs(l)] = None
            del trail[mark:]
            stack.append((mark, -lit, True))
            enqueue(-lit)
            ok = propagate(mark)
        pos = 0


def enumerate_inputs(f: Formula, inputs: Sequence[Sequence[int]]) -> SatResult:
    """Decides ``f`` by trying every value of the input vectors.

    Each input assignment is unit-propagated; a conflict refutes it, a
    complete assignment is a model, and anything left open (for example
    the inequality block) goes to :func:`dpll` with the inputs fixed.
    ``decisions`` in the result counts the input assignments tried.
    """
    occ = _occurrences(f)
    flat = [v for vec in inputs for v in vec]
    tried = 0
    for value in range(1 << len(flat)):
        tried += 1
        assign = bits(flat, value)
        try:
            vals = unit_propagate(f, assign, occ)
        except PropagationConflict:
            continue
        units = [(v if b else -v,) for v, b in vals.items()]
        res = dpll(f.with_clauses(list(f.clauses) + units))
        if res.sat:
            return SatResult(True, res.model, tried)
    return SatResult(False, None, tried)


# fault injection

FAULT_MODES = ("flip-maj-clause", "drop-xor-clause", "swap-outputs")


def inject_fault(formula: Formula, net: Net, adder: int, mode: str) -> Tuple[Formula, Net]:
    """Returns a faulted copy of ``(formula, net)``; ``adder`` indexes ``net.adders``.

    * ``flip-maj-clause`` negates the output literal in the first clause of the carry gate;
    * ``drop-xor-clause`` removes the first clause of the sum gate;
    * ``swap-outputs`` exchanges the sum and carry variables in both gates' clauses.
    """
    if mode not in FAULT_MODES:
        raise ValueError(f"unknown fault mode {mode!r}")
    a = net.adders[adder]
    gate_of = {g.out: i for i, g in enumerate(net.gates)}
    sum_g = gate_of.get(abs(a.sum_out)) if isinstance(a.sum_out, int) else None
    car_g = gate_of.get(abs(a.carry_out)) if isinstance(a.carry_out, int) else None
    clauses = [list(c) for c in formula.clauses]
    drop = set()
    if mode == "flip-maj-clause":
        if car_g is None:
            raise ValueError(f"adder {adder} has no carry gate")
        g = net.gates[car_g]
        ci = g.clauses[0]
        clauses[ci] = [(-l if abs(l) == g.out else l) for l in clauses[ci]]
    elif mode == "drop-xor-clause":
        if sum_g is None:
            raise ValueError(f"adder {adder} has no sum gate")
        drop.add(net.gates[sum_g].clauses[0])
    else:
        if sum_g is None or car_g is None:
            raise ValueError(f"adder {adder} needs both a sum and a carry gate")
        s, c = net.gates[sum_g].out, net.gates[car_g].out
        swap = {s: c, c: s}
        for gi in (sum_g, car_g):
            for ci in net.gates[gi].clauses:
                clauses[ci] = [(swap.get(abs(l), abs(l)) * (1 if l > 0 else -1)) for l in clauses[ci]]
    remap = {}
    kept = []
    for ci, c in enumerate(clauses):
        if ci in drop:
            continue
        remap[ci] = len(kept)
        kept.append(c)
    new_net = copy.copy(net)
    new_net.gates = [copy.copy(g) for g in net.gates]
    for g in new_net.gates:
        g.clauses = tuple(remap[ci] for ci in g.clauses if ci in remap)
    meta = dict(formula.meta)
    meta["fault"] = f"{adder}:{mode}"
    return formula.with_clauses(kept, meta), new_net
