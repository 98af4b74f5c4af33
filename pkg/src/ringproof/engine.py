"""Strip-by-strip construction of read-once branching programs.

Each strip body is built level by level along a fixed variable order.  The
states of a level are the assignments to the variables that are still
*live* (queried already and needed by a clause checked later); a state
extends by querying the next variable, a child that falsifies a clause
whose last variable is the one just queried becomes a leaf (propagation),
and children that agree on the next live set share a node (merging).  A
state that survives every level witnesses that the strip is satisfiable.

Variable orders come from a closure: schedules name the variables to guess
or scan, and everything a gate determines from known wires is queried right
after.  In table mode (commutativity and multiplier equivalence with
shared partial-product cells) the AND gates of twinned cells are replaced
by virtual equivalences, and the multiplier inputs are only queried in
three-node sub-programs that refute a disagreeing pair.
"""

from __future__ import annotations

import heapq
from array import array
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .bp import BranchingProgram
from .circuits import INTACT
from .cnf import Clause
from .identities import IdentityInstance
from .strips import StripSpec, side_of


class ScheduleDeadEnd(RuntimeError):
    """Some assignment survived every level: the strip is satisfiable."""

    def __init__(self, k: int, witness: Dict[int, int]):
        super().__init__(f"strip {k}: an assignment survives every level; the strip is satisfiable")
        self.k = k
        self.witness = witness


class ScheduleBlowup(RuntimeError):
    pass


@dataclass
class Relation:
    kind: str  # xor, eq, and, or, maj, const
    out: int
    ins: Tuple[int, ...]
    column: int

    @property
    def vars(self) -> Tuple[int, ...]:
        return (self.out,) + self.ins


@dataclass
class Twin:
    left: int  # cell variable of the left-hand multiplier
    right: int
    inputs: Tuple[int, int]  # the two input variables, in global order
    clauses: Tuple[int, ...]  # instance clause indices of both AND gates


@dataclass
class StripProblem:
    inst: IdentityInstance
    strip: StripSpec
    clauses: List[Clause]  # residual clauses (prefix literals removed)
    payload: List[int]  # instance clause index, or -1-twin index for virtual clauses
    relations: List[Relation]
    twins: List[Twin]
    free: set
    conflict: Optional[int] = None  # instance clause falsified by the prefix alone

    @property
    def k(self) -> int:
        return self.strip.k

    @property
    def prefix_width(self) -> int:
        """Prefix variables that occur in some strip clause; only these belong to labels."""
        used = {abs(l) for ci in self.payload if ci >= 0 for l in self.inst.formula.clauses[ci]}
        return sum(1 for v in self.strip.prefix if v in used)


def _input_key(inst: IdentityInstance) -> Dict[int, Tuple[str, int]]:
    return {v: (name, i) for name, vec in inst.inputs.items() for i, v in enumerate(vec)}


def _find_twins(inst: IdentityInstance, gates: Sequence[int]) -> List[Twin]:
    net = inst.net
    inkey = _input_key(inst)
    by_cell: Dict[Tuple[int, int], Dict[str, int]] = {}
    for gi in gates:
        g = net.gates[gi]
        if g.kind != "and" or len(g.ins) != 2 or any(l < 0 or l not in inkey for l in g.ins):
            continue
        if net.region_of(g.tag) == INTACT:
            continue
        pair = tuple(sorted(g.ins, key=lambda v: inkey[v]))
        by_cell.setdefault(pair, {})[side_of(g.tag)] = gi
    twins = []
    for pair, sides in sorted(by_cell.items()):
        if "L" in sides and "R" in sides:
            gl, gr = net.gates[sides["L"]], net.gates[sides["R"]]
            twins.append(Twin(gl.out, gr.out, pair, gl.clauses + gr.clauses))
    return twins


def table_mode_applies(inst: IdentityInstance) -> bool:
    """Every multiplier is a non-Booth multiplier of the raw inputs."""
    if inst.identity != "comm" and not inst.identity.startswith("equiv:"):
        return False
    return all(m.kind != "booth" for m in inst.multipliers)


def strip_problem(inst: IdentityInstance, strip: StripSpec, table: Optional[bool] = None) -> StripProblem:
    if table is None:
        table = table_mode_applies(inst)
    net, formula = inst.net, inst.formula
    prefix = strip.prefix
    twins = _find_twins(inst, strip.gates) if table else []
    skip = {ci for t in twins for ci in t.clauses}
    twin_gates = {t.left for t in twins} | {t.right for t in twins}
    clauses, payload = [], []
    conflict = None
    for ci in strip.clauses:
        if ci in skip:
            continue
        res = []
        sat = False
        for lit in formula.clauses[ci]:
            val = prefix.get(abs(lit))
            if val is None:
                res.append(lit)
            elif val == (lit > 0):
                sat = True
                break
        if sat:
            continue
        if not res and conflict is None:
            conflict = ci
        clauses.append(tuple(res))
        payload.append(ci)
    for ti, t in enumerate(twins):
        for c in ((t.left, -t.right), (-t.left, t.right)):
            clauses.append(c)
            payload.append(-1 - ti)
    relations = []
    for gi in strip.gates:
        g = net.gates[gi]
        if g.out in twin_gates:
            continue
        relations.append(Relation(g.kind, g.out, tuple(abs(l) for l in g.ins), g.column))
    for t in twins:
        relations.append(Relation("eq", t.right, (t.left,), net.var_col[t.left]))
    free = {v for v, _ in strip.free}
    # a wire computed from free wires alone is as unconstrained as they are
    changed = True
    while changed:
        changed = False
        for r in relations:
            if r.ins and r.out not in free and all(v in free for v in r.ins):
                free.add(r.out)
                changed = True
    return StripProblem(inst, strip, clauses, payload, relations, twins, free, conflict)


# variable orders


def closure_order(prob: StripProblem, scan: Sequence) -> List[int]:
    """Queries ``scan`` in order, each followed by everything it determines.

    An entry of ``scan`` may be a group of variables; the whole group is
    queried before propagation, which then advances column by column.

    A relation determines its output once its inputs are known; an
    exclusive-or or equivalence determines any one missing wire.  When a
    touched relation lacks only free wires (carries cut at the window's
    lower edge), those are queried too.  Remaining wires follow by column.
    """
    needed = {abs(l) for c in prob.clauses for l in c}
    known = set(prob.strip.prefix)
    order: List[int] = []
    rels = prob.relations
    of_var: Dict[int, List[int]] = {}
    for ri, r in enumerate(rels):
        for v in r.vars:
            of_var.setdefault(v, []).append(ri)
    heap: List[Tuple[int, int]] = []

    def learn(v):
        if v in known:
            return
        known.add(v)
        if v in needed:
            order.append(v)
        for ri in of_var.get(v, ()):
            heapq.heappush(heap, (rels[ri].column, ri))

    def settle():
        while heap:
            _, ri = heapq.heappop(heap)
            r = rels[ri]
            unknown = [v for v in r.vars if v not in known]
            if not unknown:
                continue
            if r.kind in ("xor", "eq", "const"):
                if len(unknown) == 1:
                    learn(unknown[0])
                    continue
            elif r.out in unknown and len(unknown) == 1:
                learn(r.out)
                continue
            if len(unknown) == len(r.vars):
                continue
            if r.kind in ("xor", "eq"):
                # any one wire follows from the rest, so the free ones may be guessed
                bound = [v for v in unknown if v not in prob.free]
                if len(bound) <= 1:
                    for v in sorted(v for v in unknown if v in prob.free)[: len(unknown) - 1]:
                        learn(v)
                    for v in bound:
                        learn(v)
                continue
            open_ins = [v for v in unknown if v != r.out]
            if r.out in unknown and open_ins and all(v in prob.free for v in open_ins):
                for v in sorted(open_ins):
                    learn(v)
                learn(r.out)

    for ri, r in enumerate(rels):
        if not r.ins:
            heapq.heappush(heap, (r.column, ri))
    settle()
    for item in scan:
        for v in (item if isinstance(item, (list, tuple)) else (item,)):
            learn(v)
        settle()
    col = prob.inst.net.var_col
    rest = sorted((v for v in needed if v not in known), key=lambda v: (col.get(v, 0), v))
    while rest:
        learn(rest[0])
        settle()
        rest = [v for v in rest if v not in known]
    return order


# levelized builder


@dataclass
class BodyResult:
    root: int
    levels: int
    max_states: int
    max_width: int
    new_nodes: int
    order: List[int]
    states_per_level: List[int] = field(default_factory=list)


def _twin_leaf(bp: BranchingProgram, prob: StripProblem, ti: int, left_val: int, cache: Dict) -> int:
    """Refutes ``left != right`` for a twin pair by querying its two inputs."""
    key = (ti, left_val)
    if key in cache:
        return cache[key]
    t = prob.twins[ti]
    formula = prob.inst.formula
    base = {t.left: left_val, t.right: 1 - left_val}
    cls = [formula.clauses[ci] for ci in t.clauses]
    a, b = t.inputs

    def falsified(assign):
        for c in cls:
            if all(abs(l) in assign and assign[abs(l)] != (l > 0) for l in c):
                return c
        return None

    def build(assign, rest):
        c = falsified(assign)
        if c is not None:
            return bp.leaf(c)
        v = rest[0]
        kids = [build({**assign, v: val}, rest[1:]) for val in (0, 1)]
        return bp.node(v, kids[0], kids[1], len(assign) + 1)

    cache[key] = build(base, [a, b])
    return cache[key]


def build_body(bp: BranchingProgram, prob: StripProblem, order: Sequence[int],
               max_states: int = 1_000_000, base_width: Optional[int] = None) -> BodyResult:
    """Adds the strip body to ``bp`` and returns its root.

    ``base_width`` counts variables fixed above the body (the prefix), which
    belong to every node label.
    """
    formula = prob.inst.formula
    twin_cache: Dict = {}
    if base_width is None:
        base_width = prob.prefix_width

    def leaf_for(code: int, ext_assign=None) -> int:
        pay = prob.payload[code]
        if pay >= 0:
            return bp.leaf(formula.clauses[pay])
        ti = -1 - pay
        c = prob.clauses[code]
        left_val = 0 if c[0] > 0 else 1  # (left or not right) fails when left = 0
        return _twin_leaf(bp, prob, ti, left_val, twin_cache)

    if prob.conflict is not None:
        root = bp.leaf(formula.clauses[prob.conflict])
        return BodyResult(root, 0, 1, base_width, 0, [])

    pos = {v: t for t, v in enumerate(order)}
    T = len(order)
    at_level: List[List[int]] = [[] for _ in range(T)]
    last_use = [-1] * T
    for code, c in enumerate(prob.clauses):
        try:
            last = max(pos[abs(l)] for l in c)
        except KeyError as exc:
            raise ValueError(f"variable {exc.args[0]} of a strip clause is missing from the order") from None
        at_level[last].append(code)
        for l in c:
            p = pos[abs(l)]
            last_use[p] = max(last_use[p], last)
    # slot allocation: a variable holds its slot from its level to its last use
    slot = [0] * T
    keep = [0] * T
    free_slots: List[int] = []
    next_slot = 0
    live = 0
    dies: Dict[int, List[int]] = {}
    for t in range(T):
        if free_slots:
            s = heapq.heappop(free_slots)
        else:
            s = next_slot
            next_slot += 1
        slot[t] = s
        live |= 1 << s
        dies.setdefault(max(last_use[t], t), []).append(t)
        for u in dies.pop(t, ()):
            live &= ~(1 << slot[u])
            heapq.heappush(free_slots, slot[u])
        keep[t] = live
    checks: List[List[Tuple[int, int, int]]] = []
    for t in range(T):
        lst = []
        for code in at_level[t]:
            mask = bad = 0
            for l in prob.clauses[code]:
                bit = 1 << slot[pos[abs(l)]]
                mask |= bit
                if l < 0:
                    bad |= bit
            lst.append((mask, bad, code))
        checks.append(lst)

    # forward: reachable states and transitions.  Only the current level's
    # states are kept; transitions and predecessors go into typed arrays.
    cur: List[int] = [0]
    trans: List[Tuple[array, array]] = []
    preds: List[array] = [array("q", [-1])]
    counts = [1]
    widest = 1
    width_at = []
    for t in range(T):
        bit = 1 << slot[t]
        km = keep[t]
        chk = checks[t]
        nxt: Dict[int, int] = {}
        nxt_list: List[int] = []
        nxt_pred = array("q")
        los = array("q")
        his = array("q")
        for idx, s in enumerate(cur):
            for b, out in ((0, los), (1, his)):
                ext = s | bit if b else s
                hit = -1
                for mask, bad, code in chk:
                    if ext & mask == bad:
                        hit = code
                        break
                if hit >= 0:
                    out.append(-1 - hit)
                    continue
                ns = ext & km
                j = nxt.get(ns)
                if j is None:
                    j = nxt[ns] = len(nxt_list)
                    nxt_list.append(ns)
                    nxt_pred.append(2 * idx + b)
                out.append(j)
        trans.append((los, his))
        preds.append(nxt_pred)
        cur = nxt_list
        counts.append(len(cur))
        widest = max(widest, len(cur))
        if len(cur) > max_states:
            raise ScheduleBlowup(f"strip {prob.k}: more than {max_states} states at level {t} of {T}")
        prev_keep = keep[t - 1] if t else 0
        width_at.append(bin(prev_keep).count("1") + 1 + base_width)
        del nxt
    if cur:
        witness = dict(prob.strip.prefix)
        j = 0
        for t in range(T, 0, -1):
            code = preds[t][j]
            j, b = code >> 1, code & 1
            witness[order[t - 1]] = b
        raise ScheduleDeadEnd(prob.k, witness)
    del preds

    # backward: materialize nodes, children first
    before = len(bp)
    below: List[int] = []
    for t in range(T - 1, -1, -1):
        los, his = trans.pop()
        v = order[t]
        w = width_at[t]
        nb = []
        for lo, hi in zip(los, his):
            a = below[lo] if lo >= 0 else leaf_for(-1 - lo)
            b = below[hi] if hi >= 0 else leaf_for(-1 - hi)
            nb.append(bp.node(v, a, b, w))
        below = nb
    return BodyResult(below[0], T, widest, max(width_at, default=base_width), len(bp) - before, list(order),
                      counts)


# assembly


def strip_program(bp: BranchingProgram, prob: StripProblem, body_root: int) -> int:
    """Standalone program for the strip formula: the prefix is queried first,
    each wrong value ending in the corresponding unit clause."""
    node = body_root
    for e, val in sorted(prob.strip.prefix.items(), reverse=True):
        wrong = bp.leaf((e,) if val else (-e,))
        node = bp.node(e, wrong, node) if val else bp.node(e, node, wrong)
    return node


def assemble_top_level(bp: BranchingProgram, inst: IdentityInstance, bodies: Dict[int, int]) -> int:
    """Chains the strips: ``e_k = 1`` enters strip ``k`` with ``e_0..e_{k-1} = 0``;
    all-zero reaches the wide clause."""
    node = bp.leaf(inst.formula.clauses[inst.wide])
    for k in range(inst.width - 1, -1, -1):
        node = bp.node(inst.e[k], node, bodies[k], k + 1)
    return node


def cut_profile(prob: StripProblem, order: Sequence[int]) -> List[int]:
    """Number of live variables before each level, from the order alone.

    The label of a node at level ``t`` assigns exactly these variables plus
    the used prefix, so the maximum bounds the label width and
    ``sum(2^(live + 1))`` bounds the body size without building it.
    """
    pos = {v: t for t, v in enumerate(order)}
    last = [-1] * len(order)
    for c in prob.clauses:
        if not c:
            continue
        m = max(pos[abs(l)] for l in c)
        for l in c:
            p = pos[abs(l)]
            if m > last[p]:
                last[p] = m
    ends = [0] * (len(order) + 1)
    for t, m in enumerate(last):
        ends[max(m, t)] += 1
    out = []
    live = 0
    for t in range(len(order)):
        out.append(live)
        live += 1 - ends[t]
    return out
