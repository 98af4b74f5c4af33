"""Scan schedules: which wires each strip program guesses or reads, in what order.

A schedule proposes one or more scan lists for a strip; the closure in
:mod:`ringproof.engine` turns each into a full variable order and
:func:`plan_strip` picks one.  The registry is keyed by identity family and
multiplier kind:

* ``comm`` with non-Booth multipliers (and ``equiv`` of two such) runs in
  table mode: scan one side's partial-product cells row by row, optionally
  after guessing the other side's in-window outputs so that side can be
  unwound from its outputs.
* ``dist`` scans ``y_0, z_0``, the top of the ``x`` window downwards, then
  one new ``x`` bit together with ``y_j, z_j`` per row.
* ``xsq`` branches on the carries of ``x + 1`` (which form a run of ones
  followed by zeros), then reads ``x`` from both ends of the window.
* everything else (``deg2``, Booth) reads the inputs from both ends,
  ``x_0, x_n, x_1, x_{n-1}, ...``; variants also guess in-window outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .circuits import INTACT, WINDOW
from .identities import IdentityInstance
from .strips import StripSpec, side_of
from .engine import StripProblem, closure_order, cut_profile

Scan = List  # entries are variables or groups of variables


@dataclass
class Plan:
    name: str
    order: List[int]
    profile: List[int]

    @property
    def max_live(self) -> int:
        return max(self.profile, default=0)

    @property
    def log2_bound(self) -> float:
        """log2 of sum over levels of 2^(live + 1): an upper bound on body size."""
        if not self.profile:
            return 0.0
        m = max(self.profile)
        return m + 1 + math.log2(sum(2.0 ** (p - m) for p in self.profile))


CutSchedule = Plan


def _ints(sigs) -> List[int]:
    return [s for s in sigs if isinstance(s, int)]


def window_outputs(inst: IdentityInstance, strip: StripSpec, sides: Sequence[str] = ("L", "R"),
                   roles: Sequence[str] = ("multiplier", "adder")) -> List[int]:
    """Output wires of windowed circuits that fall inside the window, lowest column first."""
    net = inst.net
    out = []
    for tag, info in net.circuits.items():
        if info.region != WINDOW or info.role not in roles or side_of(tag) not in sides:
            continue
        for col, s in enumerate(info.outputs):
            if strip.lo <= col <= strip.hi and isinstance(s, int):
                out.append((col, tag, abs(s)))
    out.sort()
    seen = set()
    res = []
    for _, _, v in out:
        if v not in seen:
            seen.add(v)
            res.append(v)
    return res


def side_outputs(inst: IdentityInstance, strip: StripSpec, side: str) -> List[int]:
    sigs = inst.out_left if side == "L" else inst.out_right
    return [abs(s) for c, s in enumerate(sigs) if strip.lo <= c <= strip.hi and isinstance(s, int)]


def _cells(prob: StripProblem, by: str, side: str) -> List[int]:
    """Twin cells of one side in row order; ``by`` names the input vector that indexes rows."""
    key = {}
    names = prob.inst.formula.var_names
    for t in prob.twins:
        a, b = t.inputs
        ia = _index(names[a])
        ib = _index(names[b])
        pb = names[b].split("_")[0]
        row = ib if pb == by else ia
        other = ia if pb == by else ib
        key[t.left if side == "L" else t.right] = (row, other)
    return sorted(key, key=key.get)


def _index(name: str) -> int:
    return int(name.rsplit("_", 1)[1])


# candidate generators: each returns a list of (name, scan)


def _table_candidates(inst, strip, prob) -> List[Tuple[str, Scan]]:
    names = sorted(inst.inputs)
    a, b = names[0], names[1]
    cands = []
    for row_by in (b, a):
        for side, other in (("L", "R"), ("R", "L")):
            cells = _cells(prob, row_by, side)
            cands.append((f"rows({row_by})/{side}", cells))
            cands.append((f"guess {other} + rows({row_by})/{side}", side_outputs(inst, strip, other) + cells))
    return cands


def _ends(vec: Sequence[int]) -> List[int]:
    """x_0, x_{n-1}, x_1, x_{n-2}, ..."""
    out = []
    i, j = 0, len(vec) - 1
    while i <= j:
        out.append(vec[i])
        if j != i:
            out.append(vec[j])
        i += 1
        j -= 1
    return out


def _window_sweep(inst, strip, primary: str) -> Scan:
    """Other vectors' bit 0, the primary window from the top down, then one
    new primary bit and the other vectors' bit j per row."""
    x = inst.inputs[primary]
    others = [inst.inputs[nm] for nm in sorted(inst.inputs) if nm != primary]
    n = len(x)
    k, d = strip.hi, strip.delta
    scan: Scan = [v[0] for v in others]
    scan += [x[i] for i in range(min(k, n - 1), max(k - d, 0) - 1, -1)]
    for j in range(1, n):
        if 0 <= k - d - j < n:
            scan.append(x[k - d - j])
        scan.extend(v[j] for v in others if j < len(v))
    scan += list(x)
    return scan


def _mitm(inst, strip) -> Scan:
    vecs = [inst.inputs[nm] for nm in sorted(inst.inputs)]
    scan: Scan = []
    for group in zip(*[_ends(v) for v in vecs]):
        scan.extend(group)
    return scan


def _generic_candidates(inst, strip, prob) -> List[Tuple[str, Scan]]:
    guesses = window_outputs(inst, strip)
    cands = [("ends", _mitm(inst, strip)), ("guess + ends", guesses + _mitm(inst, strip))]
    for nm in sorted(inst.inputs):
        sweep = _window_sweep(inst, strip, nm)
        cands.append((f"sweep({nm})", sweep))
        cands.append((f"guess + sweep({nm})", guesses + sweep))
    return cands


def _xsq_candidates(inst, strip, prob) -> List[Tuple[str, Scan]]:
    x = inst.inputs["x"]
    n = len(x)
    k, d = strip.hi, strip.delta
    names = inst.formula.var_names
    plus_one = [info for tag, info in inst.net.circuits.items() if info.role == "adder" and info.region == INTACT]
    carries = []
    for info in plus_one:
        tag = info.tag
        carries += [v for v, nm in names.items() if nm.startswith(f"c^{tag}_") and _index(nm) <= k]
    carries.sort(key=lambda v: _index(names[v]))
    both: Scan = [x[0]]
    hi = [x[i] for i in range(min(k, n - 1), max(k - d, 0) - 1, -1)]
    both += [v for v in hi if v not in both]
    lo_i, hi_i = 1, k - d - 1
    while lo_i < n or 0 <= hi_i:
        if lo_i < n:
            both.append(x[lo_i])
        if 0 <= hi_i < n:
            both.append(x[hi_i])
        lo_i += 1
        hi_i -= 1
    guesses = window_outputs(inst, strip)
    cands = [("carries + both ends", carries + both),
             ("guess + carries + both ends", guesses + carries + both),
             ("both ends", both)]
    return cands + _generic_candidates(inst, strip, prob)


def _family(inst: IdentityInstance) -> str:
    ident = inst.identity
    if ident.startswith("equiv:"):
        return "equiv"
    if ident.startswith("deg2:"):
        return "deg2"
    return ident


REGISTRY: Dict[Tuple[str, str], Callable] = {}
for _kind in ("array", "diagonal", "wallace"):
    REGISTRY[("comm", _kind)] = _table_candidates
    REGISTRY[("equiv", _kind)] = _table_candidates
for _kind in ("array", "diagonal", "booth", "wallace"):
    REGISTRY[("dist", _kind)] = lambda i, s, p: ([("sweep(x)", _window_sweep(i, s, "x"))]
                                                 + _generic_candidates(i, s, p))
    REGISTRY[("xsq", _kind)] = _xsq_candidates


def candidates(inst: IdentityInstance, strip: StripSpec, prob: StripProblem) -> List[Tuple[str, Scan]]:
    fam = _family(inst)
    kinds = set(inst.kinds)
    kind = inst.kinds[0] if len(kinds) == 1 else ("booth" if "booth" in kinds else inst.kinds[0])
    gen = REGISTRY.get((fam, kind), _generic_candidates)
    if gen is _table_candidates and not prob.twins:
        gen = _generic_candidates
    return gen(inst, strip, prob)


def plan_strip(inst: IdentityInstance, strip: StripSpec, prob: StripProblem,
               schedule: str = "auto") -> Plan:
    """The schedule named ``schedule``, or under ``auto`` the family's own choice.

    In table mode ``auto`` takes the candidate with the smallest static size
    bound; the bound tracks real sizes well there because few wires are
    functionally determined by others.  Elsewhere it overestimates wildly,
    so ``auto`` takes the family's designated scan (the first candidate).
    """
    cands = candidates(inst, strip, prob)
    if schedule == "auto" and not prob.twins:
        cands = cands[:1]
    best: Optional[Plan] = None
    for name, scan in cands:
        if schedule != "auto" and name != schedule:
            continue
        order = closure_order(prob, scan)
        plan = Plan(name, order, cut_profile(prob, order))
        if best is None or plan.log2_bound < best.log2_bound:
            best = plan
    if best is None:
        raise ValueError(f"no schedule named {schedule!r} for this strip")
    return best


def schedule_names(inst: IdentityInstance, strip: StripSpec, prob: StripProblem) -> List[str]:
    return [name for name, _ in candidates(inst, strip, prob)]
