"""Critical strips and the counting certificate that makes each one unsatisfiable.

Strip ``k`` keeps the constraints of windowed circuits whose column lies in
``[k - delta, k]``, every intact circuit (adders feeding multipliers, Booth
recoding, the Wallace final adder) and the inequality definitions ``e_i`` for
in-window outputs.  Carries that crossed the lower boundary become free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .circuits import INTACT, ZERO
from .cnf import Formula, canonical_clause
from .identities import IdentityInstance, expand, parse_identity


def clog2(x: float) -> int:
    """Ceiling of log2, clamped to 0 for arguments at most 1."""
    if x <= 1:
        return 0
    return math.ceil(math.log2(x) - 1e-12)


def _loglog(n: int) -> int:
    return clog2(math.log2(n)) if n > 2 else 0


def _comm_width(kind: str, n: int) -> int:
    if kind == "wallace":
        return clog2(2 * n) + _loglog(n)
    if kind == "booth":
        return clog2(n) + 2
    return clog2(n)


def strip_width(identity: str, kind: str, n: int) -> int:
    """Window width delta for a named identity (or ``deg2:``/``equiv:`` spelling)."""
    if identity.startswith("equiv:"):
        a, b = identity[len("equiv:"):].split(",")
        return max(_comm_width(a, n), _comm_width(b, n))
    if identity == "comm":
        return _comm_width(kind, n)
    extra = 2 if kind == "booth" else 0
    if identity == "dist":
        if kind == "wallace":
            return clog2(4 * n / 3) + _loglog(n)
        return clog2(2 * n) + extra
    if identity == "xsq":
        base = clog2(2 * n - 1)
        return base + (_loglog(n) if kind == "wallace" else extra)
    text = identity[len("deg2:"):] if identity.startswith("deg2:") else identity
    left, right = parse_identity(text)
    terms = max(len(expand(left)), len(expand(right)))
    base = clog2(terms * n)
    return base + (_loglog(n) if kind == "wallace" else extra)


def instance_width(inst: IdentityInstance) -> int:
    return strip_width(inst.identity, inst.kind, inst.n)


@dataclass
class StripSpec:
    k: int
    delta: int
    lo: int
    hi: int
    clauses: List[int]  # indices into the instance formula
    prefix: Dict[int, int]  # e-variable assignment e_0..e_{k-1}=0, e_k=1
    free: List[Tuple[int, int]]  # (var, weight exponent) of unconstrained non-input wires
    gates: List[int]
    formula: Formula

    @property
    def window(self) -> Tuple[int, int]:
        return self.lo, self.hi


def side_of(tag: str) -> str:
    return tag.split(".")[0]


def extract_strip(inst: IdentityInstance, k: int, delta: Optional[int] = None) -> StripSpec:
    if not 0 <= k < inst.width:
        raise ValueError(f"k={k} outside [0, {inst.width - 1}]")
    if delta is None:
        delta = instance_width(inst)
    lo, hi = max(0, k - delta), k
    net = inst.net
    keep_gates = []
    for gi, g in enumerate(net.gates):
        if net.region_of(g.tag) == INTACT or lo <= g.column <= hi:
            keep_gates.append(gi)
    clause_idx = sorted({ci for gi in keep_gates for ci in net.gates[gi].clauses})
    prefix = {inst.e[i]: int(i == k) for i in range(k + 1)}
    outs = {net.gates[gi].out for gi in keep_gates}
    inputs = {v for vec in inst.inputs.values() for v in vec}
    evars = set(inst.e)
    seen = set()
    free = []
    for ci in clause_idx:
        for lit in inst.formula.clauses[ci]:
            v = abs(lit)
            if v in seen or v in outs or v in inputs or v in evars:
                continue
            seen.add(v)
            free.append((v, net.weight(v)))
    free.sort(key=lambda p: (p[1], p[0]))
    base = [inst.formula.clauses[ci] for ci in clause_idx]
    have = set(base)
    units = [canonical_clause([e if val else -e]) for e, val in sorted(prefix.items())]
    body = base + [u for u in units if u not in have]
    meta = dict(inst.formula.meta)
    meta.update({"strip": str(k), "delta": str(delta)})
    formula = Formula(inst.formula.num_vars, tuple(body), dict(inst.formula.var_names), meta)
    return StripSpec(k, delta, lo, hi, clause_idx, prefix, free, keep_gates, formula)


# counting certificate


class CertificateFailure(AssertionError):
    pass


@dataclass
class WeightCertificate:
    """Counting certificate for one strip.

    ``free_max[side]`` is the total weight of that side's free wires at or
    below column ``k``; the strip is certified when each side stays below
    ``2^k``.  ``bounds`` holds joint bounds on the difference of the two
    sides' window sums; when one of them fits strictly inside ``(-2^k, 2^k)``
    the certificate is a complete unsatisfiability argument (``rigorous``).
    """

    k: int
    target: int
    inventory: List[Tuple[str, int]]  # (wire name, weight exponent)
    free_max: Dict[str, int]
    low_max: Dict[str, int]
    matched: bool
    bounds: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return max(self.free_max.values())

    @property
    def ok(self) -> bool:
        return self.total < self.target

    @property
    def joint(self) -> int:
        """Smallest proven bound on the difference of the two sides."""
        return min(max(-a, b) for a, b in self.bounds.values())

    @property
    def rigorous(self) -> bool:
        return self.joint < self.target


def _low_sources(inst: IdentityInstance, side: str, lo: int) -> int:
    """Largest possible weighted value of one side's summands below column ``lo``."""
    total = 0
    produced = set()
    for m in inst.multipliers:
        if side_of(m.tag) != side:
            continue
        produced.update(s for s in m.o if s != ZERO)
        total += sum(1 << col for col, s in m.sources if col < lo and s != ZERO)
    adders = [info for tag, info in inst.net.circuits.items()
              if side_of(tag) == side and info.role == "adder" and info.region != INTACT]
    for info in adders:
        produced.update(s for s in info.outputs if s != ZERO)
    for info in adders:
        for vec in info.inputs.values():
            total += sum(1 << col for col, s in enumerate(vec)
                         if col < lo and s != ZERO and s not in produced)
    return total


def _matched(inst: IdentityInstance) -> bool:
    """Both sides are single non-Booth multipliers over the same tableau cells."""
    mults = inst.multipliers
    if len(mults) != 2 or any(m.kind == "booth" for m in mults):
        return False
    if any(side_of(t) in ("L", "R") and info.role == "adder" for t, info in inst.net.circuits.items()):
        return False
    cells = []
    for m in mults:
        if not all(isinstance(s, int) for s in m.x + m.y):
            return False
        cells.append(sorted((col, tuple(sorted({abs(m.x[i]), abs(m.y[j])})))
                            for (i, j) in ((i, j) for i in range(m.na) for j in range(m.nb))
                            for col in (i + j,)))
    return cells[0] == cells[1]


def weight_certificate(inst: IdentityInstance, strip: StripSpec, strict: bool = True) -> WeightCertificate:
    """Bounds how far the two strips' window sums can drift from the true products.

    Each side's window bits are the bits of ``T_W + F`` where ``T_W`` is the
    exact weighted sum of in-window summands and ``F`` the free wires.  The
    true outputs are the bits of ``T_W + F*`` with the true values ``F*``.
    Output bit ``k`` can only be the lowest disagreement if the difference
    of the two sides is congruent to ``2^k`` modulo ``2^(k+1)``; every bound
    below keeps that difference strictly inside ``(-2^k, 2^k)``.
    """
    k, lo = strip.k, strip.lo
    net = inst.net
    names = inst.formula.var_names
    free_max = {"L": 0, "R": 0}
    inventory = []
    for v, w in strip.free:
        if w > k:
            continue  # multiples of 2^(k+1) cannot reach bit k
        side = side_of(net.var_tag[v])
        free_max[side] = free_max.get(side, 0) + (1 << w)
        inventory.append((names.get(v, str(v)), w))
    low_max = {s: _low_sources(inst, s, lo) for s in ("L", "R")}
    fl, fr = free_max["L"], free_max["R"]
    bounds = {
        "drift": (-(fl + fr), fl + fr),
        "low": (-(low_max["L"] + fr), fl + low_max["R"]),
    }
    matched = _matched(inst)
    if matched:
        bounds["matched"] = (-fr, fl)
    cert = WeightCertificate(k, 1 << k, inventory, free_max, low_max, matched, bounds)
    if strict and not cert.ok:
        raise CertificateFailure(f"strip k={k}: free weight {cert.total} >= 2^{k}")
    return cert
