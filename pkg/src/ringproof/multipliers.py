"""Array, diagonal, Booth radix-4 and Wallace tree multipliers.

All four share the tableau abstraction: ``tableau[(layer, column, row)]`` is
the signal at that position.  Array, diagonal and Booth only populate layer 0.
Multipliers are rectangular (``na`` by ``nb`` bits) so they can consume adder
outputs, and produce ``na + nb`` output signals (Booth can be asked for more).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .circuits import (
    INTACT,
    WINDOW,
    ONE,
    ZERO,
    AdderGate,
    Net,
    Signal,
    carry_lookahead,
    neg,
    ripple_carry,
)
from .cnf import Formula

KINDS = ("array", "diagonal", "booth", "wallace")


@dataclass
class WallaceLayout:
    # columns[l][i] is the ordered subcolumn Col(l, i)
    columns: List[List[List[Signal]]]
    # partitions[l][(i, j)] = (member rows in layer l, sum row, carry row or None) in layer l+1
    partitions: List[Dict[Tuple[int, int], Tuple[Tuple[int, ...], int, Optional[int]]]]
    adders: Dict[Tuple[int, int, int], AdderGate] = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return len(self.columns) - 1

    def counts(self, l: int) -> List[int]:
        return [len(c) for c in self.columns[l]]

    def rows(self, l: int) -> int:
        return max(self.counts(l), default=0)


@dataclass
class MultiplierCircuit:
    kind: str
    na: int
    nb: int
    x: List[Signal]
    y: List[Signal]
    o: List[Signal]
    tag: str
    tableau: Dict[Tuple[int, int, int], Signal]
    grid: Dict[Tuple[int, int], AdderGate] = field(default_factory=dict)
    wallace: Optional[WallaceLayout] = None
    net: Optional[Net] = None
    formula: Optional[Formula] = None
    # (column, signal) summands whose weighted total is the product
    sources: List[Tuple[int, Signal]] = field(default_factory=list)


def _and_tableau(net: Net, x, y, tag: str):
    tab = {}
    for j in range(len(y)):
        for i in range(len(x)):
            tab[(i, j)] = net.and_([x[i], y[j]], f"t^{tag}_{{{i},{j}}}", i + j)
    return tab


def _array(net: Net, x, y, tag: str) -> MultiplierCircuit:
    na, nb = len(x), len(y)
    t = _and_tableau(net, x, y, tag)
    d: Dict[Tuple[int, int], Signal] = {}
    c: Dict[Tuple[int, int], Signal] = {}
    grid = {}
    for j in range(nb):
        for i in range(na + 1):
            a = net.adder(
                [t.get((i, j), ZERO), d.get((i + 1, j - 1), ZERO), c.get((i - 1, j), ZERO)],
                f"d^{tag}_{{{i},{j}}}", f"c^{tag}_{{{i},{j}}}", i + j)
            d[(i, j)], c[(i, j)] = a.sum_out, a.carry_out
            grid[(i, j)] = a
    out = []
    for col in range(na + nb):
        r = min(col, nb - 1)
        out.append(d[(col - r, r)])
    tab = {(0, i + j, j): s for (i, j), s in t.items()}
    return MultiplierCircuit("array", na, nb, list(x), list(y), out, tag, tab, grid)


def _diagonal(net: Net, x, y, tag: str) -> MultiplierCircuit:
    na, nb = len(x), len(y)
    t = _and_tableau(net, x, y, tag)
    d: Dict[Tuple[int, int], Signal] = {}
    c: Dict[Tuple[int, int], Signal] = {}
    grid = {}
    for j in range(nb):
        for i in range(na):
            a = net.adder(
                [t[(i, j)], d.get((i + 1, j - 1), ZERO), c.get((i, j - 1), ZERO)],
                f"d^{tag}_{{{i},{j}}}", f"c^{tag}_{{{i},{j}}}", i + j)
            d[(i, j)], c[(i, j)] = a.sum_out, a.carry_out
            grid[(i, j)] = a
    out = [d[(0, j)] for j in range(nb)]
    top = nb - 1
    upper = [d[(i, top)] for i in range(1, na)]
    carries = [c[(i, top)] for i in range(na)]
    with net.circuit(f"{tag}.f", WINDOW, "final"):
        fin = ripple_carry(net, upper, carries, f"{tag}.f", offset=nb, top=False)
    out.extend(fin[:na])
    tab = {(0, i + j, j): s for (i, j), s in t.items()}
    return MultiplierCircuit("diagonal", na, nb, list(x), list(y), out, tag, tab, grid)


def _booth(net: Net, x, y, tag: str, width: Optional[int] = None) -> MultiplierCircuit:
    # Two's-complement partial products make the accumulation wrap around
    # 2^width in the true circuit.  Inside a wider sum the product must be
    # built at the full width, or a strip could exploit the wrap.
    na, nb = len(x), len(y)
    width = max(width or 0, na + nb)
    digits = nb // 2 + 1

    def ybit(i):
        return y[i] if 0 <= i < nb else ZERO

    def xbit(i):
        return x[i] if 0 <= i < na else ZERO

    bits: List[Tuple[int, Signal]] = []
    tab = {}
    const = 0
    for k in range(digits):
        with net.circuit(f"{tag}.rec", INTACT, "recode"):
            one = net.xor([ybit(2 * k), ybit(2 * k - 1)], f"one^{tag}_{k}", 2 * k)
            hi = net.xor([ybit(2 * k + 1), ybit(2 * k)], f"h^{tag}_{k}", 2 * k)
            two = net.and_([hi, neg(one)], f"two^{tag}_{k}", 2 * k)
        sgn = ybit(2 * k + 1)
        for i in range(na + 1):
            col = 2 * k + i
            a = net.and_([one, xbit(i)], f"a^{tag}_{{{k},{i}}}", col)
            b = net.and_([two, xbit(i - 1)], f"b^{tag}_{{{k},{i}}}", col)
            m = net.or_([a, b], f"m^{tag}_{{{k},{i}}}", col)
            p = net.xor([m, sgn], f"pp^{tag}_{{{k},{i}}}", col)
            tab[(0, col, k)] = p
            bits.append((col, p))
        bits.append((2 * k + na + 1, neg(sgn)))
        bits.append((2 * k, sgn))
        const -= 1 << (na + 1 + 2 * k)
    const %= 1 << width
    bits.extend((i, ONE) for i in range(width) if const >> i & 1)
    rows: List[List[Signal]] = []
    for col, s in bits:
        if col >= width or s == ZERO:
            continue
        for row in rows:
            if row[col] == ZERO:
                row[col] = s
                break
        else:
            row = [ZERO] * width
            row[col] = s
            rows.append(row)
    acc = rows[0] if rows else [ZERO] * width
    for r, row in enumerate(rows[1:], start=1):
        with net.circuit(f"{tag}.acc{r}", WINDOW, "accumulate"):
            acc = ripple_carry(net, acc, row, f"{tag}.acc{r}")[:width]
    out = list(acc)
    sources = [(c, s) for c, s in bits if c < width and s != ZERO]
    return MultiplierCircuit("booth", na, nb, list(x), list(y), out, tag, tab, sources=sources)


def _wallace(net: Net, x, y, tag: str) -> MultiplierCircuit:
    na, nb = len(x), len(y)
    width = na + nb
    t = _and_tableau(net, x, y, tag)
    ncols = width + 1
    cols: List[List[Signal]] = [[] for _ in range(ncols)]
    for col in range(na + nb - 1):
        for j in range(nb):
            if 0 <= col - j < na:
                cols[col].append(t[(col - j, j)])
    columns = [cols]
    partitions = []
    adders = {}
    while max(len(c) for c in columns[-1]) > 2:
        l = len(columns) - 1
        cur = columns[-1]
        ncols = len(cur) + 1
        nxt: List[List[Signal]] = [[] for _ in range(ncols)]
        parts = {}
        groups = max((len(c) + 2) // 3 for c in cur)
        for j in range(groups):
            made = {}
            for i in range(len(cur)):
                members = cur[i][3 * j: 3 * j + 3]
                if not members:
                    continue
                if len(members) == 1:
                    made[i] = (members[0], None, (3 * j,))
                    continue
                a = net.adder(members, f"t^{tag}_{{{l + 1},{i},s{j}}}", f"t^{tag}_{{{l + 1},{i + 1},c{j}}}", i)
                adders[(l, i, j)] = a
                made[i] = (a.sum_out, a.carry_out, tuple(range(3 * j, 3 * j + len(members))))
            sum_row = {}
            for i, (s, _, _) in made.items():
                sum_row[i] = len(nxt[i])
                nxt[i].append(s)
            for i, (_, c, rows) in made.items():
                crow = None
                if c is not None and c != ZERO:
                    crow = len(nxt[i + 1])
                    nxt[i + 1].append(c)
                parts[(i, j)] = (rows, sum_row[i], crow)
        partitions.append(parts)
        columns.append(nxt)
    last = columns[-1]
    # normally 2n-1 bits, but carries may reach column 2n-1 of the last layer
    span = max(i for i, c in enumerate(last) if c) + 1 if any(last) else 1
    span = min(max(span, width - 1), width)
    a = [c[0] if len(c) > 0 else ZERO for c in last[:span]]
    b = [c[1] if len(c) > 1 else ZERO for c in last[:span]]
    with net.circuit(f"{tag}.cla", INTACT, "final"):
        out = carry_lookahead(net, a, b, f"{tag}.cla")
    out = (out + [ZERO] * width)[:width]
    tab = {}
    for l, layer in enumerate(columns):
        for i, col in enumerate(layer):
            for j, s in enumerate(col):
                tab[(l, i, j)] = s
    layout = WallaceLayout(columns, partitions, adders)
    return MultiplierCircuit("wallace", na, nb, list(x), list(y), out, tag, tab, wallace=layout)


_BUILDERS = {"array": _array, "diagonal": _diagonal, "booth": _booth, "wallace": _wallace}


def multiply(net: Net, kind: str, x: Sequence[Signal], y: Sequence[Signal], tag: str,
             width: Optional[int] = None) -> MultiplierCircuit:
    """Adds a multiplier computing ``x * y`` to ``net`` under circuit tag ``tag``.

    ``width`` asks for that many output bits where the multiplier can use
    them (Booth); the others always produce ``len(x) + len(y)`` bits.
    """
    if kind not in _BUILDERS:
        raise ValueError(f"unknown multiplier kind {kind!r}")
    if not x or not y:
        raise ValueError("operands must have at least one bit")
    with net.circuit(tag, WINDOW, "multiplier"):
        if kind == "booth":
            m = _booth(net, list(x), list(y), tag, width)
        else:
            m = _BUILDERS[kind](net, list(x), list(y), tag)
    if not m.sources:
        m.sources = [(col, s) for (l, col, _), s in sorted(m.tableau.items()) if l == 0 and s != ZERO]
    net.circuits[tag].outputs = m.o
    return m


def build_multiplier(kind: str, n: int, nb: Optional[int] = None) -> MultiplierCircuit:
    if n < 1 or (nb is not None and nb < 1):
        raise ValueError(f"unsupported bit-width for {kind}: {n}")
    net = Net()
    x = net.input_vector("x", n)
    y = net.input_vector("y", n if nb is None else nb)
    m = multiply(net, kind, x, y, "M")
    m.net = net
    m.formula = net.build({"circuit": kind, "n": str(n)})
    return m


# Wallace structural validation


@dataclass
class LayerReport:
    layer: int
    counts: List[int]
    smooth: bool
    singly_peaked: bool
    pyramid: Optional[bool]
    row_friendly: Optional[bool]
    violation: str = ""


@dataclass
class StructureReport:
    layers: List[LayerReport]

    def _all(self, attr):
        return all(getattr(r, attr) is not False for r in self.layers)

    @property
    def smooth(self) -> bool:
        return self._all("smooth")

    @property
    def singly_peaked(self) -> bool:
        return self._all("singly_peaked")

    @property
    def pyramid(self) -> bool:
        return self._all("pyramid")

    @property
    def row_friendly(self) -> bool:
        return self._all("row_friendly")

    @property
    def first_violation(self) -> str:
        for r in self.layers:
            if r.violation:
                return f"layer {r.layer}: {r.violation}"
        return ""


def is_smooth(counts: Sequence[int]) -> Tuple[bool, str]:
    padded = [0] + list(counts) + [0]
    for i in range(1, len(padded)):
        if abs(padded[i] - padded[i - 1]) > 2:
            return False, f"columns {i - 2},{i - 1} differ by {abs(padded[i] - padded[i - 1])}"
    return True, ""


def is_singly_peaked(counts: Sequence[int]) -> Tuple[bool, str]:
    falling = False
    for i in range(1, len(counts)):
        if counts[i] < counts[i - 1]:
            falling = True
        elif counts[i] > counts[i - 1] and falling:
            return False, f"second rise at column {i}"
    return True, ""


def wallace_partition_layer(layout: WallaceLayout, l: int):
    """Partitions of layer ``l``: ``{(column, adder_row): member rows}``."""
    if l >= len(layout.partitions):
        raise ValueError(f"layer {l} has no adders")
    return {key: rows for key, (rows, _, _) in layout.partitions[l].items()}


def _pyramid(parts) -> Tuple[bool, str]:
    by_row: Dict[int, List[int]] = {}
    for (i, j) in parts:
        by_row.setdefault(j, []).append(i)
    prev = None
    for j in sorted(by_row):
        cols = sorted(by_row[j])
        if cols != list(range(cols[0], cols[-1] + 1)):
            return False, f"adder row {j} is not contiguous"
        span = (cols[0], cols[-1])
        if prev is not None and not (prev[0] < span[0] and prev[1] > span[1]):
            return False, f"adder row {j} spans {span}, previous {prev}"
        prev = span
    return True, ""


def _row_friendly(parts) -> Tuple[bool, str]:
    for (i, j), (_, srow, crow) in sorted(parts.items()):
        if srow not in (2 * j, 2 * j + 1) or crow not in (None, 2 * j, 2 * j + 1):
            return False, f"adder ({i},{j}) outputs to rows {srow},{crow}"
    return True, ""


def validate_wallace(layout: WallaceLayout) -> StructureReport:
    reports = []
    h = layout.depth
    for l in range(h + 1):
        counts = layout.counts(l)
        sm, why1 = is_smooth(counts)
        sp, why2 = is_singly_peaked(counts)
        py = rf = None
        why3 = why4 = ""
        if l < h:
            py, why3 = _pyramid(layout.partitions[l])
            if l <= h - 2:
                rf, why4 = _row_friendly(layout.partitions[l])
        reasons = [w for w in (why1, why2, why3, why4) if w]
        reports.append(LayerReport(l, counts, sm, sp, py, rf, "; ".join(reasons)))
    return StructureReport(reports)
