"""Gate encodings and adder circuits over weighted wires.

A *signal* is either a literal (``int``, negation is free) or one of the
constants :data:`ZERO` / :data:`ONE`.  Constants never reach the CNF: every
gate constructor folds them away first, which is how full adders degrade into
half adders and wires.  Every gate that survives folding gets a fresh, named
output variable.

Each gate remembers the column (weight exponent) it sits in and the circuit
it belongs to; strip extraction works purely off that bookkeeping.
"""

from __future__ import annotations

import contextlib
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .cnf import Formula, FormulaBuilder


@dataclass(frozen=True)
class Const:
    value: int

    def __repr__(self):
        return "ONE" if self.value else "ZERO"


ZERO = Const(0)
ONE = Const(1)
Signal = Union[int, Const]

WINDOW = "window"
INTACT = "intact"


def neg(s: Signal) -> Signal:
    if isinstance(s, Const):
        return ONE if s.value == 0 else ZERO
    return -s


def is_const(s: Signal) -> bool:
    return isinstance(s, Const)


def sig_value(s: Signal, values: Dict[int, int]) -> int:
    if isinstance(s, Const):
        return s.value
    v = values[abs(s)]
    return v if s > 0 else 1 - v


@dataclass
class Gate:
    kind: str  # xor, maj, and, or
    out: int
    ins: Tuple[int, ...]
    clauses: Tuple[int, ...]
    column: int
    tag: str

    @property
    def vars(self) -> Tuple[int, ...]:
        return (self.out,) + tuple(abs(l) for l in self.ins)


@dataclass
class AdderGate:
    """One adder: inputs of weight 2^column, sum of weight 2^column, carry 2^(column+1)."""

    inputs: Tuple[Signal, ...]
    sum_out: Signal
    carry_out: Signal
    kind: str  # full, half, wire
    column: int
    tag: str
    gates: Tuple[int, ...] = ()


@dataclass
class CircuitInfo:
    tag: str
    region: str
    role: str = ""
    inputs: Dict[str, List[Signal]] = field(default_factory=dict)
    outputs: List[Signal] = field(default_factory=list)


class Net:
    """Mutable container that accumulates gates while a circuit is built."""

    def __init__(self, builder: Optional[FormulaBuilder] = None):
        self.b = builder or FormulaBuilder()
        self.gates: List[Gate] = []
        self.adders: List[AdderGate] = []
        self.circuits: Dict[str, CircuitInfo] = {}
        self.tag = ""
        self.var_col: Dict[int, int] = {}
        self.var_tag: Dict[int, str] = {}
        # weight exponent of a wire when it differs from its gate column (adder carries)
        self.var_weight: Dict[int, int] = {}
        self.inputs: Dict[str, List[int]] = {}

    @contextlib.contextmanager
    def circuit(self, tag: str, region: str = WINDOW, role: str = ""):
        info = self.circuits.get(tag)
        if info is None:
            info = self.circuits[tag] = CircuitInfo(tag, region, role)
        prev, self.tag = self.tag, tag
        try:
            yield info
        finally:
            self.tag = prev

    def weight(self, v: int) -> int:
        return self.var_weight.get(v, self.var_col[v])

    def region_of(self, tag: str) -> str:
        return self.circuits[tag].region

    # variables

    def input_vector(self, name: str, n: int) -> List[int]:
        vec = [self.new_var(f"{name}_{i}", i) for i in range(n)]
        self.inputs[name] = vec
        return vec

    def new_var(self, name: str, column: int) -> int:
        v = self.b.new_var(name)
        self.var_col[v] = column
        self.var_tag[v] = self.tag
        return v

    def _gate(self, kind: str, name: str, column: int, ins: Sequence[int], clauses) -> int:
        out = self.new_var(name, column)
        idx = [self.b.add_clause(c(out)) for c in clauses]
        self.gates.append(Gate(kind, out, tuple(ins), tuple(idx), column, self.tag))
        return out

    # primitive gates; each folds constants and returns a signal

    def xor(self, ins: Sequence[Signal], name: str, column: int, force: bool = False) -> Signal:
        parity = 0
        lits: Dict[int, int] = {}
        for s in ins:
            if isinstance(s, Const):
                parity ^= s.value
                continue
            v = abs(s)
            if s < 0:
                parity ^= 1
            if v in lits:
                del lits[v]
            else:
                lits[v] = v
        if not lits and not force:
            return ONE if parity else ZERO
        base = sorted(lits)
        if not base:
            return self._gate("const", name, column, (), [lambda o: [o if parity else -o]])
        if parity:
            base[0] = -base[0]
        clauses = []
        for bits in itertools.product((0, 1), repeat=len(base)):
            odd = sum(bits) % 2
            lhs = [(-l if b else l) for l, b in zip(base, bits)]
            # the inputs take the values `bits`; output must equal their xor
            clauses.append(lambda o, lhs=lhs, odd=odd: lhs + [o if odd else -o])
        return self._gate("xor", name, column, base, clauses)

    def and_(self, ins: Sequence[Signal], name: str, column: int) -> Signal:
        lits: List[int] = []
        for s in ins:
            if isinstance(s, Const):
                if s.value == 0:
                    return ZERO
                continue
            if -s in lits:
                return ZERO
            if s not in lits:
                lits.append(s)
        if not lits:
            return ONE
        clauses = [lambda o, l=l: [-o, l] for l in lits]
        clauses.append(lambda o: [o] + [-l for l in lits])
        return self._gate("and", name, column, lits, clauses)

    def or_(self, ins: Sequence[Signal], name: str, column: int) -> Signal:
        lits: List[int] = []
        for s in ins:
            if isinstance(s, Const):
                if s.value == 1:
                    return ONE
                continue
            if -s in lits:
                return ONE
            if s not in lits:
                lits.append(s)
        if not lits:
            return ZERO
        clauses = [lambda o, l=l: [o, -l] for l in lits]
        clauses.append(lambda o: [-o] + list(lits))
        return self._gate("or", name, column, lits, clauses)

    def maj(self, a: Signal, b: Signal, c: Signal, name: str, column: int) -> Signal:
        ins = [a, b, c]
        consts = [s for s in ins if isinstance(s, Const)]
        lits = [s for s in ins if not isinstance(s, Const)]
        if len(consts) == 1:
            if consts[0].value:
                return self.or_(lits, name, column)
            return self.and_(lits, name, column)
        if consts:
            ones = sum(s.value for s in consts)
            if len(consts) == 3:
                return ONE if ones >= 2 else ZERO
            if ones == 2:
                return ONE
            if ones == 0:
                return ZERO
            return self.xor([lits[0]], name, column)  # maj(0, 1, l) = l
        for p, q in itertools.combinations(range(3), 2):
            if lits[p] == lits[q]:
                return self.xor([lits[p]], name, column)
            if lits[p] == -lits[q]:
                return self.xor([lits[3 - p - q]], name, column)
        a, b, c = lits
        clauses = [
            lambda o: [-a, -b, o],
            lambda o: [-a, -c, o],
            lambda o: [-b, -c, o],
            lambda o: [a, b, -o],
            lambda o: [a, c, -o],
            lambda o: [b, c, -o],
        ]
        return self._gate("maj", name, column, lits, clauses)

    def adder(self, inputs: Sequence[Signal], sum_name: str, carry_name: str, column: int) -> AdderGate:
        """Full adder over up to three inputs; missing inputs are ZERO."""
        ins = list(inputs) + [ZERO] * (3 - len(inputs))
        if len(ins) != 3:
            raise ValueError("an adder takes at most three inputs")
        zeros = sum(1 for s in ins if s == ZERO)
        kind = {0: "full", 1: "half"}.get(zeros, "wire")
        start = len(self.gates)
        s = self.xor(ins, sum_name, column)
        c = self.maj(ins[0], ins[1], ins[2], carry_name, column)
        if isinstance(c, int):
            self.var_weight[abs(c)] = column + 1
        gate = AdderGate(tuple(ins), s, c, kind, column, self.tag, tuple(range(start, len(self.gates))))
        self.adders.append(gate)
        return gate

    def build(self, meta=None) -> Formula:
        return self.b.build(meta)


@dataclass
class AdderCircuit:
    x: List[int]
    y: List[int]
    o: List[Signal]
    net: Net
    formula: Formula
    kind: str


def ripple_carry(net: Net, x: Sequence[Signal], y: Sequence[Signal], tag: str,
                 offset: int = 0, top: bool = True) -> List[Signal]:
    """Adds two little-endian signal vectors whose bit 0 has weight ``2^offset``.

    Returns ``max(len)+1`` output signals, or ``max(len)`` when ``top`` is
    false and the final carry is left dangling.
    """
    n = max(len(x), len(y))
    x = list(x) + [ZERO] * (n - len(x))
    y = list(y) + [ZERO] * (n - len(y))
    out: List[Signal] = []
    carry: Signal = ZERO
    for i in range(n):
        a = net.adder([carry, x[i], y[i]], f"o^{tag}_{i}", f"c^{tag}_{i}", offset + i)
        out.append(a.sum_out)
        carry = a.carry_out
    if top:
        out.append(net.xor([carry], f"o^{tag}_{n}", offset + n))
    return out


def _xor_chain(net: Net, terms: List[Signal], name: str, column: int) -> Signal:
    """XOR of many terms as a chain of XOR3 gates (clause width stays at most 4)."""
    terms = [t for t in terms if t != ZERO]
    k = 0
    while len(terms) > 3:
        acc = net.xor(terms[:3], f"{name}.{k}", column)
        terms = [acc] + terms[3:]
        k += 1
    return net.xor(terms, name, column)


def _carry_term(net: Net, pgs, j: int, cin: Signal, name: str, column: int) -> Signal:
    """c_j = g_{j-1} ^ p_{j-1} g_{j-2} ^ ... ^ p_{j-1}..p_0 cin, with one aux per monomial.

    Monomials are built as a chain of binary ANDs so products of propagate
    signals are shared between terms.
    """
    terms: List[Signal] = []
    prod: Signal = ONE
    for i in range(j - 1, -1, -1):
        p, g = pgs[i]
        if prod == ONE:
            terms.append(g)
        else:
            terms.append(net.and_([prod, g], f"{name}.m{i}", column))
        prod = p if prod == ONE else net.and_([prod, p], f"{name}.p{i}", column)
        if prod == ZERO:
            break
    else:
        terms.append(cin if prod == ONE else net.and_([prod, cin], f"{name}.mc", column))
    return _xor_chain(net, terms, name, column)


def carry_lookahead(net: Net, x: Sequence[Signal], y: Sequence[Signal], tag: str) -> List[Signal]:
    """Recursive 4-ary carry-lookahead adder; returns ``max(len)+1`` output signals."""
    n = max(len(x), len(y))
    size = 1
    while size < n:
        size *= 4
    size = max(size, 4)
    xs = list(x) + [ZERO] * (size - len(x))
    ys = list(y) + [ZERO] * (size - len(y))
    layers = [[
        (net.xor([xs[i], ys[i]], f"p^{tag}_{{0,{i}}}", i),
         net.and_([xs[i], ys[i]], f"g^{tag}_{{0,{i}}}", i))
        for i in range(size)
    ]]
    while len(layers[-1]) > 1:
        prev = layers[-1]
        lvl = len(layers)
        width = 4 ** lvl
        nxt = []
        for b in range(len(prev) // 4):
            block = prev[4 * b: 4 * b + 4]
            col = b * width
            big_p = net.and_([p for p, _ in block], f"p^{tag}_{{{lvl},{b}}}", col)
            big_g = _carry_term(net, block, 4, ZERO, f"g^{tag}_{{{lvl},{b}}}", col)
            nxt.append((big_p, big_g))
        layers.append(nxt)

    carries: Dict[int, Signal] = {}

    def distribute(lvl: int, idx: int, cin: Signal):
        if lvl == 0:
            carries[idx] = cin
            return
        span = 4 ** (lvl - 1)
        block = layers[lvl - 1][4 * idx: 4 * idx + 4]
        for j in range(4):
            pos = (4 * idx + j) * span
            cj = cin if j == 0 else _carry_term(net, block, j, cin, f"c^{tag}_{{{lvl},{pos}}}", pos)
            distribute(lvl - 1, 4 * idx + j, cj)

    top = len(layers) - 1
    distribute(top, 0, ZERO)
    p_top, g_top = layers[top][0]
    if n == size:
        carries[size] = _carry_term(net, [(p_top, g_top)], 1, ZERO, f"c^{tag}_{{top}}", size)
    out = [net.xor([carries[i], xs[i], ys[i]], f"o^{tag}_{i}", i) for i in range(n)]
    out.append(net.xor([carries[n]], f"o^{tag}_{n}", n))
    return out


def _standalone(kind: str, n: int) -> AdderCircuit:
    if n < 1:
        raise ValueError("bit-width must be at least 1")
    net = Net()
    with net.circuit("A", WINDOW, "adder"):
        x = net.input_vector("x", n)
        y = net.input_vector("y", n)
        fn = ripple_carry if kind == "rca" else carry_lookahead
        o = fn(net, x, y, "A")
    net.circuits["A"].outputs = o
    return AdderCircuit(x, y, o, net, net.build({"circuit": kind, "n": str(n)}), kind)


def build_ripple_carry(n: int) -> AdderCircuit:
    return _standalone("rca", n)


def build_cla(n: int) -> AdderCircuit:
    return _standalone("cla", n)
