"""Unsatisfiable instances L ∪ R ∪ E for ring identities and multiplier equivalence."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .circuits import INTACT, WINDOW, ZERO, ONE, Net, Signal, ripple_carry
from .cnf import Formula
from .multipliers import KINDS, MultiplierCircuit, multiply
from .oracle import FAULT_MODES, inject_fault

NAMED = {
    "comm": "x*y=y*x",
    "dist": "x*(y+z)=x*y+x*z",
    "xsq": "x*(x+1)=x*x+x",
}


class OutOfScope(ValueError):
    pass


# expressions


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str  # '+' or '*'
    left: "Expr"
    right: "Expr"


Expr = Union[Var, One, BinOp]

_TOKEN = re.compile(r"\s*(?:([a-z])|(1)|([+*()]))")


def parse_expr(text: str) -> Expr:
    """Parses sums and products of single-letter vectors and the constant 1."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected character at {pos} in {text!r}")
        tokens.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    tokens.append(None)
    i = 0

    def peek():
        return tokens[i]

    def take(expect=None):
        nonlocal i
        tok = tokens[i]
        if expect is not None and tok != expect:
            raise ValueError(f"expected {expect!r}, got {tok!r} in {text!r}")
        i += 1
        return tok

    def atom():
        tok = take()
        if tok == "(":
            e = sum_()
            take(")")
            return e
        if tok == "1":
            return One()
        if tok is not None and tok.isalpha():
            return Var(tok)
        raise ValueError(f"unexpected token {tok!r} in {text!r}")

    def prod():
        e = atom()
        while peek() == "*":
            take()
            e = BinOp("*", e, atom())
        return e

    def sum_():
        e = prod()
        while peek() == "+":
            take()
            e = BinOp("+", e, prod())
        return e

    e = sum_()
    if peek() is not None:
        raise ValueError(f"trailing input {peek()!r} in {text!r}")
    return e


def expr_str(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, One):
        return "1"
    l, r = expr_str(e.left), expr_str(e.right)
    if e.op == "*":
        if isinstance(e.left, BinOp) and e.left.op == "+":
            l = f"({l})"
        if isinstance(e.right, BinOp):
            r = f"({r})"
    elif isinstance(e.right, BinOp) and e.right.op == "+":
        r = f"({r})"
    return f"{l}{e.op}{r}"


Poly = Dict[Tuple[str, ...], int]


def expand(e: Expr) -> Poly:
    if isinstance(e, Var):
        return {(e.name,): 1}
    if isinstance(e, One):
        return {(): 1}
    a, b = expand(e.left), expand(e.right)
    out: Poly = {}
    if e.op == "+":
        for p in (a, b):
            for mono, c in p.items():
                out[mono] = out.get(mono, 0) + c
    else:
        for ma, ca in a.items():
            for mb, cb in b.items():
                mono = tuple(sorted(ma + mb))
                out[mono] = out.get(mono, 0) + ca * cb
    return {m: c for m, c in out.items() if c}


def variables(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, One):
        return set()
    return variables(e.left) | variables(e.right)


def degree(e: Expr) -> int:
    return max((len(m) for m in expand(e)), default=0)


def parse_identity(text: str) -> Tuple[Expr, Expr]:
    if text.count("=") != 1:
        raise ValueError(f"identity needs exactly one '=': {text!r}")
    lhs, rhs = text.split("=")
    left, right = parse_expr(lhs), parse_expr(rhs)
    d = max(degree(left), degree(right))
    if d > 2:
        raise OutOfScope(f"degree {d} identity {text!r} is out of scope (associativity and other "
                         "degree-3 identities have no known short proofs)")
    if variables(left) != variables(right):
        raise ValueError(f"sides use different variables: {sorted(variables(left))} vs {sorted(variables(right))}")
    if expand(left) != expand(right):
        raise ValueError(f"{text!r} is not a ring identity")
    return left, right


# instances


@dataclass
class IdentityInstance:
    identity: str
    kind: str
    n: int
    formula: Formula
    net: Net
    inputs: Dict[str, List[int]]
    out_left: List[Signal]
    out_right: List[Signal]
    e: List[int]
    wide: int
    multipliers: List[MultiplierCircuit] = field(default_factory=list)
    meta: Dict[str, str] = field(default_factory=dict)

    @property
    def width(self) -> int:
        return len(self.e)

    @property
    def kinds(self) -> Tuple[str, str]:
        if self.identity.startswith("equiv:"):
            a, b = self.identity[6:].split(",")
            return a, b
        return self.kind, self.kind


def _bit_bound(e: Expr, n: int) -> int:
    """Bits needed for the value of ``e`` over ``n``-bit inputs."""
    if isinstance(e, Var):
        return n
    if isinstance(e, One):
        return 1
    a, b = _bit_bound(e.left, n), _bit_bound(e.right, n)
    return a + b if e.op == "*" else max(a, b) + 1


class _SideBuilder:
    def __init__(self, net: Net, kind: str, side: str, inputs, mults, width: Optional[int] = None):
        self.net, self.kind, self.side, self.inputs, self.mults = net, kind, side, inputs, mults
        self.width = width  # every sum on the side is taken modulo 2^width
        self.count = 0

    def build(self, e: Expr, tag: Optional[str] = None, feeds_mult: bool = False) -> List[Signal]:
        if isinstance(e, Var):
            return list(self.inputs[e.name])
        if isinstance(e, One):
            return [ONE]
        if tag is None:
            tag = f"{self.side}.{self.count}"
            self.count += 1
        if e.op == "*":
            a = self.build(e.left, feeds_mult=True)
            b = self.build(e.right, feeds_mult=True)
            m = multiply(self.net, self.kind, a, b, tag, self.width)
            self.mults.append(m)
            return m.o if self.width is None else m.o[:self.width]
        a = self.build(e.left)
        b = self.build(e.right)
        region = INTACT if feeds_mult else WINDOW
        with self.net.circuit(tag, region, "adder") as info:
            info.inputs = {"a": a, "b": b}
            full = self.width is None or max(len(a), len(b)) < self.width
            out = ripple_carry(self.net, a, b, tag, top=full)
        self.net.circuits[tag].outputs = out
        return out


def _finish(net: Net, identity: str, kind: str, n: int, oL, oR, inputs, mults, fault=None) -> IdentityInstance:
    m = max(len(oL), len(oR))
    oL = list(oL) + [ZERO] * (m - len(oL))
    oR = list(oR) + [ZERO] * (m - len(oR))
    with net.circuit("E", WINDOW, "inequality"):
        e = [net.xor([oL[i], oR[i]], f"e_{i}", i, force=True) for i in range(m)]
        wide = net.b.add_clause(e)
    meta = {"identity": identity, "mult": kind, "bits": str(n), "width": str(m), "extend": "zero"}
    formula = net.build(meta)
    if fault:
        tag, idx, mode = parse_fault(fault)
        adders = [i for i, a in enumerate(net.adders) if a.tag == tag]
        if idx >= len(adders):
            raise ValueError(f"circuit {tag} has only {len(adders)} adders")
        formula, net = inject_fault(formula, net, adders[idx], mode)
        meta["fault"] = fault
        formula = formula.with_clauses(formula.clauses, meta)
        wide = formula.clauses.index(tuple(sorted(e)))
    return IdentityInstance(identity, kind, n, formula, net, inputs, oL, oR, e, wide, mults, meta)


def parse_fault(spec: str) -> Tuple[str, int, str]:
    try:
        tag, idx, mode = spec.split(":")
        idx = int(idx)
    except ValueError:
        raise ValueError(f"fault must look like <circuit>:<adder index>:<mode>, got {spec!r}") from None
    if mode not in FAULT_MODES:
        raise ValueError(f"unknown fault mode {mode!r}")
    return tag, idx, mode


def build_identity(identity: str, kind: str, n: int, fault: Optional[str] = None) -> IdentityInstance:
    """``identity`` is a named identity (comm, dist, xsq) or an explicit ``lhs=rhs``."""
    if kind not in KINDS:
        raise ValueError(f"unknown multiplier kind {kind!r}")
    if n < 1:
        raise ValueError("bit-width must be at least 1")
    text = NAMED.get(identity, identity)
    left, right = parse_identity(text)
    net = Net()
    inputs = {}
    for name in sorted(variables(left)):
        inputs[name] = net.input_vector(name, n)
    mults: List[MultiplierCircuit] = []
    width = max(_bit_bound(left, n), _bit_bound(right, n))
    oL = _SideBuilder(net, kind, "L", inputs, mults, width).build(left, "L")
    oR = _SideBuilder(net, kind, "R", inputs, mults, width).build(right, "R")
    name = identity if identity in NAMED else f"deg2:{expr_str(left)}={expr_str(right)}"
    return _finish(net, name, kind, n, oL, oR, inputs, mults, fault)


def build_equivalence(kind_a: str, kind_b: str, n: int, fault: Optional[str] = None) -> IdentityInstance:
    for k in (kind_a, kind_b):
        if k not in KINDS:
            raise ValueError(f"unknown multiplier kind {k!r}")
    net = Net()
    x = net.input_vector("x", n)
    y = net.input_vector("y", n)
    mL = multiply(net, kind_a, x, y, "L")
    mR = multiply(net, kind_b, x, y, "R")
    inst = _finish(net, f"equiv:{kind_a},{kind_b}", kind_a, n, mL.o, mR.o, {"x": x, "y": y}, [mL, mR], fault)
    inst.meta["mult"] = f"{kind_a},{kind_b}"
    inst.formula = inst.formula.with_clauses(inst.formula.clauses, inst.meta)
    return inst


def build_instance(identity: str, kind: str, n: int, fault: Optional[str] = None) -> IdentityInstance:
    """Builds an instance from its command-line spelling: comm | dist | xsq | deg2:<lhs>=<rhs> | equiv:<a>,<b>."""
    if identity.startswith("equiv:"):
        a, b = identity[len("equiv:"):].split(",")
        return build_equivalence(a.strip(), b.strip(), n, fault)
    if identity.startswith("deg2:"):
        return build_identity(identity[len("deg2:"):], kind, n, fault)
    if identity not in NAMED:
        raise ValueError(f"unknown identity {identity!r}")
    return build_identity(identity, kind, n, fault)


def rebuild(formula: Formula) -> IdentityInstance:
    """Regenerates the instance described by a formula's metadata and checks it matches."""
    meta = formula.meta
    try:
        identity, kind, n = meta["identity"], meta["mult"], int(meta["bits"])
    except KeyError as exc:
        raise ValueError(f"formula lacks instance metadata ({exc.args[0]})") from None
    if identity.startswith("equiv:"):
        a, b = identity[6:].split(",")
        inst = build_equivalence(a, b, n, meta.get("fault"))
    else:
        inst = build_identity(identity[5:] if identity.startswith("deg2:") else identity, kind, n, meta.get("fault"))
    if inst.formula.clauses != formula.clauses or inst.formula.num_vars != formula.num_vars:
        raise ValueError("formula does not match the instance its metadata describes")
    return inst
