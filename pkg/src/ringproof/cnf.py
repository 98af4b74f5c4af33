"""Variables, literals, clauses and CNF formulas, plus DIMACS I/O.

Literals are signed nonzero integers in DIMACS style: ``v`` is the positive
literal of variable ``v`` and ``-v`` its negation.  Clauses are tuples of
literals sorted by variable.  A :class:`Formula` is immutable once built;
use :class:`FormulaBuilder` to construct one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Clause = Tuple[int, ...]
Assignment = Dict[int, int]

SATISFIED = "satisfied"
FALSIFIED = "falsified"
UNRESOLVED = "unresolved"


class DimacsError(ValueError):
    """Malformed DIMACS input; ``line`` is 1-based."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


def canonical_clause(lits: Iterable[int]) -> Clause:
    """Sort by variable and drop repeated literals; raises on tautologies."""
    seen = {}
    for lit in lits:
        if lit == 0:
            raise ValueError("literal 0 is reserved")
        prev = seen.get(abs(lit))
        if prev is not None and prev != lit:
            raise ValueError(f"tautological clause on variable {abs(lit)}")
        seen[abs(lit)] = lit
    return tuple(seen[v] for v in sorted(seen))


@dataclass(frozen=True)
class Unit:
    """Result of :func:`clause_status` when exactly one literal is open."""

    literal: int


def clause_status(clause: Sequence[int], assignment: Mapping[int, int]):
    """Classify ``clause`` under a partial assignment.

    Returns ``SATISFIED``, ``FALSIFIED``, ``UNRESOLVED`` or a :class:`Unit`.
    """
    open_lits = []
    for lit in clause:
        val = assignment.get(abs(lit))
        if val is None:
            open_lits.append(lit)
        elif (val == 1) == (lit > 0):
            return SATISFIED
    if not open_lits:
        return FALSIFIED
    if len(open_lits) == 1:
        return Unit(open_lits[0])
    return UNRESOLVED


def falsifies(assignment: Mapping[int, int], clause: Sequence[int]) -> bool:
    return all(assignment.get(abs(l)) == (0 if l > 0 else 1) for l in clause)


@dataclass(frozen=True)
class Formula:
    num_vars: int
    clauses: Tuple[Clause, ...]
    var_names: Mapping[int, str] = field(default_factory=dict)
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for idx, clause in enumerate(self.clauses):
            for lit in clause:
                if abs(lit) > self.num_vars:
                    raise ValueError(f"clause {idx}: literal {lit} exceeds num_vars={self.num_vars}")

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.clauses == other.clauses
            and dict(self.var_names) == dict(other.var_names)
            and dict(self.meta) == dict(other.meta)
        )

    def __hash__(self):
        return hash((self.num_vars, self.clauses))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def name_to_var(self) -> Dict[str, int]:
        return {name: v for v, name in self.var_names.items()}

    def clause_index(self) -> Dict[Clause, int]:
        index: Dict[Clause, int] = {}
        for i, c in enumerate(self.clauses):
            index.setdefault(c, i)
        return index

    def with_clauses(self, clauses: Sequence[Sequence[int]], meta: Optional[Mapping[str, str]] = None) -> "Formula":
        return Formula(
            self.num_vars,
            tuple(canonical_clause(c) for c in clauses),
            dict(self.var_names),
            dict(self.meta if meta is None else meta),
        )


class FormulaBuilder:
    """Sequential variable allocation with a name registry."""

    def __init__(self):
        self.num_vars = 0
        self.clauses: List[Clause] = []
        self.var_names: Dict[int, str] = {}
        self._by_name: Dict[str, int] = {}
        self._seen: set = set()

    def new_var(self, name: str) -> int:
        if name in self._by_name:
            raise ValueError(f"duplicate variable name {name!r}")
        self.num_vars += 1
        self.var_names[self.num_vars] = name
        self._by_name[name] = self.num_vars
        return self.num_vars

    def var(self, name: str) -> int:
        return self._by_name[name]

    def add_clause(self, lits: Iterable[int]) -> int:
        clause = canonical_clause(lits)
        if not clause:
            raise ValueError("empty clause")
        if clause in self._seen:
            raise ValueError(f"duplicate clause {clause}")
        self._seen.add(clause)
        self.clauses.append(clause)
        return len(self.clauses) - 1

    def build(self, meta: Optional[Mapping[str, str]] = None) -> Formula:
        return Formula(self.num_vars, tuple(self.clauses), dict(self.var_names), dict(meta or {}))


def write_dimacs(f: Formula, names: bool = True) -> str:
    out = []
    for key in sorted(f.meta):
        out.append(f"c meta {key} {f.meta[key]}")
    if names:
        for v in sorted(f.var_names):
            out.append(f"c var {v} {f.var_names[v]}")
    out.append(f"p cnf {f.num_vars} {len(f.clauses)}")
    for clause in f.clauses:
        out.append(" ".join(str(l) for l in clause) + (" 0" if clause else "0"))
    return "\n".join(out) + "\n"


def read_dimacs(text: str) -> Formula:
    num_vars: Optional[int] = None
    expected = 0
    clauses: List[Clause] = []
    names: Dict[int, str] = {}
    meta: Dict[str, str] = {}
    pending: List[int] = []
    pending_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split(None, 3)
            if len(parts) >= 4 and parts[1] == "var":
                try:
                    names[int(parts[2])] = parts[3]
                except ValueError:
                    raise DimacsError(lineno, "bad variable name comment") from None
            elif len(parts) >= 3 and parts[1] == "meta":
                meta[parts[2]] = parts[3] if len(parts) == 4 else ""
            continue
        if line.startswith("p"):
            parts = line.split()
            if num_vars is not None:
                raise DimacsError(lineno, "duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(lineno, "malformed header")
            try:
                num_vars, expected = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(lineno, "malformed header") from None
            if num_vars < 0 or expected < 0:
                raise DimacsError(lineno, "malformed header")
            continue
        if num_vars is None:
            raise DimacsError(lineno, "clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(lineno, f"bad literal {tok!r}") from None
            if lit == 0:
                try:
                    clauses.append(canonical_clause(pending))
                except ValueError as exc:
                    raise DimacsError(lineno, str(exc)) from None
                pending = []
                continue
            if abs(lit) > num_vars:
                raise DimacsError(lineno, f"literal out of range: {lit}")
            if not pending:
                pending_line = lineno
            pending.append(lit)
    if num_vars is None:
        raise DimacsError(0, "missing header")
    if pending:
        raise DimacsError(pending_line, "missing terminator")
    if len(clauses) != expected:
        raise DimacsError(0, f"header declares {expected} clauses, found {len(clauses)}")
    return Formula(num_vars, tuple(clauses), names, meta)


