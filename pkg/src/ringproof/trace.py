"""Resolution traces in a TraceCheck-style text format.

Each line is ``<id> <lit>* 0 <ante>* 0``.  Input lines have no antecedents
(so they end in ``0 0``); derived lines name exactly two earlier ids and the
pivot is recomputed as the unique variable on which their clauses clash.
Ids are strictly increasing.  Literal order is preserved as written, so
reading and re-writing a trace is byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Iterator, List, Optional, Tuple, Union


class TraceError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass
class TraceLine:
    id: int
    clause: Tuple[int, ...]
    ante: Tuple[int, ...] = ()  # () for input lines
    pivot: Optional[int] = None  # informational; the checker recomputes it

    @property
    def is_input(self) -> bool:
        return not self.ante


@dataclass
class Refutation:
    lines: List[TraceLine]

    def __len__(self) -> int:
        return len(self.lines)

    @property
    def size(self) -> int:
        return len(self.lines)

    @property
    def inputs(self) -> List[TraceLine]:
        return [l for l in self.lines if l.is_input]


ProofTrace = Refutation


def format_line(line: TraceLine) -> str:
    parts = [str(line.id)]
    parts.extend(str(l) for l in line.clause)
    parts.append("0")
    parts.extend(str(a) for a in line.ante)
    parts.append("0")
    return " ".join(parts)


def write_trace(ref: Refutation, out: IO[str]) -> None:
    for line in ref.lines:
        out.write(format_line(line))
        out.write("\n")


def dumps_trace(ref: Refutation) -> str:
    return "".join(format_line(l) + "\n" for l in ref.lines)


def iter_trace(lines: Iterable[str]) -> Iterator[Tuple[int, TraceLine]]:
    """Yields ``(file line number, parsed line)``; blank lines and ``c`` comments are skipped."""
    prev = 0
    for lineno, text in enumerate(lines, 1):
        s = text.strip()
        if not s or s.startswith("c"):
            continue
        try:
            nums = [int(tok) for tok in s.split()]
        except ValueError:
            raise TraceError(lineno, "non-integer token") from None
        if len(nums) < 3:
            raise TraceError(lineno, "too few fields")
        lid = nums[0]
        if lid <= prev:
            raise TraceError(lineno, f"id {lid} not greater than previous id {prev}")
        prev = lid
        try:
            z = nums.index(0, 1)
        except ValueError:
            raise TraceError(lineno, "clause is not terminated by 0") from None
        clause = tuple(nums[1:z])
        rest = nums[z + 1:]
        if not rest or rest[-1] != 0:
            raise TraceError(lineno, "antecedent list is not terminated by 0")
        ante = tuple(rest[:-1])
        if 0 in ante:
            raise TraceError(lineno, "stray 0 in antecedent list")
        if len(ante) not in (0, 2):
            raise TraceError(lineno, f"expected 0 or 2 antecedents, got {len(ante)}")
        yield lineno, TraceLine(lid, clause, ante)


def read_trace(src: Union[str, IO[str]]) -> Refutation:
    text = src if isinstance(src, str) else src.read()
    return Refutation([l for _, l in iter_trace(text.splitlines())])


def load_trace(path: str) -> Refutation:
    with open(path) as fh:
        return Refutation([l for _, l in iter_trace(fh)])


def save_trace(ref: Refutation, path: str) -> None:
    with open(path, "w") as fh:
        write_trace(ref, fh)
