"""Read-once branching programs and their correspondence with regular resolution.

A :class:`BranchingProgram` is a DAG stored in flat arrays.  Internal nodes
query a variable and have a 0-successor ``lo`` and a 1-successor ``hi``;
leaves carry a clause that every path reaching them falsifies.  Nodes are
hash-consed, so two structurally identical sub-programs are always merged.
Children always have smaller ids than their parents.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .cnf import Clause, canonical_clause
from .trace import Refutation, TraceLine

LEAF = 0


class BPError(ValueError):
    pass


class BranchingProgram:
    def __init__(self):
        self.var = array("l")
        self.lo = array("q")
        self.hi = array("q")
        self.clause: List[Optional[Clause]] = []
        self.width = array("l")  # label width recorded by the builder, -1 if unknown
        self._unique: Dict[int, int] = {}  # packed (var, lo, hi) -> node
        self._leaves: Dict[Clause, int] = {}
        self.root = -1

    def __len__(self):
        return len(self.var)

    def leaf(self, clause: Sequence[int]) -> int:
        c = tuple(clause)
        idx = self._leaves.get(c)
        if idx is None:
            idx = len(self.var)
            self.var.append(LEAF)
            self.lo.append(-1)
            self.hi.append(-1)
            self.clause.append(c)
            self.width.append(-1)
            self._leaves[c] = idx
        return idx

    def node(self, v: int, lo: int, hi: int, width: int = -1) -> int:
        """Internal node querying ``v``; a node with equal successors is skipped."""
        if lo == hi:
            return lo
        key = (v << 80) | (lo << 40) | hi
        idx = self._unique.get(key)
        if idx is None:
            idx = len(self.var)
            self.var.append(v)
            self.lo.append(lo)
            self.hi.append(hi)
            self.clause.append(None)
            self.width.append(width)
            self._unique[key] = idx
        elif width > self.width[idx]:
            self.width[idx] = width
        return idx

    def is_leaf(self, i: int) -> bool:
        return self.var[i] == LEAF

    def reachable(self) -> List[int]:
        """Node ids reachable from the root, children before parents."""
        seen = bytearray(len(self.var))
        out = []
        stack = [self.root]
        while stack:
            i = stack.pop()
            if i < 0 or seen[i]:
                continue
            seen[i] = 1
            stack.append(self.lo[i])
            stack.append(self.hi[i])
        for i in range(len(self.var)):
            if seen[i]:
                out.append(i)
        return out

    @property
    def size(self) -> int:
        return len(self.reachable())


# checks


def check_read_once(bp: BranchingProgram) -> Tuple[bool, Optional[List[int]]]:
    """No variable repeats on any root-to-leaf path.

    Uses, per node, the set of variables queried strictly below it; a node
    is fine iff its own variable is absent from both successors' sets.
    Returns ``(ok, witness path of node ids)``.
    """
    below: Dict[int, int] = {}  # bitset of variables queried strictly below
    for i in bp.reachable():
        if bp.is_leaf(i):
            below[i] = 0
            continue
        v = bp.var[i]
        bit = 1 << v
        for child in (bp.lo[i], bp.hi[i]):
            if below[child] & bit:
                return False, _path_to_var(bp, i, child, v)
        below[i] = below[bp.lo[i]] | below[bp.hi[i]] | bit
    return True, None


def _path_to_var(bp, start, child, v):
    path = [start]
    cur = child
    while bp.var[cur] != v:
        path.append(cur)
        nxt = [c for c in (bp.lo[cur], bp.hi[cur]) if c >= 0]
        cur = next(c for c in nxt if _queries(bp, c, v))
    path.append(cur)
    return path


def _queries(bp, i, v, memo=None):
    memo = {} if memo is None else memo
    stack = [i]
    seen = set()
    while stack:
        n = stack.pop()
        if n in seen or n < 0:
            continue
        seen.add(n)
        if bp.var[n] == v:
            return True
        if not bp.is_leaf(n):
            stack.extend((bp.lo[n], bp.hi[n]))
    return False


def check_leaves(bp: BranchingProgram) -> Tuple[bool, str]:
    """Every leaf clause is falsified by every path that reaches it.

    Propagates, top-down, the set of literals fixed on *all* paths into a
    node (intersection over in-edges); a leaf clause is sound iff each of
    its literals is falsified by that common assignment.
    """
    # (positive, negative) variable bitmasks; an entry is dropped once its
    # node is processed, since every in-edge has been seen by then
    common: Dict[int, Tuple[int, int]] = {bp.root: (0, 0)}
    for i in reversed(bp.reachable()):
        here = common.pop(i, None)
        if here is None:
            continue
        pos, neg = here
        if bp.is_leaf(i):
            for lit in bp.clause[i]:
                if not (neg if lit > 0 else pos) >> abs(lit) & 1:
                    return False, f"leaf {i}: literal {lit} not falsified on every path"
            continue
        bit = 1 << bp.var[i]
        for child, mine in ((bp.lo[i], (pos, neg | bit)), (bp.hi[i], (pos | bit, neg))):
            prev = common.get(child)
            common[child] = mine if prev is None else (prev[0] & mine[0], prev[1] & mine[1])
    return True, ""


# branching programs and resolution


def bp_to_resolution(bp: BranchingProgram) -> Refutation:
    """Labels every node with a clause falsified by all paths into it.

    Leaves keep their clause.  An internal node on ``v`` resolves its
    children on ``v`` when ``v`` occurs positively in the 0-child's clause
    and negatively in the 1-child's clause; otherwise it reuses the clause
    of a child that does not mention ``v`` (no weakening is ever needed).
    """
    line_of: Dict[int, int] = {}
    clause_of: Dict[int, Clause] = {}
    lines: List[TraceLine] = []
    by_clause_input: Dict[Clause, int] = {}
    for i in bp.reachable():
        if bp.is_leaf(i):
            c = canonical_clause(bp.clause[i])
            lid = by_clause_input.get(c)
            if lid is None:
                lid = len(lines) + 1
                lines.append(TraceLine(lid, c))
                by_clause_input[c] = lid
            line_of[i], clause_of[i] = lid, c
            continue
        v = bp.var[i]
        lo, hi = bp.lo[i], bp.hi[i]
        c0, c1 = clause_of[lo], clause_of[hi]
        if v not in c0:
            line_of[i], clause_of[i] = line_of[lo], c0
            continue
        if -v not in c1:
            line_of[i], clause_of[i] = line_of[hi], c1
            continue
        res = set(c0)
        res.discard(v)
        res.update(l for l in c1 if l != -v)
        c = canonical_clause(res)
        lid = len(lines) + 1
        lines.append(TraceLine(lid, c, (line_of[lo], line_of[hi]), v))
        line_of[i], clause_of[i] = lid, c
    if clause_of[bp.root]:
        raise BPError(f"root clause is not empty: {clause_of[bp.root]}")
    # keep only lines the final clause depends on, renumbered in order
    final = line_of[bp.root]
    return _prune(lines, final)


def _prune(lines: List[TraceLine], final: int) -> Refutation:
    by_id = {l.id: l for l in lines}
    need = set()
    stack = [final]
    while stack:
        i = stack.pop()
        if i in need:
            continue
        need.add(i)
        stack.extend(by_id[i].ante)
    renum = {}
    out = []
    for l in lines:
        if l.id in need:
            renum[l.id] = len(out) + 1
            out.append(TraceLine(renum[l.id], l.clause, tuple(renum[a] for a in l.ante), l.pivot))
    return Refutation(out)


def resolution_to_bp(ref: Refutation) -> BranchingProgram:
    """One node per line: a derived line on pivot ``v`` queries ``v``; its
    0-successor is the antecedent containing ``v`` and its 1-successor the
    antecedent containing ``-v``.  Input lines become leaves."""
    bp = BranchingProgram()
    node_of: Dict[int, int] = {}
    clause_of: Dict[int, Clause] = {}
    for line in ref.lines:
        clause_of[line.id] = line.clause
        if not line.ante:
            idx = len(bp.var)
            bp.var.append(LEAF)
            bp.lo.append(-1)
            bp.hi.append(-1)
            bp.clause.append(line.clause)
            bp.width.append(-1)
            node_of[line.id] = idx
            continue
        a, b = line.ante
        v = line.pivot if line.pivot is not None else _clash(clause_of[a], clause_of[b])
        if v in clause_of[a] and -v in clause_of[b]:
            lo, hi = a, b
        elif v in clause_of[b] and -v in clause_of[a]:
            lo, hi = b, a
        else:
            raise BPError(f"line {line.id}: pivot {v} does not clash")
        idx = len(bp.var)
        bp.var.append(v)
        bp.lo.append(node_of[lo])
        bp.hi.append(node_of[hi])
        bp.clause.append(None)
        bp.width.append(-1)
        node_of[line.id] = idx
    bp.root = node_of[ref.lines[-1].id]
    return bp


def _clash(a: Clause, b: Clause) -> int:
    sb = set(b)
    vs = [abs(l) for l in a if -l in sb]
    if len(vs) != 1:
        raise BPError(f"clauses clash on {len(vs)} variables")
    return vs[0]


# statistics


@dataclass
class ProofStats:
    nodes: int
    leaves: int
    clauses: int
    max_cut_width: int
    per_strip: Dict[int, int] = field(default_factory=dict)
    per_strip_width: Dict[int, int] = field(default_factory=dict)


def proof_stats(bp: BranchingProgram, ref: Optional[Refutation] = None) -> ProofStats:
    reach = bp.reachable()
    leaves = sum(1 for i in reach if bp.is_leaf(i))
    width = max((bp.width[i] for i in reach), default=0)
    return ProofStats(len(reach), leaves, len(ref) if ref is not None else -1, max(width, 0))
