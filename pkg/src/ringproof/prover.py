"""End-to-end proving: strip bodies, the top-level chain, and the resolution trace."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .bp import BranchingProgram, ProofStats, bp_to_resolution, proof_stats
from .engine import (BodyResult, StripProblem, build_body, assemble_top_level, cut_profile,
                     strip_problem, strip_program, table_mode_applies)
from .identities import IdentityInstance, build_instance
from .schedules import Plan, plan_strip, schedule_names
from .strips import extract_strip
from .trace import Refutation


@dataclass
class StripReport:
    k: int
    schedule: str
    levels: int
    max_states: int
    max_width: int
    new_nodes: int
    static_live: int
    log2_bound: float
    seconds: float


@dataclass
class ProofResult:
    inst: IdentityInstance
    bp: BranchingProgram
    refutation: Optional[Refutation]
    strips: List[StripReport] = field(default_factory=list)
    stats: Optional[ProofStats] = None
    seconds: float = 0.0


def global_order(inst: IdentityInstance) -> List[int]:
    """One variable order shared by all strips, for ordered proofs.

    The ``e`` variables come first.  Each candidate scan is closed over the
    whole instance (a single strip covering every column); restricting that
    order to a strip's variables gives the strip's order.  The candidate
    whose restrictions have the smallest summed size bound wins.
    """
    whole = extract_strip(inst, inst.width - 1, delta=inst.width)
    wprob = strip_problem(inst, whole)
    probs = [strip_problem(inst, extract_strip(inst, k)) for k in range(inst.width)]
    evars = set(inst.e)
    best, best_cost = None, None
    for name in schedule_names(inst, whole, wprob):
        order = [v for v in plan_strip(inst, whole, wprob, name).order if v not in evars]
        cost = 0.0
        for prob in probs:
            sub = _restrict(order, prob)
            cost += 2.0 ** Plan(name, sub, cut_profile(prob, sub)).log2_bound
        if best_cost is None or cost < best_cost:
            best, best_cost = order, cost
    order = list(inst.e) + best
    seen = set(order)
    order += [v for v in range(1, inst.formula.num_vars + 1) if v not in seen]
    return order


def _restrict(order: List[int], prob) -> List[int]:
    mine = set()
    for c in prob.clauses:
        mine.update(abs(l) for l in c)
    for t in prob.twins:
        mine.update((t.left, t.right))
    prefix = set(prob.strip.prefix)
    return [v for v in order if v in mine and v not in prefix]


def prove_strip(bp: BranchingProgram, inst: IdentityInstance, k: int, schedule: str = "auto",
                max_states: int = 1_000_000, order: Optional[List[int]] = None) -> BodyResult:
    """Adds the body for strip ``k`` to ``bp``; raises ScheduleDeadEnd on a satisfiable strip."""
    strip = extract_strip(inst, k)
    prob = strip_problem(inst, strip)
    if order is None:
        plan = plan_strip(inst, strip, prob, schedule)
        order = plan.order
    else:
        order = _restrict(order, prob)
    return build_body(bp, prob, order, max_states=max_states)


def build_strip_bp(identity: str, kind: str, n: int, k: int, schedule: str = "auto",
                   max_states: int = 1_000_000) -> Tuple[BranchingProgram, Plan]:
    """Standalone program refuting the strip formula ``k`` (prefix queried
    first), together with the schedule that produced it."""
    inst = build_instance(identity, kind, n)
    bp = BranchingProgram()
    strip = extract_strip(inst, k)
    prob = strip_problem(inst, strip)
    plan = plan_strip(inst, strip, prob, schedule)
    body = build_body(bp, prob, plan.order, max_states=max_states)
    bp.root = strip_program(bp, prob, body.root)
    return bp, plan


def plan_instance(inst: IdentityInstance, schedule: str = "auto",
                  ordered: Optional[bool] = None) -> List[Tuple[int, StripProblem, Plan]]:
    """The strip problems and plans :func:`prove_instance` would use, without building anything."""
    if ordered is None:
        ordered = schedule == "auto" and table_mode_applies(inst)
    gorder = global_order(inst) if ordered else None
    out = []
    for k in range(inst.width):
        strip = extract_strip(inst, k)
        prob = strip_problem(inst, strip)
        if gorder is not None:
            order = _restrict(gorder, prob)
            plan = Plan("global", order, cut_profile(prob, order))
        else:
            plan = plan_strip(inst, strip, prob, schedule)
        out.append((k, prob, plan))
    return out


def label_width(prob: StripProblem, plan: Plan) -> int:
    """The widest node label the builder records for this plan: the live
    variables before a level, the variable queried there, and the prefix."""
    return max(plan.profile, default=-1) + 1 + prob.prefix_width


def size_bound(inst: IdentityInstance, plans: List[Tuple[int, StripProblem, Plan]]) -> float:
    """log2 of an upper bound on the program size, hence on the trace length.

    A level with ``live`` variables carried into it holds at most
    ``2^live`` nodes; leaves are distinct clauses; each twin pair adds at
    most six nodes; the top-level chain has one node per strip.
    """
    total = inst.width + inst.formula.num_clauses
    for _, prob, plan in plans:
        total += sum(2 ** p for p in plan.profile) + 6 * len(prob.twins)
    return math.log2(total)


def prove_instance(inst: IdentityInstance, schedule: str = "auto", max_states: int = 1_000_000,
                   ordered: Optional[bool] = None, trace: bool = True, log=None) -> ProofResult:
    """Refutes the whole instance.

    With ``ordered`` every strip follows :func:`global_order`, which makes
    the resulting refutation ordered as well as regular.  By default this is
    done exactly when the instance runs in table mode (``comm`` or ``equiv``
    over non-Booth multipliers) and no schedule is named.
    """
    t0 = time.time()
    bp = BranchingProgram()
    bodies: Dict[int, int] = {}
    reports: List[StripReport] = []
    for k, prob, plan in plan_instance(inst, schedule, ordered):
        ts = time.time()
        body = build_body(bp, prob, plan.order, max_states=max_states)
        bodies[k] = body.root
        rep = StripReport(k, plan.name, body.levels, body.max_states, body.max_width, body.new_nodes,
                          plan.max_live, plan.log2_bound, time.time() - ts)
        reports.append(rep)
        if log:
            log(f"strip {k}: {plan.name}, {body.new_nodes} nodes, width {body.max_width}, {rep.seconds:.2f}s")
    bp.root = assemble_top_level(bp, inst, bodies)
    ref = bp_to_resolution(bp) if trace else None
    stats = proof_stats(bp, ref)
    stats.per_strip = {r.k: r.new_nodes for r in reports}
    stats.per_strip_width = {r.k: r.max_width for r in reports}
    return ProofResult(inst, bp, ref, reports, stats, time.time() - t0)
