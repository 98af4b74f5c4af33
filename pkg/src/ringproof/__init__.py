"""Bit-blasted multiplier identities and short, checkable resolution refutations."""

from .bp import BranchingProgram, bp_to_resolution, check_leaves, check_read_once, proof_stats, resolution_to_bp
from .check import CheckResult, check_all, check_ordered, check_refutation, check_regular
from .cnf import Formula, read_dimacs, write_dimacs
from .engine import ScheduleBlowup, ScheduleDeadEnd, assemble_top_level
from .identities import IdentityInstance, build_equivalence, build_identity, build_instance
from .multipliers import build_multiplier, validate_wallace
from .oracle import dpll, enumerate_inputs, inject_fault, simulate
from .prover import build_strip_bp, plan_instance, prove_instance, size_bound
from .stepwise import Branch, Merge, Propagate, TopDownBP, wallace_propagate_adder, wallace_propagate_pair
from .strips import extract_strip, strip_width, weight_certificate
from .trace import Refutation, TraceLine, load_trace, read_trace, save_trace, write_trace

__all__ = [
    "Branch",
    "BranchingProgram",
    "CheckResult",
    "Formula",
    "IdentityInstance",
    "Merge",
    "Propagate",
    "Refutation",
    "ScheduleBlowup",
    "ScheduleDeadEnd",
    "TopDownBP",
    "TraceLine",
    "assemble_top_level",
    "bp_to_resolution",
    "build_equivalence",
    "build_identity",
    "build_instance",
    "build_multiplier",
    "build_strip_bp",
    "check_all",
    "check_leaves",
    "check_ordered",
    "check_read_once",
    "check_refutation",
    "check_regular",
    "dpll",
    "enumerate_inputs",
    "extract_strip",
    "inject_fault",
    "load_trace",
    "plan_instance",
    "proof_stats",
    "prove_instance",
    "read_dimacs",
    "read_trace",
    "resolution_to_bp",
    "save_trace",
    "simulate",
    "size_bound",
    "strip_width",
    "validate_wallace",
    "wallace_propagate_adder",
    "wallace_propagate_pair",
    "weight_certificate",
    "write_dimacs",
    "write_trace",
]

__version__ = "0.1.0"
