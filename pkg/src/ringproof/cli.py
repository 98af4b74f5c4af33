"""Command-line entry point: ``ringproof <command> ...``.

Exit codes: 0 success, 1 a verification failure (or an oracle timeout),
2 a usage or input error.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
import time
from typing import List, Optional

from .bp import BPError
from .check import check_ordered, check_refutation, check_regular
from .cnf import DimacsError, Formula, read_dimacs, write_dimacs
from .engine import ScheduleBlowup, ScheduleDeadEnd
from .identities import OutOfScope, build_instance, rebuild
from .multipliers import KINDS, build_multiplier, validate_wallace
from .oracle import dpll, enumerate_inputs
from .prover import prove_instance
from .strips import CertificateFailure, extract_strip, weight_certificate
from .trace import TraceError, load_trace, save_trace


class UsageError(Exception):
    pass


class Timeout(Exception):
    pass


def _read_formula(path: str) -> Formula:
    try:
        with open(path) as fh:
            return read_dimacs(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except DimacsError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _instance(path: str):
    f = _read_formula(path)
    try:
        return rebuild(f)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


class Console:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def say(self, *parts) -> None:
        print(*parts)

    def info(self, *parts) -> None:
        if not self.quiet:
            print(*parts, file=sys.stderr)


# commands


def cmd_gen(args, out: Console) -> int:
    try:
        inst = build_instance(args.identity, args.mult, args.bits, args.fault)
    except (ValueError, OutOfScope) as exc:
        raise UsageError(str(exc)) from None
    _write(args.out, write_dimacs(inst.formula))
    out.info(f"wrote {args.out}: {inst.formula.num_vars} vars, {inst.formula.num_clauses} clauses, "
             f"{inst.width} strips")
    return 0


def cmd_strip(args, out: Console) -> int:
    inst = _instance(args.input)
    try:
        strip = extract_strip(inst, args.k, args.delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(args.out, write_dimacs(strip.formula))
    out.info(f"wrote {args.out}: window [{strip.lo}, {strip.hi}], {len(strip.formula.clauses)} clauses, "
             f"{len(strip.free)} free wires")
    return 0


def cmd_certify(args, out: Console) -> int:
    inst = _instance(args.input)
    try:
        strip = extract_strip(inst, args.k, args.delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cert = weight_certificate(inst, strip, strict=False)
    out.say(f"strip k={cert.k} window [{strip.lo}, {strip.hi}] delta={strip.delta}")
    for name, w in cert.inventory:
        out.say(f"  free {name} weight 2^{w}")
    for side in sorted(cert.free_max):
        out.say(f"  side {side}: free weight {cert.free_max[side]}, low summands {cert.low_max[side]}")
    for name, (lo, hi) in sorted(cert.bounds.items()):
        out.say(f"  bound {name}: difference in [{lo}, {hi}]")
    out.say(f"total {cert.total} < 2^{cert.k} = {cert.target}: {'yes' if cert.ok else 'no'}")
    out.say(f"joint bound {cert.joint} < {cert.target}: {'yes' if cert.rigorous else 'no'}")
    return 0 if cert.ok else 1


def cmd_prove(args, out: Console) -> int:
    inst = _instance(args.input)
    try:
        res = prove_instance(inst, schedule=args.schedule, max_states=args.max_states, ordered=args.ordered,
                             log=out.info)
    except ScheduleDeadEnd as exc:
        out.say(f"dead end: {exc}")
        ins = {nm: sum(exc.witness.get(v, 0) << i for i, v in enumerate(vec)) for nm, vec in inst.inputs.items()}
        out.say("counterexample inputs: " + " ".join(f"{nm}={val}" for nm, val in sorted(ins.items())))
        return 1
    except ScheduleBlowup as exc:
        out.say(f"schedule blew up: {exc}")
        return 1
    except (BPError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    save_trace(res.refutation, args.out)
    out.info(f"wrote {args.out}: {len(res.refutation)} lines, {res.stats.nodes} program nodes, "
             f"max cut width {res.stats.max_cut_width}, {res.seconds:.2f}s")
    if args.stats:
        doc = {
            "identity": inst.identity, "mult": inst.kind, "bits": inst.n,
            "vars": inst.formula.num_vars, "clauses": inst.formula.num_clauses,
            "nodes": res.stats.nodes, "leaves": res.stats.leaves, "lines": len(res.refutation),
            "max_cut_width": res.stats.max_cut_width,
            "strips": [{"k": r.k, "schedule": r.schedule, "nodes": r.new_nodes, "width": r.max_width,
                        "levels": r.levels, "max_states": r.max_states, "static_live": r.static_live,
                        "log2_bound": round(r.log2_bound, 2), "seconds": round(r.seconds, 3)}
                       for r in res.strips],
        }
        _write(args.stats, json.dumps(doc, indent=1) + "\n")
    return 0


def cmd_check(args, out: Console) -> int:
    f = _read_formula(args.instance)
    try:
        ref = load_trace(args.proof)
    except OSError as exc:
        raise UsageError(f"cannot read {args.proof}: {exc.strerror}") from None
    except TraceError as exc:
        out.say(f"error: {args.proof} line {exc.line}: {exc.reason}")
        return 1
    res = check_refutation(f, ref)
    if res.ok and args.ordered:
        res = check_ordered(ref)
    elif res.ok and args.regular:
        res = check_regular(ref)
    if not res.ok:
        out.say(f"error: proof line {res.line}: {res.reason}")
        if res.witness:
            out.say("witness: " + " ".join(map(str, res.witness)))
        return 1
    what = "ordered" if args.ordered else "regular" if args.regular else "valid"
    out.say(f"ok: {what} refutation, {len(ref)} lines")
    return 0


def _alarm(_sig, _frame):
    raise Timeout()


def cmd_oracle(args, out: Console) -> int:
    f = _read_formula(args.file)
    if args.timeout:
        signal.signal(signal.SIGALRM, _alarm)
        signal.alarm(int(args.timeout))
    try:
        if args.enumerate_inputs:
            try:
                inst = rebuild(f)
            except ValueError as exc:
                raise UsageError(f"--enumerate-inputs needs instance metadata: {exc}") from None
            res = enumerate_inputs(f, [inst.inputs[nm] for nm in sorted(inst.inputs)])
        else:
            res = dpll(f)
    except Timeout:
        out.say("UNKNOWN (timeout)")
        return 1
    finally:
        if args.timeout:
            signal.alarm(0)
    if res.sat:
        out.say("SAT")
        names = f.var_names
        if names:
            shown = [f"{names[v]}={b}" for v, b in sorted(res.model.items()) if v in names and "_" in names[v]
                     and names[v].split("_")[0] in ("x", "y", "z")]
            if shown:
                out.say("model " + " ".join(shown))
    else:
        out.say("UNSAT")
    return 0


def cmd_validate_wallace(args, out: Console) -> int:
    m = build_multiplier("wallace", args.bits)
    rep = validate_wallace(m.wallace)

    def flag(x):
        return "-" if x is None else "yes" if x else "no"

    for r in rep.layers:
        line = (f"layer {r.layer}: counts {' '.join(map(str, r.counts))} smooth={flag(r.smooth)} "
                f"singly-peaked={flag(r.singly_peaked)} pyramid={flag(r.pyramid)} "
                f"row-friendly={flag(r.row_friendly)}")
        if r.violation:
            line += f" ({r.violation})"
        out.say(line)
    ok = rep.smooth and rep.singly_peaked and rep.pyramid and rep.row_friendly
    return 0 if ok else 1


def cmd_stats(args, out: Console) -> int:
    try:
        sizes = [int(b) for b in args.bits.split(",")]
    except ValueError:
        raise UsageError(f"--bits must be a comma-separated list, got {args.bits!r}") from None
    status = 0
    for n in sizes:
        try:
            inst = build_instance(args.identity, args.mult, n)
        except (ValueError, OutOfScope) as exc:
            raise UsageError(str(exc)) from None
        row = {"identity": inst.identity, "mult": inst.kind, "bits": n,
               "vars": inst.formula.num_vars, "clauses": inst.formula.num_clauses}
        try:
            res = prove_instance(inst, schedule=args.schedule, max_states=args.max_states, ordered=args.ordered)
        except (ScheduleDeadEnd, ScheduleBlowup) as exc:
            row["error"] = str(exc)
            status = 1
            out.say(json.dumps(row))
            sys.stdout.flush()
            continue
        t0 = time.time()
        ok = check_refutation(inst.formula, res.refutation).ok and check_regular(res.refutation).ok
        row.update({
            "per_strip": [r.new_nodes for r in res.strips],
            "nodes": res.stats.nodes, "lines": len(res.refutation),
            "max_cut_width": res.stats.max_cut_width,
            "prove_seconds": round(res.seconds, 3),
            "check_seconds": round(time.time() - t0, 3), "check_ok": ok,
        })
        if not ok:
            status = 1
        out.say(json.dumps(row))
        sys.stdout.flush()
    return status


# argument parsing


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="reserved; has no effect")
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="suppress progress output")
    p.add_argument("--timeout", type=float, default=argparse.SUPPRESS, help="seconds (oracle only)")
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker count (currently serial)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = argparse.ArgumentParser(prog="ringproof", parents=[common],
                                description="Resolution proofs for multiplier identities.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write an identity instance as DIMACS")
    g.add_argument("--identity", required=True,
                   help="comm | dist | xsq | deg2:<lhs>=<rhs> | equiv:<kindA>,<kindB>")
    g.add_argument("--mult", choices=KINDS, default="array")
    g.add_argument("--bits", type=int, required=True)
    g.add_argument("--fault", help="<circuit>:<adder index>:<mode>")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("strip", parents=[common], help="write the formula of one strip")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--delta", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_strip)

    c = sub.add_parser("certify", parents=[common], help="print a strip's counting certificate")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--delta", type=int)
    c.set_defaults(func=cmd_certify)

    pr = sub.add_parser("prove", parents=[common], help="build a regular resolution refutation")
    pr.add_argument("--in", dest="input", required=True)
    pr.add_argument("--schedule", default="auto")
    pr.add_argument("--out", required=True)
    pr.add_argument("--stats")
    pr.add_argument("--ordered", action="store_true", default=None,
                    help="use one variable order for every strip (default for comm and equiv)")
    pr.add_argument("--max-states", type=int, default=1_000_000)
    pr.set_defaults(func=cmd_prove)

    ch = sub.add_parser("check", parents=[common], help="verify a refutation")
    ch.add_argument("instance")
    ch.add_argument("proof")
    ch.add_argument("--regular", action="store_true")
    ch.add_argument("--ordered", action="store_true")
    ch.set_defaults(func=cmd_check)

    o = sub.add_parser("oracle", parents=[common], help="decide a formula by DPLL or input enumeration")
    o.add_argument("file")
    o.add_argument("--enumerate-inputs", action="store_true")
    o.set_defaults(func=cmd_oracle)

    w = sub.add_parser("validate-wallace", parents=[common], help="structural report for a Wallace tree")
    w.add_argument("--bits", type=int, required=True)
    w.set_defaults(func=cmd_validate_wallace)

    st = sub.add_parser("stats", parents=[common], help="prove and check a sweep, one JSON line per size")
    st.add_argument("--identity", default="comm")
    st.add_argument("--mult", choices=KINDS, default="array")
    st.add_argument("--bits", default="2,3,4")
    st.add_argument("--schedule", default="auto")
    st.add_argument("--ordered", action="store_true", default=None)
    st.add_argument("--max-states", type=int, default=1_000_000)
    st.set_defaults(func=cmd_stats)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else 2
    for name, default in (("seed", 0), ("quiet", False), ("timeout", None), ("jobs", 1)):
        if not hasattr(args, name):
            setattr(args, name, default)
    out = Console(args.quiet)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"ringproof: error: {exc}", file=sys.stderr)
        return 2
    except CertificateFailure as exc:
        print(f"ringproof: certificate failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
