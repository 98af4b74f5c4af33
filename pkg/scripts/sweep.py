#!/usr/bin/env python3
"""Proves and checks a range of sizes, each in its own process with a
memory cap, and writes one JSON line per run.

    python3 scripts/sweep.py --identity comm --mult array --bits 2 4 8 --mem-gb 3.5 --timeout 600
"""

import argparse
import json
import resource
import subprocess
import sys
from pathlib import Path

WORKER = Path(__file__).resolve().parent.parent / "tests" / "acceptance_worker.py"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--identity", default="comm")
    ap.add_argument("--mult", default="array")
    ap.add_argument("--bits", type=int, nargs="+", default=[2, 4])
    ap.add_argument("--mem-gb", type=float, default=3.5)
    ap.add_argument("--timeout", type=float, default=600)
    ap.add_argument("--out", help="append JSON lines here as well as to stdout")
    args = ap.parse_args()
    cap = int(args.mem_gb * 1e9)

    def limit():
        resource.setrlimit(resource.RLIMIT_AS, (cap, cap))

    for n in args.bits:
        cmd = [sys.executable, str(WORKER), args.identity, args.mult, str(n)]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=args.timeout, preexec_fn=limit)
            row = json.loads(proc.stdout) if proc.returncode == 0 else {
                "identity": args.identity, "kind": args.mult, "n": n, "error": f"exit {proc.returncode}"}
        except subprocess.TimeoutExpired:
            row = {"identity": args.identity, "kind": args.mult, "n": n, "error": "timeout"}
        line = json.dumps(row)
        print(line, flush=True)
        if args.out:
            with open(args.out, "a") as fh:
                fh.write(line + "\n")


if __name__ == "__main__":
    main()
