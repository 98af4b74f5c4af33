#!/usr/bin/env python3
"""Prints planned label widths and the static size bound per configuration,
without building any program.

    python3 scripts/widths.py comm:array dist:array xsq:array comm:wallace --bits 4 8 16
"""

import argparse

from ringproof.identities import build_instance
from ringproof.prover import label_width, plan_instance, size_bound


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="+", help="<identity>:<multiplier>")
    ap.add_argument("--bits", type=int, nargs="+", default=[4, 8, 16])
    args = ap.parse_args()
    print(f"{'config':24} {'n':>4} {'width':>6} {'log2 bound':>11}")
    for cfg in args.configs:
        ident, kind = cfg.rsplit(":", 1)
        for n in args.bits:
            inst = build_instance(ident, kind, n)
            plans = plan_instance(inst)
            width = max(label_width(prob, plan) for _, prob, plan in plans)
            print(f"{cfg:24} {n:>4} {width:>6} {size_bound(inst, plans):>11.1f}")


if __name__ == "__main__":
    main()
