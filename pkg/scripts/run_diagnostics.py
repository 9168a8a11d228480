#!/usr/bin/env python3
"""Run the full diagnostic battery into a report directory.

Each diagnostic lands in <out>/<name>.csv with the standard header block.
Default grids are sized for a coffee-break run on one core; pass --heavy
for the tall grids used in the acceptance measurements.

    python3 scripts/run_diagnostics.py --store zeros.jsonl --out reports/
"""

from __future__ import annotations

import argparse
import sys
import time

from zdl.cli import main as zdl_main


def battery(heavy: bool) -> list:
    t_hi = "1000" if heavy else "300"
    T_box = "1000" if heavy else "200"
    return [
        ("lemma22", ["diagnose", "lemma22", "--ell", "1",
                     "--T", "50:250:50", "--sigma", "0.6:2.1:0.2"]),
        ("lemma23", ["diagnose", "lemma23", "--k", "1",
                     "--t", "100:201:25", "--sigma", "0.6:1.01:0.1"]),
        ("lemma4", ["diagnose", "lemma4", "--ell", "1",
                    "--sigma", "0.1:0.55:0.1", "--t", f"100:{t_hi}:50"]),
        ("fsum", ["diagnose", "fsum", "--k", "1", "--t", "100:251:50"]),
        ("boxes", ["diagnose", "boxes", "--k", "1", "--T", T_box]),
        ("theta", ["diagnose", "theta", "--k", "1", "--T", "100:201:50"]),
    ]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--store", required=True, help="zero store path")
    ap.add_argument("--out", required=True, help="report directory")
    ap.add_argument("--heavy", action="store_true", help="acceptance-size grids")
    ap.add_argument("--prec-bits", type=int, default=None)
    args = ap.parse_args()

    base = ["--store", args.store, "--out", args.out]
    if args.prec_bits:
        base = ["--prec-bits", str(args.prec_bits)] + base
    failures = 0
    for name, cmd in battery(args.heavy):
        t0 = time.monotonic()
        rc = zdl_main(base + cmd)
        dt = time.monotonic() - t0
        status = "ok" if rc == 0 else f"FAILED rc={rc}"
        print(f"{name:8s} {status} [{dt:.1f}s]", file=sys.stderr)
        failures += rc != 0
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
