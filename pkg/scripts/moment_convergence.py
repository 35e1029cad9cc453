"""Exact moment increments from the series against the limit constants.

Prints, for each n, the exact mean and variance of the occurrence count over
all n^(n-2) labeled trees, their increments from n-1, and the relative gap of
the increments to mu and sigma^2.

    python3 scripts/moment_convergence.py --pattern paper:fig1 --n 60
"""

from __future__ import annotations

import argparse

from treepatterns.analysis import AnalysisConfig, analyze
from treepatterns.partition import build_partition
from treepatterns.pattern import load_pattern
from treepatterns.series import JET2, expand_system, moment_rows, unrooted_counts
from treepatterns.system import build_planted_system


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pattern", default="paper:fig1")
    ap.add_argument("--builder", default="compact", choices=("naive", "compact"))
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--every", type=int, default=5, help="print every k-th row")
    args = ap.parse_args()

    m = load_pattern(args.pattern)
    consts = analyze(m, AnalysisConfig(builder=args.builder, validate=False)).constants
    mu, s2 = float(consts.mu.approx()), float(consts.sigma2.approx())
    sys_ = build_planted_system(build_partition(m, args.builder), m.name)
    t = unrooted_counts(expand_system(sys_, args.n, JET2).r)
    print(f"pattern {m.name}: mu ~ {mu:.10f}, sigma2 ~ {s2:.10f}")
    print(f"{'n':>4} {'mean':>14} {'variance':>14} {'dmean/mu-1':>12} {'dvar/s2-1':>12}")
    for r in moment_rows(t, start=2):
        if r["dmean"] is None or (r["n"] % args.every and r["n"] != args.n):
            continue
        gm = float(r["dmean"]) / mu - 1
        gv = float(r["dvariance"]) / s2 - 1 if s2 else float("nan")
        print(f"{r['n']:>4} {float(r['mean']):>14.6f} {float(r['variance']):>14.6f} {gm:>12.2e} {gv:>12.2e}")


if __name__ == "__main__":
    main()
