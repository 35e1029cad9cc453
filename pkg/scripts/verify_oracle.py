"""Exact series distributions against brute force over all labeled trees.

    python3 scripts/verify_oracle.py --patterns paper:fig1 star:3 --n 8 --threads 4
"""

from __future__ import annotations

import argparse
import time

from treepatterns.oracle import compare, distribution
from treepatterns.partition import build_partition
from treepatterns.pattern import load_pattern
from treepatterns.series import FULL, expand_system, unrooted_counts
from treepatterns.system import build_planted_system


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--patterns", nargs="+", default=["paper:fig1", "star:3"])
    ap.add_argument("--builder", default="compact", choices=("naive", "compact"))
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()

    failures = 0
    for source in args.patterns:
        m = load_pattern(source)
        sys_ = build_planted_system(build_partition(m, args.builder), m.name)
        t = unrooted_counts(expand_system(sys_, args.n, FULL).r)
        for n in range(2, args.n + 1):
            t0 = time.perf_counter()
            c = compare(t.distribution(n), distribution(n, m, args.threads))
            failures += not c.equal
            verdict = "equal" if c.equal else f"MISMATCH at m={c.first_mismatch}"
            print(f"{m.name:<12} n={n:<2} {verdict:<22} {time.perf_counter() - t0:6.2f} s")
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()
