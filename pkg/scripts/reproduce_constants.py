"""Recompute the limit constants of the reference patterns and compare with the reference values.

    python3 scripts/reproduce_constants.py
    python3 scripts/reproduce_constants.py --skip-fig7-sigma2
"""

from __future__ import annotations

import argparse
import time

from treepatterns import published as ref
from treepatterns.analysis import AnalysisConfig, analyze
from treepatterns.pattern import named_pattern


def row(label: str, expected, computed) -> str:
    status = "-" if expected is None else ("match" if expected == computed else "DIFFERS")
    exp = "-" if expected is None else f"{expected} ~ {float(expected.approx()):.10f}"
    return f"{label:<22} {status:<8} computed {computed} ~ {float(computed.approx()):.10f}  reference {exp}"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--skip-fig7-sigma2", action="store_true")
    args = ap.parse_args()

    fig1 = named_pattern("paper:fig1")
    for b in ("naive", "compact"):
        t0 = time.perf_counter()
        r = analyze(fig1, AnalysisConfig(builder=b))
        print(row(f"fig1 {b} mu", ref.FIG1_MU, r.constants.mu))
        print(row(f"fig1 {b} sigma2", ref.FIG1_SIGMA2, r.constants.sigma2))
        print(f"{'':<22} {r.L + 1} classes, {time.perf_counter() - t0:.1f} s")

    t0 = time.perf_counter()
    r7 = analyze(named_pattern("paper:fig7"), AnalysisConfig(sigma2=not args.skip_fig7_sigma2, validate=False))
    print(row("fig7 compact mu", ref.FIG7_MU, r7.constants.mu))
    if r7.constants.sigma2 is not None:
        print(row("fig7 compact sigma2", None, r7.constants.sigma2))
    print(f"{'':<22} {r7.L + 1} classes, {time.perf_counter() - t0:.1f} s")

    for k in (2, 3, 4, 5):
        rk = analyze(named_pattern(f"star:{k}"))
        print(row(f"star:{k} mu", ref.star_mu(k), rk.constants.mu))
        print(row(f"star:{k} sigma2", None, rk.constants.sigma2))


if __name__ == "__main__":
    main()
