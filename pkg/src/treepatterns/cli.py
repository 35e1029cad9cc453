"""Command-line interface: analyze, expand, oracle, verify, emit-system, selftest.

Exit codes: 0 success, 1 verification failure, 2 invalid input or limit,
3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import mpmath

from . import __version__
from .algebra import LaurentE, NotDivisible
from .analysis import AnalysisConfig, AnalysisError, analyze, check_determinant_lemma, solve_critical_point
from .oracle import OracleError, compare, distribution, dumps_distribution
from .partition import (
    DEFAULT_CLASS_LIMIT,
    AmbiguousCount,
    ClassLimitExceeded,
    PartitionError,
    TermLimitExceeded,
    build_partition,
    dagify,
    derive_planted_patterns,
    intersect_planar_classes,
    validate_partition,
)
from .pattern import Pattern, PatternError, load_pattern, named_pattern
from .series import (
    FULL,
    JET2,
    SeriesError,
    closed_form_counts,
    distribution_table,
    expand_system,
    forbidden_counts,
    forest_series,
    moment_table,
    unrooted_counts,
)
from .system import build_planted_system, emit
from .trees import TreeError

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
DIGITS = 10


@dataclass(frozen=True)
class RunConfig:
    pattern: str = "paper:fig1"
    builder: str = "compact"
    sigma2: bool = True
    n: int = 8
    mode: str = FULL
    fmt: str = "text"
    threads: int = 1
    class_limit: int = DEFAULT_CLASS_LIMIT
    table: str = ""
    show_system: bool = False

    def __post_init__(self) -> None:
        if self.n < 1 or self.threads < 1 or self.class_limit < 1:
            raise ValueError("--n, --threads and --class-limit must be positive")
        if self.builder not in ("naive", "compact", "both"):
            raise ValueError(f"unknown builder {self.builder!r}")


def dec(f: LaurentE) -> str:
    return mpmath.nstr(f.approx(), DIGITS)


def _dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# analyze / emit-system
# ---------------------------------------------------------------------------


def _builders(cfg: RunConfig) -> list[str]:
    return ["naive", "compact"] if cfg.builder == "both" else [cfg.builder]


def cmd_analyze(cfg: RunConfig) -> tuple[str, int]:
    m = load_pattern(cfg.pattern)
    reports = []
    for b in _builders(cfg):
        reports.append(analyze(m, AnalysisConfig(builder=b, sigma2=cfg.sigma2, class_limit=cfg.class_limit)))
    agree = all(
        r.constants.mu == reports[0].constants.mu and r.constants.sigma2 == reports[0].constants.sigma2
        for r in reports
    )
    code = EXIT_OK if agree else EXIT_VERIFY
    if cfg.fmt == "json":
        doc = {"pattern": m.name, "reports": [r.to_doc() for r in reports], "builders_agree": agree}
        if cfg.show_system:
            doc["systems"] = [r.system.to_doc() for r in reports if r.system is not None]
        return _dumps(doc), code
    lines = [f"pattern: {m.name} ({m.size} nodes)"]
    for r in reports:
        c = r.constants
        lines.append(f"builder: {r.builder}")
        if r.closed_form:
            lines.append("  closed form (size below three)")
        else:
            lines.append(f"  classes (L+1): {r.L + 1}")
        lines.append(f"  mu     = {c.mu}  ~ {dec(c.mu)}")
        if c.sigma2 is not None:
            lines.append(f"  sigma2 = {c.sigma2}  ~ {dec(c.sigma2)}")
        else:
            lines.append("  sigma2 = skipped")
        for name, chk in sorted(r.checks.items()):
            lines.append(f"  check {name}: {'ok' if chk.ok else 'FAILED'}")
        if cfg.show_system and r.system is not None:
            lines.append(emit(r.system, "latex" if cfg.fmt == "latex" else "text", r.partition))
    if len(reports) > 1:
        lines.append(f"builders agree: {'yes' if agree else 'NO'}")
    return "\n".join(lines), code


def cmd_emit_system(cfg: RunConfig) -> tuple[str, int]:
    m = load_pattern(cfg.pattern)
    if m.size < 3:
        raise PatternError("patterns with fewer than three nodes have closed forms and no system")
    out = []
    for b in _builders(cfg):
        part = build_partition(m, b, cfg.class_limit)
        out.append(emit(build_planted_system(part, m.name), cfg.fmt, part))
    return "\n\n".join(out), EXIT_OK


# ---------------------------------------------------------------------------
# expand / oracle / verify
# ---------------------------------------------------------------------------


def _t_series(m: Pattern, builder: str, n: int, mode: str, class_limit: int):
    part = build_partition(m, builder, class_limit)
    sys_ = build_planted_system(part, m.name)
    ex = expand_system(sys_, n, mode)
    return ex, unrooted_counts(ex.r)


def cmd_expand(cfg: RunConfig) -> tuple[str, int]:
    m = load_pattern(cfg.pattern)
    builder = "compact" if cfg.builder == "both" else cfg.builder
    if m.size < 3:
        rows = {n: closed_form_counts(m.size, n) for n in range(1, cfg.n + 1)}
        if cfg.fmt == "json":
            return _dumps({str(n): {str(k): v for k, v in d.items()} for n, d in rows.items()}), EXIT_OK
        return "\n".join(["n\tm\tt"] + [f"{n}\t{k}\t{v}" for n, d in rows.items() for k, v in d.items()]), EXIT_OK
    _, t = _t_series(m, builder, cfg.n, cfg.mode, cfg.class_limit)
    table = cfg.table or ("distribution" if cfg.mode == FULL else "moments")
    fmt = "json" if cfg.fmt == "json" else "tsv"
    if table == "distribution":
        return distribution_table(t, fmt), EXIT_OK
    if table == "moments":
        return moment_table(t, fmt), EXIT_OK
    if table == "forbidden":
        rows = forbidden_counts(t)
        if fmt == "json":
            doc = [{"n": r.n, "free": r.free, "total": r.total, "ratio": mpmath.nstr(mpmath.mpf(r.free) / r.total, DIGITS)} for r in rows]
            return _dumps(doc), EXIT_OK
        lines = ["n\tfree\ttotal\tratio"]
        lines += [f"{r.n}\t{r.free}\t{r.total}\t{mpmath.nstr(mpmath.mpf(r.free) / r.total, DIGITS)}" for r in rows]
        return "\n".join(lines), EXIT_OK
    if table == "forest":
        f = forest_series(t)
        if f.mode == FULL:
            return distribution_table(f, fmt), EXIT_OK
        return moment_table(f, fmt), EXIT_OK
    raise ValueError(f"unknown table {table!r}")


def cmd_oracle(cfg: RunConfig) -> tuple[str, int]:
    m = load_pattern(cfg.pattern)
    d = distribution(cfg.n, m, cfg.threads)
    return dumps_distribution(d, "json" if cfg.fmt == "json" else "tsv"), EXIT_OK


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    """Series distribution against the brute-force histogram for every n up to --n."""
    m = load_pattern(cfg.pattern)
    builder = "compact" if cfg.builder == "both" else cfg.builder
    if m.size >= 3:
        _, t = _t_series(m, builder, cfg.n, FULL, cfg.class_limit)
        series = {n: t.distribution(n) for n in range(1, cfg.n + 1)}
    else:
        series = {n: closed_form_counts(m.size, n) for n in range(1, cfg.n + 1)}
    results = []
    for n in range(2, cfg.n + 1):
        results.append(compare(series[n], distribution(n, m, cfg.threads)))
    ok = all(r.equal for r in results)
    if cfg.fmt == "json":
        return _dumps({"pattern": m.name, "pass": ok, "results": [r.to_doc() for r in results]}), EXIT_OK if ok else EXIT_VERIFY
    lines = [f"n={r.n}: {'equal' if r.equal else f'MISMATCH at m={r.first_mismatch}'}" for r in results]
    lines.append("PASS" if ok else "FAIL")
    return "\n".join(lines), EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SelfCheck:
    name: str
    expected: str
    computed: str
    ok: bool

    def to_doc(self) -> dict[str, Any]:
        return {"name": self.name, "expected": self.expected, "computed": self.computed, "ok": self.ok}


def _laurent_check(name: str, expected: LaurentE, computed: LaurentE) -> SelfCheck:
    return SelfCheck(name, f"{expected} ~ {dec(expected)}", f"{computed} ~ {dec(computed)}", expected == computed)


def selftest_checks() -> list[SelfCheck]:
    from . import published as ref

    out: list[SelfCheck] = []
    fig1 = named_pattern("paper:fig1")
    for b in ("naive", "compact"):
        r = analyze(fig1, AnalysisConfig(builder=b))
        out.append(_laurent_check(f"fig1_{b}_mu", ref.FIG1_MU, r.constants.mu))
        out.append(_laurent_check(f"fig1_{b}_sigma2", ref.FIG1_SIGMA2, r.constants.sigma2))
        if b == "naive":
            out.append(SelfCheck("fig1_naive_classes", "11", str(r.L + 1), r.L + 1 == 11))
            per_class = tuple(
                max([k for (j, _), k in r.partition.K.items() if j == c], default=0) for c in range(r.partition.size)
            )
            out.append(SelfCheck("fig1_naive_K", str(ref.FIG1_NAIVE_K), str(per_class), per_class == ref.FIG1_NAIVE_K))
            cp = r.critical_point
            exp_ms = sorted(str(a) for a in ref.FIG1_ABAR)
            got_ms = sorted(str(a) for a in cp.abar)
            out.append(SelfCheck("fig1_abar_multiset", "; ".join(exp_ms), "; ".join(got_ms), Counter(exp_ms) == Counter(got_ms)))
            lemma = check_determinant_lemma(r.system)
            out.append(SelfCheck("fig1_determinant_lemma", "holds", lemma.detail, lemma.ok))
        val = validate_partition(r.partition, fig1, 7)
        out.append(SelfCheck(f"fig1_{b}_partition", "ok", "ok" if val.ok else str(val.to_doc()), val.ok))

    fig7 = named_pattern("paper:fig7")
    pps = derive_planted_patterns(fig7)
    defs = tuple(dagify(intersect_planar_classes(_planar(pps))))
    out.append(SelfCheck("fig7_dag", str(ref.FIG7_DAG), str(defs), defs == ref.FIG7_DAG))
    r7 = analyze(fig7, AnalysisConfig(builder="compact", sigma2=False, validate=False))
    out.append(SelfCheck("fig7_classes", str(ref.FIG7_CLASSES), str(r7.L + 1), r7.L + 1 == ref.FIG7_CLASSES))
    lam_ok = tuple(r7.partition.lambdas) == ref.fig7_lambdas()
    out.append(SelfCheck("fig7_recursive_description", "matches", "matches" if lam_ok else "differs", lam_ok))
    k_ok = r7.partition.K == ref.fig7_expected_K()
    out.append(SelfCheck("fig7_occurrence_counts", "matches", "matches" if k_ok else "differs", k_ok))
    out.append(_laurent_check("fig7_mu_published", ref.FIG7_MU, r7.constants.mu))

    for k in (2, 3, 4, 5):
        rk = analyze(named_pattern(f"star:{k}"), AnalysisConfig(sigma2=False))
        out.append(_laurent_check(f"star{k}_mu", ref.star_mu(k), rk.constants.mu))
    for name in ("node", "edge"):
        rc = analyze(named_pattern(name))
        ok = rc.closed_form and rc.constants.mu == LaurentE.const(1) and rc.constants.sigma2.is_zero()
        out.append(SelfCheck(f"{name}_closed_form", "mu=1 sigma2=0", f"mu={rc.constants.mu} sigma2={rc.constants.sigma2}", ok))

    sys1 = build_planted_system(build_partition(fig1, "compact"))
    ex = expand_system(sys1, 12, FULL)
    t = unrooted_counts(ex.r)
    counts_ok = all(ex.p.at_u1(n) == n ** (n - 1) and t.at_u1(n) == n ** (n - 2) for n in range(2, 13))
    out.append(SelfCheck("fig1_series_counts", "n^(n-1), n^(n-2) for n<=12", "ok" if counts_ok else "differs", counts_ok))
    oracle_ok = all(compare(t.distribution(n), distribution(n, fig1)).equal for n in range(2, 8))
    out.append(SelfCheck("fig1_oracle_n_le_7", "equal", "equal" if oracle_ok else "differs", oracle_ok))
    cp = solve_critical_point(sys1)
    out.append(SelfCheck("fig1_compact_abar_sum", "1", str(sum(cp.abar, LaurentE())), sum(cp.abar, LaurentE()) == LaurentE.const(1)))
    return out


def _planar(pps):
    from .pattern import planar_embeddings

    return planar_embeddings(pps)


def cmd_selftest(cfg: RunConfig) -> tuple[str, int]:
    checks = selftest_checks()
    ok = all(c.ok for c in checks)
    code = EXIT_OK if ok else EXIT_VERIFY
    if cfg.fmt == "json":
        doc = {
            "version": __version__,
            "checks": [c.to_doc() for c in checks],
            "passed": sum(c.ok for c in checks),
            "failed": sum(not c.ok for c in checks),
        }
        return _dumps(doc), code
    width = max(len(c.name) for c in checks)
    lines = [f"{'PASS' if c.ok else 'FAIL'}  {c.name:<{width}}  expected {c.expected}  computed {c.computed}" for c in checks]
    lines.append(f"{sum(c.ok for c in checks)} passed, {sum(not c.ok for c in checks)} failed")
    return "\n".join(lines), code


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

COMMANDS: dict[str, Callable[[RunConfig], tuple[str, int]]] = {
    "analyze": cmd_analyze,
    "expand": cmd_expand,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "emit-system": cmd_emit_system,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treepatterns", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name != "selftest":
            p.add_argument("--pattern", default="paper:fig1", help="named pattern, JSON file or inline JSON")
            p.add_argument("--builder", choices=("naive", "compact", "both"), default="compact")
            p.add_argument("--class-limit", type=int, default=DEFAULT_CLASS_LIMIT)
        if name == "analyze":
            p.add_argument("--sigma2", action=argparse.BooleanOptionalAction, default=True)
            p.add_argument("--show-system", action="store_true")
        if name in ("expand", "oracle", "verify"):
            p.add_argument("--n", type=int, default=8)
        if name == "expand":
            p.add_argument("--mode", choices=(FULL, JET2), default=FULL)
            p.add_argument("--table", choices=("distribution", "moments", "forbidden", "forest"), default="")
        if name in ("oracle", "verify"):
            p.add_argument("--threads", type=int, default=1)
        p.add_argument("--format", choices=("text", "json", "latex"), default="text")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        pattern=getattr(args, "pattern", "paper:fig1"),
        builder=getattr(args, "builder", "compact"),
        sigma2=getattr(args, "sigma2", True),
        n=getattr(args, "n", 8),
        mode=getattr(args, "mode", FULL),
        fmt=args.format,
        threads=getattr(args, "threads", 1),
        class_limit=getattr(args, "class_limit", DEFAULT_CLASS_LIMIT),
        table=getattr(args, "table", ""),
        show_system=getattr(args, "show_system", False),
    )


def _fail(kind: str, exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}, sort_keys=True) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        text, code = COMMANDS[args.command](cfg)
    except (PatternError, TreeError, SeriesError, OracleError, ClassLimitExceeded, TermLimitExceeded, ValueError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_INPUT)
    except (AnalysisError, AmbiguousCount, PartitionError, NotDivisible, ArithmeticError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_INTERNAL)
    sys.stdout.write(text + "\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
