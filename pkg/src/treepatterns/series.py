"""Truncated bivariate expansion of the planted system and the rooted equation.

Series are stored in exponential form: entry n of a series is n! [x^n] f(x, u),
which is an integer polynomial in u.  In ``jet2`` mode only the Taylor
coefficients at u = 1 up to order two are kept, which is enough for exact
means and variances at large n.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import mpmath

from .system import EquationSystem, Mono, SysPoly

FULL = "full"
JET2 = "jet2"
DEFAULT_ORDER = {FULL: 16, JET2: 60}

Coeff = tuple[int, ...]


class SeriesError(ValueError):
    """Unsupported request (order above the cap, missing mode)."""


# ---------------------------------------------------------------------------
# Coefficient rings
# ---------------------------------------------------------------------------


class _FullRing:
    """Integer polynomials in u as coefficient tuples."""

    name = FULL
    zero: Coeff = ()
    one: Coeff = (1,)

    @staticmethod
    def add(a: Coeff, b: Coeff) -> Coeff:
        if len(a) < len(b):
            a, b = b, a
        if not b:
            return a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        while out and out[-1] == 0:
            out.pop()
        return tuple(out)

    @staticmethod
    def mul(a: Coeff, b: Coeff) -> Coeff:
        if not a or not b:
            return ()
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return tuple(out)

    @staticmethod
    def scale(a: Coeff, c: int) -> Coeff:
        return tuple(v * c for v in a) if c else ()

    @staticmethod
    def divide(a: Coeff, c: int) -> Coeff:
        out = []
        for v in a:
            q, r = divmod(v, c)
            if r:
                raise ArithmeticError(f"coefficient {v} not divisible by {c}")
            out.append(q)
        return tuple(out)

    @staticmethod
    def upow(a: Coeff, k: int) -> Coeff:
        return (0,) * k + a if a and k else a

    @staticmethod
    def at_one(a: Coeff) -> int:
        return sum(a)

    @staticmethod
    def moments(a: Coeff) -> tuple[int, int, int]:
        return sum(a), sum(m * v for m, v in enumerate(a)), sum(m * (m - 1) // 2 * v for m, v in enumerate(a))


class _Jet2Ring:
    """Taylor coefficients (c0, c1, c2) in d = u - 1."""

    name = JET2
    zero: Coeff = (0, 0, 0)
    one: Coeff = (1, 0, 0)

    @staticmethod
    def add(a: Coeff, b: Coeff) -> Coeff:
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2])

    @staticmethod
    def mul(a: Coeff, b: Coeff) -> Coeff:
        return (a[0] * b[0], a[0] * b[1] + a[1] * b[0], a[0] * b[2] + a[1] * b[1] + a[2] * b[0])

    @staticmethod
    def scale(a: Coeff, c: int) -> Coeff:
        return (a[0] * c, a[1] * c, a[2] * c)

    @staticmethod
    def divide(a: Coeff, c: int) -> Coeff:
        out = []
        for v in a:
            q, r = divmod(v, c)
            if r:
                raise ArithmeticError(f"coefficient {v} not divisible by {c}")
            out.append(q)
        return tuple(out)

    @staticmethod
    def upow(a: Coeff, k: int) -> Coeff:
        return _Jet2Ring.mul(a, (1, k, k * (k - 1) // 2)) if k else a

    @staticmethod
    def at_one(a: Coeff) -> int:
        return a[0]

    @staticmethod
    def moments(a: Coeff) -> tuple[int, int, int]:
        return a


RINGS = {FULL: _FullRing, JET2: _Jet2Ring}


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BivariateSeries:
    """Entries n! [x^n] f(x, u) for n = 0..N."""

    mode: str
    coeffs: tuple[Coeff, ...]

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def at_u1(self, n: int) -> int:
        return RINGS[self.mode].at_one(self.coeffs[n])

    def count(self, n: int, m: int) -> int:
        """Coefficient of u^m in entry n (full mode only)."""
        if self.mode != FULL:
            raise SeriesError("individual counts need full mode")
        c = self.coeffs[n]
        return c[m] if m < len(c) else 0

    def distribution(self, n: int) -> dict[int, int]:
        if self.mode != FULL:
            raise SeriesError("distributions need full mode")
        return {m: v for m, v in enumerate(self.coeffs[n]) if v}

    def moment_sums(self, n: int) -> tuple[int, int, int]:
        """(sum_m c_m, sum_m m c_m, sum_m C(m,2) c_m)."""
        return RINGS[self.mode].moments(self.coeffs[n])


def _binomials(N: int) -> list[list[int]]:
    return [[math.comb(n, k) for k in range(n + 1)] for n in range(N + 1)]


class _Engine:
    """Order-by-order evaluation of polynomial right-hand sides on EGF series.

    Products a^l / l! and their combinations are hash-consed nodes whose
    n-th coefficient only needs coefficients <= n of the factors.
    """

    def __init__(self, polys: Sequence[SysPoly], n_classes: int, N: int, ring: Any):
        self.ring = ring
        self.N = N
        self.n_classes = n_classes
        self.binom = _binomials(N)
        # node kinds: ("a", j) class series, ("E",), ("pd", j, l), ("mul", left, right)
        self.nodes: list[tuple] = []
        self.node_id: dict[tuple, int] = {}
        self.values: list[list[Coeff]] = []
        self.class_node = [self._node(("a", j)) for j in range(n_classes)]
        self.E = self._node(("E",))
        self.plans: list[list[tuple[int, int, int]]] = [self._plan(p) for p in polys]

    def _node(self, key: tuple) -> int:
        if key not in self.node_id:
            self.node_id[key] = len(self.nodes)
            self.nodes.append(key)
            self.values.append([])
        return self.node_id[key]

    def _pd(self, j: int, l: int) -> int:
        if l == 1:
            return self.class_node[j]
        self._pd(j, l - 1)
        return self._node(("pd", j, l))

    def _plan(self, poly: SysPoly) -> list[tuple[int, int, int]]:
        """(node, integer multiplier, u exponent) per monomial; every monomial has x^1."""
        plan = []
        for m, c in poly.terms:
            if m.x != 1:
                raise SeriesError("every monomial must carry exactly one factor x")
            factors = [self._pd(j, l) for j, l in m.a]
            if m.E:
                factors.append(self.E)
            weight = 1
            for _, l in m.a:
                weight *= math.factorial(l)
            mult = c * weight
            if mult.denominator != 1:
                raise SeriesError(f"coefficient {c} is not 1/prod(l!) times an integer")
            if not factors:
                node = -1
            else:
                node = factors[0]
                for f in factors[1:]:
                    node = self._node(("mul", node, f))
            plan.append((node, int(mult), m.u))
        return plan

    def _conv(self, a: list[Coeff], b: list[Coeff], n: int) -> Coeff:
        ring, row = self.ring, self.binom[n]
        acc = ring.zero
        for k in range(1, n):
            if a[k] and b[n - k]:
                acc = ring.add(acc, ring.scale(ring.mul(a[k], b[n - k]), row[k]))
        # constant terms of class series are zero; E has constant one
        if a[0]:
            acc = ring.add(acc, ring.mul(a[0], b[n]))
        if n and b[0]:
            acc = ring.add(acc, ring.mul(a[n], b[0]))
        return acc

    def _rhs(self, plan: list[tuple[int, int, int]], n: int) -> Coeff:
        """Entry n of x * sum(mult * u^k * node) = n * entry n-1 of the sum."""
        ring = self.ring
        if n == 0:
            return ring.zero
        acc = ring.zero
        for node, mult, k in plan:
            if node < 0:
                if n != 1:
                    continue
                v = ring.one
            else:
                v = self.values[node][n - 1]
            acc = ring.add(acc, ring.upow(ring.scale(v, mult), k))
        return ring.scale(acc, n)

    def _fill_nodes(self, n: int) -> None:
        ring = self.ring
        for idx, key in enumerate(self.nodes):
            kind = key[0]
            if kind == "a":
                continue
            vals = self.values[idx]
            if kind == "E":
                if n == 0:
                    vals.append(ring.one)
                    continue
                S = [self._sum_classes(m) for m in range(n + 1)]
                acc = ring.zero
                row = self.binom[n - 1]
                for k in range(1, n + 1):
                    if S[k]:
                        acc = ring.add(acc, ring.scale(ring.mul(S[k], vals[n - k]), row[k - 1]))
                vals.append(acc)
            elif kind == "pd":
                _, j, l = key
                prev = self.values[self._pd(j, l - 1)]
                base = self.values[self.class_node[j]]
                vals.append(ring.divide(self._conv(base, prev, n), l) if n else ring.zero)
            else:
                _, left, right = key
                vals.append(self._conv(self.values[left], self.values[right], n))

    def _sum_classes(self, n: int) -> Coeff:
        acc = self.ring.zero
        for j in range(self.n_classes):
            acc = self.ring.add(acc, self.values[self.class_node[j]][n])
        return acc

    def run(self, class_plans: int) -> list[list[Coeff]]:
        """Expand; the first ``class_plans`` plans define the classes, the rest are read off."""
        extra: list[list[Coeff]] = [[] for _ in range(len(self.plans) - class_plans)]
        for n in range(self.N + 1):
            new = [self._rhs(self.plans[j], n) for j in range(class_plans)]
            for j in range(class_plans):
                self.values[self.class_node[j]].append(new[j])
            for i in range(len(extra)):
                extra[i].append(self._rhs(self.plans[class_plans + i], n))
            self._fill_nodes(n)
        return [self.values[self.class_node[j]] for j in range(class_plans)] + extra


@dataclass(frozen=True)
class Expansion:
    mode: str
    classes: tuple[BivariateSeries, ...]
    p: BivariateSeries
    r: BivariateSeries | None = None


def _check_order(N: int, mode: str, cap: int | None) -> Any:
    if mode not in RINGS:
        raise SeriesError(f"unknown mode {mode!r}")
    limit = DEFAULT_ORDER[mode] if cap is None else cap
    if N < 0 or N > limit:
        raise SeriesError(f"order {N} outside 0..{limit} for mode {mode}")
    return RINGS[mode]


def expand_system(
    sys: EquationSystem, N: int, mode: str = FULL, rooted: bool = True, cap: int | None = None
) -> Expansion:
    """Class series a_0..a_L, their sum p and (optionally) the rooted series r to order N."""
    ring = _check_order(N, mode, cap)
    polys = list(sys.equations) + ([sys.rooted] if rooted else [])
    engine = _Engine(polys, sys.size, N, ring)
    out = engine.run(sys.size)
    classes = tuple(BivariateSeries(mode, tuple(c)) for c in out[: sys.size])
    p = [ring.zero] * (N + 1)
    for c in classes:
        p = [ring.add(p[n], c.coeffs[n]) for n in range(N + 1)]
    r = BivariateSeries(mode, tuple(out[sys.size])) if rooted else None
    return Expansion(mode, classes, BivariateSeries(mode, tuple(p)), r)


def expand_rooted(sys: EquationSystem, expansion: Expansion) -> BivariateSeries:
    """r = G(x, u, a); reuses the expansion when it already carries r."""
    if expansion.r is not None:
        return expansion.r
    return expand_system(sys, expansion.p.order, expansion.mode, rooted=True, cap=expansion.p.order).r


def unrooted_counts(r: BivariateSeries) -> BivariateSeries:
    """t_{n,m} = r_{n,m} / n; entry 0 is zero."""
    ring = RINGS[r.mode]
    out = [ring.zero]
    for n in range(1, len(r.coeffs)):
        out.append(ring.divide(r.coeffs[n], n))
    return BivariateSeries(r.mode, tuple(out))


def moments(t: BivariateSeries, n: int) -> tuple[Fraction, Fraction]:
    """Exact mean and variance of the occurrence count over trees of size n."""
    c0, c1, c2 = t.moment_sums(n)
    if c0 == 0:
        raise SeriesError(f"no trees of size {n}")
    mean = Fraction(c1, c0)
    var = Fraction(2 * c2, c0) + mean - mean * mean
    return mean, var


def exp_series(f: BivariateSeries) -> BivariateSeries:
    """exp of an EGF with zero constant term."""
    ring = RINGS[f.mode]
    N = f.order
    out = [ring.one]
    for m in range(1, N + 1):
        acc = ring.zero
        for k in range(1, m + 1):
            if f.coeffs[k]:
                acc = ring.add(acc, ring.scale(ring.mul(f.coeffs[k], out[m - k]), math.comb(m - 1, k - 1)))
        out.append(acc)
    return BivariateSeries(f.mode, tuple(out))


def forest_series(t: BivariateSeries) -> BivariateSeries:
    """Labeled forests: f = exp(t), with occurrences adding up over components."""
    return exp_series(t)


@dataclass(frozen=True)
class ForbiddenRow:
    n: int
    free: int
    total: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.free, self.total)


def forbidden_counts(t: BivariateSeries) -> list[ForbiddenRow]:
    """Trees of size n avoiding the pattern, against all n^(n-2) trees."""
    if t.mode != FULL:
        raise SeriesError("forbidden counts need full mode")
    return [ForbiddenRow(n, t.count(n, 0), t.at_u1(n)) for n in range(1, t.order + 1)]


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def _dec(q: Fraction, digits: int = 10) -> str:
    return mpmath.nstr(mpmath.mpf(q.numerator) / q.denominator, digits)


def moment_rows(t: BivariateSeries, start: int = 1) -> list[dict[str, Any]]:
    rows = []
    prev = None
    for n in range(max(start, 1), t.order + 1):
        mean, var = moments(t, n)
        row: dict[str, Any] = {"n": n, "mean": mean, "variance": var}
        row["dmean"] = None if prev is None else mean - prev[0]
        row["dvariance"] = None if prev is None else var - prev[1]
        rows.append(row)
        prev = (mean, var)
    return rows


def distribution_table(t: BivariateSeries, fmt: str = "tsv") -> str:
    rows = [(n, m, v) for n in range(1, t.order + 1) for m, v in sorted(t.distribution(n).items())]
    if fmt == "json":
        return json.dumps([{"n": n, "m": m, "t": v} for n, m, v in rows], sort_keys=True, indent=2)
    return "\n".join(["n\tm\tt"] + [f"{n}\t{m}\t{v}" for n, m, v in rows])


def moment_table(t: BivariateSeries, fmt: str = "tsv") -> str:
    rows = moment_rows(t)

    def text(v: Fraction | None) -> str:
        return "" if v is None else _dec(v)

    if fmt == "json":
        doc = [
            {k: (v if isinstance(v, int) or v is None else {"exact": str(v), "approx": _dec(v)}) for k, v in r.items()}
            for r in rows
        ]
        return json.dumps(doc, sort_keys=True, indent=2)
    lines = ["n\tmean\tvariance\tdmean\tdvariance"]
    for r in rows:
        lines.append(f"{r['n']}\t{text(r['mean'])}\t{text(r['variance'])}\t{text(r['dmean'])}\t{text(r['dvariance'])}")
    return "\n".join(lines)


def closed_form_counts(size: int, n: int) -> dict[int, int]:
    """Distribution for a single node (n occurrences) or an edge (n - 1)."""
    total = n ** (n - 2) if n >= 2 else 1
    return {n if size == 1 else n - 1: total}


def poly_has_u(poly: SysPoly) -> bool:
    return any(m.u for m, _ in poly.terms)


def mono_degree(m: Mono) -> int:
    return sum(l for _, l in m.a)
