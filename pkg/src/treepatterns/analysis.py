"""Critical point, mean constant mu and variance constant sigma^2 of a planted system.

At u = 1 the dominant singularity is x0 = 1/e with sum_j a_j = 1, so every
quantity evaluated there is a Laurent polynomial in e.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import mpmath

from .algebra import (
    EINV,
    ONE,
    ZERO,
    E,
    Jet,
    LaurentE,
    RatFuncE,
    cofactor_column,
    det_bareiss,
    det_berkowitz,
    ffge_solve_parts,
    laurent_normalize,
)
from .partition import DEFAULT_CLASS_LIMIT, ClassPartition, build_partition, validate_partition
from .pattern import Pattern
from .system import EquationSystem, A, U, X, build_planted_system, jacobian

MAX_FIXED_POINT_ITERATIONS = 500


class AnalysisError(RuntimeError):
    """A structural check failed; this signals a bug upstream."""


@dataclass(frozen=True)
class CriticalPoint:
    x0: LaurentE
    abar: tuple[LaurentE, ...]
    Ebar: LaurentE = E
    iterations: int = 0

    def to_doc(self) -> dict[str, Any]:
        return {
            "x0": self.x0.to_json(),
            "abar": [a.to_json() for a in self.abar],
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class CltConstants:
    mu: LaurentE
    sigma2: LaurentE | None = None
    x_u: LaurentE | None = None
    a_u: tuple[RatFuncE, ...] | None = None
    x_uu: RatFuncE | None = None

    @property
    def mu_approx(self) -> mpmath.mpf:
        return self.mu.approx()

    @property
    def sigma2_approx(self) -> mpmath.mpf | None:
        return None if self.sigma2 is None else self.sigma2.approx()


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""

    def to_doc(self) -> dict[str, Any]:
        return {"ok": self.ok, "detail": self.detail}


def _approx_doc(f: LaurentE, digits: int = 10) -> dict[str, Any]:
    return {"laurent": f.to_json(), "text": str(f), "approx": mpmath.nstr(f.approx(), digits)}


# ---------------------------------------------------------------------------
# Point evaluations
# ---------------------------------------------------------------------------


def _eval_all(polys: Sequence, x: object, a: Sequence[object], u: object, Ev: object) -> list[object]:
    return [p.evaluate(x, a, u, Ev) for p in polys]


def _as_laurent(v: object) -> LaurentE:
    return LaurentE.coerce(v)


def solve_critical_point(sys: EquationSystem) -> CriticalPoint:
    """Fixed point of a -> F(1/e, a, 1).

    Class membership is decided at bounded depth, so iterating from the
    all-complement start reaches the exact solution after finitely many steps.
    """
    n = sys.size
    a: list[LaurentE] = [ONE] + [ZERO] * (n - 1)
    for it in range(1, MAX_FIXED_POINT_ITERATIONS + 1):
        nxt = [_as_laurent(v) for v in sys.evaluate(EINV, a, 1, E)]
        if nxt == a:
            break
        a = nxt
    else:
        raise AnalysisError("critical-point iteration did not stabilize")
    total = sum(a, ZERO)
    if total != ONE:
        raise AnalysisError(f"sum of critical values is {total}, expected 1")
    for j, v in enumerate(a):
        if v.approx() < 0:
            raise AnalysisError(f"critical value a_{j} = {v} is negative")
    return CriticalPoint(EINV, tuple(a), E, it)


def _matrix_at(J: Sequence[Sequence], x: object, a: Sequence[object], u: object, Ev: object) -> list[list[object]]:
    n = len(J)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            v = J[i][j].evaluate(x, a, u, Ev)
            row.append((1 if i == j else 0) - v)
        out.append(row)
    return out


def _partials(sys: EquationSystem, var) -> list:
    return [f.diff(var) for f in sys.equations]


def check_left_eigenvector(sys: EquationSystem, cp: CriticalPoint) -> Check:
    """(1,...,1)(I - F_a) = 0 and x0 (1,...,1) F_x = 1 at the critical point."""
    M = _matrix_at(jacobian(sys), cp.x0, cp.abar, 1, cp.Ebar)
    cols = [_as_laurent(sum((M[i][j] for i in range(sys.size)), ZERO)) for j in range(sys.size)]
    bad = [j for j, c in enumerate(cols) if not c.is_zero()]
    fx = _as_laurent(sum(_eval_all(_partials(sys, X), cp.x0, cp.abar, 1, cp.Ebar), ZERO))
    ok_x = cp.x0 * fx == ONE
    ok = not bad and ok_x
    detail = "ones^T (I - F_a) = 0 and x0 ones^T F_x = 1" if ok else f"nonzero columns {bad}, x0*sum F_x = {cp.x0 * fx}"
    return Check("left_eigenvector", ok, detail)


def compute_mu(sys: EquationSystem, cp: CriticalPoint) -> tuple[LaurentE, LaurentE]:
    """mu from (1/x0) b^T F_u / b^T F_x with b = ones, and from (1/e) sum dP_j/du."""
    fu = _as_laurent(sum(_eval_all(_partials(sys, U), cp.x0, cp.abar, 1, cp.Ebar), ZERO))
    fx = _as_laurent(sum(_eval_all(_partials(sys, X), cp.x0, cp.abar, 1, cp.Ebar), ZERO))
    general = laurent_normalize(fu / fx) * E
    direct = EINV * _as_laurent(
        sum(_eval_all([p.diff(U) for p in _stripped_x(sys)], cp.x0, cp.abar, 1, cp.Ebar), ZERO)
    )
    return general, direct


def _stripped_x(sys: EquationSystem) -> list:
    """P_j = F_j / x (every monomial carries exactly one factor x)."""
    from .system import Mono, SysPoly

    out = []
    for f in sys.equations:
        out.append(SysPoly.build((Mono(m.a, m.x - 1, m.u, m.E), c) for m, c in f.terms))
    return out


# ---------------------------------------------------------------------------
# Determinant identities
# ---------------------------------------------------------------------------


def check_determinant_lemma(sys: EquationSystem, points: int = 50, seed: int = 0) -> Check:
    """det(I - F_a(x,a,1)) = 1 - xE and det M = 1 (first row replaced by ones).

    E is treated as an independent variable, so agreement at more random
    rational points than the total degree makes a false identity improbable.
    """
    rng = random.Random(seed)
    J = jacobian(sys)
    n = sys.size
    deg = max(p.max_degree() for row in J for p in row) * n + 2
    count = max(points, deg + 1)

    def rnd() -> Fraction:
        return Fraction(rng.randint(-40, 40), rng.randint(1, 40))

    for k in range(count):
        x, Ev = rnd(), rnd()
        a = [rnd() for _ in range(n)]
        M = _matrix_at(J, x, a, 1, Ev)
        d = det_bareiss(M)
        if d != 1 - x * Ev:
            return Check("determinant_lemma", False, f"det(I - F_a) = {d} != 1 - xE at point {k}")
        M1 = [[1] * n] + M[1:]
        d1 = det_bareiss(M1)
        if d1 != 1:
            return Check("determinant_lemma", False, f"det M = {d1} != 1 at point {k}")
    return Check("determinant_lemma", True, f"both identities hold at {count} random rational points")


def determinant_gradient(
    sys: EquationSystem, x: object, a: Sequence[object], u: object, Ev: object, exact: bool = True
) -> tuple[object, list[object], object]:
    """Partials (D_x, D_a, D_u) of D = det(I - F_a) via one jet determinant per direction.

    ``Ev`` is the value of exp(sum a); moving along a_j scales it by the same jet.
    """
    J = jacobian(sys)
    n = sys.size
    det = det_bareiss if exact else det_berkowitz

    def along(dx: object, da: Sequence[object], du: object) -> object:
        dsum = sum(da, 0)
        xj = Jet(x, dx)
        aj = [Jet(a[i], da[i]) for i in range(n)]
        uj = Jet(u, du)
        Ej = Jet(Ev, Ev * dsum)
        return det(_matrix_at(J, xj, aj, uj, Ej))

    zeros = [0] * n
    Dx = Jet.lift(along(1, zeros, 0)).deriv
    Du = Jet.lift(along(0, zeros, 1)).deriv
    Da = []
    for j in range(n):
        da = [1 if i == j else 0 for i in range(n)]
        Da.append(Jet.lift(along(0, da, 0)).deriv)
    return Dx, Da, Du


# ---------------------------------------------------------------------------
# Variance
# ---------------------------------------------------------------------------


def compute_sigma2(sys: EquationSystem, cp: CriticalPoint, mu: LaurentE) -> CltConstants:
    """sigma^2 = -e x_uu(1) + mu^2 + mu along the singular curve x(u), a(u)."""
    n = sys.size
    x0, abar, Ev = cp.x0, list(cp.abar), cp.Ebar
    x_u = -(mu * EINV)

    Fx = [_as_laurent(v) for v in _eval_all(_partials(sys, X), x0, abar, 1, Ev)]
    Fu = [_as_laurent(v) for v in _eval_all(_partials(sys, U), x0, abar, 1, Ev)]
    Amat = [[_as_laurent(v) for v in row] for row in _matrix_at(jacobian(sys), x0, abar, 1, Ev)]

    Dx, Da, Du = determinant_gradient(sys, x0, abar, ONE, Ev)
    Dx, Du = _as_laurent(Dx), _as_laurent(Du)
    Da = [_as_laurent(v) for v in Da]

    rows = [list(Amat[i]) for i in range(1, n)] + [Da]
    rhs = [Fx[i] * x_u + Fu[i] for i in range(1, n)] + [-(Dx * x_u + Du)]
    nums, den = ffge_solve_parts(rows, rhs)
    nums = [_as_laurent(v) for v in nums]
    den = _as_laurent(den)
    a_u = tuple(RatFuncE(v, den) for v in nums)

    dsum = sum(nums, ZERO)
    xj = Jet(x0, den * x_u)
    aj = [Jet(abar[i], nums[i]) for i in range(n)]
    uj = Jet(ONE, den)
    Ej = Jet(Ev, Ev * dsum)
    Mj = _matrix_at(jacobian(sys), xj, aj, uj, Ej)
    b = [Jet.lift(v) for v in cofactor_column(Mj, 0)] if n > 1 else [Jet(ONE, ZERO)]
    Fxj = _eval_all(_partials(sys, X), xj, aj, uj, Ej)
    Fuj = _eval_all(_partials(sys, U), xj, aj, uj, Ej)
    d1 = Jet.lift(sum((b[i] * Fxj[i] for i in range(n)), Jet(ZERO, ZERO)))
    d2 = Jet.lift(sum((b[i] * Fuj[i] for i in range(n)), Jet(ZERO, ZERO)))
    d1v, d2v = _as_laurent(d1.value), _as_laurent(d2.value)
    if not (d1v * x_u + d2v).is_zero():
        raise AnalysisError("b^T (F_x x_u + F_u) does not vanish at the critical point")
    numer = -(_as_laurent(d1.deriv) * x_u + _as_laurent(d2.deriv))
    first = sum((Amat[0][j] * nums[j] for j in range(n)), ZERO) - den * (Fx[0] * x_u + Fu[0])
    if not first.is_zero():
        raise AnalysisError("a_u violates the dropped first row of (I - F_a) a_u = F_x x_u + F_u")
    x_uu = numer / (den * d1v)
    sigma2 = laurent_normalize(x_uu * (-E) + mu * mu + mu)
    return CltConstants(mu, sigma2, x_u, a_u, x_uu)


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisConfig:
    builder: str = "compact"
    sigma2: bool = True
    class_limit: int = DEFAULT_CLASS_LIMIT
    validate: bool = True
    validate_nmax: int = 8
    lemma_points: int = 50


@dataclass
class AnalysisReport:
    pattern: str
    builder: str
    constants: CltConstants
    L: int | None = None
    system: EquationSystem | None = None
    partition: ClassPartition | None = None
    critical_point: CriticalPoint | None = None
    checks: dict[str, Check] = field(default_factory=dict)
    closed_form: bool = False
    seconds: float = 0.0

    def to_doc(self) -> dict[str, Any]:
        c = self.constants
        return {
            "pattern": self.pattern,
            "builder": self.builder,
            "L": self.L,
            "closed_form": self.closed_form,
            "mu": _approx_doc(c.mu),
            "sigma2": _approx_doc(c.sigma2) if c.sigma2 is not None else "skipped",
            "checks": {k: v.to_doc() for k, v in sorted(self.checks.items())},
        }


def closed_form(m: Pattern) -> CltConstants:
    """A single node occurs n times and an edge n - 1 times."""
    return CltConstants(ONE, ZERO, ZERO, (), RatFuncE(ZERO, ONE))


def analyze(m: Pattern, config: AnalysisConfig = AnalysisConfig()) -> AnalysisReport:
    start = time.perf_counter()
    if m.size < 3:
        return AnalysisReport(m.name, "closed-form", closed_form(m), closed_form=True)
    part = build_partition(m, config.builder, config.class_limit)
    sys = build_planted_system(part, m.name)
    checks: dict[str, Check] = {}
    if config.validate:
        rep = validate_partition(part, m, config.validate_nmax)
        checks["partition"] = Check("partition", rep.ok, f"{rep.to_doc()}")
        if not rep.ok:
            raise AnalysisError(f"partition validation failed: {rep.to_doc()}")
    cp = solve_critical_point(sys)
    ev = check_left_eigenvector(sys, cp)
    checks[ev.name] = ev
    if not ev.ok:
        raise AnalysisError(ev.detail)
    mu, mu_direct = compute_mu(sys, cp)
    checks["mu_formulas_agree"] = Check("mu_formulas_agree", mu == mu_direct, f"{mu} vs {mu_direct}")
    if mu != mu_direct:
        raise AnalysisError(f"mu formulas disagree: {mu} vs {mu_direct}")
    # proved for the naive construction; reported as an observation for compact systems
    lemma = check_determinant_lemma(sys, config.lemma_points)
    checks[lemma.name] = lemma
    constants = CltConstants(mu)
    if config.sigma2:
        constants = compute_sigma2(sys, cp, mu)
        checks["a_u_full_system"] = Check(
            "a_u_full_system", True, "a_u satisfies every row of (I - F_a) a_u = F_x x_u + F_u"
        )
        if constants.sigma2.approx() < 0:
            raise AnalysisError(f"negative variance constant {constants.sigma2}")
    return AnalysisReport(
        m.name,
        config.builder,
        constants,
        part.L,
        sys,
        part,
        cp,
        checks,
        seconds=time.perf_counter() - start,
    )
