"""Exact scalars over Q(e) with e a free transcendental, jets, and linear algebra.

* ``Rat`` is :class:`fractions.Fraction`.
* :class:`LaurentE` is an element of Q[e, 1/e], stored densely from its lowest power.
* :class:`RatFuncE` is a quotient of two Laurent polynomials, kept reduced.
* :class:`Jet` is a first-order dual number over any of the above.

Determinants use Bareiss elimination when a nonzero pivot can be found and the
division-free Berkowitz recurrence otherwise, so they also work over jets whose
value part is singular.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, TypeVar, Union

import mpmath

Rat = Fraction
Scalar = Union[int, Fraction, "LaurentE", "RatFuncE"]
T = TypeVar("T")

DECIMAL_DIGITS = 50


class NotDivisible(ArithmeticError):
    """Raised when an exact division leaves a remainder."""

    def __init__(self, message: str, residual: object = None):
        super().__init__(message)
        self.residual = residual


class SingularMatrix(ArithmeticError):
    """Raised when a linear system has no unique solution."""


# ---------------------------------------------------------------------------
# Dense univariate helpers (coefficient lists, lowest degree first)
# ---------------------------------------------------------------------------


def _trim(c: list[Fraction]) -> list[Fraction]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Polynomial long division a = q*b + r with deg r < deg b."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    _trim(rem)
    if len(rem) < len(b):
        return [], rem
    q = [Fraction(0)] * (len(rem) - len(b) + 1)
    lead = b[-1]
    for k in range(len(q) - 1, -1, -1):
        coef = rem[k + len(b) - 1] / lead
        q[k] = coef
        if coef:
            for j, y in enumerate(b):
                rem[k + j] -= coef * y
    return _trim(q), _trim(rem[: len(b) - 1])


def _poly_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    x, y = _trim(list(a)), _trim(list(b))
    while y:
        _, r = _poly_divmod(x, y)
        x, y = y, r
    if not x:
        return []
    lead = x[-1]
    return [c / lead for c in x]


# ---------------------------------------------------------------------------
# Laurent polynomials in e
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaurentE:
    """Sum of c_k e^k over finitely many integers k; ``coeffs[i]`` multiplies e^(low+i)."""

    low: int = 0
    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        c = [Fraction(x) for x in self.coeffs]
        low = self.low
        start = 0
        while start < len(c) and c[start] == 0:
            start += 1
        c = _trim(c[start:])
        object.__setattr__(self, "coeffs", tuple(c))
        object.__setattr__(self, "low", low + start if c else 0)

    # construction ---------------------------------------------------------
    @staticmethod
    def const(value: int | Fraction) -> LaurentE:
        return LaurentE(0, (Fraction(value),))

    @staticmethod
    def monomial(coeff: int | Fraction, power: int) -> LaurentE:
        return LaurentE(power, (Fraction(coeff),))

    @staticmethod
    def from_terms(terms: Mapping[int, int | Fraction]) -> LaurentE:
        items = {k: Fraction(v) for k, v in terms.items() if v}
        if not items:
            return LaurentE()
        lo, hi = min(items), max(items)
        return LaurentE(lo, tuple(items.get(k, Fraction(0)) for k in range(lo, hi + 1)))

    @staticmethod
    def coerce(value: object) -> LaurentE:
        if isinstance(value, LaurentE):
            return value
        if isinstance(value, (int, Fraction)):
            return LaurentE.const(value)
        if isinstance(value, RatFuncE):
            return value.to_laurent()
        raise TypeError(f"cannot convert {type(value).__name__} to LaurentE")

    # inspection -------------------------------------------------------------
    def terms(self) -> dict[int, Fraction]:
        return {self.low + i: c for i, c in enumerate(self.coeffs) if c}

    @property
    def high(self) -> int:
        return self.low + len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monomial(self) -> bool:
        return len(self.terms()) == 1

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    # arithmetic ---------------------------------------------------------------
    def __add__(self, other: object) -> LaurentE:
        if not isinstance(other, _LAURENT_OK):
            return NotImplemented
        o = LaurentE.coerce(other)
        if not o.coeffs:
            return self
        if not self.coeffs:
            return o
        lo = min(self.low, o.low)
        hi = max(self.high, o.high)
        out = [Fraction(0)] * (hi - lo + 1)
        for i, c in enumerate(self.coeffs):
            out[self.low - lo + i] += c
        for i, c in enumerate(o.coeffs):
            out[o.low - lo + i] += c
        return LaurentE(lo, tuple(out))

    __radd__ = __add__

    def __neg__(self) -> LaurentE:
        return LaurentE(self.low, tuple(-c for c in self.coeffs))

    def __sub__(self, other: object) -> LaurentE:
        if not isinstance(other, _LAURENT_OK):
            return NotImplemented
        return self + (-LaurentE.coerce(other))

    def __rsub__(self, other: object) -> LaurentE:
        if not isinstance(other, _LAURENT_OK):
            return NotImplemented
        return LaurentE.coerce(other) + (-self)

    def __mul__(self, other: object) -> LaurentE:
        if not isinstance(other, _LAURENT_OK):
            return NotImplemented
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return LaurentE()
            return LaurentE(self.low, tuple(c * other for c in self.coeffs))
        o = LaurentE.coerce(other)
        return LaurentE(self.low + o.low, tuple(_poly_mul(self.coeffs, o.coeffs)))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> LaurentE:
        if k < 0:
            if not self.is_monomial():
                raise NotDivisible(f"{self} is not a unit of Q[e, 1/e]", self)
            (p, c), = self.terms().items()
            return LaurentE.monomial(Fraction(1) / c ** (-k), p * k)
        result = LaurentE.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def exact_div(self, other: object) -> LaurentE:
        """Quotient in Q[e, 1/e]; raises :class:`NotDivisible` with the residual."""
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return LaurentE(self.low, tuple(c / other for c in self.coeffs))
        o = LaurentE.coerce(other)
        if not o.coeffs:
            raise ZeroDivisionError("division by the zero Laurent polynomial")
        if not self.coeffs:
            return LaurentE()
        q, r = _poly_divmod(self.coeffs, o.coeffs)
        if r:
            raise NotDivisible(f"({self}) / ({o}) is not a Laurent polynomial", LaurentE(self.low, tuple(r)))
        return LaurentE(self.low - o.low, tuple(q))

    def __truediv__(self, other: object) -> RatFuncE:
        if isinstance(other, RatFuncE):
            return RatFuncE.coerce(self) / other
        if not isinstance(other, _LAURENT_OK):
            return NotImplemented
        return RatFuncE(self, LaurentE.coerce(other))

    def __rtruediv__(self, other: object) -> RatFuncE:
        if not isinstance(other, _LAURENT_OK):
            return NotImplemented
        return RatFuncE(LaurentE.coerce(other), self)

    # comparison ---------------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = LaurentE.const(other)
        if isinstance(other, RatFuncE):
            return other == self
        if not isinstance(other, LaurentE):
            return NotImplemented
        return self.low == other.low and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.low, self.coeffs))

    # numerics / output ------------------------------------------------------
    def approx(self, digits: int = DECIMAL_DIGITS) -> mpmath.mpf:
        with mpmath.workdps(digits + 10):
            e = mpmath.e
            total = mpmath.mpf(0)
            for k, c in self.terms().items():
                total += mpmath.mpf(c.numerator) / c.denominator * e**k
            return +total

    def __float__(self) -> float:
        return float(self.approx(30))

    def to_json(self) -> dict[str, str]:
        return {str(k): _frac_text(c) for k, c in sorted(self.terms().items())}

    @staticmethod
    def from_json(doc: Mapping[str, str]) -> LaurentE:
        return LaurentE.from_terms({int(k): Fraction(v) for k, v in doc.items()})

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in sorted(self.terms().items(), reverse=True):
            mag = abs(c)
            if k == 0:
                body = _frac_text(mag)
            else:
                pw = "e" if k == 1 else f"e^{k}"
                body = pw if mag == 1 else f"{_frac_text(mag)}*{pw}"
            parts.append(("-" if c < 0 else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def latex(self) -> str:
        if not self.coeffs:
            return "0"
        out = []
        for k, c in sorted(self.terms().items(), reverse=True):
            mag = abs(c)
            coef = "" if mag == 1 and k != 0 else _latex_frac(mag)
            pw = "" if k == 0 else ("e" if k == 1 else f"e^{{{k}}}")
            out.append(("-" if c < 0 else "+", coef + pw))
        text = ("-" if out[0][0] == "-" else "") + out[0][1]
        for sign, body in out[1:]:
            text += f" {sign} {body}"
        return text


def _frac_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _latex_frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"\\frac{{{c.numerator}}}{{{c.denominator}}}"


_LAURENT_OK = (int, Fraction, LaurentE)

E = LaurentE.monomial(1, 1)
EINV = LaurentE.monomial(1, -1)
ZERO = LaurentE()
ONE = LaurentE.const(1)


# ---------------------------------------------------------------------------
# Rational functions in e
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatFuncE:
    """Reduced quotient num/den of Laurent polynomials in e.

    Normal form: no common polynomial factor, and the denominator has lowest
    power 0 and leading coefficient 1.
    """

    num: LaurentE
    den: LaurentE

    def __post_init__(self) -> None:
        num = LaurentE.coerce(self.num)
        den = LaurentE.coerce(self.den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            object.__setattr__(self, "num", ZERO)
            object.__setattr__(self, "den", ONE)
            return
        g = _poly_gcd(num.coeffs, den.coeffs)
        if len(g) > 1:
            num = LaurentE(num.low, tuple(_poly_divmod(num.coeffs, g)[0]))
            den = LaurentE(den.low, tuple(_poly_divmod(den.coeffs, g)[0]))
        lead = den.coeffs[-1]
        num = LaurentE(num.low - den.low, tuple(c / lead for c in num.coeffs))
        den = LaurentE(0, tuple(c / lead for c in den.coeffs))
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @staticmethod
    def coerce(value: object) -> RatFuncE:
        if isinstance(value, RatFuncE):
            return value
        return RatFuncE(LaurentE.coerce(value), ONE)

    def is_laurent(self) -> bool:
        return self.den == ONE

    def to_laurent(self) -> LaurentE:
        if not self.is_laurent():
            raise NotDivisible(f"{self} is not a Laurent polynomial in e", self)
        return self.num

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __add__(self, other: object) -> RatFuncE:
        if not isinstance(other, _RATFUNC_OK):
            return NotImplemented
        o = RatFuncE.coerce(other)
        return RatFuncE(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> RatFuncE:
        return RatFuncE(-self.num, self.den)

    def __sub__(self, other: object) -> RatFuncE:
        if not isinstance(other, _RATFUNC_OK):
            return NotImplemented
        return self + (-RatFuncE.coerce(other))

    def __rsub__(self, other: object) -> RatFuncE:
        if not isinstance(other, _RATFUNC_OK):
            return NotImplemented
        return RatFuncE.coerce(other) - self

    def __mul__(self, other: object) -> RatFuncE:
        if not isinstance(other, _RATFUNC_OK):
            return NotImplemented
        o = RatFuncE.coerce(other)
        return RatFuncE(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> RatFuncE:
        if not isinstance(other, _RATFUNC_OK):
            return NotImplemented
        o = RatFuncE.coerce(other)
        return RatFuncE(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other: object) -> RatFuncE:
        if not isinstance(other, _RATFUNC_OK):
            return NotImplemented
        return RatFuncE.coerce(other) / self

    def exact_div(self, other: object) -> RatFuncE:
        return self / other

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, LaurentE)):
            other = RatFuncE.coerce(other)
        if not isinstance(other, RatFuncE):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def approx(self, digits: int = DECIMAL_DIGITS) -> mpmath.mpf:
        with mpmath.workdps(digits + 10):
            return +(self.num.approx(digits + 10) / self.den.approx(digits + 10))

    def __str__(self) -> str:
        if self.is_laurent():
            return str(self.num)
        return f"({self.num}) / ({self.den})"


_RATFUNC_OK = (int, Fraction, LaurentE, RatFuncE)


def laurent_normalize(f: RatFuncE | LaurentE) -> LaurentE:
    """The Laurent polynomial equal to ``f``; raises :class:`NotDivisible` otherwise."""
    if isinstance(f, LaurentE):
        return f
    return f.to_laurent()


# ---------------------------------------------------------------------------
# Jets (dual numbers)
# ---------------------------------------------------------------------------


def _zero_like(value: object) -> object:
    return value * 0


@dataclass(frozen=True)
class Jet:
    """value + deriv*eps with eps^2 = 0, over any exact scalar ring."""

    value: object
    deriv: object = 0

    @staticmethod
    def lift(v: object) -> Jet:
        return v if isinstance(v, Jet) else Jet(v, 0)

    def __add__(self, other: object) -> Jet:
        o = Jet.lift(other)
        return Jet(self.value + o.value, self.deriv + o.deriv)

    __radd__ = __add__

    def __neg__(self) -> Jet:
        return Jet(-self.value, -self.deriv)

    def __sub__(self, other: object) -> Jet:
        o = Jet.lift(other)
        return Jet(self.value - o.value, self.deriv - o.deriv)

    def __rsub__(self, other: object) -> Jet:
        return Jet.lift(other) - self

    def __mul__(self, other: object) -> Jet:
        if not isinstance(other, Jet):
            return Jet(self.value * other, self.deriv * other)
        return Jet(self.value * other.value, self.value * other.deriv + self.deriv * other.value)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Jet:
        if k < 0:
            raise ValueError("negative powers of jets are not supported")
        if k == 0:
            return Jet(self.value**0 if not isinstance(self.value, int) else 1, 0)
        return Jet(self.value**k, k * self.value ** (k - 1) * self.deriv)

    def exact_div(self, other: object) -> Jet:
        """Quotient when it exists in the jet ring; the value part of ``other`` must be nonzero."""
        o = Jet.lift(other)
        q = _exact(self.value, o.value)
        dq = _exact(self.deriv - q * o.deriv, o.value)
        return Jet(q, dq)

    def __truediv__(self, other: object) -> Jet:
        o = Jet.lift(other)
        q = self.value / o.value
        return Jet(q, (self.deriv - q * o.deriv) / o.value)

    def is_zero(self) -> bool:
        return _is_zero(self.value) and _is_zero(self.deriv)

    def __bool__(self) -> bool:
        return not self.is_zero()


def _is_zero(v: object) -> bool:
    if isinstance(v, (int, Fraction)):
        return v == 0
    return v.is_zero()


def _exact(a: object, b: object) -> object:
    """Exact quotient a/b in the ring of ``a``."""
    if isinstance(a, Jet) or isinstance(b, Jet):
        return Jet.lift(a).exact_div(b)
    if isinstance(a, (LaurentE, RatFuncE)):
        return a.exact_div(b)
    if isinstance(b, (LaurentE, RatFuncE)):
        return LaurentE.coerce(a).exact_div(b)
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if r:
            raise NotDivisible(f"{a} / {b} is not an integer", r)
        return q
    return Fraction(a) / Fraction(b)


def _pivot_nonzero(v: object) -> bool:
    """Whether ``v`` can serve as an exact-division pivot."""
    if isinstance(v, Jet):
        return not _is_zero(v.value)
    return not _is_zero(v)


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------

Matrix = list[list[object]]


def det_berkowitz(M: Sequence[Sequence[object]]) -> object:
    """Division-free determinant (Berkowitz); valid over any commutative ring."""
    n = len(M)
    if n == 0:
        return 1
    if n == 1:
        return M[0][0]
    # characteristic polynomial coefficients, built from the bottom-right corner
    poly = [1, -M[n - 1][n - 1]]
    for k in range(n - 2, -1, -1):
        size = n - k  # the leading principal block now has this many rows
        a = M[k][k]
        row = [M[k][j] for j in range(k + 1, n)]
        col = [M[i][k] for i in range(k + 1, n)]
        sub = [list(M[i][k + 1 :]) for i in range(k + 1, n)]
        # Toeplitz column: 1, -a, -R C, -R A C, -R A^2 C, ...
        toep = [1, -a]
        vec = col
        for _ in range(size - 1):
            toep.append(-_dot(row, vec))
            vec = [_dot(r, vec) for r in sub]
        new = []
        for i in range(size + 1):
            acc = 0
            for j in range(min(i, len(poly) - 1) + 1):
                if i - j < len(toep):
                    acc = acc + toep[i - j] * poly[j]
            new.append(acc)
        poly = new
    det = poly[n]
    return det if n % 2 == 0 else -det


def _dot(a: Sequence[object], b: Sequence[object]) -> object:
    acc: object = 0
    for x, y in zip(a, b):
        acc = acc + x * y
    return acc


def det_bareiss(M: Sequence[Sequence[object]]) -> object:
    """Fraction-free determinant; falls back to Berkowitz when no usable pivot exists."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(r) for r in M]
    sign = 1
    prev: object = 1
    for k in range(n - 1):
        piv = next((i for i in range(k, n) if _pivot_nonzero(A[i][k])), None)
        if piv is None:
            if all(_is_zero(A[i][k]) if not isinstance(A[i][k], Jet) else A[i][k].is_zero() for i in range(k, n)):
                return A[0][0] * 0
            return det_berkowitz(M)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        pk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            for j in range(k + 1, n):
                A[i][j] = _exact(A[i][j] * pk - aik * A[k][j], prev)
            A[i][k] = 0
        prev = pk
    d = A[n - 1][n - 1]
    return d if sign > 0 else -d


def det(M: Sequence[Sequence[object]]) -> object:
    return det_bareiss(M)


def cofactor_column(M: Sequence[Sequence[object]], col: int = 0) -> list[object]:
    """Cofactors C_{i,col}; for col=0 this is the generalized vector product of the other columns."""
    n = len(M)
    out = []
    for i in range(n):
        minor = [[M[r][c] for c in range(n) if c != col] for r in range(n) if r != i]
        d = det_bareiss(minor)
        out.append(d if (i + col) % 2 == 0 else -d)
    return out


def det_adjugate(M: Sequence[Sequence[object]]) -> tuple[object, list[object]]:
    """Determinant and the cofactor vector b with b^T M = (det, 0, ..., 0)."""
    b = cofactor_column(M, 0)
    d = _dot(b, [M[i][0] for i in range(len(M))]) if M else 1
    return d, b


def ffge_solve_parts(M: Sequence[Sequence[object]], rhs: Sequence[object]) -> tuple[list[object], object]:
    """Fraction-free Gauss-Jordan elimination over an integral domain.

    Returns ``(nums, den)`` with ``M @ (nums/den) = rhs`` and ``den = ±det M``.
    """
    n = len(M)
    if len(rhs) != n or any(len(r) != n for r in M):
        raise ValueError("ffge_solve needs a square matrix and a matching right-hand side")
    A = [list(M[i]) + [rhs[i]] for i in range(n)]
    prev: object = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if _pivot_nonzero(A[i][k])), None)
        if piv is None:
            raise SingularMatrix(f"matrix is singular (column {k})")
        A[k], A[piv] = A[piv], A[k]
        pk = A[k][k]
        for i in range(n):
            if i == k:
                continue
            aik = A[i][k]
            for j in range(n + 1):
                if j == k:
                    continue
                A[i][j] = _exact(A[i][j] * pk - aik * A[k][j], prev)
            A[i][k] = 0
        prev = pk
    den = A[n - 1][n - 1]
    return [A[i][n] for i in range(n)], den


def ffge_solve(M: Sequence[Sequence[object]], rhs: Sequence[object]) -> list[RatFuncE]:
    """Exact solution of M x = rhs for Laurent-polynomial (or rational) entries."""
    nums, den = ffge_solve_parts(
        [[LaurentE.coerce(v) for v in row] for row in M], [LaurentE.coerce(v) for v in rhs]
    )
    return [RatFuncE(x, den) for x in nums]


def mat_vec(M: Sequence[Sequence[object]], v: Sequence[object]) -> list[object]:
    return [_dot(row, v) for row in M]


def vec_mat(v: Sequence[object], M: Sequence[Sequence[object]]) -> list[object]:
    n = len(M[0]) if M else 0
    return [_dot(v, [M[i][j] for i in range(len(M))]) for j in range(n)]


def map_matrix(M: Iterable[Iterable[object]], f: Callable[[object], T]) -> list[list[T]]:
    return [[f(v) for v in row] for row in M]


def dumps_laurent(f: LaurentE) -> str:
    return json.dumps(f.to_json(), sort_keys=True)
