"""Published reference values for the built-in patterns."""

from __future__ import annotations

from fractions import Fraction

from .algebra import EINV, ONE, E, LaurentE
from .partition import Term, multisets


def _frac_e(num: LaurentE, den: int, epow: int) -> LaurentE:
    return num * Fraction(1, den) * EINV**epow


_TWO_E_MINUS_1 = E * 2 - ONE

FIG1_MU = LaurentE.from_terms({-3: Fraction(5, 8)})
FIG1_SIGMA2 = LaurentE.from_terms(
    {-3: Fraction(5, 8), -4: Fraction(9, 4), -5: Fraction(21, 8), -6: Fraction(-175, 32)}
)
FIG1_MU_DECIMAL = "0.0311169177"
FIG1_SIGMA2_DECIMAL = "0.0764585401"

# critical values of the eleven naive classes of the first example
FIG1_ABAR = (
    _frac_e(_TWO_E_MINUS_1, 2, 1),
    _frac_e(_TWO_E_MINUS_1**2, 8, 3),
    _frac_e(_TWO_E_MINUS_1**3, 16, 5),
    _frac_e(_TWO_E_MINUS_1**2, 8, 5),
    _frac_e(_TWO_E_MINUS_1, 16, 5),
    _frac_e(_TWO_E_MINUS_1**4, 128, 7),
    _frac_e(_TWO_E_MINUS_1**3, 32, 7),
    _frac_e(_TWO_E_MINUS_1**2, 64, 7),
    _frac_e(_TWO_E_MINUS_1**2, 32, 7),
    _frac_e(_TWO_E_MINUS_1, 32, 7),
    _frac_e(ONE, 128, 7),
)
FIG1_NAIVE_K = (0, 0, 0, 1, 2, 1, 2, 3, 3, 4, 5)

FIG7_CLASSES = 8
FIG7_MU = LaurentE.from_terms({-3: Fraction(32), -2: Fraction(-43, 8)})
FIG7_MU_DECIMAL = "0.865759040"
FIG7_DAG: tuple[Term, ...] = ((0, 0, 0), (0, 1), (1, 1), (0, 0, 0, 0), (0, 4), (4, 4))

_ALL = tuple(range(8))
_REST = (0, 2, 3, 5, 6, 7)


def fig7_lambdas() -> tuple[frozenset[Term], ...]:
    """Child-class tuples of the eight classes (index 0 is the complement)."""
    return (
        frozenset(),
        frozenset(multisets(_ALL, 3)),
        frozenset({(1, 1)}),
        frozenset({(1, 4)}),
        frozenset(multisets(_ALL, 4)),
        frozenset(tuple(sorted((s, 1))) for s in _REST),
        frozenset({(4, 4)}),
        frozenset(tuple(sorted((s, 4))) for s in _REST),
    )


# extra occurrences per attached child in the equations of a_1 and a_4, and the a_3 term
FIG7_CHILD_WEIGHTS = {1: {3: 1, 7: 1, 6: 2}, 4: {3: 1, 5: 1, 2: 2}}
FIG7_FIXED_K = {(3, (1, 4)): 1}


def fig7_expected_K() -> dict[tuple[int, Term], int]:
    lam = fig7_lambdas()
    out: dict[tuple[int, Term], int] = dict(FIG7_FIXED_K)
    for j, weights in FIG7_CHILD_WEIGHTS.items():
        for t in lam[j]:
            k = sum(weights.get(c, 0) for c in t)
            if k:
                out[(j, t)] = k
    return out


def star_mu(k: int) -> LaurentE:
    """1 / (e (k-1)!)."""
    f = 1
    for i in range(2, k):
        f *= i
    return LaurentE.from_terms({-1: Fraction(1, f)})
