"""Functional-equation systems a = F(x, a, u) and the rooted equation r = G(x, u, a).

Every right-hand side is a sparse polynomial in x, u, a_0..a_L and the symbol
E = exp(a_0 + ... + a_L), which appears at most to the first power.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

from .partition import ClassPartition, Term, term_weight

Var = tuple[str, int]  # ("x", 0), ("u", 0) or ("a", j)
X: Var = ("x", 0)
U: Var = ("u", 0)


def A(j: int) -> Var:
    return ("a", j)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Mono:
    """Exponent part of a monomial x^x u^u E^E prod a_j^l_j (``a`` sorted by j)."""

    a: tuple[tuple[int, int], ...]
    x: int = 1
    u: int = 0
    E: int = 0

    def a_power(self, j: int) -> int:
        for k, l in self.a:
            if k == j:
                return l
        return 0


def mono_from_term(term: Term, x: int = 1, u: int = 0, E: int = 0) -> Mono:
    return Mono(tuple(sorted(Counter(term).items())), x, u, E)


@dataclass(frozen=True)
class SysPoly:
    """Sum of coefficient * monomial with rational coefficients."""

    terms: tuple[tuple[Mono, Fraction], ...] = ()

    @staticmethod
    def build(items: Iterable[tuple[Mono, Fraction | int]]) -> SysPoly:
        acc: dict[Mono, Fraction] = defaultdict(Fraction)
        for m, c in items:
            acc[m] += Fraction(c)
        return SysPoly(tuple(sorted((m, c) for m, c in acc.items() if c)))

    def __add__(self, other: SysPoly) -> SysPoly:
        return SysPoly.build(list(self.terms) + list(other.terms))

    def __neg__(self) -> SysPoly:
        return SysPoly(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other: SysPoly) -> SysPoly:
        return self + (-other)

    def scale(self, c: Fraction | int) -> SysPoly:
        return SysPoly.build((m, v * c) for m, v in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> set[int]:
        """Indices j with a_j present (E counts as every class, reported separately)."""
        return {j for m, _ in self.terms for j, _ in m.a}

    def has_E(self) -> bool:
        return any(m.E for m, _ in self.terms)

    def diff(self, var: Var) -> SysPoly:
        """Partial derivative; dE/da_j = E."""
        kind, j = var
        out: list[tuple[Mono, Fraction]] = []
        for m, c in self.terms:
            if kind == "x":
                if m.x:
                    out.append((Mono(m.a, m.x - 1, m.u, m.E), c * m.x))
            elif kind == "u":
                if m.u:
                    out.append((Mono(m.a, m.x, m.u - 1, m.E), c * m.u))
            else:
                l = m.a_power(j)
                if l:
                    a = tuple((k, p - 1 if k == j else p) for k, p in m.a if not (k == j and p == 1))
                    out.append((Mono(a, m.x, m.u, m.E), c * l))
                if m.E:
                    out.append((m, c))
        return SysPoly.build(out)

    def at_u1(self) -> SysPoly:
        return SysPoly.build((Mono(m.a, m.x, 0, m.E), c) for m, c in self.terms)

    def evaluate(self, x: object, a: Sequence[object], u: object, E: object, one: object = 1) -> object:
        """Value at the given point, for any commutative ring of scalars."""
        pw: dict[tuple[int, int], object] = {}

        def power(idx: int, base: object, k: int) -> object:
            key = (idx, k)
            if key not in pw:
                pw[key] = one if k == 0 else (base if k == 1 else power(idx, base, k - 1) * base)
            return pw[key]

        total: object = 0
        for m, c in self.terms:
            v: object = c
            if m.x:
                v = v * power(-1, x, m.x)
            if m.u:
                v = v * power(-2, u, m.u)
            if m.E:
                v = v * E
            for j, l in m.a:
                v = v * power(j, a[j], l)
            total = total + v
        return total

    def max_degree(self) -> int:
        return max((sum(l for _, l in m.a) + m.x + m.u + m.E for m, _ in self.terms), default=0)


def _term_poly(term: Term, K: int, sign: int = 1) -> tuple[Mono, Fraction]:
    return mono_from_term(term, x=1, u=K), Fraction(sign, term_weight(term))


E_TERM: tuple[Mono, Fraction] = (Mono((), 1, 0, 1), Fraction(1))


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquationSystem:
    """Equations a_j = F_j for j = 0..L and the rooted equation r = G."""

    equations: tuple[SysPoly, ...]
    rooted: SysPoly
    builder: str = ""
    pattern: str = ""

    @property
    def size(self) -> int:
        return len(self.equations)

    @property
    def L(self) -> int:
        return self.size - 1

    def dependency_edges(self) -> dict[int, set[int]]:
        out = {}
        for i, f in enumerate(self.equations):
            deps = set(range(self.size)) if f.has_E() else set()
            out[i] = deps | f.variables()
        return out

    def evaluate(self, x: object, a: Sequence[object], u: object, E: object, one: object = 1) -> list[object]:
        return [f.evaluate(x, a, u, E, one) for f in self.equations]

    def to_doc(self) -> dict[str, Any]:
        return {
            "builder": self.builder,
            "pattern": self.pattern,
            "L": self.L,
            "equations": [poly_to_doc(f) for f in self.equations],
            "rooted": poly_to_doc(self.rooted),
        }


def build_planted_system(part: ClassPartition, pattern: str = "") -> EquationSystem:
    """a_j = x P_j(a, u) for j >= 1 and the complement equation for a_0."""
    eqs: list[SysPoly] = [SysPoly()]
    u1_images: list[tuple[Mono, Fraction]] = []
    for j in range(1, part.size):
        items = [_term_poly(t, part.k(j, t)) for t in part.lambdas[j]]
        eqs.append(SysPoly.build(items))
        u1_images.extend((Mono(m.a, m.x, 0, m.E), -c) for m, c in items)
    extra: list[tuple[Mono, Fraction]] = []
    for t in part.complement_terms():
        extra.append(_term_poly(t, part.k(0, t)))
        extra.append(_term_poly(t, 0, -1))
    eqs[0] = SysPoly.build([E_TERM] + u1_images + extra)
    return EquationSystem(tuple(eqs), build_rooted_equation(part), part.builder, pattern)


def build_rooted_equation(part: ClassPartition) -> SysPoly:
    """G = x (E - Q(a, 1) + Q(a, u)); only terms with a positive Kbar differ from x E."""
    items: list[tuple[Mono, Fraction]] = [E_TERM]
    for t, k in sorted(part.Kbar.items()):
        items.append(_term_poly(t, k))
        items.append(_term_poly(t, 0, -1))
    return SysPoly.build(items)


def substitute_u1(sys: EquationSystem) -> EquationSystem:
    return EquationSystem(
        tuple(f.at_u1() for f in sys.equations), sys.rooted.at_u1(), sys.builder, sys.pattern
    )


def jacobian(sys: EquationSystem) -> list[list[SysPoly]]:
    """Entry (i, j) is dF_i/da_j."""
    return [[f.diff(A(j)) for j in range(sys.size)] for f in sys.equations]


def equation_sum(sys: EquationSystem) -> SysPoly:
    total = SysPoly()
    for f in sys.equations:
        total = total + f
    return total


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _frac_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def poly_to_doc(f: SysPoly) -> list[dict[str, Any]]:
    return [
        {"coeff": _frac_text(c), "x": m.x, "u": m.u, "E": m.E, "a": {str(j): l for j, l in m.a}}
        for m, c in f.terms
    ]


def poly_from_doc(doc: Sequence[Mapping[str, Any]]) -> SysPoly:
    return SysPoly.build(
        (
            Mono(
                tuple(sorted((int(j), int(l)) for j, l in item.get("a", {}).items())),
                int(item.get("x", 0)),
                int(item.get("u", 0)),
                int(item.get("E", 0)),
            ),
            Fraction(item["coeff"]),
        )
        for item in doc
    )


def system_from_doc(doc: Mapping[str, Any]) -> EquationSystem:
    return EquationSystem(
        tuple(poly_from_doc(f) for f in doc["equations"]),
        poly_from_doc(doc["rooted"]),
        doc.get("builder", ""),
        doc.get("pattern", ""),
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Factored:
    """coeff * x * u^shift * prod_blocks (sum_c a_c u^{w_c})^k."""

    coeff: Fraction
    shift: int
    blocks: tuple[tuple[tuple[tuple[int, int], ...], int], ...]  # ((class, weight), ...), power


def _factor(terms: Mapping[Term, int]) -> _Factored | None:
    """Write a set of child tuples with u-weights as a product of powered class sums."""
    if not terms:
        return None
    lengths = {len(t) for t in terms}
    if len(lengths) != 1:
        return None
    tset = set(terms)
    symbols = sorted({c for t in tset for c in t})
    parent = {s: s for s in symbols}

    def find(s: int) -> int:
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    for t in tset:
        for s in set(t):
            rest = list(t)
            rest.remove(s)
            for r in symbols:
                if r != s and tuple(sorted(rest + [r])) in tset:
                    parent[find(r)] = find(s)
    blocks: dict[int, list[int]] = defaultdict(list)
    for s in symbols:
        blocks[find(s)].append(s)
    block_list = sorted(blocks.values())
    block_of = {s: i for i, b in enumerate(block_list) for s in b}
    first = next(iter(sorted(tset)))
    powers = Counter(block_of[c] for c in first)
    for t in tset:
        if Counter(block_of[c] for c in t) != powers:
            return None
    expected = 1
    for i, b in enumerate(block_list):
        expected *= math.comb(len(b) + powers[i] - 1, powers[i])
    if expected != len(tset):
        return None
    base = tuple(sorted(itertools.chain.from_iterable([b[0]] * powers[i] for i, b in enumerate(block_list))))
    if base not in terms:
        return None
    shift = terms[base]
    weight: dict[int, int] = {}
    for i, b in enumerate(block_list):
        for s in b:
            probe = list(base)
            probe.remove(b[0])
            probe = tuple(sorted(probe + [s]))
            if probe not in terms:
                return None
            weight[s] = terms[probe] - shift
    for t, k in terms.items():
        if shift + sum(weight[c] for c in t) != k:
            return None
    for i, b in enumerate(block_list):
        low = min(weight[s] for s in b)
        for s in b:
            weight[s] -= low
        shift += low * powers[i]
    coeff = Fraction(1)
    for i in range(len(block_list)):
        coeff /= math.factorial(powers[i])
    return _Factored(
        coeff,
        shift,
        tuple((tuple((s, weight[s]) for s in b), powers[i]) for i, b in enumerate(block_list)),
    )


def _u_text(k: int, latex: bool) -> str:
    if k == 0:
        return ""
    if k == 1:
        return "u"
    return f"u^{{{k}}}" if latex else f"u^{k}"


def _a_text(j: int, latex: bool) -> str:
    return f"a_{{{j}}}" if latex else f"a_{j}"


def _coeff_text(c: Fraction, latex: bool) -> str:
    if c == 1:
        return ""
    if latex:
        return (f"\\frac{{{c.numerator}}}{{{c.denominator}}}" if c.denominator != 1 else str(c.numerator)) + " "
    return _frac_text(c) + " "


def _render_factored(f: _Factored, latex: bool) -> str:
    parts = []
    for members, power in f.blocks:
        by_w: dict[int, list[int]] = defaultdict(list)
        for s, w in members:
            by_w[w].append(s)
        pieces = []
        for w in sorted(by_w):
            names = [_a_text(s, latex) for s in by_w[w]]
            ut = _u_text(w, latex)
            if not ut:
                pieces.extend(names)
            elif len(names) == 1:
                pieces.append(names[0] + ut)
            else:
                pieces.append("(" + "+".join(names) + ")" + ut)
        inner = "+".join(pieces)
        single = len(members) == 1 and not _u_text(members[0][1], latex)
        body = inner if single else f"({inner})"
        if power > 1:
            body += f"^{{{power}}}" if latex else f"^{power}"
        parts.append(body)
    ut = _u_text(f.shift, latex)
    sep = " " if latex else " "
    return (_coeff_text(f.coeff, latex) + "x " + sep.join(parts) + (" " + ut if ut else "")).strip()


def _render_mono(m: Mono, c: Fraction, latex: bool) -> str:
    bits = []
    if m.x:
        bits.append("x" if m.x == 1 else (f"x^{{{m.x}}}" if latex else f"x^{m.x}"))
    if m.E:
        bits.append("e^{a_0+\\dots+a_L}" if latex else "E")
    for j, l in m.a:
        bits.append(_a_text(j, latex) + ("" if l == 1 else (f"^{{{l}}}" if latex else f"^{l}")))
    if m.u:
        bits.append(_u_text(m.u, latex))
    mag = abs(c)
    coef = _coeff_text(mag, latex).strip()
    body = " ".join(([coef] if coef else []) + bits) or "1"
    return body


def _render_sum(items: Sequence[tuple[Mono, Fraction]], latex: bool) -> str:
    if not items:
        return "0"
    out = ""
    for i, (m, c) in enumerate(items):
        body = _render_mono(m, c, latex)
        if i == 0:
            out = ("-" if c < 0 else "") + body
        else:
            out += (" - " if c < 0 else " + ") + body
    return out


def _rhs_text(sys: EquationSystem, part: ClassPartition | None, j: int, latex: bool) -> str:
    if part is not None and j >= 1:
        fac = _factor({t: part.k(j, t) for t in part.lambdas[j]})
        if fac is not None:
            return _render_factored(fac, latex)
    if part is not None and j == 0:
        L = part.L
        head = "x e^{a_0+\\dots+a_L}" if latex else "x E"
        if L:
            head += (" - x\\sum_{j\\ge1}P_j(\\mathbf{a},1)" if latex else f" - x (P_1 + ... + P_{L})(a, 1)")
        comp = part.complement_terms()
        if comp:
            items = []
            for t in comp:
                m, c = _term_poly(t, part.k(0, t))
                items.append((m, c))
            extra = _render_sum(items, latex)
            fac = _factor({t: part.k(0, t) for t in comp})
            if fac is not None and len(comp) > 1:
                extra = _render_factored(fac, latex)
            minus = _render_sum([_term_poly(t, 0) for t in comp], latex)
            head += f" + {extra} - ({minus})" if len(comp) > 1 else f" + {extra} - {minus}"
        return head
    return _render_sum(sys.equations[j].terms, latex)


def emit(sys: EquationSystem, fmt: str = "text", part: ClassPartition | None = None) -> str:
    """Render a system as text, JSON or LaTeX (deterministic)."""
    if fmt == "json":
        return json.dumps(sys.to_doc(), sort_keys=True, indent=2)
    if fmt == "text":
        lines = [f"a_{j} = {_rhs_text(sys, part, j, False)}" for j in range(sys.size)]
        lines.append(f"r = {_render_sum(sys.rooted.terms, False)}")
        return "\n".join(lines)
    if fmt == "latex":
        rows = [f"a_{{{j}}} &= {_rhs_text(sys, part, j, True)}" for j in range(sys.size)]
        return "\\begin{aligned}\n" + " \\\\\n".join(rows) + "\n\\end{aligned}"
    raise ValueError(f"unknown format {fmt!r}")


def factored_description(part: ClassPartition, j: int) -> tuple[Fraction, int, tuple] | None:
    """Factored form of class j's equation, or None when it is not a product of class sums."""
    fac = _factor({t: part.k(j, t) for t in part.lambdas[j]})
    if fac is None:
        return None
    return fac.coeff, fac.shift, fac.blocks


def polynomial_map(f: SysPoly, fn: Callable[[Mono, Fraction], tuple[Mono, Fraction] | None]) -> SysPoly:
    return SysPoly.build(x for x in (fn(m, c) for m, c in f.terms) if x is not None)
