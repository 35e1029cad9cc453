"""Class partitions a_0..a_L of planted trees and the occurrence counts K, Kbar.

A partition stores, for every class j >= 1, a finite set ``lambdas[j]`` of
sorted child-class tuples: a tree belongs to a_j when the sorted tuple of its
children's classes lies in ``lambdas[j]``.  Class 0 is the complement of the
others and has no explicit description.

Two builders are provided:

* ``naive``: classes are the trees of height <= h with out-degrees in D, cut
  off at depth h (``#`` marks an out-degree outside D, ``o`` any subtree).
* ``compact``: planar embeddings of the planted patterns are intersected,
  their proper subtrees are hash-consed into types t_1..t_m, and the types are
  disambiguated into disjoint classes by refining child-class tuple sets.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Sequence

from .pattern import (
    DegreeProfile,
    Pattern,
    degree_profile,
    derive_planted_patterns,
    derive_rooted_patterns,
    matches_at_root,
    planar_embeddings,
)
from .trees import (
    BOX,
    NODE,
    WILD,
    PlanarTree,
    PlantedTree,
    automorphism_count,
    fixed_planar,
    general_to_planar,
    leaf,
    rooted_shapes,
)

Term = tuple[int, ...]
DEFAULT_CLASS_LIMIT = 5000
DEFAULT_TERM_LIMIT = 500_000


class PartitionError(RuntimeError):
    """A partition could not be built or failed validation."""


class ClassLimitExceeded(PartitionError):
    def __init__(self, count: int, limit: int):
        super().__init__(f"naive partition would have {count} classes (limit {limit})")
        self.count = count
        self.limit = limit


class TermLimitExceeded(PartitionError):
    def __init__(self, count: int, limit: int):
        super().__init__(f"occurrence counting would visit {count} child tuples (limit {limit})")
        self.count = count
        self.limit = limit


class AmbiguousCount(PartitionError):
    """Two completions of a term's representative gave different occurrence counts."""


# ---------------------------------------------------------------------------
# Partition value
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassPartition:
    """Classes a_0..a_L with child-class term sets and occurrence counts.

    ``K`` maps ``(j, term)`` to the number of planted-pattern occurrences at
    the root of a tree of class j built from ``term`` (zero entries omitted,
    j = 0 entries only for terms outside every explicit class).  ``Kbar`` maps
    a term to the number of rooted-pattern occurrences at a root whose
    subtrees have those classes.
    """

    builder: str
    profile: DegreeProfile
    lambdas: tuple[frozenset[Term], ...]
    shapes: tuple[PlantedTree, ...] | None = None
    types: tuple[Term, ...] = ()
    type_classes: tuple[frozenset[int], ...] = ()
    K: dict[tuple[int, Term], int] = field(default_factory=dict)
    Kbar: dict[Term, int] = field(default_factory=dict)
    _index: dict[Term, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        index: dict[Term, int] = {}
        for j, lam in enumerate(self.lambdas):
            if j == 0 and lam:
                raise PartitionError("class 0 is the complement and takes no explicit terms")
            for t in lam:
                if t in index:
                    raise PartitionError(f"term {t} lies in both a_{index[t]} and a_{j}")
                index[t] = j
        object.__setattr__(self, "_index", index)

    @property
    def L(self) -> int:
        return len(self.lambdas) - 1

    @property
    def size(self) -> int:
        return len(self.lambdas)

    def class_of_term(self, term: Iterable[int]) -> int:
        return self._index.get(tuple(sorted(term)), 0)

    def k(self, j: int, term: Term) -> int:
        return self.K.get((j, term), 0)

    def kbar(self, term: Term) -> int:
        return self.Kbar.get(term, 0)

    def explicit_terms(self) -> Iterator[tuple[int, Term]]:
        """(class, term) for every explicit term, in class then term order."""
        for j in range(1, self.size):
            for t in sorted(self.lambdas[j]):
                yield j, t

    def complement_terms(self) -> list[Term]:
        """Terms of class 0 that carry a positive K."""
        return sorted(t for (j, t) in self.K if j == 0)

    def dependency_edges(self) -> dict[int, set[int]]:
        """i -> {j : the equation of a_i involves a_j}; a_0 involves every class through E."""
        edges = {0: set(range(self.size))}
        for j in range(1, self.size):
            edges[j] = {c for t in self.lambdas[j] for c in t}
        return edges

    def to_doc(self) -> dict[str, Any]:
        classes = []
        for j in range(self.size):
            entry: dict[str, Any] = {"index": j}
            if self.shapes is not None:
                entry["shape"] = self.shapes[j].code
            if j == 0:
                entry["terms"] = [
                    {"children": list(t), "K": self.k(0, t)} for t in self.complement_terms()
                ]
                entry["complement"] = True
            else:
                entry["terms"] = [{"children": list(t), "K": self.k(j, t)} for t in sorted(self.lambdas[j])]
            classes.append(entry)
        doc: dict[str, Any] = {
            "builder": self.builder,
            "profile": self.profile.to_doc(),
            "L": self.L,
            "classes": classes,
            "rooted": [{"children": list(t), "Kbar": v} for t, v in sorted(self.Kbar.items())],
        }
        if self.types:
            doc["types"] = [
                {"index": i + 1, "children": list(t), "classes": sorted(self.type_classes[i + 1])}
                for i, t in enumerate(self.types)
            ]
        return doc


# ---------------------------------------------------------------------------
# Multiset helpers
# ---------------------------------------------------------------------------


def multisets(symbols: Sequence[int], size: int) -> Iterator[Term]:
    return itertools.combinations_with_replacement(sorted(symbols), size)


def term_counts(term: Term, size: int) -> tuple[int, ...]:
    """Exponent vector (l_0, ..., l_{size-1}) of a sorted child tuple."""
    c = Counter(term)
    return tuple(c.get(i, 0) for i in range(size))


def term_weight(term: Term) -> int:
    """prod l_i! for a child tuple, the symmetry divisor of the term."""
    w = 1
    for m in Counter(term).values():
        w *= math.factorial(m)
    return w


def _product_terms(choices: Sequence[Sequence[int]]) -> set[Term]:
    """All sorted tuples choosing one symbol from each position."""
    groups = Counter(tuple(sorted(c)) for c in choices)
    parts = [list(itertools.combinations_with_replacement(opts, m)) for opts, m in sorted(groups.items())]
    out = set()
    for combo in itertools.product(*parts):
        out.add(tuple(sorted(itertools.chain.from_iterable(combo))))
    return out


# ---------------------------------------------------------------------------
# Naive builder
# ---------------------------------------------------------------------------


def shape_key(t: PlantedTree) -> tuple:
    """Ordering of constraint trees: leaves first, then by out-degree and children."""
    if not t.children:
        return (0, t.tag)
    return (1, t.outdeg, tuple(sorted(shape_key(c) for c in t.children)))


def truncate(t: PlantedTree, D: frozenset[int], depth: int) -> PlantedTree:
    """Cut ``t`` at ``depth``: ``o`` at the cut, ``#`` for out-degrees outside D above it."""
    if depth == 0:
        return leaf(WILD)
    if t.tag == NODE and t.outdeg in D:
        return PlantedTree(tuple(truncate(c, D, depth - 1) for c in t.children), NODE)
    if t.tag == WILD:
        raise PartitionError("cannot truncate through a wildcard")
    return leaf(BOX)


def naive_class_count(dp: DegreeProfile) -> int:
    """Number of classes of the naive partition, computed without building it."""
    count = 1  # S_0 = {o}
    for _ in range(dp.h):
        count = 1 + sum(math.comb(count + d - 1, d) for d in dp.D)
    return count


def _shapes(D: frozenset[int], depth: int) -> list[PlantedTree]:
    if depth == 0:
        return [leaf(WILD)]
    below = _shapes(D, depth - 1)
    out = [leaf(BOX)]
    for d in sorted(D):
        for kids in itertools.combinations_with_replacement(below, d):
            out.append(PlantedTree(kids, NODE))
    return sorted(out, key=shape_key)


def build_naive_partition(dp: DegreeProfile, class_limit: int = DEFAULT_CLASS_LIMIT) -> ClassPartition:
    """Classes = depth-h truncations with root out-degree in D, plus the complement."""
    if not dp.D or dp.h < 1:
        raise PartitionError("the naive builder needs a nonempty D and h >= 1")
    count = naive_class_count(dp)
    if count > class_limit:
        raise ClassLimitExceeded(count, class_limit)
    shapes = _shapes(dp.D, dp.h)  # BOX first
    index = {s: j for j, s in enumerate(shapes)}
    by_trunc: dict[PlantedTree, list[int]] = {}
    for j, s in enumerate(shapes):
        by_trunc.setdefault(truncate_shape(s, dp.D, dp.h - 1), []).append(j)
    lambdas: list[frozenset[Term]] = [frozenset()]
    for s in shapes[1:]:
        lambdas.append(frozenset(_product_terms([by_trunc[c] for c in s.children])))
    assert index[shapes[0]] == 0 and shapes[0].tag == BOX
    return ClassPartition("naive", dp, tuple(lambdas), shapes=tuple(shapes))


def truncate_shape(s: PlantedTree, D: frozenset[int], depth: int) -> PlantedTree:
    """Truncate a constraint tree (``#`` stays ``#``)."""
    if depth == 0:
        return leaf(WILD)
    if s.tag == BOX:
        return s
    if s.tag == WILD:
        raise PartitionError("constraint tree too shallow to truncate")
    return PlantedTree(tuple(truncate_shape(c, D, depth - 1) for c in s.children), NODE)


# ---------------------------------------------------------------------------
# Compact builder: intersection, DAGification, disambiguation
# ---------------------------------------------------------------------------


def unify(a: PlanarTree, b: PlanarTree) -> PlanarTree | None:
    """Most general planar tree matching both prefix constraints, or None."""
    if a.tag == WILD:
        return b
    if b.tag == WILD:
        return a
    if a.outdeg != b.outdeg:
        return None
    kids = []
    for x, y in zip(a.children, b.children):
        u = unify(x, y)
        if u is None:
            return None
        kids.append(u)
    return PlanarTree(tuple(kids), NODE)


def intersect_planar_classes(U: Sequence[PlanarTree]) -> list[PlantedTree]:
    """Implied unordered trees of every nonempty intersection of a subset of U."""
    found: set[PlantedTree] = set()
    seen_states: set[tuple[int, str]] = set()

    def rec(start: int, current: PlanarTree) -> None:
        found.add(current.implied())
        for i in range(start, len(U)):
            nxt = unify(current, U[i])
            if nxt is None:
                continue
            key = (i, str(nxt))
            if key in seen_states:
                continue
            seen_states.add(key)
            rec(i + 1, nxt)

    for i, pi in enumerate(U):
        rec(i + 1, pi)
    return sorted(found, key=_q_order)


def _q_order(q: PlantedTree) -> tuple:
    """Processing order for DAGification: larger root out-degree first, then smaller trees."""
    return (-q.outdeg, q.size, q.code)


def dagify(Q: Sequence[PlantedTree]) -> list[Term]:
    """Hash-cons the proper subtrees of Q; returns definitions of t_1..t_m.

    ``defs[i-1]`` is the sorted tuple of child types of t_i; type 0 is the
    wildcard (any planted tree).
    """
    table: dict[Term, int] = {}
    defs: list[Term] = []

    def visit(t: PlantedTree, is_root: bool) -> int:
        if t.tag == WILD:
            return 0
        if t.tag != NODE or not t.children:
            raise PartitionError(f"unexpected node {t.code!r} in a pattern intersection")
        kids = tuple(sorted(visit(c, False) for c in t.children))
        if is_root:
            return -1
        if kids not in table:
            defs.append(kids)
            table[kids] = len(defs)
        return table[kids]

    for q in Q:
        visit(q, True)
    return defs


def _split(terms: Iterable[Term], old: int, new: int) -> set[Term]:
    """Replace ``old`` by ``old`` or ``new`` in every possible way."""
    out: set[Term] = set()
    for t in terms:
        c = t.count(old)
        if not c:
            out.add(t)
            continue
        rest = [x for x in t if x != old]
        for k in range(c + 1):
            out.add(tuple(sorted(rest + [old] * (c - k) + [new] * k)))
    return out


def disambiguate(defs: Sequence[Term]) -> tuple[list[frozenset[Term]], list[frozenset[int]]]:
    """Refine a partition of planted trees until every type is a union of classes.

    Returns ``(lambdas, type_classes)`` with ``lambdas[0]`` empty (complement)
    and ``type_classes[i]`` the classes making up t_i (t_0 is every class).
    """
    lam: list[set[Term]] = [set()]
    reps: list[set[int]] = [{0}]
    for k, d in enumerate(defs, start=1):
        if any(c >= k for c in d):
            raise PartitionError(f"type t_{k} refers to a later type")
        s = _product_terms([sorted(reps[c]) for c in d])
        contributing: list[int] = []
        i = 1
        while i < len(lam) and s:
            inter = lam[i] & s
            if inter:
                rest = lam[i] - s
                if rest:
                    new = len(lam)
                    lam.append(set(rest))
                    for r in reps:
                        if i in r:
                            r.add(new)
                    for j in range(1, len(lam)):
                        lam[j] = _split(lam[j], i, new)
                    inter = _split(inter, i, new)
                    s = _split(s, i, new)
                    lam[i] = inter
                s = s - lam[i]
                contributing.append(i)
            i += 1
        if s:
            new = len(lam)
            lam.append(set(s))
            for r in reps:
                if 0 in r:
                    r.add(new)
            for j in range(1, len(lam)):
                lam[j] = _split(lam[j], 0, new)
            contributing.append(new)
        reps.append(set(contributing))
        _check_disjoint(lam)
    return [frozenset(x) for x in lam], [frozenset(r) for r in reps]


def _check_disjoint(lam: Sequence[set[Term]]) -> None:
    seen: dict[Term, int] = {}
    for j, terms in enumerate(lam):
        for t in terms:
            if t in seen:
                raise PartitionError(f"internal error: term {t} in a_{seen[t]} and a_{j}")
            seen[t] = j


def build_compact_partition(pps: Sequence[PlantedTree]) -> ClassPartition:
    U = planar_embeddings(sorted(pps, key=_q_order))
    Q = intersect_planar_classes(U)
    defs = dagify(Q)
    lambdas, reps = disambiguate(defs)
    return ClassPartition(
        "compact", degree_profile(list(pps)), tuple(lambdas), types=tuple(defs), type_classes=tuple(reps)
    )


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def classify(t: PlantedTree, part: ClassPartition, _memo: dict[str, int] | None = None) -> int:
    """Class index of a concrete planted tree, computed bottom-up from the term sets."""
    memo = {} if _memo is None else _memo
    hit = memo.get(t.code)
    if hit is not None:
        return hit
    j = part.class_of_term(classify(c, part, memo) for c in t.children)
    memo[t.code] = j
    return j


def semantic_class(t: PlantedTree, part: ClassPartition) -> int | None:
    """Class of ``t`` from its constraint-tree truncation (naive partitions only)."""
    if part.shapes is None:
        raise PartitionError("semantic classification needs constraint trees")
    target = truncate(t, part.profile.D, part.profile.h)
    for j, s in enumerate(part.shapes):
        if s == target:
            return j
    return None


def in_type(t: PlantedTree, k: int, defs: Sequence[Term]) -> bool:
    """Membership of a concrete tree in type t_k (t_0 is every tree)."""
    if k == 0:
        return True
    d = defs[k - 1]
    if t.outdeg != len(d):
        return False
    for perm in set(itertools.permutations(range(len(d)))):
        if all(in_type(t.children[perm[i]], d[i], defs) for i in range(len(d))):
            return True
    return False


# ---------------------------------------------------------------------------
# Occurrence counts at the root
# ---------------------------------------------------------------------------


def _first_term(part: ClassPartition, j: int) -> Term:
    return min(part.lambdas[j])


def representative(part: ClassPartition, term: Term, cap: PlantedTree, max_depth: int) -> PlantedTree:
    """A concrete tree whose root has children of the given classes.

    Each child class is expanded through its smallest term down to
    ``max_depth``; class 0 and the positions below the cut become ``cap``.
    """

    def expand(j: int, depth: int) -> PlantedTree:
        if j == 0 or depth >= max_depth:
            return cap
        return PlantedTree(tuple(expand(c, depth + 1) for c in _first_term(part, j)), NODE)

    return PlantedTree(tuple(expand(c, 1) for c in term), NODE)


def count_at_root(embeddings: Sequence[PlanarTree], tree: PlantedTree) -> int:
    """Number of pattern embeddings occurring at the root of one fixed planar form of ``tree``."""
    target = fixed_planar(tree)
    return sum(1 for pi in embeddings if matches_at_root(pi, target))


def _caps(dp: DegreeProfile) -> tuple[PlantedTree, PlantedTree]:
    d = 1
    while d in dp.D:
        d += 1
    return leaf(NODE), PlantedTree(tuple(leaf(NODE) for _ in range(d)), NODE)


def count_term(
    part: ClassPartition, term: Term, embeddings: Sequence[PlanarTree], max_depth: int
) -> int:
    """Occurrences at the root for a term, checked against a second completion."""
    cap_a, cap_b = _caps(part.profile)
    ka = count_at_root(embeddings, representative(part, term, cap_a, max_depth))
    kb = count_at_root(embeddings, representative(part, term, cap_b, max_depth))
    if ka != kb:
        raise AmbiguousCount(f"term {term}: completions give {ka} and {kb} occurrences")
    return ka


def count_root_occurrences(term: Term, part: ClassPartition, pps: Sequence[PlantedTree]) -> int:
    """K for a root whose planted subtrees have the classes in ``term``."""
    if len(term) not in part.profile.D:
        return 0
    return count_term(part, term, planar_embeddings(list(pps)), part.profile.h + 1)


def count_root_occurrences_rooted(term: Term, part: ClassPartition, rps: Sequence[PlantedTree]) -> int:
    """Kbar for a (non-planted) root whose subtrees have the classes in ``term``."""
    if len(term) not in part.profile.Dbar:
        return 0
    return count_term(part, term, planar_embeddings(list(rps)), part.profile.h + 2)


def attach_counts(part: ClassPartition, pps: Sequence[PlantedTree], rps: Sequence[PlantedTree]) -> ClassPartition:
    """Compute K over every term with root out-degree in D and Kbar over degrees in Dbar."""
    dp = part.profile
    U = planar_embeddings(list(pps))
    R = planar_embeddings(list(rps))
    K: dict[tuple[int, Term], int] = {}
    symbols = list(range(part.size))
    for d in sorted(dp.D):
        for term in multisets(symbols, d):
            j = part.class_of_term(term)
            k = count_term(part, term, U, dp.h + 1)
            if k:
                K[(j, term)] = k
    Kbar: dict[Term, int] = {}
    for d in sorted(dp.Dbar):
        for term in multisets(symbols, d):
            k = count_term(part, term, R, dp.h + 2)
            if k:
                Kbar[term] = k
    return ClassPartition(
        part.builder,
        part.profile,
        part.lambdas,
        shapes=part.shapes,
        types=part.types,
        type_classes=part.type_classes,
        K=K,
        Kbar=Kbar,
    )


def build_partition(
    m: Pattern,
    builder: str = "compact",
    class_limit: int = DEFAULT_CLASS_LIMIT,
    term_limit: int = DEFAULT_TERM_LIMIT,
) -> ClassPartition:
    """Full partition with K and Kbar for a pattern of size >= 3."""
    if m.size < 3:
        raise PartitionError("patterns with fewer than three nodes use closed forms")
    pps = derive_planted_patterns(m)
    rps = derive_rooted_patterns(m)
    dp = degree_profile(pps)
    if builder == "naive":
        classes = naive_class_count(dp)
        if classes > class_limit:
            raise ClassLimitExceeded(classes, class_limit)
        estimate = count_terms(classes, dp.D | dp.Dbar)
        if estimate > term_limit:
            raise TermLimitExceeded(estimate, term_limit)
        part = build_naive_partition(dp, class_limit)
    elif builder == "compact":
        part = build_compact_partition(pps)
    else:
        raise PartitionError(f"unknown builder {builder!r}")
    terms = count_terms(part.size, dp.D | dp.Dbar)
    if terms > term_limit:
        raise TermLimitExceeded(terms, term_limit)
    return attach_counts(part, pps, rps)


def count_terms(classes: int, degrees: frozenset[int]) -> int:
    """Number of child-class multisets over the given root out-degrees."""
    return sum(math.comb(classes + d - 1, d) for d in degrees)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def embeddings_at_root(p: PlantedTree, t: PlantedTree) -> int:
    """Injective structure-preserving maps of pattern ``p`` into ``t`` fixing the roots."""
    if p.tag == WILD:
        return 1
    if t.outdeg != p.outdeg:
        return 0
    total = 0
    n = p.outdeg
    for perm in itertools.permutations(range(n)):
        prod = 1
        for i in range(n):
            prod *= embeddings_at_root(p.children[i], t.children[perm[i]])
            if not prod:
                break
        total += prod
    return total


def direct_root_count(patterns: Sequence[PlantedTree], t: PlantedTree) -> int:
    """Distinct occurrences at the root of a concrete tree (embeddings over automorphisms)."""
    total = 0
    for p in patterns:
        emb = embeddings_at_root(p, t)
        aut = automorphism_count(p)
        if emb % aut:
            raise PartitionError(f"{emb} embeddings of {p.code} not divisible by |Aut| = {aut}")
        total += emb // aut
    return total


def strongly_connected(edges: dict[int, set[int]]) -> bool:
    nodes = list(edges)
    if not nodes:
        return True

    def reach(adj: dict[int, set[int]]) -> set[int]:
        seen = {nodes[0]}
        queue = deque([nodes[0]])
        while queue:
            for w in adj[queue.popleft()]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen

    rev: dict[int, set[int]] = {v: set() for v in nodes}
    for v, ws in edges.items():
        for w in ws:
            rev[w].add(v)
    return len(reach(edges)) == len(nodes) and len(reach(rev)) == len(nodes)


@dataclass
class ValidationReport:
    trees_checked: int = 0
    classification_ok: bool = True
    strongly_connected: bool = True
    k_consistent: bool = True
    kbar_consistent: bool = True
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.classification_ok and self.strongly_connected and self.k_consistent and self.kbar_consistent

    def to_doc(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "trees_checked": self.trees_checked,
            "classification": self.classification_ok,
            "strongly_connected": self.strongly_connected,
            "K": self.k_consistent,
            "Kbar": self.kbar_consistent,
            "failures": self.failures[:10],
        }


def validate_partition(part: ClassPartition, m: Pattern, nmax: int = 8) -> ValidationReport:
    """Classification, strong connectivity and K/Kbar checks over all trees of size <= nmax."""
    rep = ValidationReport()
    pps = derive_planted_patterns(m)
    rps = derive_rooted_patterns(m)
    memo: dict[str, int] = {}
    for n in range(1, nmax + 1):
        for t in rooted_shapes(n):
            rep.trees_checked += 1
            j = classify(t, part, memo)
            if part.shapes is not None:
                sj = semantic_class(t, part)
                if sj != j:
                    rep.classification_ok = False
                    rep.failures.append(f"{t.code}: term sets give a_{j}, truncation gives {sj}")
            if part.types:
                for k in range(1, len(part.types) + 1):
                    if in_type(t, k, part.types) != (j in part.type_classes[k]):
                        rep.classification_ok = False
                        rep.failures.append(f"{t.code}: membership in t_{k} disagrees with class a_{j}")
            term = tuple(sorted(classify(c, part, memo) for c in t.children))
            if direct_root_count(pps, t) != part.k(j, term):
                rep.k_consistent = False
                rep.failures.append(f"{t.code}: K({term}) = {part.k(j, term)} but direct count differs")
            if direct_root_count(rps, t) != part.kbar(term):
                rep.kbar_consistent = False
                rep.failures.append(f"{t.code}: Kbar({term}) = {part.kbar(term)} but direct count differs")
    rep.strongly_connected = strongly_connected(part.dependency_edges())
    if not rep.strongly_connected:
        rep.failures.append("dependency graph is not strongly connected")
    return rep
