"""Tree values: labeled trees, planted (unordered) and planar (ordered) trees.

Planted and planar trees carry a one-character tag per node:

* ``x``  a concrete node (a leaf when it has no children),
* ``o``  a wildcard leaf (a pattern's external node, or "any subtree"),
* ``#``  a leaf standing for "a node whose out-degree is not in D".

The text format nests children in parentheses, e.g. ``x(x(.)(.))(o)``,
where ``.`` is a concrete leaf.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

NODE = "x"
WILD = "o"
BOX = "#"

_LEAF_TEXT = {NODE: ".", WILD: "o", BOX: "#"}
DEFAULT_ENUMERATION_CAP = 9


class TreeError(ValueError):
    """Malformed tree input."""


# ---------------------------------------------------------------------------
# Planted (unordered) trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PlantedTree:
    """Rooted unordered tree; children are kept sorted by canonical code."""

    children: tuple[PlantedTree, ...] = ()
    tag: str = NODE
    code: str = field(init=False, repr=False)
    size: int = field(init=False, repr=False)
    height: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.children and self.tag != NODE:
            raise TreeError(f"only '{NODE}' nodes may have children, got {self.tag!r}")
        kids = tuple(sorted(self.children, key=lambda c: c.code))
        object.__setattr__(self, "children", kids)
        object.__setattr__(self, "code", _render(self.tag, [c.code for c in kids]))
        object.__setattr__(self, "size", 1 + sum(c.size for c in kids))
        object.__setattr__(self, "height", 1 + max(c.height for c in kids) if kids else 0)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PlantedTree) and self.code == other.code

    def __hash__(self) -> int:
        return hash(self.code)

    def __lt__(self, other: PlantedTree) -> bool:
        return self.code < other.code

    def __str__(self) -> str:
        return self.code

    @property
    def outdeg(self) -> int:
        return len(self.children)

    def is_leaf(self) -> bool:
        return not self.children


def _render(tag: str, child_texts: Sequence[str]) -> str:
    if not child_texts:
        return _LEAF_TEXT[tag]
    return tag + "".join(f"({c})" for c in child_texts)


def leaf(tag: str = NODE) -> PlantedTree:
    return PlantedTree((), tag)


def node(*children: PlantedTree) -> PlantedTree:
    return PlantedTree(tuple(children), NODE)


def canonical_code(t: PlantedTree) -> str:
    """Canonical string: equal iff isomorphic as unordered tagged trees."""
    return t.code


def automorphism_count(t: PlantedTree) -> int:
    """Size of the automorphism group of ``t`` as a rooted unordered tree."""
    total = 1
    for child, mult in Counter(t.children).items():
        total *= math.factorial(mult) * automorphism_count(child) ** mult
    return total


def subtrees(t: PlantedTree) -> Iterator[PlantedTree]:
    """All subtrees (one per node), root first."""
    yield t
    for c in t.children:
        yield from subtrees(c)


# ---------------------------------------------------------------------------
# Planar (ordered) trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanarTree:
    """Rooted tree whose child order is significant."""

    children: tuple[PlanarTree, ...] = ()
    tag: str = NODE

    def __str__(self) -> str:
        return _render(self.tag, [str(c) for c in self.children])

    @property
    def outdeg(self) -> int:
        return len(self.children)

    def implied(self) -> PlantedTree:
        """The unordered tree obtained by forgetting child order."""
        return PlantedTree(tuple(c.implied() for c in self.children), self.tag)


def fixed_planar(t: PlantedTree) -> PlanarTree:
    """One planar embedding of ``t``: children in canonical order."""
    return PlanarTree(tuple(fixed_planar(c) for c in t.children), t.tag)


def multiset_permutations(items: Sequence) -> Iterator[tuple]:
    """Distinct orderings of a multiset of hashable, sortable items."""
    counts = Counter(items)
    keys = sorted(counts)
    n = len(items)
    out: list = []

    def rec() -> Iterator[tuple]:
        if len(out) == n:
            yield tuple(out)
            return
        for k in keys:
            if counts[k]:
                counts[k] -= 1
                out.append(k)
                yield from rec()
                out.pop()
                counts[k] += 1

    yield from rec()


def general_to_planar(t: PlantedTree) -> list[PlanarTree]:
    """Every distinct planar embedding of ``t``, in a deterministic order."""
    if not t.children:
        return [PlanarTree((), t.tag)]
    options = {c: general_to_planar(c) for c in set(t.children)}
    result: list[PlanarTree] = []
    for order in multiset_permutations(list(t.children)):
        for combo in itertools.product(*(options[c] for c in order)):
            result.append(PlanarTree(tuple(combo), t.tag))
    return result


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def parse_planted(text: str) -> PlantedTree:
    """Parse the nested-parentheses format, e.g. ``x(x(.)(.))(.)``."""
    s = "".join(text.split())
    pos = 0

    def parse() -> PlantedTree:
        nonlocal pos
        if pos >= len(s):
            raise TreeError(f"unexpected end of input in {text!r}")
        ch = s[pos]
        pos += 1
        if ch == ".":
            return leaf(NODE)
        if ch in (WILD, BOX):
            return leaf(ch)
        if ch != NODE:
            raise TreeError(f"unexpected {ch!r} at offset {pos - 1} in {text!r}")
        kids = []
        while pos < len(s) and s[pos] == "(":
            pos += 1
            kids.append(parse())
            if pos >= len(s) or s[pos] != ")":
                raise TreeError(f"missing ')' at offset {pos} in {text!r}")
            pos += 1
        return PlantedTree(tuple(kids), NODE)

    t = parse()
    if pos != len(s):
        raise TreeError(f"trailing input at offset {pos} in {text!r}")
    return t


# ---------------------------------------------------------------------------
# Unlabeled rooted trees (used to sweep all planted trees of a given size)
# ---------------------------------------------------------------------------


def rooted_shapes(n: int) -> list[PlantedTree]:
    """All unordered rooted trees with ``n`` nodes (``x`` tags only)."""
    table: list[list[PlantedTree]] = [[], [leaf()]]
    for m in range(2, n + 1):
        # forests of total size m-1, children drawn from smaller shapes
        forests = _forests(m - 1, table)
        table.append(sorted({PlantedTree(f, NODE) for f in forests}))
    return table[n] if n < len(table) else []


def _forests(total: int, table: list[list[PlantedTree]]) -> list[tuple[PlantedTree, ...]]:
    pool = [t for size in range(1, total + 1) for t in table[size]]
    pool.sort(key=lambda t: (t.size, t.code))
    out: list[tuple[PlantedTree, ...]] = []

    def rec(start: int, remaining: int, acc: list[PlantedTree]) -> None:
        if remaining == 0:
            out.append(tuple(acc))
            return
        for i in range(start, len(pool)):
            t = pool[i]
            if t.size > remaining:
                continue
            acc.append(t)
            rec(i, remaining - t.size, acc)
            acc.pop()

    rec(0, total, [])
    return out


def labeled_count(t: PlantedTree) -> int:
    """Number of vertex labelings of ``t`` with labels 1..size."""
    return math.factorial(t.size) // automorphism_count(t)


# ---------------------------------------------------------------------------
# Labeled trees and Prüfer sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabeledTree:
    """Unrooted tree on labels 1..n."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise TreeError("a tree needs at least one node")
        norm = frozenset((min(u, v), max(u, v)) for u, v in self.edges)
        object.__setattr__(self, "edges", norm)
        if len(norm) != self.n - 1:
            raise TreeError(f"expected {self.n - 1} edges, got {len(norm)}")
        for u, v in norm:
            if u == v or not (1 <= u <= self.n and 1 <= v <= self.n):
                raise TreeError(f"bad edge {u}-{v} for n={self.n}")
        seen = {1}
        stack = [1]
        adj = self.adjacency()
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != self.n:
            raise TreeError("edge set is not connected")

    def adjacency(self) -> list[list[int]]:
        """Index 0 unused; ``adj[v]`` lists the neighbours of label ``v``."""
        adj: list[list[int]] = [[] for _ in range(self.n + 1)]
        for u, v in sorted(self.edges):
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency()]

    def to_text(self) -> str:
        return f"{self.n}; " + ", ".join(f"{u}-{v}" for u, v in sorted(self.edges))

    def planted_at(self, root: int) -> PlantedTree:
        """Unlabeled shape of the tree rooted at ``root``."""
        adj = self.adjacency()

        def build(v: int, parent: int) -> PlantedTree:
            return PlantedTree(tuple(build(w, v) for w in adj[v] if w != parent), NODE)

        return build(root, 0)


def parse_labeled(text: str) -> LabeledTree:
    """Parse ``n; u-v, u-v, ...``."""
    head, _, rest = text.partition(";")
    try:
        n = int(head.strip())
        edges = []
        for item in rest.split(","):
            item = item.strip()
            if item:
                u, v = item.split("-")
                edges.append((int(u), int(v)))
    except ValueError as exc:
        raise TreeError(f"cannot parse tree text {text!r}") from exc
    return LabeledTree(n, frozenset(edges))


def prufer_decode_edges(seq: Sequence[int], n: int) -> list[tuple[int, int]]:
    """Edge list of the tree with Prüfer sequence ``seq`` (no validation)."""
    degree = [1] * (n + 1)
    for v in seq:
        degree[v] += 1
    leaves = [v for v in range(1, n + 1) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        lf = heapq.heappop(leaves)
        edges.append((lf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return edges


def prufer_decode(seq: Sequence[int], n: int) -> LabeledTree:
    """The labeled tree on 1..n encoded by ``seq``."""
    if n < 2:
        raise TreeError("Prüfer sequences need n >= 2")
    if len(seq) != n - 2:
        raise TreeError(f"sequence length {len(seq)} != n-2 = {n - 2}")
    if any(not (1 <= v <= n) for v in seq):
        raise TreeError(f"labels must lie in 1..{n}")
    return LabeledTree(n, frozenset(prufer_decode_edges(seq, n)))


def prufer_encode(t: LabeledTree) -> tuple[int, ...]:
    """Inverse of :func:`prufer_decode`."""
    if t.n < 2:
        raise TreeError("Prüfer sequences need n >= 2")
    adj = [set(a) for a in t.adjacency()]
    leaves = [v for v in range(1, t.n + 1) if len(adj[v]) == 1]
    heapq.heapify(leaves)
    seq = []
    for _ in range(t.n - 2):
        lf = heapq.heappop(leaves)
        (nb,) = adj[lf]
        seq.append(nb)
        adj[nb].discard(lf)
        if len(adj[nb]) == 1:
            heapq.heappush(leaves, nb)
    return tuple(seq)


def tree_count(n: int) -> int:
    """Number of labeled trees on n nodes, n^(n-2)."""
    return 1 if n <= 2 else n ** (n - 2)


def prufer_sequences(n: int, start: int = 0, stop: int | None = None) -> Iterator[tuple[int, ...]]:
    """Prüfer sequences in lexicographic order, restricted to indices [start, stop)."""
    total = tree_count(n)
    stop = total if stop is None else min(stop, total)
    if n <= 2:
        if start < stop:
            yield ()
        return
    digits = []
    k = start
    for _ in range(n - 2):
        digits.append(k % n)
        k //= n
    digits.reverse()
    seq = [d + 1 for d in digits]
    for _ in range(start, stop):
        yield tuple(seq)
        i = n - 3
        while i >= 0 and seq[i] == n:
            seq[i] = 1
            i -= 1
        if i >= 0:
            seq[i] += 1


def enumerate_labeled_trees(
    n: int, cap: int = DEFAULT_ENUMERATION_CAP, start: int = 0, stop: int | None = None
) -> Iterator[LabeledTree]:
    """Every labeled tree on n nodes, once each, in lexicographic Prüfer order."""
    if n < 2:
        raise TreeError("enumeration needs n >= 2")
    if n > cap:
        raise TreeError(f"n={n} exceeds the enumeration cap {cap}")
    for seq in prufer_sequences(n, start, stop):
        yield LabeledTree(n, frozenset(prufer_decode_edges(seq, n)))
