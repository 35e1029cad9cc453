"""Brute-force occurrence counts over every labeled tree of a given size."""

from __future__ import annotations

import json
from collections import Counter, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .pattern import Pattern
from .trees import DEFAULT_ENUMERATION_CAP, LabeledTree, prufer_decode_edges, prufer_sequences, tree_count


class OracleError(RuntimeError):
    """Embedding count not divisible by the automorphism count, or a bad request."""


@dataclass(frozen=True)
class _Plan:
    """Pattern nodes in BFS order from an internal anchor: (parent position, required degree or 0)."""

    steps: tuple[tuple[int, int], ...]
    aut: int


def _bfs_plan(m: Pattern) -> list[tuple[int, int, int]]:
    internal = m.internal_nodes()
    anchor = max(internal, key=lambda v: (m.degree(v), -v)) if internal else m.nodes[0]
    order = [anchor]
    parent_pos = {anchor: -1}
    queue = deque([anchor])
    while queue:
        v = queue.popleft()
        for w in m.adjacency[v]:
            if w not in parent_pos:
                parent_pos[w] = order.index(v)
                order.append(w)
                queue.append(w)
    return [(v, parent_pos[v], m.degree(v) if m.is_internal(v) else 0) for v in order]


def _embeddings(steps: Sequence[tuple[int, int]], adj: Sequence[Sequence[int]]) -> int:
    """Injective maps respecting pattern adjacency and internal degrees."""
    k = len(steps)
    image = [0] * k
    used = [False] * len(adj)
    deg0 = steps[0][1]
    total = 0

    def extend(i: int) -> None:
        nonlocal total
        if i == k:
            total += 1
            return
        parent, need = steps[i]
        for w in adj[image[parent]]:
            if used[w] or (need and len(adj[w]) != need):
                continue
            used[w] = True
            image[i] = w
            extend(i + 1)
            used[w] = False

    for v in range(len(adj)):
        if deg0 and len(adj[v]) != deg0:
            continue
        used[v] = True
        image[0] = v
        extend(1)
        used[v] = False
    return total


def compile_pattern(m: Pattern) -> _Plan:
    plan = _bfs_plan(m)
    steps = tuple((p, need) for _, p, need in plan)
    index = {v: i for i, v in enumerate(m.nodes)}
    self_adj = [[index[w] for w in m.adjacency[v]] for v in m.nodes]
    aut = _embeddings(steps, self_adj)
    return _Plan(steps, aut)


def _adjacency(n: int, edges: Sequence[tuple[int, int]]) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u - 1].append(v - 1)
        adj[v - 1].append(u - 1)
    return adj


def _count(plan: _Plan, adj: Sequence[Sequence[int]]) -> int:
    if len(plan.steps) > len(adj):
        return 0
    emb = _embeddings(plan.steps, adj)
    q, r = divmod(emb, plan.aut)
    if r:
        raise OracleError(f"{emb} embeddings are not divisible by |Aut| = {plan.aut}")
    return q


def count_occurrences(T: LabeledTree, m: Pattern) -> int:
    """Node subsets of T inducing a copy of the pattern with matching internal degrees."""
    return _count(compile_pattern(m), _adjacency(T.n, sorted(T.edges)))


@dataclass(frozen=True)
class OccurrenceDistribution:
    n: int
    counts: tuple[tuple[int, int], ...]

    @property
    def histogram(self) -> dict[int, int]:
        return dict(self.counts)

    @property
    def total(self) -> int:
        return sum(v for _, v in self.counts)

    def mean(self) -> Fraction:
        return Fraction(sum(m * v for m, v in self.counts), self.total)

    def variance(self) -> Fraction:
        mu = self.mean()
        return Fraction(sum(m * m * v for m, v in self.counts), self.total) - mu * mu

    def scaled(self, factor: int) -> OccurrenceDistribution:
        return OccurrenceDistribution(self.n, tuple((m, v * factor) for m, v in self.counts))

    def to_doc(self) -> dict[str, Any]:
        return {"n": self.n, "histogram": {str(m): v for m, v in self.counts}, "total": self.total}


def _chunk(args: tuple[Pattern, int, int, int]) -> Counter:
    m, n, start, stop = args
    plan = compile_pattern(m)
    hist: Counter = Counter()
    for seq in prufer_sequences(n, start, stop):
        hist[_count(plan, _adjacency(n, prufer_decode_edges(seq, n)))] += 1
    return hist


def distribution(
    n: int, m: Pattern, threads: int = 1, cap: int = DEFAULT_ENUMERATION_CAP, chunks: int | None = None
) -> OccurrenceDistribution:
    """Exact histogram of occurrence counts over all n^(n-2) labeled trees."""
    if n < 1:
        raise OracleError("n must be positive")
    if n > cap:
        raise OracleError(f"n={n} exceeds the enumeration cap {cap}")
    if n == 1:
        hist = Counter({_count(compile_pattern(m), [[]]): 1})
        return OccurrenceDistribution(1, tuple(sorted(hist.items())))
    total = tree_count(n)
    pieces = chunks or max(1, threads * 4)
    bounds = [total * i // pieces for i in range(pieces + 1)]
    jobs = [(m, n, bounds[i], bounds[i + 1]) for i in range(pieces) if bounds[i] < bounds[i + 1]]
    hist: Counter = Counter()
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(_chunk, jobs):
                hist.update(part)
    else:
        for job in jobs:
            hist.update(_chunk(job))
    if sum(hist.values()) != total:
        raise OracleError("histogram total differs from n^(n-2)")
    return OccurrenceDistribution(n, tuple(sorted(hist.items())))


def rooted_distribution(n: int, m: Pattern, threads: int = 1, cap: int = DEFAULT_ENUMERATION_CAP) -> OccurrenceDistribution:
    """Histogram over rooted trees: every unrooted tree appears once per choice of root."""
    return distribution(n, m, threads, cap).scaled(n)


@dataclass(frozen=True)
class Comparison:
    n: int
    equal: bool
    first_mismatch: int | None
    series: tuple[tuple[int, int], ...]
    oracle: tuple[tuple[int, int], ...]

    def to_doc(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "equal": self.equal,
            "first_mismatch": self.first_mismatch,
            "series": {str(k): v for k, v in self.series},
            "oracle": {str(k): v for k, v in self.oracle},
        }


def compare(series_t: Mapping[int, int], oracle: OccurrenceDistribution) -> Comparison:
    """Exact comparison of a series distribution with an oracle histogram."""
    a = {k: v for k, v in series_t.items() if v}
    b = oracle.histogram
    bad = sorted(k for k in set(a) | set(b) if a.get(k, 0) != b.get(k, 0))
    return Comparison(
        oracle.n, not bad, bad[0] if bad else None, tuple(sorted(a.items())), tuple(sorted(b.items()))
    )


def degree_census(T: LabeledTree, k: int) -> int:
    """Number of nodes of degree k (star:k occurrences)."""
    return sum(1 for d in T.degrees()[1:] if d == k)


def dumps_distribution(d: OccurrenceDistribution, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(d.to_doc(), sort_keys=True, indent=2)
    return "\n".join(["n\tm\tcount"] + [f"{d.n}\t{m}\t{v}" for m, v in d.counts])

