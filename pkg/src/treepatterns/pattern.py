"""Patterns: parsing, validation, planted/rooted variants and the degree profile."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Mapping

from .trees import NODE, WILD, PlanarTree, PlantedTree, general_to_planar

INTERNAL = "internal"
EXTERNAL = "external"


class PatternError(ValueError):
    """Invalid pattern document."""


@dataclass(frozen=True)
class Pattern:
    """A finite tree whose leaves are external and whose other nodes are internal."""

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    name: str = "custom"
    kinds: dict[int, str] = field(init=False, compare=False)
    adjacency: dict[int, tuple[int, ...]] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        adj: dict[int, list[int]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "adjacency", {v: tuple(sorted(a)) for v, a in adj.items()})
        kinds = {v: (INTERNAL if len(adj[v]) >= 2 else EXTERNAL) for v in self.nodes}
        object.__setattr__(self, "kinds", kinds)

    @property
    def size(self) -> int:
        return len(self.nodes)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def internal_nodes(self) -> list[int]:
        return [v for v in self.nodes if self.kinds[v] == INTERNAL]

    def is_internal(self, v: int) -> bool:
        return self.kinds[v] == INTERNAL

    def to_doc(self) -> dict[str, Any]:
        return {
            "nodes": list(self.nodes),
            "edges": [list(e) for e in self.edges],
            "kinds": {str(v): self.kinds[v] for v in self.nodes},
        }

    def tree_from(self, root: int, parent: int | None) -> PlantedTree:
        """The pattern hanging from ``root`` away from ``parent``; external nodes become wildcards."""
        if not self.is_internal(root):
            return PlantedTree((), WILD)
        kids = tuple(self.tree_from(w, root) for w in self.adjacency[root] if w != parent)
        return PlantedTree(kids, NODE)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_pattern(doc: str | Mapping[str, Any], name: str = "custom") -> Pattern:
    """Build a validated pattern from a JSON document (text or mapping)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise PatternError(f"pattern document is not valid JSON: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise PatternError("pattern document must be a JSON object")
    try:
        nodes = [int(v) for v in doc.get("nodes", [])]
        edges = [(int(u), int(v)) for u, v in doc.get("edges", [])]
    except (TypeError, ValueError) as exc:
        raise PatternError(f"malformed nodes/edges: {exc}") from exc
    if not nodes:
        raise PatternError("pattern is empty")
    if len(set(nodes)) != len(nodes):
        raise PatternError("duplicate node identifiers")
    node_set = set(nodes)
    for u, v in edges:
        if u not in node_set or v not in node_set:
            raise PatternError(f"edge {u}-{v} uses an unknown node")
        if u == v:
            raise PatternError(f"self-loop at {u}")
    if len({(min(e), max(e)) for e in edges}) != len(edges):
        raise PatternError("duplicate edges")
    if len(edges) != len(nodes) - 1:
        raise PatternError(f"not a tree: {len(nodes)} nodes but {len(edges)} edges")
    adj: dict[int, set[int]] = {v: set() for v in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(nodes):
        raise PatternError("not a tree: the edge set is disconnected")
    for key, kind in (doc.get("kinds") or {}).items():
        v = int(key)
        if v not in node_set:
            raise PatternError(f"kind given for unknown node {v}")
        if kind not in (INTERNAL, EXTERNAL):
            raise PatternError(f"unknown kind {kind!r} for node {v}")
        structural = INTERNAL if len(adj[v]) >= 2 else EXTERNAL
        if kind != structural:
            raise PatternError(f"kind conflict at node {v}: marked {kind}, but it is {'a leaf' if structural == EXTERNAL else 'not a leaf'}")
    name = str(doc.get("name", name))
    return Pattern(tuple(nodes), tuple((min(e), max(e)) for e in edges), name)


def star_pattern(k: int) -> Pattern:
    """A centre joined to ``k`` external leaves."""
    if k < 1:
        raise PatternError("a star needs at least one edge")
    return Pattern(tuple(range(1, k + 2)), tuple((1, j) for j in range(2, k + 2)), f"star:{k}")


def named_pattern(name: str) -> Pattern:
    """Built-in patterns: ``node``, ``edge``, ``star:k``, ``paper:fig1``, ``paper:fig7``."""
    if name == "node":
        return Pattern((1,), (), "node")
    if name == "edge":
        return Pattern((1, 2), ((1, 2),), "edge")
    if name.startswith("star:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError as exc:
            raise PatternError(f"bad star size in {name!r}") from exc
        return star_pattern(k)
    fixtures = {"paper:fig1": "fig1.json", "paper:fig7": "fig7.json"}
    if name in fixtures:
        text = resources.files("treepatterns").joinpath("fixtures").joinpath(fixtures[name]).read_text()
        return parse_pattern(text, name)
    raise PatternError(f"unknown named pattern {name!r}")


def load_pattern(source: str) -> Pattern:
    """A named pattern, a JSON file path, or an inline JSON document."""
    source = source.strip()
    if source.startswith("{"):
        return parse_pattern(source)
    try:
        return named_pattern(source)
    except PatternError:
        pass
    try:
        with open(source, encoding="utf-8") as fh:
            return parse_pattern(fh.read(), source)
    except OSError as exc:
        raise PatternError(f"unknown pattern {source!r} (not a named pattern or readable file)") from exc


# ---------------------------------------------------------------------------
# Derived trees
# ---------------------------------------------------------------------------


def derive_planted_patterns(m: Pattern) -> list[PlantedTree]:
    """One planted pattern per internal node adjacent to an external node, deduplicated."""
    out: dict[str, PlantedTree] = {}
    for c in m.internal_nodes():
        slots = [w for w in m.adjacency[c] if not m.is_internal(w)]
        if slots:
            t = m.tree_from(c, slots[0])
            out.setdefault(t.code, t)
    return [out[k] for k in sorted(out)]


def derive_rooted_patterns(m: Pattern) -> list[PlantedTree]:
    """One rooted pattern per internal node, deduplicated."""
    out: dict[str, PlantedTree] = {}
    for v in m.internal_nodes():
        t = m.tree_from(v, None)
        out.setdefault(t.code, t)
    return [out[k] for k in sorted(out)]


@dataclass(frozen=True)
class DegreeProfile:
    """Out-degrees D of planted-pattern internal nodes, Dbar = D+1 and the height h."""

    D: frozenset[int]
    h: int

    @property
    def Dbar(self) -> frozenset[int]:
        return frozenset(d + 1 for d in self.D)

    def to_doc(self) -> dict[str, Any]:
        return {"D": sorted(self.D), "Dbar": sorted(self.Dbar), "h": self.h}


def _internal_outdegrees(t: PlantedTree) -> set[int]:
    if t.tag != NODE or not t.children:
        return set()
    out = {t.outdeg}
    for c in t.children:
        out |= _internal_outdegrees(c)
    return out


def degree_profile(pps: list[PlantedTree]) -> DegreeProfile:
    if not pps:
        raise PatternError("degree profile needs at least one planted pattern")
    D: set[int] = set()
    for t in pps:
        D |= _internal_outdegrees(t)
    return DegreeProfile(frozenset(D), max(t.height for t in pps))


def planar_embeddings(trees: list[PlantedTree]) -> list[PlanarTree]:
    """All planar embeddings of the given trees, grouped tree by tree."""
    out: list[PlanarTree] = []
    for t in trees:
        out.extend(general_to_planar(t))
    return out


def matches_at_root(pi: PlanarTree, target: PlanarTree) -> bool:
    """Whether ``pi`` occurs at the root of ``target`` (wildcards match anything).

    A non-wildcard node of ``pi`` needs a concrete node of ``target`` with the
    same out-degree; ``#`` and wildcard nodes of ``target`` never host one.
    """
    if pi.tag == WILD:
        return True
    if target.tag != NODE or len(target.children) != len(pi.children):
        return False
    return all(matches_at_root(a, b) for a, b in zip(pi.children, target.children))

