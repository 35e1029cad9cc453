from __future__ import annotations

import json

import pytest

from treepatterns.pattern import (
    PatternError,
    degree_profile,
    derive_planted_patterns,
    derive_rooted_patterns,
    load_pattern,
    matches_at_root,
    named_pattern,
    parse_pattern,
    star_pattern,
)
from treepatterns.trees import NODE, WILD, PlanarTree, general_to_planar, parse_planted


def test_fig1_derived_patterns(fig1):
    pps = derive_planted_patterns(fig1)
    assert {p.code for p in pps} == {"x(o)(x(o)(x(o)(o)))", "x(x(o)(o))(x(o)(o))"}
    rps = derive_rooted_patterns(fig1)
    assert len(rps) == 2
    dp = degree_profile(pps)
    assert dp.D == frozenset({2}) and dp.Dbar == frozenset({3}) and dp.h == 3


def test_fig7_profile(fig7):
    pps = derive_planted_patterns(fig7)
    assert len(pps) == 3
    dp = degree_profile(pps)
    assert dp.D == frozenset({2, 3, 4}) and dp.h == 3


@pytest.mark.parametrize("k", [1, 2, 5])
def test_star(k):
    m = star_pattern(k)
    assert m.size == k + 1
    if k >= 2:
        pps = derive_planted_patterns(m)
        assert [p.outdeg for p in pps] == [k - 1]


def test_internal_and_external_nodes(fig1):
    assert fig1.internal_nodes() == [1, 2, 3]
    assert all(not fig1.is_internal(v) for v in (4, 5, 6, 7, 8))


@pytest.mark.parametrize(
    "doc",
    [
        "not json",
        "[]",
        {"nodes": []},
        {"nodes": [1, 1], "edges": [[1, 1]]},
        {"nodes": [1, 2, 3], "edges": [[1, 2]]},
        {"nodes": [1, 2, 3], "edges": [[1, 2], [1, 2]]},
        {"nodes": [1, 2, 3, 4], "edges": [[1, 2], [2, 1], [3, 4]]},
        {"nodes": [1, 2], "edges": [[1, 5]]},
        {"nodes": [1, 2, 3], "edges": [[1, 2], [2, 3]], "kinds": {"1": "internal"}},
        {"nodes": [1, 2, 3], "edges": [[1, 2], [2, 3]], "kinds": {"2": "bogus"}},
    ],
)
def test_invalid_patterns(doc):
    with pytest.raises(PatternError):
        parse_pattern(doc if isinstance(doc, str) else json.dumps(doc))


def test_kinds_consistent_with_structure():
    m = parse_pattern({"nodes": [1, 2, 3], "edges": [[1, 2], [2, 3]], "kinds": {"2": "internal", "1": "external"}})
    assert m.internal_nodes() == [2]


def test_load_pattern_sources(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"nodes": [1, 2, 3], "edges": [[1, 2], [1, 3]]}))
    assert load_pattern(str(p)).size == 3
    assert load_pattern('{"nodes": [1, 2], "edges": [[1, 2]]}').size == 2
    assert load_pattern("star:3").size == 4
    with pytest.raises(PatternError):
        load_pattern("no-such-pattern")
    with pytest.raises(PatternError):
        named_pattern("star:x")


def _planar(tag, *kids):
    return PlanarTree(tuple(kids), tag)


def test_matches_at_root_respects_child_order():
    o, dot = _planar(WILD), _planar(NODE)
    pi = _planar(NODE, o, _planar(NODE, o, o))
    assert matches_at_root(pi, _planar(NODE, dot, _planar(NODE, dot, _planar(NODE, dot))))
    assert not matches_at_root(pi, _planar(NODE, _planar(NODE, dot, dot), dot))
    assert not matches_at_root(pi, _planar(NODE, dot, _planar(NODE, dot)))
    embeddings = general_to_planar(parse_planted("x(x(.)(.))(.)"))
    assert sum(matches_at_root(pi, e) for e in embeddings) == 1
