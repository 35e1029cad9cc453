from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treepatterns import published as ref
from treepatterns.partition import (
    ClassLimitExceeded,
    ClassPartition,
    PartitionError,
    TermLimitExceeded,
    build_naive_partition,
    build_partition,
    classify,
    dagify,
    direct_root_count,
    disambiguate,
    intersect_planar_classes,
    naive_class_count,
    strongly_connected,
    validate_partition,
)
from treepatterns.pattern import DegreeProfile, derive_planted_patterns, named_pattern, parse_pattern, planar_embeddings
from treepatterns.trees import PlantedTree, general_to_planar, node, parse_planted, rooted_shapes


def _q_sorted(pps):
    return sorted(pps, key=lambda q: (-q.outdeg, q.size, q.code))


def test_naive_eleven_classes():
    part = build_naive_partition(DegreeProfile(frozenset({2}), 3))
    assert part.size == 11
    assert naive_class_count(DegreeProfile(frozenset({2}), 3)) == 11


def test_naive_single_level():
    part = build_naive_partition(DegreeProfile(frozenset({2}), 1))
    assert part.size == 2
    assert part.lambdas[1] == frozenset({(0, 0), (0, 1), (1, 1)})


def test_naive_class_limit_on_fig7(fig7):
    with pytest.raises(ClassLimitExceeded) as info:
        build_partition(fig7, "naive")
    assert info.value.count > 1000


def test_naive_term_limit():
    m = parse_pattern({"nodes": list(range(1, 8)), "edges": [[1, 2], [2, 3], [3, 4], [4, 5], [3, 6], [3, 7]]})
    with pytest.raises(TermLimitExceeded):
        build_partition(m, "naive")


def test_naive_needs_degrees():
    with pytest.raises(PartitionError):
        build_naive_partition(DegreeProfile(frozenset(), 2))


def test_fig7_intersection_and_dag(fig7):
    U = planar_embeddings(_q_sorted(derive_planted_patterns(fig7)))
    Q = intersect_planar_classes(U)
    assert len(Q) == 24
    assert tuple(dagify(Q)) == ref.FIG7_DAG


def test_intersection_single_tree():
    t = parse_planted("x(o)(x(o)(o))")
    assert intersect_planar_classes([general_to_planar(t)[0]]) == [t]


def test_intersection_incompatible_roots():
    a = general_to_planar(parse_planted("x(o)(o)"))[0]
    b = general_to_planar(parse_planted("x(o)(o)(o)"))[0]
    assert sorted(q.code for q in intersect_planar_classes([a, b])) == sorted(["x(o)(o)", "x(o)(o)(o)"])


def test_dagify_small_cases():
    assert dagify([parse_planted("x(x(o)(o))(o)")]) == [(0, 0)]
    assert dagify([parse_planted("x(o)(o)")]) == []


def test_disambiguate_stage_three():
    lam, reps = disambiguate(ref.FIG7_DAG[:3])
    assert lam[2] == frozenset({(1, 1)})
    assert lam[3] == frozenset({(0, 1), (1, 2), (1, 3)})
    assert reps[3] == frozenset({2})


def test_disambiguate_empty():
    lam, reps = disambiguate([])
    assert lam == [frozenset()]
    assert reps == [frozenset({0})]


def test_disambiguate_rejects_forward_reference():
    with pytest.raises(PartitionError):
        disambiguate([(0, 2)])


def test_fig7_full_structure(fig7):
    part = build_partition(fig7, "compact")
    assert part.size == ref.FIG7_CLASSES
    assert tuple(part.lambdas) == ref.fig7_lambdas()
    assert part.K == ref.fig7_expected_K()


def test_fig1_naive_counts(fig1):
    part = build_partition(fig1, "naive")
    per_class = tuple(max([k for (j, _), k in part.K.items() if j == c], default=0) for c in range(part.size))
    assert per_class == ref.FIG1_NAIVE_K


def test_overlapping_terms_rejected():
    with pytest.raises(PartitionError):
        ClassPartition("compact", DegreeProfile(frozenset({2}), 1), (frozenset(), frozenset({(0, 0)}), frozenset({(0, 0)})))


@pytest.mark.parametrize(
    "name", ["paper:fig1", "star:2", "star:3", "star:4"]
)
@pytest.mark.parametrize("builder", ["naive", "compact"])
def test_validation_passes(name, builder):
    m = named_pattern(name)
    rep = validate_partition(build_partition(m, builder), m, 7)
    assert rep.ok, rep.to_doc()


EXTRA = {
    "path4": [[1, 2], [2, 3], [3, 4]],
    "spider": [[1, 2], [1, 3], [1, 4], [2, 5]],
    "double_star": [[1, 2], [1, 3], [2, 4], [2, 5]],
    "caterpillar": [[1, 2], [2, 3], [3, 4], [2, 5], [3, 6]],
}


@pytest.mark.parametrize("edges", EXTRA.values(), ids=EXTRA.keys())
def test_validation_on_extra_patterns(edges):
    n = max(max(e) for e in edges)
    m = parse_pattern({"nodes": list(range(1, n + 1)), "edges": edges})
    for builder in ("naive", "compact"):
        rep = validate_partition(build_partition(m, builder), m, 7)
        assert rep.ok, (builder, rep.to_doc())


def test_strong_connectivity():
    assert strongly_connected({0: {1}, 1: {0}})
    assert not strongly_connected({0: {1}, 1: set()})


def test_direct_root_count():
    pps = derive_planted_patterns(named_pattern("star:3"))
    assert direct_root_count(pps, parse_planted("x(.)(.)")) == 1
    assert direct_root_count(pps, parse_planted("x(.)(.)(.)")) == 0


@st.composite
def planted_trees(draw, max_size=9):
    n = draw(st.integers(1, max_size))
    shapes = rooted_shapes(n)
    return shapes[draw(st.integers(0, len(shapes) - 1))]


@pytest.fixture(scope="module")
def fig1_parts():
    m = named_pattern("paper:fig1")
    return {b: build_partition(m, b) for b in ("naive", "compact")}


@given(t=planted_trees())
@settings(max_examples=200, deadline=None)
def test_every_tree_has_exactly_one_class(fig1_parts, t):
    for part in fig1_parts.values():
        term = tuple(sorted(classify(c, part) for c in t.children))
        hits = [j for j in range(1, part.size) if term in part.lambdas[j]]
        assert len(hits) <= 1
        assert classify(t, part) == (hits[0] if hits else 0)


@given(t=planted_trees())
@settings(max_examples=200, deadline=None)
def test_builders_agree_on_occurrences(fig1_parts, t):
    pps = derive_planted_patterns(named_pattern("paper:fig1"))
    expected = direct_root_count(pps, t)
    for part in fig1_parts.values():
        term = tuple(sorted(classify(c, part) for c in t.children))
        assert part.k(classify(t, part), term) == expected


def test_fig7_compact_term_count(fig7):
    # a root with children of classes 1, 3 and 6 in class a_1 adds three occurrences
    part = build_partition(fig7, "compact")
    assert part.class_of_term((1, 3, 6)) == 1
    assert part.k(1, (1, 3, 6)) == 3


def test_fig1_naive_class_nine(fig1):
    part = build_partition(fig1, "naive")
    assert max(k for (j, _), k in part.K.items() if j == 9) == 4
