from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treepatterns.oracle import (
    OracleError,
    compare,
    count_occurrences,
    degree_census,
    distribution,
    dumps_distribution,
    rooted_distribution,
)
from treepatterns.pattern import named_pattern, parse_pattern
from treepatterns.trees import parse_labeled, prufer_decode


@st.composite
def labeled_trees(draw, nmax=14):
    n = draw(st.integers(2, nmax))
    seq = draw(st.lists(st.integers(1, n), min_size=n - 2, max_size=n - 2))
    return prufer_decode(seq, n)


@given(labeled_trees(), st.integers(2, 5))
@settings(max_examples=200, deadline=None)
def test_star_count_is_degree_census(T, k):
    # star:1 is an edge with two external ends, so the census starts at k = 2
    assert count_occurrences(T, named_pattern(f"star:{k}")) == degree_census(T, k)


@given(labeled_trees())
@settings(deadline=None)
def test_edges_and_nodes(T):
    assert count_occurrences(T, named_pattern("edge")) == T.n - 1
    assert count_occurrences(T, named_pattern("node")) == T.n


@given(labeled_trees())
@settings(max_examples=100, deadline=None)
def test_path3_counts_pairs_of_incident_edges(T):
    # an induced three-node path with an internal centre: one per pair of edges at a node of degree 2
    path3 = parse_pattern({"nodes": [1, 2, 3], "edges": [[1, 2], [2, 3]]})
    assert count_occurrences(T, path3) == sum(1 for d in T.degrees()[1:] if d == 2)


def test_fig1_on_hand_built_tree(fig1):
    # the pattern itself contains exactly one copy
    T = parse_labeled("8; 1-2, 2-3, 1-4, 1-5, 2-6, 3-7, 3-8")
    assert count_occurrences(T, fig1) == 1
    # an extra leaf at node 2 breaks the degree constraint
    T2 = parse_labeled("9; 1-2, 2-3, 1-4, 1-5, 2-6, 3-7, 3-8, 2-9")
    assert count_occurrences(T2, fig1) == 0


def test_histogram_totals():
    d = distribution(6, named_pattern("star:3"))
    assert d.total == 6**4
    assert d.mean() == Fraction(sum(m * v for m, v in d.counts), d.total)
    assert d.variance() >= 0


def test_threads_do_not_change_results():
    m = named_pattern("paper:fig1")
    assert distribution(8, m, threads=1).counts == distribution(8, m, threads=3, chunks=7).counts


def test_rooted_scales_by_n():
    m = named_pattern("star:2")
    assert rooted_distribution(5, m).histogram == {k: 5 * v for k, v in distribution(5, m).histogram.items()}


def test_cap_and_bad_sizes():
    with pytest.raises(OracleError):
        distribution(10, named_pattern("star:2"))
    with pytest.raises(OracleError):
        distribution(0, named_pattern("star:2"))
    assert distribution(1, named_pattern("node")).histogram == {1: 1}


def test_compare_reports_first_mismatch():
    d = distribution(4, named_pattern("star:3"))
    good = compare(d.histogram, d)
    assert good.equal and good.first_mismatch is None
    bad = compare({0: 1, 1: 15}, d)
    assert not bad.equal and bad.first_mismatch == 0


def test_dumps():
    d = distribution(4, named_pattern("edge"))
    assert '"3": 16' in dumps_distribution(d)
    assert dumps_distribution(d, "tsv").splitlines()[1] == "4\t3\t16"
