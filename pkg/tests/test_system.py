from __future__ import annotations

import json
from fractions import Fraction

import pytest

from treepatterns.partition import build_partition
from treepatterns.pattern import named_pattern
from treepatterns.system import (
    A,
    U,
    X,
    Mono,
    SysPoly,
    build_planted_system,
    emit,
    equation_sum,
    jacobian,
    substitute_u1,
    system_from_doc,
)


@pytest.fixture(scope="module")
def fig1_systems():
    m = named_pattern("paper:fig1")
    return {b: (build_partition(m, b), build_planted_system(build_partition(m, b), m.name)) for b in ("naive", "compact")}


def test_poly_arithmetic_and_derivatives():
    # f = x a_0^2 a_1 u^3 / 2 + 5 x E
    f = SysPoly.build([(Mono(((0, 2), (1, 1)), 1, 3, 0), Fraction(1, 2)), (Mono((), 1, 0, 1), 5)])
    assert f.diff(X) == SysPoly.build([(Mono(((0, 2), (1, 1)), 0, 3, 0), Fraction(1, 2)), (Mono((), 0, 0, 1), 5)])
    assert f.diff(U).evaluate(1, [1, 1], 1, 0) == Fraction(3, 2)
    # dE/da_j = E
    assert f.diff(A(3)) == SysPoly.build([(Mono((), 1, 0, 1), 5)])
    assert (f - f).is_zero()
    assert f.evaluate(2, [3, 5], 1, 7) == Fraction(2 * 9 * 5, 2) + 5 * 2 * 7
    # total degree over x, u, E and the a_j
    assert f.max_degree() == 7


def test_u1_image_of_the_sum_is_xE(fig1_systems):
    # summing every equation at u = 1 leaves x E
    for _, sys_ in fig1_systems.values():
        total = equation_sum(substitute_u1(sys_))
        assert total == SysPoly.build([(Mono((), 1, 0, 1), 1)])


def test_rooted_equation_at_u1(fig1_systems):
    for _, sys_ in fig1_systems.values():
        assert sys_.rooted.at_u1() == SysPoly.build([(Mono((), 1, 0, 1), 1)])


def test_jacobian_shape(fig1_systems):
    _, sys_ = fig1_systems["naive"]
    J = jacobian(sys_)
    assert len(J) == 11 and all(len(r) == 11 for r in J)


def test_doc_roundtrip(fig1_systems):
    for _, sys_ in fig1_systems.values():
        doc = json.loads(json.dumps(sys_.to_doc()))
        back = system_from_doc(doc)
        assert back.equations == sys_.equations
        assert back.rooted == sys_.rooted


def test_fig1_compact_text(fig1_systems):
    part, sys_ = fig1_systems["compact"]
    lines = emit(sys_, "text", part).splitlines()
    assert lines[0] == "a_0 = x E - x (P_1 + ... + P_3)(a, 1)"
    assert "a_1 = 1/2 x (a_2+a_3u+a_1u^2)^2 u" in lines
    assert "a_3 = x a_0 (a_2+a_3u+a_1u^2)" in lines


def test_fig7_factored_text(fig7):
    part = build_partition(fig7, "compact")
    lines = emit(build_planted_system(part), "text", part).splitlines()
    assert "a_1 = 1/6 x (a_0+a_1+a_2+a_4+a_5+(a_3+a_7)u+a_6u^2)^3" in lines
    assert "a_4 = 1/24 x (a_0+a_1+a_4+a_6+a_7+(a_3+a_5)u+a_2u^2)^4" in lines


def test_latex_and_json_emitters(fig1_systems):
    part, sys_ = fig1_systems["compact"]
    tex = emit(sys_, "latex", part)
    assert "\\frac" in tex or "a_{" in tex
    doc = json.loads(emit(sys_, "json", part))
    assert doc["L"] == 3
    with pytest.raises(ValueError):
        emit(sys_, "yaml", part)


def test_dependency_graph(fig1_systems):
    for _, sys_ in fig1_systems.values():
        edges = sys_.dependency_edges()
        assert set(edges) == set(range(sys_.size))
        assert edges[0] == set(range(sys_.size))
