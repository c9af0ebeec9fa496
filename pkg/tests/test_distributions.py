import math

import numpy as np
import pytest

from conftest import complete_graph, empty_graph
from degdiv.distributions import (
    BlendedSpec,
    ProbVector,
    ProductSpec,
    TrivialSpec,
    UniformConstantSpec,
    expected_degree,
    lift_spec,
    product_of,
    realize_subgraph,
    restricted_rows,
    sample,
    sample_matrix,
    spec_from_json,
    spec_to_json,
)
from degdiv.errors import PreconditionError
from degdiv.graphs import Graph, VertexSet, generate_gnp
from degdiv.rng import ForcedStream, stream


def full(n):
    return VertexSet.full(n)


# -- constructors and validation ---------------------------------------------------


def test_blended_validation():
    dom = full(4)
    with pytest.raises(PreconditionError):
        BlendedSpec(anchors=(), domain=dom, spread=0.2)
    with pytest.raises(PreconditionError):
        BlendedSpec(anchors=(0, 0), domain=dom, spread=0.2)
    with pytest.raises(PreconditionError):
        BlendedSpec(anchors=(1,), domain=dom, spread=0.0)
    with pytest.raises(PreconditionError):
        BlendedSpec(anchors=(1,), domain=dom, spread=0.41)
    BlendedSpec(anchors=(1,), domain=dom, spread=0.4)  # the boundary is allowed


def test_product_validation():
    a = TrivialSpec(VertexSet.from_members(6, [0, 1]))
    b = TrivialSpec(VertexSet.from_members(6, [1, 2]))
    with pytest.raises(PreconditionError):
        product_of([a, b])
    c = TrivialSpec(VertexSet.from_members(6, [2, 3]))
    spec = product_of([a, c])
    assert spec.domain.members() == [0, 1, 2, 3]
    with pytest.raises(PreconditionError):
        ProductSpec(children=(a, c), domain=full(6))  # domain must equal the union


# -- sampling ------------------------------------------------------------------------


def test_trivial_is_exactly_half():
    g = generate_gnp(12, 0.5, seed=0)
    vec = sample(g, TrivialSpec(full(12)), stream(0))
    assert all(vec[v] == 0.5 for v in range(12))


def test_uniform_constant_is_constant_in_range():
    g = generate_gnp(12, 0.5, seed=0)
    vec = sample(g, UniformConstantSpec(full(12)), stream(5))
    values = {vec[v] for v in range(12)}
    assert len(values) == 1
    only = values.pop()
    assert 0.1 <= only <= 0.9


def test_blended_zero_coefficients_give_half():
    g = generate_gnp(6, 0.5, seed=1)
    spec = BlendedSpec(anchors=(0, 1, 2), domain=full(6), spread=0.3)
    vec = sample(g, spec, ForcedStream(np.zeros((1, 3))))
    assert all(vec[v] == 0.5 for v in range(6))


def test_blended_truncation_hand_case():
    # one anchor with a single neighbour; spread 0.4 forced to its maximum
    # pushes that neighbour's coordinate to the upper clip, everything else
    # stays at one half
    g = Graph.from_edges(3, [(0, 1)])
    spec = BlendedSpec(anchors=(0,), domain=full(3), spread=0.4)
    vec = sample(g, spec, ForcedStream(np.array([[0.4]])))
    assert vec[1] == 0.9 and vec[0] == 0.5 and vec[2] == 0.5
    vec = sample(g, spec, ForcedStream(np.array([[-0.4]])))
    assert vec[1] == pytest.approx(0.1) and vec[0] == 0.5


def test_blended_truncation_idempotent_under_forced_draws():
    g = generate_gnp(10, 0.6, seed=2)
    spec = BlendedSpec(anchors=(0, 3, 7), domain=full(10), spread=0.4)
    alphas = np.array([[0.4, -0.35, 0.2]])
    a = sample(g, spec, ForcedStream(alphas))
    b = sample(g, spec, ForcedStream(alphas))
    assert np.array_equal(a.values, b.values)


def test_all_variants_stay_in_range():
    g = generate_gnp(16, 0.5, seed=3)
    s1 = VertexSet.from_members(16, range(8))
    s2 = VertexSet.from_members(16, range(8, 16))
    specs = [
        TrivialSpec(full(16)),
        UniformConstantSpec(full(16)),
        BlendedSpec(anchors=tuple(range(6)), domain=full(16), spread=0.4),
        product_of([UniformConstantSpec(s1), BlendedSpec(anchors=(8, 9), domain=s2, spread=0.3)]),
    ]
    for i, spec in enumerate(specs):
        values = sample_matrix(g, spec, stream(i, "range"), 2500)
        dom = spec.domain.to_bools()
        assert values[:, dom].min() >= 0.1 - 1e-12
        assert values[:, dom].max() <= 0.9 + 1e-12


def test_product_independence():
    g = empty_graph(4)
    a = UniformConstantSpec(VertexSet.from_members(4, [0, 1]))
    b = UniformConstantSpec(VertexSet.from_members(4, [2, 3]))
    values = sample_matrix(g, product_of([a, b]), stream(9), 10_000)
    r = np.corrcoef(values[:, 0], values[:, 2])[0, 1]
    assert abs(r) < 0.05
    # within one factor the coordinates are identical by construction
    assert np.array_equal(values[:, 0], values[:, 1])


# -- functionals ------------------------------------------------------------------------


def test_expected_degree_cases():
    g = Graph.from_edges(4, [(0, 1), (0, 2)])
    vec = sample(g, TrivialSpec(full(4)), stream(0))
    assert expected_degree(g, 3, vec, full(4)) == 0.0  # isolated
    assert expected_degree(g, 0, vec, full(4)) == pytest.approx(1.0)  # degree 2 at half
    k3 = complete_graph(3)
    hand = ProbVector(values=np.array([0.1, 0.2, 0.3]), domain=full(3))
    assert expected_degree(k3, 0, hand, full(3)) == pytest.approx(0.5)


def test_expected_degree_linearity():
    g = generate_gnp(20, 0.5, seed=4)
    p1 = sample(g, UniformConstantSpec(full(20)), stream(1))
    p2 = sample(g, BlendedSpec(anchors=(0, 1), domain=full(20), spread=0.2), stream(2))
    mid = ProbVector(values=(p1.values + p2.values) / 2.0, domain=full(20))
    for u in (0, 7, 19):
        lhs = expected_degree(g, u, mid, full(20))
        rhs = (expected_degree(g, u, p1, full(20)) + expected_degree(g, u, p2, full(20))) / 2.0
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_expected_degree_domain_check():
    g = complete_graph(3)
    vec = sample(g, TrivialSpec(VertexSet.from_members(3, [0, 1])), stream(0))
    with pytest.raises(PreconditionError):
        expected_degree(g, 0, vec, full(3))
    with pytest.raises(PreconditionError):
        vec[2]


def test_realize_subgraph():
    g = generate_gnp(10, 0.5, seed=5)
    vec = sample(g, TrivialSpec(full(10)), stream(0))
    got = realize_subgraph(g, vec, ForcedStream(np.zeros(10)))
    assert got == full(10)  # a zero draw is below every coordinate
    partial = sample(g, TrivialSpec(VertexSet.from_members(10, [0])), stream(0))
    with pytest.raises(PreconditionError):
        realize_subgraph(g, partial, stream(1))


def test_realize_subgraph_concentration():
    g = empty_graph(1000)
    vec = sample(g, TrivialSpec(full(1000)), stream(0))
    sizes = [realize_subgraph(g, vec, stream(7, "real", i)).card for i in range(8)]
    sigma = math.sqrt(1000 * 0.25)
    assert all(abs(s - 500) <= 4 * sigma for s in sizes)


# -- serialization and lifting --------------------------------------------------------------


def test_spec_json_roundtrip():
    s1 = VertexSet.from_members(10, range(5))
    s2 = VertexSet.from_members(10, range(5, 10))
    specs = [
        TrivialSpec(s1),
        UniformConstantSpec(s2),
        BlendedSpec(anchors=(1, 4), domain=s1, spread=0.25),
        product_of([TrivialSpec(s1), BlendedSpec(anchors=(7,), domain=s2, spread=0.1)]),
    ]
    for spec in specs:
        assert spec_from_json(spec_to_json(spec)) == spec


def test_spec_json_rejects_unknown_version():
    with pytest.raises(PreconditionError):
        spec_from_json('{"version": 99, "n": 3, "variant": "trivial", "domain": []}')


def test_lift_spec_preserves_sampling():
    parent = generate_gnp(12, 0.5, seed=8)
    sub_set = VertexSet.from_members(12, [1, 3, 4, 8, 9, 11])
    sub, mapping = parent.induced(sub_set)
    spec_sub = BlendedSpec(anchors=(0, 2), domain=VertexSet.full(6), spread=0.3)
    lifted = lift_spec(spec_sub, mapping, 12)
    alphas = np.array([[0.21, -0.17]])
    low = sample(sub, spec_sub, ForcedStream(alphas))
    high = sample(parent, lifted, ForcedStream(alphas))
    for i, v in enumerate(mapping):
        assert high[v] == pytest.approx(low[i])


def test_restricted_rows_match_neighbourhoods():
    g = generate_gnp(10, 0.5, seed=3)
    s = VertexSet.from_members(10, range(0, 10, 2))
    rows = restricted_rows(g, [2, 5], s)
    for j, u in enumerate((2, 5)):
        for v in range(10):
            assert rows[j, v] == (1.0 if (v in s and g.has_edge(u, v)) else 0.0)
