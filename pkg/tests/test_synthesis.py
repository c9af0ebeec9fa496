import math

import numpy as np
import pytest

from conftest import complete_graph
from degdiv.badness import bad_set
from degdiv.distributions import TrivialSpec, UniformConstantSpec, product_of
from degdiv.errors import ConstructionError, PreconditionError
from degdiv.graphs import Graph, VertexSet, diversity_block, generate_gnp
from degdiv.oracles import f_exact, verify_witness
from degdiv.synthesis import (
    ControlledSet,
    GrowthProfile,
    PressureInstance,
    SynthesisBudget,
    merge_controlled,
    pressure_pipeline,
    realize_witness,
    synthesize,
)


def full(n):
    return VertexSet.full(n)


# -- instance validation -------------------------------------------------------------


def test_pressure_instance_validation():
    with pytest.raises(PreconditionError):
        PressureInstance(u_set=VertexSet.from_members(8, [1]), s=full(8), min_div=2, balance=0.5)
    with pytest.raises(PreconditionError):
        PressureInstance(u_set=VertexSet.from_members(8, [1, 2]), s=full(8), min_div=0.5, balance=0.5)
    with pytest.raises(PreconditionError):
        PressureInstance(u_set=VertexSet.from_members(8, [1, 2]), s=full(8), min_div=2, balance=0.3)


def private_block_graph(t: int, block: int):
    """t hub vertices with disjoint coordinate blocks: diversity exactly
    2*block between hubs, each coordinate vertex sees one hub."""
    n = t + t * block
    edges = []
    for i in range(t):
        edges += [(i, t + i * block + j) for j in range(block)]
    return Graph.from_edges(n, edges), list(range(t))


# -- the pressure pipeline ------------------------------------------------------------


def test_pipeline_hypothesis_scan_names_offender():
    g, hubs = private_block_graph(3, 10)
    inst = PressureInstance(u_set=VertexSet.from_members(g.n, hubs), s=full(g.n),
                            min_div=25.0, balance=1.0)  # true diversity is 20
    with pytest.raises(PreconditionError) as err:
        pressure_pipeline(g, inst, 200, seed=0)
    assert "pair" in str(err.value)
    tight = PressureInstance(u_set=VertexSet.from_members(g.n, hubs), s=full(g.n),
                             min_div=20.0, balance=0.5)  # balance cap 1.5 < observed? no: 1
    # every coordinate vertex sees exactly one hub, so balance 0.5 gives cap 1.5: fine
    pressure_pipeline(g, tight, 200, seed=0)


def test_pipeline_balance_scan_names_offender():
    g, hubs = private_block_graph(4, 8)
    # add a vertex adjacent to three hubs: violates balance 0.5 (cap 2)
    edges = list(g.edges()) + [(0, g.n - 1), (1, g.n - 1), (2, g.n - 1)]
    g2 = Graph.from_edges(g.n, edges)
    inst = PressureInstance(u_set=VertexSet.from_members(g2.n, hubs), s=full(g2.n),
                            min_div=8.0, balance=0.5)
    with pytest.raises(PreconditionError) as err:
        pressure_pipeline(g2, inst, 200, seed=0)
    assert f"vertex {g.n - 1}" in str(err.value)


def test_pipeline_trims_coordinates():
    # |S| far above min_div * |U|^2 gets trimmed, and the floor survives the trim
    t, block = 3, 40
    g, hubs = private_block_graph(t, block)
    inst = PressureInstance(u_set=VertexSet.from_members(g.n, hubs), s=full(g.n),
                            min_div=2.0, balance=1.0)
    cs = pressure_pipeline(g, inst, 300, seed=1)
    assert cs.details["coords_used"] <= 2.0 * t * t
    members = inst.u_set.members()
    # re-verify the floor on the trimmed coordinates through a separate scan
    from degdiv.distributions import BlendedSpec

    blended = next(c for c in cs.spec.children if isinstance(c, BlendedSpec)) \
        if hasattr(cs.spec, "children") else cs.spec
    div = diversity_block(g, members, blended.domain)
    off = div[np.triu_indices(t, 1)]
    assert off.min() >= 2.0


def test_pipeline_meets_target_on_balanced_gadget():
    # the low-pressure extreme: every coordinate vertex sees one member
    t, block = 6, 60
    g, hubs = private_block_graph(t, block)
    inst = PressureInstance(u_set=VertexSet.from_members(g.n, hubs), s=full(g.n),
                            min_div=2.0 * block, balance=1.0 / t)
    cs = pressure_pipeline(g, inst, 2500, seed=2, keep_pairs=True)
    assert cs.details["target_met"], cs.details["pair_violations"]
    assert cs.alpha <= cs.details["target"] + 1.0


def test_pipeline_full_pressure_extreme():
    # balance declared 1 (always satisfiable) with separation at the |U|^(3/2)
    # cap: the measured mass must meet the 40*sqrt(|U| ln|U|)/cap target
    t, block = 6, 60
    g, hubs = private_block_graph(t, block)
    inst = PressureInstance(u_set=VertexSet.from_members(g.n, hubs), s=full(g.n),
                            min_div=float(t) ** 1.5, balance=1.0)
    cs = pressure_pipeline(g, inst, 2500, seed=8, keep_pairs=True)
    assert cs.details["div_cap"] == pytest.approx(float(t) ** 1.5)
    assert cs.details["target"] == pytest.approx(
        40.0 * math.sqrt(t * math.log(t)) / t**1.5)
    assert cs.details["target_met"], cs.details["pair_violations"]


def test_pipeline_alpha_remeasures_on_fresh_seed():
    g = generate_gnp(256, 0.5, seed=6)
    from degdiv.experiments import section1_instance

    inst = section1_instance(g, 0.5, 0.25, seed=6)
    cs = pressure_pipeline(g, inst, 1200, seed=7)
    again = bad_set(g, cs.spec, cs.u_set, cs.spec.domain & full(g.n), 1200, seed=99)
    # same estimand, independent stream: totals agree within summed half-widths
    assert abs(again.total - cs.alpha * cs.u_set.card) <= \
        3 * (again.half_width_total + cs.half_width) + 0.05 * again.pair_count


# -- merging ---------------------------------------------------------------------------


def merge_gadget():
    """Three parts of three vertices each, pairwise degree gaps of 15 into a
    shared coordinate pool, so uniform-constant cross control is strong."""
    degrees = [10, 25, 40, 55, 70, 85, 100, 115, 130]
    pool = 140
    n = 9 + pool
    edges = []
    for i, d in enumerate(degrees):
        edges += [(i, 9 + j) for j in range(d)]
    g = Graph.from_edges(n, edges)
    coords = VertexSet.from_members(n, range(9, n))
    parts = []
    for b in range(3):
        members = VertexSet.from_members(n, [3 * b, 3 * b + 1, 3 * b + 2])
        cs = ControlledSet(u_set=members, spec=TrivialSpec(members), alpha=1.0,
                           half_width=0.0, provenance="test", graph=g, details={})
        parts.append((cs, members))
    return g, parts, coords


def test_merge_prefix_accumulation():
    g, parts, coords = merge_gadget()
    profile = GrowthProfile(kind="stretch_exp")
    merged = merge_controlled(parts, UniformConstantSpec(coords), coords, profile,
                              target_mass=8.0, mass_cap=16.0, g=g, n_samples=3000, seed=3)
    assert 8 <= merged.u_set.card <= 16
    assert merged.u_set.card == 9  # all three parts are needed
    assert merged.details["bound_ok"]


def test_merge_short_circuits_dominating_part():
    g, parts, coords = merge_gadget()
    profile = GrowthProfile(kind="stretch_exp")
    merged = merge_controlled(parts, UniformConstantSpec(coords), coords, profile,
                              target_mass=2.5, mass_cap=16.0, g=g, n_samples=2000, seed=4)
    assert merged.u_set.card == 3
    assert merged.u_set == parts[0][0].u_set


def test_merge_trivial_cross_passes_with_generous_profile():
    # when the profile is scaled so that even unit collision mass is below
    # f'(cap), a trivial cross distribution satisfies the hypothesis
    g, parts, coords = merge_gadget()
    generous = GrowthProfile(kind="stretch_exp", c1=40.0)
    merged = merge_controlled(parts, TrivialSpec(coords), coords, generous,
                              target_mass=8.0, mass_cap=16.0, g=g, n_samples=400, seed=5)
    assert merged.u_set.card == 9


def test_merge_rejects_bad_inputs():
    g, parts, coords = merge_gadget()
    profile = GrowthProfile(kind="stretch_exp")
    # carried control above f(|U_i|)
    bad = ControlledSet(u_set=parts[0][0].u_set, spec=parts[0][0].spec, alpha=50.0,
                        half_width=0.0, provenance="test", graph=g, details={})
    with pytest.raises(PreconditionError):
        merge_controlled([(bad, parts[0][1]), parts[1]], UniformConstantSpec(coords),
                         coords, profile, target_mass=4.0, mass_cap=16.0,
                         g=g, n_samples=500, seed=0)
    # overlapping domains
    with pytest.raises(PreconditionError):
        merge_controlled([parts[0], (parts[0][0], parts[0][1])],
                         UniformConstantSpec(coords), coords, profile,
                         target_mass=4.0, mass_cap=16.0, g=g, n_samples=500, seed=0)
    # cross control too weak: trivial cross spec has unit collision mass
    with pytest.raises(PreconditionError):
        merge_controlled(parts, TrivialSpec(coords), coords, profile,
                         target_mass=8.0, mass_cap=16.0, g=g, n_samples=500, seed=0)
    # not enough total mass
    with pytest.raises(PreconditionError):
        merge_controlled(parts[:1], UniformConstantSpec(coords), coords, profile,
                         target_mass=8.0, mass_cap=16.0, g=g, n_samples=500, seed=0)


# -- witness realization --------------------------------------------------------------------


def test_realize_witness_complete_graph():
    g = complete_graph(8)
    cs = ControlledSet(u_set=full(8), spec=TrivialSpec(full(8)), alpha=0.0,
                       half_width=0.0, provenance="test", graph=g, details={})
    w = realize_witness(g, cs, trials=4, seed=1)
    assert w.value == 1  # every induced subgraph of a complete graph is regular


def test_realize_witness_ladder_gadget():
    # members with expected degrees 0, 20, 40, 60 under the trivial vector:
    # gaps of 20 dwarf the realization noise, so all four survive
    degrees = [0, 40, 80, 120]
    n = 4 + 240
    edges = []
    start = 4
    for i, d in enumerate(degrees):
        edges += [(i, start + j) for j in range(d)]
        start += d
    g = Graph.from_edges(n, edges)
    cs = ControlledSet(u_set=VertexSet.from_members(n, [0, 1, 2, 3]),
                       spec=TrivialSpec(full(n)), alpha=0.0, half_width=0.0,
                       provenance="test", graph=g, details={})
    w = realize_witness(g, cs, trials=6, seed=2)
    verify_witness(g, w)
    assert w.value == 4


def test_realize_witness_verifies_and_floors_at_one():
    g = generate_gnp(30, 0.5, seed=3)
    cs = ControlledSet(u_set=VertexSet.empty(30), spec=TrivialSpec(full(30)), alpha=0.0,
                       half_width=0.0, provenance="test", graph=g, details={})
    w = realize_witness(g, cs, trials=2, seed=3)
    assert w.value >= 1
    verify_witness(g, w)


# -- the synthesizer ---------------------------------------------------------------------------


def test_synthesize_base_case_exact():
    g = generate_gnp(12, 0.5, seed=4)
    budget = SynthesisBudget(k=3.0, exact_cutoff=14)
    cs = synthesize(g, budget, seed=0)
    assert cs.provenance == "base-exact"
    assert cs.u_set.card == f_exact(g).value
    assert isinstance(cs.spec, TrivialSpec) or cs.spec.domain == full(12)
    assert cs.details["witness"].value == cs.u_set.card


def test_synthesize_deterministic():
    g = generate_gnp(220, 0.5, seed=5)
    budget = SynthesisBudget(k=math.sqrt(220), n_samples=400, witness_trials=6, depth_cap=3)
    a = synthesize(g, budget, seed=9)
    b = synthesize(g, budget, seed=9)
    assert a.u_set == b.u_set
    assert a.details["trace"] == b.details["trace"]
    assert a.alpha == b.alpha


def test_synthesize_random_graph_completes():
    g = generate_gnp(600, 0.5, seed=6)
    budget = SynthesisBudget(k=math.sqrt(600), n_samples=500, witness_trials=6, depth_cap=4)
    cs = synthesize(g, budget, seed=2)
    trace = cs.details["trace"]
    assert any("case" in line for line in trace)
    assert cs.u_set.card >= 1
    w = realize_witness(cs.graph, cs, trials=6, seed=5)
    verify_witness(cs.graph, w)
    if cs.details.get("complemented"):
        verify_witness(g, w)  # witnesses transfer through complement


def test_synthesize_large_random_graph_completes():
    g = generate_gnp(2048, 0.5, seed=10)
    budget = SynthesisBudget(k=math.sqrt(2048), n_samples=500, witness_trials=8, depth_cap=4)
    cs = synthesize(g, budget, seed=3)
    assert cs.u_set.card >= 2
    assert cs.details["trace"]
    again = synthesize(g, budget, seed=3)
    assert again.u_set == cs.u_set and again.alpha == cs.alpha


def test_synthesize_clustered_gadget_uses_case1():
    n = 360
    adj = np.zeros((n, n), dtype=bool)
    rng = np.random.default_rng(0)
    adj[0:80, 80:240] = True
    adj[80:240, 0:80] = True
    blk = rng.random((160, 160)) < 0.5
    blk = np.triu(blk, 1)
    adj[80:240, 80:240] = blk | blk.T
    rest = rng.random((120, 120)) < 0.5
    rest = np.triu(rest, 1)
    adj[240:360, 240:360] = rest | rest.T
    g = Graph.from_bool_matrix(adj)
    budget = SynthesisBudget(k=math.sqrt(n), n_samples=500, witness_trials=6, depth_cap=4)
    cs = synthesize(g, budget, seed=7)
    trace = "\n".join(cs.details["trace"])
    assert "case1" in trace
    assert cs.u_set.card >= 2


def test_synthesize_turan_like_exercises_cases():
    edges = []
    for b in range(5):
        base = b * 60
        edges += [(base + i, base + j) for i in range(60) for j in range(i + 1, 60)]
    g = Graph.from_edges(300, edges)
    k = (300**2 / 60) ** (1.0 / 3.0)
    cs = synthesize(g, SynthesisBudget(k=k, n_samples=300, witness_trials=4, depth_cap=3), seed=1)
    trace = "\n".join(cs.details["trace"])
    assert "case1" in trace or "case3" in trace
    w = realize_witness(cs.graph, cs, trials=4, seed=8)
    verify_witness(cs.graph, w)


def test_synthesize_sparse_exercises_case3():
    g = generate_gnp(400, 0.03, seed=9)
    cs = synthesize(g, SynthesisBudget(k=20.0, n_samples=300, witness_trials=4, depth_cap=3), seed=4)
    trace = "\n".join(cs.details["trace"])
    assert "case3" in trace


def test_budget_schedule_shape():
    budget = SynthesisBudget(k=64.0)
    growth, deg_div, scale = budget.schedule()
    lk = math.log2(64.0)
    assert growth == pytest.approx(2.0 ** lk ** (4 / 9))
    assert deg_div == pytest.approx(2.0 ** lk ** (5 / 9))
    assert scale == pytest.approx(2.0 ** lk ** (2 / 3))
    # floors engage for tiny targets
    g2, d2, s2 = budget.schedule(1.5)
    assert min(g2, d2, s2) >= 2.0


def test_growth_profile_shapes():
    main = GrowthProfile(kind="stretch_exp", c1=1.0, c2=1.0)
    assert main.f(10) == pytest.approx(math.exp(math.log(10) ** (2 / 3)))
    x = 50.0
    eps = 1e-5
    numeric = (main.f(x + eps) - main.f(x - eps)) / (2 * eps)
    assert main.f_prime(x) == pytest.approx(numeric, rel=1e-5)
    base = GrowthProfile(kind="square_log", c1=2.0)
    assert base.f(8) == pytest.approx(2.0 * 9.0)
    numeric = (base.f(x + eps) - base.f(x - eps)) / (2 * eps)
    assert base.f_prime(x) == pytest.approx(numeric, rel=1e-5)
