import math

import pytest

from degdiv.errors import PreconditionError
from degdiv.experiments import (
    ExperimentPlan,
    exact_binomial_tail,
    f_hat_point,
    f_scaling,
    hom_scaling,
    regime_map,
    rows_to_csv,
    run_experiment,
    section1_instance,
    tail_bounds,
)
from degdiv.graphs import generate_gnp


# -- tail bounds ---------------------------------------------------------------


def test_chernoff_bounds():
    assert tail_bounds("chernoff_lower", mu=10.0, delta=0.0) == 1.0
    assert tail_bounds("chernoff_upper", mu=10.0, delta=0.0) == 1.0
    assert tail_bounds("chernoff_lower", mu=8.0, delta=0.5) == pytest.approx(math.exp(-1.0))
    with pytest.raises(PreconditionError):
        tail_bounds("chernoff_lower", mu=8.0, delta=1.5)


def test_binomial_upper_bound_formula():
    got = tail_bounds("binomial_upper", n=100, p=0.5, level=100)
    assert got == pytest.approx((math.e / 2.0) ** 100)
    # the bound dominates the exact tail
    for level in (60, 70, 80):
        assert tail_bounds("binomial_upper", n=100, p=0.5, level=level) >= \
            exact_binomial_tail(100, 0.5, level)


def test_quarter_bound_validated_against_exact_tail():
    assert exact_binomial_tail(100, 0.3, 30) > 0.25
    for n in range(2, 201):
        for p in [x / 10 for x in range(1, 10)]:
            if p <= 1.0 / n:
                continue
            level = math.ceil(n * p - 1e-9)
            assert exact_binomial_tail(n, p, level) > tail_bounds("quarter_lower", n=n, p=p)
    with pytest.raises(PreconditionError):
        tail_bounds("quarter_lower", n=10, p=0.05)


def test_hoeffding_bound():
    assert tail_bounds("hoeffding", t=2.0, sum_sq_ranges=16.0) == pytest.approx(
        2 * math.exp(-0.5))
    with pytest.raises(PreconditionError):
        tail_bounds("hoeffding", t=0.0, sum_sq_ranges=4.0)


def test_unknown_kind_rejected():
    with pytest.raises(PreconditionError):
        tail_bounds("bogus")


# -- grid drivers ------------------------------------------------------------------


def test_hom_scaling_windows():
    plan = ExperimentPlan(kind="hom", n_values=(16, 32), p_values=(0.5,), seeds=(0, 1, 2))
    report = hom_scaling(plan)
    assert len(report.rows) == 6
    assert all(chk["passed"] for chk in report.window_checks)
    # at p = 1/2 the ceiling reads 2*log2(n) + 2
    assert report.window_checks[0]["high"] == pytest.approx(2 * math.log2(16) + 2)
    # p = 1 pins hom at n exactly; the density ceiling does not apply there
    ones = hom_scaling(ExperimentPlan(kind="hom", n_values=(12,), p_values=(1.0,), seeds=(0,)))
    assert ones.rows[0].value == 12.0
    assert ones.window_checks[0]["passed"] is None
    # a sparser grid point against the density-scaled ceiling
    sparse = hom_scaling(ExperimentPlan(kind="hom", n_values=(32,), p_values=(0.25,), seeds=(0,)))
    assert sparse.window_checks[0]["high"] == pytest.approx(4 * math.log2(32) + 2)
    assert sparse.window_checks[0]["passed"]


def test_hom_scaling_guard():
    plan = ExperimentPlan(kind="hom", n_values=(128,), p_values=(0.5,), seeds=(0,))
    with pytest.raises(PreconditionError):
        hom_scaling(plan)


def test_f_scaling_small_grid_and_fit():
    plan = ExperimentPlan(kind="f", n_values=(96, 128, 160, 224), p_values=(0.5,),
                          seeds=(0,), witness_trials=8, n_samples=200)
    report = f_scaling(plan)
    assert len(report.rows) == 4
    assert len(report.fits) == 1
    fit = report.fits[0]
    assert fit.axis == "n" and fit.points == 4
    # sanity of the lower estimate on every point
    for row in report.rows:
        g = generate_gnp(row.n, row.p, seed=row.seed)
        assert 1 <= row.value <= g.max_degree() + 1


def test_f_scaling_requires_four_points_for_a_fit():
    plan = ExperimentPlan(kind="f", n_values=(96, 128, 160), p_values=(0.5,),
                          seeds=(0,), witness_trials=4, n_samples=200)
    report = f_scaling(plan)
    assert report.fits == []  # not enough grid values for a declared-window fit


def test_rows_reproducible_and_thread_invariant():
    kwargs = dict(kind="f", n_values=(96, 128), p_values=(0.5,), seeds=(0, 1),
                  witness_trials=6, n_samples=200)
    once = f_scaling(ExperimentPlan(**kwargs))
    twice = f_scaling(ExperimentPlan(**kwargs))
    threaded = f_scaling(ExperimentPlan(**kwargs, threads=3))
    assert rows_to_csv(once.rows) == rows_to_csv(twice.rows) == rows_to_csv(threaded.rows)


def test_single_row_reproducible_from_recorded_tuple():
    plan = ExperimentPlan(kind="f", n_values=(96, 128), p_values=(0.5,), seeds=(3, 4),
                          witness_trials=6, n_samples=200)
    report = f_scaling(plan)
    row = report.rows[-1]
    value, _ = f_hat_point(row.n, row.p, row.seed, plan.u_scale, plan.witness_trials,
                           plan.n_samples)
    assert float(value) == row.value


def test_regime_map_exact_small_grid():
    plan = ExperimentPlan(kind="regime", n_values=(6, 9, 12), p_values=(0.0, 0.5, 1.0),
                          seeds=(0,), exact_guard=12)
    report = regime_map(plan)
    by_key = {(r.n, r.p): r.value for r in report.rows}
    # complete and empty rows: f = 1, hom = n, ratio max(n, sqrt(n)) / n = 1
    for n in (6, 9, 12):
        assert by_key[(n, 1.0)] == pytest.approx(1.0)
        assert by_key[(n, 0.0)] == pytest.approx(by_key[(n, 1.0)])
    assert report.notes and "mean ratio" in report.notes[0]


def test_run_experiment_dispatch():
    plan = ExperimentPlan(kind="nope", n_values=(4,), p_values=(0.5,), seeds=(0,))
    with pytest.raises(PreconditionError):
        run_experiment(plan)


# -- the section-1 instantiation ------------------------------------------------------


def test_section1_literal_at_half():
    g = generate_gnp(256, 0.5, seed=1)
    inst = section1_instance(g, 0.5, 0.25, seed=1, literal=True)
    assert inst.min_div == 256 * 0.5 / 4
    assert inst.balance == 1.0
    assert inst.u_set.card == max(2, round(0.25 * (256 * 256 * 0.5) ** (1 / 3)))


def test_section1_measured_tempering_at_low_p():
    g = generate_gnp(512, 0.0625, seed=2)
    inst = section1_instance(g, 0.0625, 0.25, seed=2)
    # measured balance can exceed 2p on desk-size samples; the instance stays valid
    assert inst.balance >= 2 * 0.0625
    assert inst.balance * inst.u_set.card >= 1.0


# -- CSV ----------------------------------------------------------------------------------


def test_csv_shape():
    plan = ExperimentPlan(kind="hom", n_values=(16,), p_values=(0.5,), seeds=(0,),
                          commit="abc123")
    report = hom_scaling(plan)
    csv = rows_to_csv(report.rows)
    lines = csv.strip().split("\n")
    assert lines[0] == "n,p,seed,metric,value,half_width,budget,commit"
    assert lines[1].startswith("16,0.5,0,hom,")
    assert lines[1].endswith("abc123")
