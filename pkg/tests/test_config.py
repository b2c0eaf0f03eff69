import math

import numpy as np
import pytest

import furstlab as fl
from furstlab import config as cf
from furstlab.dyadic import ParameterError
from furstlab.family import DomainError


# -- builder ------------------------------------------------------------------------

def test_build_single_curve_full_columns():
    conf = cf.build_nice_configuration("affine", 6, 1.0, 0.0, 6, seed=0)
    assert conf.n_curves == 1
    assert conf.M == 2 ** 6
    assert conf.union_square_count() == conf.M


def test_build_s_zero_one_square_per_curve():
    conf = cf.build_nice_configuration("parabola", 6, 0.0, 1.0, 6, seed=0)
    assert conf.M == 1


def test_build_parabola_constants_within_budget():
    conf = cf.build_nice_configuration("parabola", 8, 0.5, 1.0, 2, seed=0)
    assert conf.measured["audit"] == "full"
    assert conf.measured["family_constant"] <= 64.0
    assert conf.measured["worst_square_set_constant"] <= 64.0


def test_build_convex_kind_with_seed_curve():
    conf = cf.build_nice_configuration(
        "convex", 6, 0.5, 1.0, 3, seed=0, seed_curve=fl.exp_seed()
    )
    assert cf.verify_nice(conf).passed


def test_build_validates_parameters():
    with pytest.raises(ParameterError):
        cf.build_nice_configuration("parabola", 8, 1.5, 1.0, 2, seed=0)
    with pytest.raises(ParameterError):
        cf.build_nice_configuration("parabola", 9, 0.5, 1.0, 2, seed=0)  # T does not divide
    with pytest.raises(ParameterError):
        cf.build_nice_configuration("spline", 8, 0.5, 1.0, 2, seed=0)


def test_build_declared_transversality_is_respected():
    conf = cf.build_nice_configuration("affine", 7, 0.5, 1.0, 7, seed=3)
    assert conf.family.t_const <= cf.AFFINE_DIFFERENCE_T + 1e-9


def test_correlated_mode_shrinks_union():
    base = cf.build_nice_configuration("parabola", 8, 0.5, 1.0, 2, seed=5)
    corr = cf.build_nice_configuration("parabola", 8, 0.5, 1.0, 2, seed=5, correlated=True)
    assert np.all(corr.col_idx == corr.col_idx[0])
    assert corr.union_square_count() <= base.union_square_count()


# -- verification --------------------------------------------------------------------

def test_verify_positive():
    conf = cf.build_nice_configuration("parabola", 8, 0.5, 1.0, 2, seed=1)
    rep = cf.verify_nice(conf)
    assert rep.passed
    assert rep.min_separation >= conf.delta


@pytest.mark.parametrize("kind", ["affine", "parabola"])
@pytest.mark.parametrize("s,t", [(0.5, 0.5), (0.5, 1.0), (0.9, 1.5), (1.0, 2.0)])
def test_verify_passes_across_matrix(kind, s, t):
    conf = cf.build_nice_configuration(kind, 6, s, t, 3, seed=4, audit="probe")
    assert cf.verify_nice(conf).passed


def test_verify_catches_off_graph_square():
    conf = cf.build_nice_configuration("parabola", 8, 0.5, 1.0, 2, seed=2)
    conf.iy[0, 0] += 10  # push one square far off the graph
    rep = cf.verify_nice(conf)
    assert not rep.passed
    assert any("misses the graph" in f for f in rep.failures)


def test_verify_catches_m_mismatch():
    conf = cf.build_nice_configuration("parabola", 8, 0.5, 1.0, 2, seed=2)
    conf.col_idx[0, 1] = conf.col_idx[0, 0]  # duplicate column: |P(f)| < M
    rep = cf.verify_nice(conf)
    assert not rep.passed
    assert any("M" in f for f in rep.failures)


# -- furstenberg experiment -------------------------------------------------------------

def test_disjoint_square_sets_cross_curves():
    # well-separated vertical translates never share squares, so |P| = |F| M
    conf = cf.build_parallel_translate_configuration(8, 0.5, 2, seed=0)
    res = cf.furstenberg_experiment(conf)
    assert res.P_size == res.F_size * res.M
    assert res.eta_emp == 0.0


def test_identical_square_sets_give_P_equal_M():
    base = cf.build_nice_configuration("parabola", 8, 0.5, 0.0, 2, seed=0)
    # duplicate the single curve's square row across a fake 4-member family
    fam = cf.build_nice_configuration("parabola", 8, 0.5, 1.0, 2, seed=0).family
    conf = cf.NiceConfiguration(
        family=fam, kind="parabola", delta_exp=8, s=0.5, t=1.0, T=2, seed=0,
        col_idx=np.tile(base.col_idx[0], (len(fam), 1)),
        iy=np.tile(base.iy[0], (len(fam), 1)),
    )
    res = cf.furstenberg_experiment(conf)
    assert res.P_size == conf.M
    k, s, t = conf.delta_exp, conf.s, conf.t
    min_term = cf.three_way_bound(k, s, t, 1)
    assert res.eta_emp == pytest.approx(math.log2(min_term) / k, rel=1e-9)


def test_eta_threshold_on_parabola_runs():
    etas = []
    for seed in range(5):
        conf = cf.build_nice_configuration("parabola", 9, 0.5, 1.0, 3, seed=seed, audit="probe")
        etas.append(cf.furstenberg_experiment(conf).eta_emp)
    assert max(etas) <= 0.5


def test_union_bounds_invariant():
    for seed in range(4):
        conf = cf.build_nice_configuration("parabola", 8, 0.5, 1.0, 2, seed=seed, audit="probe")
        P = conf.union_square_count()
        assert conf.M <= P <= conf.n_curves * conf.M


def test_csv_row_format():
    conf = cf.build_nice_configuration("affine", 6, 0.5, 1.0, 2, seed=0, audit="probe")
    row = cf.furstenberg_experiment(conf).csv_row()
    assert row.startswith("affine,6,0.5,1,2,0,")
    assert len(row.split(",")) == len(cf.ExperimentResult.CSV_HEADER.split(","))


# -- endpoint checks ----------------------------------------------------------------------

def test_endpoint_katz_tao_generator():
    slack = 2.0 ** (-0.4 * 8)
    for seed in range(3):
        conf = cf.build_parallel_translate_configuration(8, 0.5, 2, seed=seed)
        rep = cf.endpoint_checks(conf)
        assert rep.kt_ratio >= slack
        assert rep.family_katz_tao_c <= 64.0


def test_endpoint_dense_generator():
    slack = 2.0 ** (-0.4 * 8)
    for seed in range(3):
        conf = cf.build_nice_configuration("parabola", 8, 0.5, 1.5, 2, seed=seed, audit="probe")
        rep = cf.endpoint_checks(conf)
        assert rep.dense_ratio >= slack
        assert rep.family_delta_set_c <= 64.0


def test_endpoint_single_curve_reports_without_assertion():
    conf = cf.build_nice_configuration("affine", 6, 1.0, 0.0, 6, seed=0)
    rep = cf.endpoint_checks(conf)
    assert rep.F_size == 1
    assert math.isfinite(rep.dense_ratio) and math.isfinite(rep.kt_ratio)


# -- spacing conditions ---------------------------------------------------------------------

def test_spacing_full_grid_recorded():
    fam = cf.build_uniform_line_family(6, 3, seed=0, branching=(4, 4, 1))
    rep = cf.semi_well_spaced_check(fam, 6, 6, 0.5, 0.25)
    assert math.isfinite(rep.high_ratio) and rep.high_ratio > 0


def test_spacing_singleton():
    fam = fl.TransversalFamily([fl.affine_curve(0.1, 0.2)])
    rep = cf.semi_well_spaced_check(fam, 8, 3, 0.5, 0.25)
    assert rep.high_ratio <= 1.0 and rep.low_ratio <= 1.0


def test_spacing_product_construction():
    for seed in range(3):
        fam = cf.build_semi_well_spaced_family(8, 3, 0.5, seed=seed)
        rep = cf.semi_well_spaced_check(fam, 8, 3, 0.5, 0.25)
        assert rep.high_ratio <= 64.0 and rep.low_ratio <= 64.0
        assert rep.high_ok and rep.low_ok


# -- mainlem ------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def line_evaluator():
    fam = cf.build_uniform_line_family(8, 4, seed=0)
    return cf.MainlemEvaluator(fam, 8, 4, 0.25)


def test_mainlem_a_above_cube_count_empty(line_evaluator):
    rep = line_evaluator.report(a=len(line_evaluator.cube_ids) + 1, b=1)
    assert rep.P_ab_size == 0


def test_mainlem_b_above_max_population_empty(line_evaluator):
    rep = line_evaluator.report(a=2, b=int(line_evaluator.counts.max()) + 1)
    assert rep.P_ab_size == 0


def test_mainlem_sweep_no_violation(line_evaluator):
    reports = line_evaluator.sweep()
    assert reports
    assert not any(r.violation for r in reports)
    assert line_evaluator.cube_separated


def test_mainlem_counts_nonvacuous(line_evaluator):
    # the N_{Delta,b} >= a side of the filter must fire somewhere
    reports = line_evaluator.sweep()
    assert any(r.pre_filter_size > 0 for r in reports)


def test_mainlem_parameter_validation():
    fam = cf.build_uniform_line_family(6, 3, seed=0, branching=(2, 2, 1))
    with pytest.raises(ParameterError):
        cf.MainlemEvaluator(fam, 6, 3, 0.3)   # not 1/N
    with pytest.raises(ParameterError):
        cf.MainlemEvaluator(fam, 6, 3, 0.5)   # Delta_exp * eps not integral


def test_mainlem_single_report_matches_evaluator(line_evaluator):
    fam = line_evaluator.family
    rep = cf.mainlem_experiment(fam, 8, 4, 0.25, a=2, b=2)
    assert rep.P_ab_size == line_evaluator.report(2, 2).P_ab_size
