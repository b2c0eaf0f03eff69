import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from furstlab import dyadic as dy
from furstlab import fourier as fo
from furstlab.dyadic import AtomicMeasure
from furstlab.family import DomainError


def point_mass():
    return AtomicMeasure(np.array([[0.0, 0.0]]), np.array([1.0]))


def parabola_lift(delta_exp=8):
    return fo.uniform_grid_lift(lambda x: np.asarray(x, dtype=float) ** 2, delta_exp, s=1.0)


# -- gamma -------------------------------------------------------------------------

def test_gamma_formula():
    assert fo.gamma(0.5, 1.0) == 1.25
    assert fo.gamma(1.0, 1.0) == 2.0
    assert fo.gamma(0.2, 1.9) == pytest.approx(min(2.1, 1.25, 1.2))


# -- lifts --------------------------------------------------------------------------

def test_lift_single_atom():
    cm = fo.lift_measure(lambda x: np.asarray(x) ** 2, np.array([0.5]), np.array([1.0]), 0.0, 6)
    assert len(cm) == 1
    assert cm.frostman_c == 1.0
    assert cm.points[0, 1] == 0.25


def test_lift_uniform_grid_frostman():
    cm = parabola_lift()
    assert cm.total_mass == pytest.approx(1.0, abs=1e-12)
    assert cm.frostman_c <= 8.0
    # atoms on the graph exactly
    np.testing.assert_allclose(cm.points[:, 1], cm.points[:, 0] ** 2, atol=1e-12)


def test_lift_half_dim_set():
    k = 8
    base = dy.generate_delta_set(k, 0.5, 2, seed=0)
    xs = 2.0 * base.points[:, 0] - 1.0  # map [0,1) onto [-1,1)
    ws = np.full(len(xs), 2.0 ** (-k / 2))
    cm = fo.lift_measure(lambda x: np.asarray(x) ** 2, xs, ws, 0.5, k)
    assert cm.frostman_c <= 64.0


def test_lift_rejects_mass_above_one():
    with pytest.raises(DomainError):
        fo.lift_measure(np.abs, np.array([0.0, 0.5]), np.array([0.7, 0.7]), 1.0, 4)


def test_lift_rejects_points_outside_base_interval():
    with pytest.raises(DomainError):
        fo.lift_measure(np.abs, np.array([1.5]), np.array([0.5]), 1.0, 4)


# -- transform ----------------------------------------------------------------------

def test_transform_point_mass_is_one_everywhere():
    pm = point_mass()
    for xi in ([0.0, 0.0], [3.0, -4.0], [100.5, 0.25]):
        assert fo.fourier_transform(pm, np.array(xi)) == pytest.approx(1.0 + 0.0j)


def test_transform_cancellation():
    mu = AtomicMeasure(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.5, 0.5]))
    assert abs(fo.fourier_transform(mu, np.array([0.5, 0.0]))) <= 1e-12


def test_transform_at_zero_is_total_mass():
    mu = AtomicMeasure(np.array([[0.2, 0.3], [0.9, -0.4]]), np.array([0.25, 0.5]))
    assert fo.fourier_transform(mu, np.array([0.0, 0.0])) == pytest.approx(0.75 + 0.0j)


@settings(max_examples=40, deadline=None)
@given(
    xi1=st.floats(-20, 20), xi2=st.floats(-20, 20),
    seed=st.integers(0, 100),
)
def test_transform_bounded_and_conjugate_symmetric(xi1, xi2, seed):
    rng = np.random.default_rng(seed)
    n = 5
    mu = AtomicMeasure(rng.uniform(-1, 1, (n, 2)), rng.uniform(0, 1.0 / n, n))
    xi = np.array([xi1, xi2])
    v = fo.fourier_transform(mu, xi)
    assert abs(v) <= mu.total_mass + 1e-12
    assert fo.fourier_transform(mu, -xi) == pytest.approx(v.conjugate(), abs=1e-12)


def test_grid_transform_matches_direct_sum():
    rng = np.random.default_rng(3)
    mu = AtomicMeasure(rng.uniform(-1, 1, (7, 2)), rng.uniform(0, 1 / 7, 7))
    from furstlab.fourier import _grid_transform_sq
    mag2, kr = _grid_transform_sq(mu, 2.0, 1 / 8)
    i = 3, 11
    xi = np.array([kr[i[0]] / 8.0, kr[i[1]] / 8.0])
    direct = abs(fo.fourier_transform(mu, xi)) ** 2
    assert mag2[i] == pytest.approx(direct, rel=1e-12)


# -- L^p norms ------------------------------------------------------------------------

def test_lp_point_mass_matches_disk_area():
    for R in (2.0, 4.0):
        v = fo.lp_norm_ball(point_mass(), 2.0, R, 1 / 8)
        assert v == pytest.approx(math.pi * R * R, rel=3 * (1 / 8) / R)


def test_lp_rejects_large_step():
    with pytest.raises(DomainError):
        fo.lp_norm_ball(point_mass(), 2.0, 4.0, 0.3)


def test_lp_quadrature_halving_stable():
    lift = parabola_lift()
    for R in (4.0, 16.0):
        v1 = fo.lp_norm_ball(lift, 8.0, R, 1 / 8)
        v2 = fo.lp_norm_ball(lift, 8.0, R, 1 / 16)
        assert abs(v2 - v1) / v1 <= 0.05


# -- Riesz energy -----------------------------------------------------------------------

def test_riesz_two_atoms():
    mu = AtomicMeasure(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.5, 0.5]))
    assert fo.riesz_energy(mu, 1.0, 0.25) == pytest.approx(2.5, abs=1e-12)


def test_riesz_single_atom_diagonal_cutoff():
    assert fo.riesz_energy(point_mass(), 1.7, 0.25) == pytest.approx(0.25 ** -1.7, rel=1e-12)


def test_riesz_t_zero_is_squared_mass():
    mu = AtomicMeasure(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.5, 0.5]))
    assert fo.riesz_energy(mu, 0.0, 0.25) == pytest.approx(1.0, abs=1e-12)


def test_riesz_matches_independent_double_loop():
    rng = np.random.default_rng(1)
    n = 40
    mu = AtomicMeasure(rng.uniform(-1, 1, (n, 2)), rng.uniform(0, 1.0 / n, n))
    t, delta = 1.3, 1 / 16
    total = 0.0
    for i in range(n):
        for j in range(n):
            d = math.dist(mu.points[i], mu.points[j])
            total += mu.weights[i] * mu.weights[j] * max(d, delta) ** -t
    assert fo.riesz_energy(mu, t, delta) == pytest.approx(total, rel=1e-12)


def test_riesz_monotonicity():
    rng = np.random.default_rng(2)
    n = 30
    mu = AtomicMeasure(rng.uniform(-0.5, 0.5, (n, 2)), rng.uniform(0, 1.0 / n, n))
    # nonincreasing in delta
    assert fo.riesz_energy(mu, 1.0, 1 / 8) >= fo.riesz_energy(mu, 1.0, 1 / 4)
    # nondecreasing in t when all separations are <= 1
    assert fo.riesz_energy(mu, 1.5, 1 / 8) >= fo.riesz_energy(mu, 0.5, 1 / 8)


# -- decay slopes -------------------------------------------------------------------------

def test_decay_point_mass_slope_two():
    rep = fo.decay_slope(point_mass(), 4.0, [4, 8, 16, 32, 64])
    assert rep.slope == pytest.approx(2.0, abs=0.05)


def test_decay_point_mass_slope_independent_of_p():
    # |sigma-hat| == 1 for a point mass, so the slope pin holds for every p
    slopes = [fo.decay_slope(point_mass(), p, [4, 8, 16, 32]).slope for p in (1.0, 2.0, 8.0)]
    assert max(slopes) - min(slopes) <= 1e-12
    for s in slopes:
        assert s == pytest.approx(2.0, abs=0.05)


def test_decay_parabola_lift_flat():
    rep = fo.decay_slope(parabola_lift(), 8.0, [4, 8, 16, 32, 64])
    assert rep.slope <= 0.3


def test_decay_validates_radii():
    with pytest.raises(DomainError):
        fo.decay_slope(point_mass(), 2.0, [4, 8])          # too few
    with pytest.raises(DomainError):
        fo.decay_slope(point_mass(), 2.0, [4, 8, 12])      # not dyadic
    with pytest.raises(DomainError):
        fo.decay_slope(point_mass(), 2.0, [8, 4, 16])      # not increasing


def test_decay_table_csv(tmp_path):
    rep = fo.decay_slope(point_mass(), 2.0, [4, 8, 16])
    path = tmp_path / "decay.csv"
    fo.decay_table_csv(rep, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "R,p,integral,slope_cum"
    assert len(lines) == 4


def test_decay_integrals_consistent_with_lp_norm_ball():
    lift = parabola_lift(6)
    rep = fo.decay_slope(lift, 4.0, [4, 8, 16])
    for R, integral in zip(rep.R_list, rep.integrals):
        assert integral == pytest.approx(fo.lp_norm_ball(lift, 4.0, R), rel=1e-12)
