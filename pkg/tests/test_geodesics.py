"""
Pytest test suite for the `geodesics` module.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modules.cartan import build_so_n1, build_su_n
from modules.exceptions import (GridResolutionError, InvalidInputError,
                                InvariantViolationError)
from modules.geodesics import (GeodesicSpec, Trajectory, eta, geodesic_point,
                               geodesic_trajectory, horizontal_length,
                               integrate_geodesic, is_horizontal, p_norm,
                               so21_geodesic_point, so21_geodesic_spec,
                               su2_geodesic_closed_form, su2_geodesic_exact,
                               su2_geodesic_spec, uniform_grid,
                               vertical_speeds)
from modules.lie_algebra import SIGMA_X, SIGMA_Y, SIGMA_Z
from modules.linalg_core import expm, frobenius_norm, unitarity_defect

angles = st.floats(-math.pi, math.pi)
covector_k = st.floats(-3.0, 3.0)
times = st.floats(0.0, 6.0)


def random_spec(pair, rng):
    """Random unit-speed geodesic data through the identity."""
    a_k = sum(rng.standard_normal() * b for b in pair.k.basis)
    a_p = sum(rng.standard_normal() * b for b in pair.p.basis)
    a_p = a_p / p_norm(a_p, pair)
    return GeodesicSpec(np.eye(pair.ambient_n, dtype=complex), a_k, a_p, pair)


def test_p_norm_examples(su2_pair):
    """Test that σ_x and σ_y have unit p-length and σ_z is refused."""
    assert p_norm(SIGMA_X, su2_pair) == pytest.approx(1.0)
    assert p_norm(SIGMA_Y, su2_pair) == pytest.approx(1.0)
    assert p_norm(SIGMA_X + SIGMA_Y, su2_pair) == pytest.approx(math.sqrt(2))
    with pytest.raises(InvariantViolationError):
        p_norm(SIGMA_Z, su2_pair)


def test_geodesic_spec_validation(su2_pair):
    """Test that misplaced or non-unit initial data is refused."""
    identity = np.eye(2, dtype=complex)
    with pytest.raises(InvariantViolationError, match="a_k"):
        GeodesicSpec(identity, SIGMA_X, SIGMA_X, su2_pair)
    with pytest.raises(InvariantViolationError, match="a_p"):
        GeodesicSpec(identity, SIGMA_Z, SIGMA_Z, su2_pair)
    with pytest.raises(InvariantViolationError, match="arclength"):
        GeodesicSpec(identity, SIGMA_Z, 2 * SIGMA_X, su2_pair)


def test_trajectory_validation():
    """Test the time-grid checks of a trajectory."""
    points = np.stack([np.eye(2, dtype=complex)] * 3)
    with pytest.raises(InvalidInputError):
        Trajectory(np.array([0.1, 0.2, 0.3]), points)
    with pytest.raises(InvalidInputError):
        Trajectory(np.array([0.0, 0.2, 0.2]), points)
    with pytest.raises(InvalidInputError):
        Trajectory(np.array([0.0, 0.1]), points)


def test_trajectory_csv_rows():
    """Test the CSV header and value formatting of a trajectory."""
    trajectory = geodesic_trajectory(su2_geodesic_spec(0.0, 0.0), [0.0, 1.0])
    rows = trajectory.to_csv_rows()
    assert rows[0] == ["t", "re_00", "im_00", "re_01", "im_01", "re_10", "im_10", "re_11", "im_11"]
    assert [float(value) for value in rows[1]] == pytest.approx([0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    assert float(rows[2][0]) == 1.0
    assert len(rows) == 3


def test_uniform_grid():
    """Test the grid endpoints and its argument checks."""
    grid = uniform_grid(3.0, 1000)
    assert grid[0] == 0.0 and grid[-1] == 3.0 and grid.size == 1001
    with pytest.raises(InvalidInputError):
        uniform_grid(0.0, 10)


@pytest.mark.parametrize("pair", [build_su_n(2), build_su_n(3), build_so_n1(2), build_so_n1(3)],
                         ids=lambda p: f"{p.family}{p.ambient_n}")
def test_closed_form_agrees_with_integration(pair):
    """Test the two-exponential formula against RK4, then horizontality and length, on [0, 3]."""
    rng = np.random.default_rng(99)
    for _ in range(20):
        spec = random_spec(pair, rng)
        trajectory = integrate_geodesic(spec, 3.0, dt=1e-4)
        worst = max(frobenius_norm(point - geodesic_point(spec, float(t)))
                    for t, point in zip(trajectory.times[::1000], trajectory.points[::1000]))
        assert worst <= 1e-8

        coarse = Trajectory(trajectory.times[::30], trajectory.points[::30])
        assert is_horizontal(coarse, pair)
        assert horizontal_length(coarse, pair) == pytest.approx(3.0, abs=1e-3)


def test_integrate_geodesic_argument_checks(su2_pair):
    """Test that a non-positive horizon or step is refused."""
    spec = su2_geodesic_spec(0.0, 1.0)
    with pytest.raises(InvalidInputError):
        integrate_geodesic(spec, 0.0)
    with pytest.raises(InvalidInputError):
        integrate_geodesic(spec, 1.0, dt=-1.0)


@pytest.mark.parametrize("theta,c", [(0.0, 0.0), (0.7, 1.3), (-2.0, -0.5)])
def test_horizontal_length_equals_time(theta, c, su2_pair):
    """Test that unit-speed geodesics have length T and stay horizontal."""
    spec = su2_geodesic_spec(theta, c)
    trajectory = geodesic_trajectory(spec, uniform_grid(3.0, 1000))
    assert horizontal_length(trajectory, su2_pair) == pytest.approx(3.0, abs=1e-4)
    assert is_horizontal(trajectory, su2_pair)
    assert trajectory.max_unitarity_defect() <= 1e-12


def test_vertical_curve_is_not_horizontal(su2_pair):
    """Test that t ↦ exp(σ_z t) has unit vertical speed and zero length."""
    grid = uniform_grid(1.0, 100)
    trajectory = Trajectory(grid, np.stack([expm(SIGMA_Z * t) for t in grid]))
    assert not is_horizontal(trajectory, su2_pair)
    assert np.allclose(vertical_speeds(trajectory, su2_pair), 1.0)
    assert horizontal_length(trajectory, su2_pair) == pytest.approx(0.0, abs=1e-12)


def test_coarse_grid_is_refused(su2_pair):
    """Test that steps too large for the logarithm raise."""
    trajectory = geodesic_trajectory(su2_geodesic_spec(0.0, 0.0), [0.0, 3.0])
    with pytest.raises(GridResolutionError):
        horizontal_length(trajectory, su2_pair)


@settings(max_examples=50, deadline=None)
@given(angles, covector_k, times)
def test_su2_geodesic_lies_on_the_sphere(theta, c, t):
    """Test that |μ|² + |ν|² = 1 and the point is in SU(2)."""
    mu, nu = su2_geodesic_closed_form(theta, c, t)
    assert abs(mu) ** 2 + abs(nu) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert unitarity_defect(geodesic_point(su2_geodesic_spec(theta, c), t)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(angles, covector_k, times)
def test_su2_geodesic_matches_exact_formula(theta, c, t):
    """Test the two-exponential product against its closed form."""
    mu, nu = su2_geodesic_closed_form(theta, c, t)
    exact_mu, exact_nu = su2_geodesic_exact(theta, c, t)
    assert abs(mu - exact_mu) <= 1e-12
    assert abs(nu - exact_nu) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(angles, times)
def test_su2_geodesic_without_vertical_component(theta, t):
    """Test that c = 0 gives (cos(t/2), e^{iθ}·sin(t/2))."""
    mu, nu = su2_geodesic_closed_form(theta, 0.0, t)
    assert abs(mu - math.cos(t / 2)) <= 1e-12
    assert abs(nu - complex(math.cos(theta), math.sin(theta)) * math.sin(t / 2)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(angles, covector_k, times)
def test_su2_geodesic_time_reversal(theta, c, t):
    """Test that running backwards equals the reflected covector forwards."""
    backwards = geodesic_point(su2_geodesic_spec(theta, c), -t)
    forwards = geodesic_point(su2_geodesic_spec(theta + math.pi, -c), t)
    assert frobenius_norm(backwards - forwards) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(angles, covector_k, times)
def test_literal_nu_expression_matches(theta, c, t):
    """Test that the printed ν expression agrees with the product."""
    _, literal_nu = su2_geodesic_closed_form(theta, c, t, literal=True)
    _, nu = su2_geodesic_closed_form(theta, c, t)
    assert abs(literal_nu - nu) <= 1e-12


def test_literal_mu_expression_deviates():
    """Test that the printed μ differs from the product for nonzero c."""
    literal_mu, _ = su2_geodesic_closed_form(0.7, 1.3, 2.1, literal=True)
    mu, _ = su2_geodesic_closed_form(0.7, 1.3, 2.1)
    assert abs(literal_mu - mu) > 1e-3


def test_eta():
    """Test the sphere identification and its domain check."""
    mu, nu = eta(expm(1.0 * SIGMA_X))
    assert mu == pytest.approx(math.cos(0.5))
    assert nu == pytest.approx(math.sin(0.5))
    with pytest.raises(InvariantViolationError):
        eta(np.diag([1.0, -1.0]))
    with pytest.raises(InvariantViolationError):
        eta(np.eye(3))


def test_so21_geodesic_stays_in_the_lorentz_group():
    """Test that SO₀(2,1) geodesics preserve the Lorentz metric and are unit speed."""
    spec = so21_geodesic_spec(0.4, 0.9)
    metric = np.diag([1.0, 1.0, -1.0])
    for t in (0.0, 0.5, 1.7, 3.0):
        point = so21_geodesic_point(0.4, 0.9, t).real
        assert np.allclose(point.T @ metric @ point, metric, atol=1e-10)
        assert spec.pair.in_group(point.astype(complex), 1e-9)
    trajectory = geodesic_trajectory(spec, uniform_grid(2.0, 1000))
    assert horizontal_length(trajectory, spec.pair) == pytest.approx(2.0, abs=1e-4)
