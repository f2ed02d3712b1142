"""
Sub-Riemannian geodesics of a k ⊕ p structure.

A geodesic through x₀ with initial data (A_k, A_p), parametrized by arclength
(‖A_p‖_p = 1), is

    x(t) = x₀ · exp((A_k + A_p)t) · exp(−A_k t),

whose body velocity x⁻¹ẋ = Ad_{exp(A_k t)}(A_p) stays in p. This module
evaluates that formula, integrates the velocity equation numerically as an
independent check, measures the horizontal length of sampled trajectories and
provides the explicit SU(2) and SO₀(2,1) families.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from modules.cartan import CartanPair, build_so_n1, build_su2_pauli
from modules.exceptions import InvalidInputError, InvariantViolationError
from modules.lie_algebra import SIGMA_X, SIGMA_Y, SIGMA_Z
from modules.linalg_core import (ComplexMatrix, as_matrix, check_same_dimension,
                                 expm, frobenius_inner, is_unitary,
                                 logm_near_identity, dagger, unitarity_defect)
from modules.util import get_setting

logger = logging.getLogger(__name__)

SPEC_TOL = 1e-10
P_MEMBERSHIP_TOL = 1e-8
HORIZONTAL_TOL = get_setting("horizontal_tol", 1e-3)
GEODESIC_STEPS = get_setting("geodesic_steps", 1000)
GEODESIC_HORIZON = get_setting("geodesic_horizon", 3.0)


def _metric_norm(x: ComplexMatrix, pair: CartanPair) -> float:
    return math.sqrt(max(0.0, pair.metric_scale * frobenius_inner(x, x)))


def p_norm(x: ComplexMatrix, pair: CartanPair, tol: float = P_MEMBERSHIP_TOL) -> float:
    """
    Norm on p that makes the pair's natural p-generators orthonormal.

    ‖x‖_p² = metric_scale·Re Tr(x†x); for the Pauli pair this is
    2·Re Tr(x†x), so σ_x and σ_y have unit length.

    Raises:
        InvariantViolationError: If x is not in p.
    """
    x = as_matrix(x)
    if not pair.p.contains(x, tol):
        raise InvariantViolationError("Precondition violated: x is not contained in p")
    return _metric_norm(x, pair)


@dataclass(frozen=True, eq=False)
class GeodesicSpec:
    """
    Initial data of an arclength-parametrized geodesic.

    Attributes:
        x0: Starting group element.
        a_k: Initial covector component in k.
        a_p: Initial velocity in p, with ‖a_p‖_p = 1.
        pair: The Cartan pair fixing k, p and the metric.
    """

    x0: ComplexMatrix
    a_k: ComplexMatrix
    a_p: ComplexMatrix
    pair: CartanPair

    def __post_init__(self) -> None:
        check_same_dimension(self.x0, self.a_k, self.a_p)
        if self.x0.shape[0] != self.pair.ambient_n:
            raise InvariantViolationError("x0 dimension does not match the Cartan pair")
        if not self.pair.k.contains(self.a_k, SPEC_TOL):
            raise InvariantViolationError("Geodesic invariant violated: a_k is not in k")
        if not self.pair.p.contains(self.a_p, SPEC_TOL):
            raise InvariantViolationError("Geodesic invariant violated: a_p is not in p")
        length = _metric_norm(self.a_p, self.pair)
        if abs(length - 1.0) > SPEC_TOL:
            raise InvariantViolationError(
                f"Geodesic invariant violated: ‖a_p‖_p = {length:.12g}, expected 1 (arclength)"
            )


@dataclass(eq=False)
class Trajectory:
    """
    Group elements sampled on a strictly increasing time grid starting at 0.

    Attributes:
        times: Sample times, shape (N,).
        points: Group elements, shape (N, n, n).
    """

    times: npt.NDArray[np.float64]
    points: npt.NDArray[np.complex128]

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=np.float64)
        self.points = np.asarray(self.points, dtype=np.complex128)
        if self.times.ndim != 1 or self.times.size == 0:
            raise InvalidInputError("Trajectory needs a non-empty one-dimensional time grid")
        if self.times[0] != 0.0:
            raise InvalidInputError(f"Trajectory time grid must start at 0, got {self.times[0]}")
        if np.any(np.diff(self.times) <= 0):
            raise InvalidInputError("Trajectory time grid must be strictly increasing")
        if self.points.ndim != 3 or self.points.shape[0] != self.times.size:
            raise InvalidInputError("Trajectory needs one square matrix per time sample")

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def final(self) -> ComplexMatrix:
        return self.points[-1]

    def max_unitarity_defect(self) -> float:
        return max(unitarity_defect(point) for point in self.points)

    def to_csv_rows(self) -> List[List[str]]:
        """Header ``t,re_00,im_00,…`` then one row per sample, entries row-major."""
        n = self.points.shape[1]
        header = ["t"]
        for i in range(n):
            for j in range(n):
                header.extend([f"re_{i}{j}", f"im_{i}{j}"])
        rows = [header]
        for t, point in zip(self.times, self.points):
            row = [repr(float(t))]
            for value in point.ravel():
                row.extend([repr(float(value.real)), repr(float(value.imag))])
            rows.append(row)
        return rows


def geodesic_point(spec: GeodesicSpec, t: float) -> ComplexMatrix:
    """x₀·exp((A_k + A_p)t)·exp(−A_k t)."""
    return spec.x0 @ expm((spec.a_k + spec.a_p) * t) @ expm(-spec.a_k * t)


def geodesic_trajectory(spec: GeodesicSpec, times: Sequence[float]) -> Trajectory:
    """Sample ``geodesic_point`` on a time grid."""
    grid = np.asarray(times, dtype=np.float64)
    return Trajectory(grid, np.stack([geodesic_point(spec, float(t)) for t in grid]))


def uniform_grid(horizon: float = GEODESIC_HORIZON, steps: int = GEODESIC_STEPS) -> npt.NDArray[np.float64]:
    """``steps`` equal intervals on [0, horizon]."""
    if horizon <= 0 or steps < 1:
        raise InvalidInputError("Grid needs a positive horizon and at least one step")
    return np.linspace(0.0, horizon, steps + 1)


def _body_velocity(spec: GeodesicSpec, times: npt.NDArray[np.float64]) -> npt.NDArray[np.complex128]:
    """Ad_{exp(A_k t)}(A_p) for every t, via one eigendecomposition of A_k."""
    eigenvalues, vectors = np.linalg.eig(spec.a_k)
    inverse = np.linalg.inv(vectors)
    rotated = inverse @ spec.a_p @ vectors
    gaps = eigenvalues[:, None] - eigenvalues[None, :]
    phases = np.exp(gaps[None, :, :] * times[:, None, None])
    return vectors[None] @ (rotated[None] * phases) @ inverse[None]


def integrate_geodesic(spec: GeodesicSpec, t_final: float, dt: float = 1e-4) -> Trajectory:
    """
    Integrate ẋ = x·Ad_{exp(A_k t)}(A_p) with the classical fourth-order Runge–Kutta method.

    The equation is linear in x, so every step is a right multiplication by
    the step's Runge–Kutta propagator; those are built for all steps at once.

    Args:
        spec: Geodesic data; x(0) = x₀.
        t_final: End time (> 0).
        dt: Largest allowed step; the grid is uniform.

    Returns:
        The trajectory on the integration grid.
    """
    if t_final <= 0 or dt <= 0:
        raise InvalidInputError("integrate_geodesic needs t_final > 0 and dt > 0")
    steps = int(math.ceil(t_final / dt - 1e-12))
    h = t_final / steps
    grid = np.linspace(0.0, t_final, steps + 1)
    v0 = _body_velocity(spec, grid[:-1])
    vh = _body_velocity(spec, grid[:-1] + h / 2)
    v1 = _body_velocity(spec, grid[1:])

    identity = np.eye(spec.x0.shape[0])[None]
    k2 = (identity + h / 2 * v0) @ vh
    k3 = (identity + h / 2 * k2) @ vh
    k4 = (identity + h * k3) @ v1
    propagators = identity + h / 6 * (v0 + 2 * k2 + 2 * k3 + k4)

    points = np.empty((steps + 1,) + spec.x0.shape, dtype=np.complex128)
    points[0] = spec.x0
    for index in range(steps):
        points[index + 1] = points[index] @ propagators[index]
    return Trajectory(grid, points)


def _step_logs(traj: Trajectory) -> Tuple[List[ComplexMatrix], npt.NDArray[np.float64]]:
    if len(traj) < 2:
        raise InvalidInputError("Trajectory needs at least two points")
    logs = []
    for left, right in zip(traj.points[:-1], traj.points[1:]):
        if is_unitary(left, 1e-8):
            ratio = dagger(left) @ right
        else:
            ratio = np.linalg.solve(left, right)
        logs.append(logm_near_identity(ratio))
    return logs, np.diff(traj.times)


def horizontal_length(traj: Trajectory, pair: CartanPair) -> float:
    """
    Length ∫‖(x⁻¹ẋ)_p‖_p dt of a sampled trajectory.

    Each step's body velocity is the logarithm of x_k⁻¹x_{k+1} divided by the
    step width; its p-projection is measured in the p-metric.

    Raises:
        GridResolutionError: If a step is too large for the logarithm.
    """
    logs, widths = _step_logs(traj)
    speeds = np.array([_metric_norm(pair.p.project(log), pair) for log in logs]) / widths
    return float(np.sum(speeds * widths))


def vertical_speeds(traj: Trajectory, pair: CartanPair) -> npt.NDArray[np.float64]:
    """Per-step size of the body velocity component outside p."""
    logs, widths = _step_logs(traj)
    return np.array([_metric_norm(log - pair.p.project(log), pair) for log in logs]) / widths


def is_horizontal(traj: Trajectory, pair: CartanPair, tol: float = HORIZONTAL_TOL) -> bool:
    """True iff every step's body velocity has a component outside p of size ≤ tol."""
    return bool(np.all(vertical_speeds(traj, pair) <= tol))


def su2_geodesic_spec(theta: float, c: float) -> GeodesicSpec:
    """Geodesic through I with covector cos θ·σ_x + sin θ·σ_y + c·σ_z."""
    return GeodesicSpec(
        x0=np.eye(2, dtype=np.complex128),
        a_k=c * SIGMA_Z,
        a_p=math.cos(theta) * SIGMA_X + math.sin(theta) * SIGMA_Y,
        pair=build_su2_pauli(),
    )


def eta(u: ComplexMatrix) -> Tuple[complex, complex]:
    """
    Identify SU(2) with the unit sphere in ℂ²: [[μ, ν], [−ν̄, μ̄]] ↦ (μ, ν).

    Raises:
        InvariantViolationError: If u is not a 2×2 special unitary.
    """
    u = as_matrix(u)
    if u.shape != (2, 2) or not is_unitary(u, 1e-8) or abs(np.linalg.det(u) - 1.0) > 1e-8:
        raise InvariantViolationError("eta is only defined on SU(2)")
    return complex(u[0, 0]), complex(u[0, 1])


def su2_geodesic_closed_form(
    theta: float, c: float, t: float, literal: bool = False
) -> Tuple[complex, complex]:
    """
    (μ, ν) of the SU(2) geodesic with covector cos θ·σ_x + sin θ·σ_y + c·σ_z.

    By default the value is computed from the two-exponential product and
    mapped through ``eta``. With ``literal=True`` the published closed-form
    expressions are evaluated term by term exactly as printed, including the
    sin(√(1+c²)·ct/2) factor in the first real term of μ.
    """
    if not literal:
        return eta(geodesic_point(su2_geodesic_spec(theta, c), t))
    omega = math.sqrt(1.0 + c * c)
    half = c * t / 2
    mu_real = (c * math.sin(half) * math.sin(omega * c * t / 2) / omega
               + math.cos(half) * math.cos(omega * t / 2))
    mu_imag = (c * math.cos(half) * math.sin(omega * t / 2) / omega
               - math.sin(half) * math.cos(omega * t / 2))
    nu = math.sin(omega * t / 2) / omega * complex(math.cos(half + theta), math.sin(half + theta))
    return complex(mu_real, mu_imag), nu


def su2_geodesic_exact(theta: float, c: float, t: float) -> Tuple[complex, complex]:
    """
    Closed form of the two-exponential product.

    μ = (cos(ωt/2) + i·c·sin(ωt/2)/ω)·e^{−ict/2}, ν = sin(ωt/2)/ω·e^{i(θ + ct/2)},
    with ω = √(1+c²).
    """
    omega = math.sqrt(1.0 + c * c)
    mu = complex(math.cos(omega * t / 2), c * math.sin(omega * t / 2) / omega) * np.exp(-0.5j * c * t)
    nu = math.sin(omega * t / 2) / omega * np.exp(1j * (theta + c * t / 2))
    return complex(mu), complex(nu)


def so21_geodesic_spec(theta: float, c: float) -> GeodesicSpec:
    """
    so(2,1) geodesic through I with A_k = −c·K and A_p = cos θ·P₁ + sin θ·P₂.

    K = E₀₁ − E₁₀ generates the rotations, P₁ = E₀₂ + E₂₀ and P₂ = E₁₂ + E₂₁ the
    boosts; [P₁, P₂] = K.
    """
    pair = build_so_n1(2)
    rotation = np.zeros((3, 3), dtype=np.complex128)
    rotation[0, 1], rotation[1, 0] = 1.0, -1.0
    boost_1 = np.zeros((3, 3), dtype=np.complex128)
    boost_1[0, 2] = boost_1[2, 0] = 1.0
    boost_2 = np.zeros((3, 3), dtype=np.complex128)
    boost_2[1, 2] = boost_2[2, 1] = 1.0
    return GeodesicSpec(
        x0=np.eye(3, dtype=np.complex128),
        a_k=-c * rotation,
        a_p=math.cos(theta) * boost_1 + math.sin(theta) * boost_2,
        pair=pair,
    )


def so21_geodesic_point(theta: float, c: float, t: float) -> ComplexMatrix:
    """Element of SO₀(2,1) on the geodesic of ``so21_geodesic_spec(theta, c)`` at time t."""
    return geodesic_point(so21_geodesic_spec(theta, c), t)
