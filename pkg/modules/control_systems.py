"""
Bilinear control systems dU/dt = (Ω_d + Σ u_j Ω_j)·U on SU(n), and linear
systems dx/dt = Ax + Bu.

Generators are anti-Hermitian (Ω = −iH). The module covers

* propagator simulation under piecewise-constant control laws,
* controllability verdicts with and without the drift,
* the group-commutator construction of a new generator,
* the Kalman rank test and the variation-of-constants solution,
* reachable-set sampling and a shooting estimate of the minimum time,
* the planar drift example ṗ₁ = p₂², ṗ₂ = u,
* sampling the directions Ad_k(drift) of an adjoint control system.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from modules.cartan import CartanPair
from modules.exceptions import (BoundViolationError, DimensionMismatchError,
                                InvalidInputError, InvariantViolationError,
                                SchemaError)
from modules.geodesics import Trajectory
from modules.lie_algebra import Subspace, adjoint_action, lie_closure
from modules.linalg_core import (ComplexMatrix, as_matrix, commutator, expm,
                                 frobenius_norm, is_anti_hermitian,
                                 is_traceless, matrix_from_literal,
                                 matrix_to_literal, unitarity_defect)
from modules.util import get_setting

logger = logging.getLogger(__name__)

GENERATOR_TOL = 1e-10
KALMAN_TOL = 1e-9
SIMULATE_DT = get_setting("simulate_dt", 0.01)
UNBOUNDED_SAMPLE_AMPLITUDE = get_setting("unbounded_sample_amplitude", 10.0)
MINTIME_INITIAL_HORIZON = get_setting("mintime_initial_horizon", 1.0)
MINTIME_MAX_HORIZON = get_setting("mintime_max_horizon", 64.0)
MINTIME_BISECTION_STEPS = get_setting("mintime_bisection_steps", 10)
MINTIME_SEGMENTS = get_setting("mintime_segments", 4)
MINTIME_CANDIDATES = get_setting("mintime_candidates", 24)
MINTIME_DESCENT_ROUNDS = get_setting("mintime_descent_rounds", 40)
WORKERS = get_setting("workers", 1)
R2_DT = get_setting("r2_dt", 1e-3)


@dataclass(frozen=True, eq=False)
class ControlSystem:
    """
    dU/dt = (Ω_d + Σ_j u_j Ω_j)·U with |u_j| ≤ bound.

    Attributes:
        n: Matrix dimension.
        drift: Ω_d, zero for a driftless system.
        controls: Ω_1 … Ω_m, at least one.
        bound: Per-channel amplitude cap; ``math.inf`` for unbounded controls.
    """

    n: int
    drift: ComplexMatrix
    controls: Tuple[ComplexMatrix, ...]
    bound: float = math.inf

    def __post_init__(self) -> None:
        if len(self.controls) == 0:
            raise InvalidInputError("ControlSystem needs at least one control generator")
        if not self.bound > 0:
            raise InvalidInputError(f"Control bound must be positive, got {self.bound}")
        for name, generator in [("drift", self.drift)] + [
            (f"controls[{j}]", g) for j, g in enumerate(self.controls)
        ]:
            if generator.shape != (self.n, self.n):
                raise DimensionMismatchError(f"{name} must be {self.n}x{self.n}, got {generator.shape}")
            if not is_anti_hermitian(generator, GENERATOR_TOL):
                raise InvariantViolationError(f"{name} is not anti-Hermitian")
            if not is_traceless(generator, GENERATOR_TOL):
                raise InvariantViolationError(f"{name} is not traceless")

    @classmethod
    def build(
        cls,
        controls: Sequence[Any],
        drift: Any = None,
        bound: float = math.inf,
    ) -> "ControlSystem":
        """Convenience constructor from array-likes; a missing drift means zero."""
        mats = tuple(as_matrix(c) for c in controls)
        if not mats:
            raise InvalidInputError("ControlSystem needs at least one control generator")
        n = mats[0].shape[0]
        drift_matrix = np.zeros((n, n), dtype=np.complex128) if drift is None else as_matrix(drift)
        return cls(n=n, drift=drift_matrix, controls=mats, bound=bound)

    @classmethod
    def from_document(cls, document: Dict[str, Any]) -> "ControlSystem":
        """
        Build a system from its JSON/YAML description.

        ``{"n", "convention": "hermitian"|"anti_hermitian", "drift", "controls", "bound"}``.
        Hermitian blocks H are converted by Ω = −iH.

        Raises:
            SchemaError: If a field is missing or malformed.
            InvariantViolationError: If a converted generator is not in su(n).
        """
        n = document.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise SchemaError("System field 'n' must be a positive integer")
        convention = document.get("convention", "anti_hermitian")
        if convention not in ("hermitian", "anti_hermitian"):
            raise SchemaError(f"System field 'convention' must be 'hermitian' or 'anti_hermitian', got {convention!r}")
        controls = document.get("controls")
        if not isinstance(controls, list) or not controls:
            raise SchemaError("System field 'controls' must be a non-empty list of matrix literals")

        def convert(literal: Any, name: str) -> ComplexMatrix:
            matrix = matrix_from_literal(literal)
            if matrix.shape != (n, n):
                raise SchemaError(f"System field '{name}' must be {n}x{n}, got {matrix.shape}")
            return -1j * matrix if convention == "hermitian" else matrix

        drift_literal = document.get("drift")
        drift = (
            np.zeros((n, n), dtype=np.complex128) if drift_literal is None else convert(drift_literal, "drift")
        )
        mats = tuple(convert(literal, f"controls[{j}]") for j, literal in enumerate(controls))

        bound_value = document.get("bound", "unbounded")
        if bound_value == "unbounded":
            bound = math.inf
        elif isinstance(bound_value, (int, float)) and not isinstance(bound_value, bool) and bound_value > 0:
            bound = float(bound_value)
        else:
            raise SchemaError("System field 'bound' must be a positive number or 'unbounded'")
        return cls(n=n, drift=drift, controls=mats, bound=bound)

    @property
    def m(self) -> int:
        """Number of control channels."""
        return len(self.controls)

    @property
    def ambient_dim(self) -> int:
        """dim su(n) = n² − 1."""
        return self.n * self.n - 1

    @property
    def has_drift(self) -> bool:
        return frobenius_norm(self.drift) > 0.0

    def generator(self, amplitudes: npt.ArrayLike) -> ComplexMatrix:
        """Ω_d + Σ u_j Ω_j for one amplitude vector."""
        u = np.asarray(amplitudes, dtype=np.float64)
        total = self.drift.copy()
        for value, control in zip(u, self.controls):
            total = total + value * control
        return total


@dataclass(eq=False)
class ControlLaw:
    """
    Piecewise-constant control amplitudes.

    Attributes:
        breakpoints: 0 = t_0 < t_1 < … < t_K.
        values: Shape (K, m); row k holds u on [t_k, t_{k+1}).
    """

    breakpoints: npt.NDArray[np.float64]
    values: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        self.breakpoints = np.asarray(self.breakpoints, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.breakpoints.ndim != 1 or self.breakpoints.size < 2:
            raise InvalidInputError("ControlLaw needs at least two breakpoints")
        if self.breakpoints[0] != 0.0:
            raise InvalidInputError("ControlLaw breakpoints must start at 0")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise InvalidInputError("ControlLaw breakpoints must be strictly increasing")
        if self.values.ndim != 2 or self.values.shape[0] != self.breakpoints.size - 1:
            raise InvalidInputError(
                f"ControlLaw needs one amplitude row per interval: "
                f"{self.breakpoints.size - 1} intervals, got values of shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)) or not np.all(np.isfinite(self.breakpoints)):
            raise InvalidInputError("ControlLaw has non-finite amplitudes or breakpoints")

    @classmethod
    def constant(cls, amplitudes: npt.ArrayLike, duration: float, segments: int = 1) -> "ControlLaw":
        """Hold one amplitude vector over ``segments`` equal intervals."""
        row = np.atleast_1d(np.asarray(amplitudes, dtype=np.float64))
        return cls(np.linspace(0.0, duration, segments + 1), np.tile(row, (segments, 1)))

    @classmethod
    def from_document(cls, document: Dict[str, Any]) -> "ControlLaw":
        """
        Build a law from ``{"breakpoints": [...], "values": [[...], ...]}``.

        Raises:
            SchemaError: If a field is missing or malformed.
        """
        try:
            return cls(np.array(document["breakpoints"], dtype=np.float64),
                       np.array(document["values"], dtype=np.float64))
        except KeyError as exc:
            raise SchemaError(f"Law is missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"Law fields must be numeric arrays: {exc}") from exc

    def to_dict(self) -> Dict[str, Any]:
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}

    @property
    def duration(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def m(self) -> int:
        return int(self.values.shape[1])

    @property
    def widths(self) -> npt.NDArray[np.float64]:
        return np.diff(self.breakpoints)

    def amplitude_at(self, t: float) -> npt.NDArray[np.float64]:
        """u(t); zero outside [0, duration)."""
        if t < 0 or t >= self.duration:
            return np.zeros(self.m)
        index = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return self.values[index].copy()

    def check_bound(self, bound: float) -> None:
        """
        Raises:
            BoundViolationError: If some |u_j| exceeds a finite bound.
        """
        if math.isinf(bound):
            return
        peak = float(np.max(np.abs(self.values)))
        if peak > bound * (1 + 1e-12):
            raise BoundViolationError(f"Control amplitude {peak:.6g} exceeds the bound {bound:.6g}")

    def concatenate(self, other: "ControlLaw") -> "ControlLaw":
        """This law followed by ``other``."""
        if other.m != self.m:
            raise DimensionMismatchError(f"Cannot join laws with {self.m} and {other.m} channels")
        return ControlLaw(
            np.concatenate([self.breakpoints, other.breakpoints[1:] + self.duration]),
            np.vstack([self.values, other.values]),
        )


def _check_law(sys: ControlSystem, law: ControlLaw) -> None:
    if law.m != sys.m:
        raise DimensionMismatchError(f"Law has {law.m} channels, system has {sys.m} controls")
    law.check_bound(sys.bound)


def _initial(sys: ControlSystem, initial: Optional[ComplexMatrix]) -> ComplexMatrix:
    if initial is None:
        return np.eye(sys.n, dtype=np.complex128)
    initial = as_matrix(initial)
    if initial.shape != (sys.n, sys.n):
        raise DimensionMismatchError(f"Initial propagator must be {sys.n}x{sys.n}")
    return initial


def simulate(
    sys: ControlSystem,
    law: ControlLaw,
    dt: float = SIMULATE_DT,
    initial: Optional[ComplexMatrix] = None,
) -> Trajectory:
    """
    Propagate U from ``initial`` (default I) under a piecewise-constant law.

    Each interval is split into equal substeps no longer than ``dt`` and each
    substep applies the exact propagator expm(G·h) on the left, so ``dt`` only
    controls output sampling.

    Raises:
        BoundViolationError: If the law exceeds the system bound.
        DimensionMismatchError: If the law has the wrong number of channels.
    """
    if dt <= 0:
        raise InvalidInputError("simulate needs dt > 0")
    _check_law(sys, law)
    current = _initial(sys, initial)
    times = [0.0]
    points = [current]
    for start, width, amplitudes in zip(law.breakpoints[:-1], law.widths, law.values):
        substeps = max(1, int(math.ceil(width / dt - 1e-9)))
        h = width / substeps
        step = expm(sys.generator(amplitudes) * h)
        for j in range(1, substeps + 1):
            current = step @ current
            times.append(float(start + j * h) if j < substeps else float(start + width))
            points.append(current)
    return Trajectory(np.array(times), np.stack(points))


def endpoint(sys: ControlSystem, law: ControlLaw, initial: Optional[ComplexMatrix] = None) -> ComplexMatrix:
    """Final propagator U(T) without intermediate sampling."""
    _check_law(sys, law)
    current = _initial(sys, initial)
    for width, amplitudes in zip(law.widths, law.values):
        current = expm(sys.generator(amplitudes) * width) @ current
    return current


def _endpoint_unchecked(sys: ControlSystem, widths: npt.NDArray[np.float64],
                        values: npt.NDArray[np.float64]) -> ComplexMatrix:
    current = np.eye(sys.n, dtype=np.complex128)
    for width, amplitudes in zip(widths, values):
        current = expm(sys.generator(amplitudes) * width) @ current
    return current


@dataclass
class ControllabilityReport:
    """Controllability verdicts for a bilinear system on SU(n)."""

    n: int
    ambient_dim: int
    control_dim: int
    full_dim: int
    driftless_controllable: bool
    controllable_with_drift: bool
    control_span: List[ComplexMatrix] = field(repr=False)
    drift: ComplexMatrix = field(repr=False)
    linear: "LinearSystem" = field(repr=False)

    @property
    def drift_needed(self) -> bool:
        return self.controllable_with_drift and not self.driftless_controllable

    @property
    def linear_rank(self) -> int:
        """Kalman rank of the linear system behind the third distribution."""
        return kalman_rank(self.linear)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "ambient_dim": self.ambient_dim,
            "control_dim": self.control_dim,
            "full_dim": self.full_dim,
            "driftless_controllable": self.driftless_controllable,
            "controllable_with_drift": self.controllable_with_drift,
            "drift_needed": self.drift_needed,
            "distributions": {
                "D": {"basis": [matrix_to_literal(b) for b in self.control_span],
                      "rank": len(self.control_span)},
                "D_f": {
                    "anchor": matrix_to_literal(self.drift),
                    "basis": [matrix_to_literal(b) for b in self.control_span],
                    "rank": len(self.control_span),
                },
                "D_f_linear": {
                    "anchor": matrix_to_literal(self.linear.a),
                    "inputs": [{"re": b.real.tolist(), "im": b.imag.tolist()}
                               for b in self.linear.distribution()[1]],
                    "rank": self.linear_rank,
                    "state_dim": self.linear.n,
                },
            },
        }


def controllability_report(sys: ControlSystem, linear: Optional["LinearSystem"] = None) -> ControllabilityReport:
    """
    Closure dimensions and controllability verdicts.

    The driftless verdict closes the controls alone; the drift verdict closes
    the controls together with the drift. Both compare against n² − 1.

    Args:
        sys: The bilinear system.
        linear: Linear system dx/dt = Ax + Σ u_j b_j whose affine distribution
            AU + span{b_j} is reported next to D and D_f. Defaults to the
            linearization of ``sys`` about the identity.
    """
    control_closure = lie_closure(list(sys.controls), max_dim=sys.ambient_dim)
    generators = list(sys.controls) + ([sys.drift] if sys.has_drift else [])
    full_closure = lie_closure(generators, max_dim=sys.ambient_dim)
    span = Subspace.span(list(sys.controls), ambient_n=sys.n)
    logger.info(f"Control algebra dim {control_closure.dim}, with drift {full_closure.dim}, "
                f"ambient {sys.ambient_dim}")
    return ControllabilityReport(
        n=sys.n,
        ambient_dim=sys.ambient_dim,
        control_dim=control_closure.dim,
        full_dim=full_closure.dim,
        driftless_controllable=control_closure.dim == sys.ambient_dim,
        controllable_with_drift=full_closure.dim == sys.ambient_dim,
        control_span=list(span.basis),
        drift=sys.drift,
        linear=linear if linear is not None else linearized_system(sys),
    )


def group_commutator(o1: ComplexMatrix, o2: ComplexMatrix, dt: float) -> ComplexMatrix:
    """exp(Ω₂δ)·exp(Ω₁δ)·exp(−Ω₂δ)·exp(−Ω₁δ)."""
    return expm(o2 * dt) @ expm(o1 * dt) @ expm(-o2 * dt) @ expm(-o1 * dt)


def ng_generator(o1: ComplexMatrix, o2: ComplexMatrix, dt: float) -> Tuple[ComplexMatrix, float]:
    """
    Generate the bracket direction from two switched generators.

    The product exp(Ω₂δ)exp(Ω₁δ)exp(−Ω₂δ)exp(−Ω₁δ) expands to
    I + δ²[Ω₂, Ω₁] + O(δ³).

    Returns:
        The product and ‖U − (I + δ²[Ω₂, Ω₁])‖_F, which is O(δ³).
    """
    if dt <= 0:
        raise InvalidInputError("ng_generator needs dt > 0")
    o1, o2 = as_matrix(o1), as_matrix(o2)
    product = group_commutator(o1, o2, dt)
    expansion = np.eye(o1.shape[0]) + dt * dt * commutator(o2, o1)
    return product, frobenius_norm(product - expansion)


def convergence_order(steps: Sequence[float], residuals: Sequence[float]) -> float:
    """Least-squares slope of log(residual) against log(step)."""
    slope, _ = np.polyfit(np.log(np.asarray(steps)), np.log(np.asarray(residuals)), 1)
    return float(slope)


def ng_convergence_order(o1: ComplexMatrix, o2: ComplexMatrix,
                         steps: Sequence[float] = (0.2, 0.1, 0.05)) -> float:
    """Fitted order of the ``ng_generator`` residual."""
    return convergence_order(steps, [ng_generator(o1, o2, dt)[1] for dt in steps])


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """
    dx/dt = Ax + Bu.

    Attributes:
        a: n×n state matrix.
        b: n×m input matrix; a one-dimensional B is read as a single column.
    """

    a: npt.NDArray[Any]
    b: npt.NDArray[Any]

    def __post_init__(self) -> None:
        a = np.atleast_2d(np.asarray(self.a))
        b = np.asarray(self.b)
        if b.ndim == 1:
            b = b[:, None]
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatchError(f"A must be square, got {a.shape}")
        if b.ndim != 2 or b.shape[0] != a.shape[0]:
            raise DimensionMismatchError(f"B must have {a.shape[0]} rows, got shape {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return int(self.a.shape[0])

    @property
    def m(self) -> int:
        return int(self.b.shape[1])

    def controllability_matrix(self) -> npt.NDArray[Any]:
        """[B, AB, …, A^{n−1}B]."""
        blocks = []
        power = self.b
        for _ in range(self.n):
            blocks.append(power)
            power = self.a @ power
        return np.hstack(blocks)

    def is_completely_controllable(self) -> bool:
        return kalman_rank(self) == self.n

    def distribution(self) -> Tuple[npt.NDArray[Any], List[npt.NDArray[Any]]]:
        """Drift anchor A and the input directions b_j of the affine distribution."""
        return self.a, [self.b[:, j].copy() for j in range(self.m)]


def linearized_system(sys: ControlSystem) -> LinearSystem:
    """
    Linearization of a bilinear system about U = I, u = 0.

    With column-major vec, vec(Ω_d·δU) = (I ⊗ Ω_d)·vec(δU), and each control
    enters through b_j = vec(Ω_j).
    """
    a = np.kron(np.eye(sys.n), sys.drift)
    b = np.stack([c.reshape(-1, order="F") for c in sys.controls], axis=1)
    return LinearSystem(a, b)


def kalman_rank(sys: LinearSystem, tol: float = KALMAN_TOL) -> int:
    """Rank of the controllability matrix; singular values count above tol·σ_max."""
    if sys.b.size == 0:
        return 0
    singular_values = np.linalg.svd(sys.controllability_matrix(), compute_uv=False)
    if singular_values.size == 0 or singular_values[0] == 0.0:
        return 0
    return int(np.sum(singular_values > tol * singular_values[0]))


def linear_solution(sys: LinearSystem, law: ControlLaw, horizon: float, x0: npt.ArrayLike) -> npt.NDArray[Any]:
    """
    Variation of constants x(T) = e^{AT}x₀ + ∫₀ᵀ e^{A(T−s)}Bu(s) ds.

    Each constant piece is integrated exactly by exponentiating the augmented
    matrix [[A, Bu], [0, 0]]. The control is zero after the law ends.

    Raises:
        DimensionMismatchError: If x₀ or the law does not fit the system.
    """
    if horizon < 0:
        raise InvalidInputError("linear_solution needs T >= 0")
    state = np.asarray(x0, dtype=np.complex128).ravel()
    if state.shape != (sys.n,):
        raise DimensionMismatchError(f"x0 must have length {sys.n}, got {state.shape}")
    if law.m != sys.m:
        raise DimensionMismatchError(f"Law has {law.m} channels, B has {sys.m} columns")

    pieces: List[Tuple[float, npt.NDArray[np.float64]]] = []
    for start, stop, amplitudes in zip(law.breakpoints[:-1], law.breakpoints[1:], law.values):
        if start >= horizon:
            break
        pieces.append((min(stop, horizon) - start, amplitudes))
    if horizon > law.duration:
        pieces.append((horizon - law.duration, np.zeros(sys.m)))

    augmented = np.zeros((sys.n + 1, sys.n + 1), dtype=np.complex128)
    augmented[:sys.n, :sys.n] = sys.a
    for width, amplitudes in pieces:
        augmented[:sys.n, sys.n] = sys.b @ amplitudes
        state = (expm(augmented * width) @ np.append(state, 1.0))[:sys.n]
    if np.isrealobj(sys.a) and np.isrealobj(sys.b) and np.isrealobj(np.asarray(x0)):
        return state.real
    return state


def _sample_amplitudes(rng: np.random.Generator, shape: Tuple[int, ...], bound: float) -> npt.NDArray[np.float64]:
    limit = UNBOUNDED_SAMPLE_AMPLITUDE if math.isinf(bound) else bound
    return rng.uniform(-limit, limit, size=shape)


def reachable_samples(
    sys: ControlSystem,
    horizon: float,
    count: int,
    segments: int,
    seed: int,
) -> List[ComplexMatrix]:
    """
    Endpoints of random bounded piecewise-constant laws over horizons ≤ T.

    Each sample draws its horizon uniformly from (0, T], splits it into
    ``segments`` equal intervals and draws every amplitude uniformly from
    [−bound, bound] (or a configured box for unbounded systems).
    """
    if horizon <= 0 or count < 1 or segments < 1:
        raise InvalidInputError("reachable_samples needs T > 0, count >= 1 and segments >= 1")
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        tau = horizon * (1.0 - rng.uniform())
        values = _sample_amplitudes(rng, (segments, sys.m), sys.bound)
        samples.append(_endpoint_unchecked(sys, np.full(segments, tau / segments), values))
    return samples


@dataclass
class MinTimeResult:
    """
    Outcome of the minimum-time search.

    ``t_est`` is an upper bound on the infimizing time when ``reached``;
    otherwise it is ``inf`` and ``achieved_error`` is the best error seen.
    """

    t_est: float
    achieved_error: float
    reached: bool
    simulations: int
    law: Optional[ControlLaw] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t_est": self.t_est if self.reached else None,
            "achieved_error": self.achieved_error,
            "reached": self.reached,
            "simulations": self.simulations,
            "law": self.law.to_dict() if self.law is not None else None,
        }


class _ShootingSearch:
    """Random multi-segment shooting with coordinate-descent refinement."""

    def __init__(self, sys: ControlSystem, target: ComplexMatrix, eps: float, budget: int,
                 seed: int, workers: int, segments: int, candidates: int, rounds: int) -> None:
        self.sys = sys
        self.target = target
        self.eps = eps
        self.budget = budget
        self.seed = seed
        self.workers = max(1, workers)
        self.segments = segments
        self.candidates = candidates
        self.rounds = rounds
        self.simulations = 0
        self.shots = 0

    @property
    def exhausted(self) -> bool:
        return self.simulations >= self.budget

    def error(self, horizon: float, values: npt.NDArray[np.float64]) -> float:
        widths = np.full(self.segments, horizon / self.segments)
        return frobenius_norm(_endpoint_unchecked(self.sys, widths, values) - self.target)

    def _worker(self, worker: int, shot: int, horizon: float, count: int
                ) -> Tuple[float, int, int, npt.NDArray[np.float64]]:
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, worker, shot]))
        best: Optional[Tuple[float, int, int, npt.NDArray[np.float64]]] = None
        for index in range(count):
            if worker == 0 and index == 0:
                values = np.zeros((self.segments, self.sys.m))
            else:
                values = _sample_amplitudes(rng, (self.segments, self.sys.m), self.sys.bound)
            candidate = (self.error(horizon, values), worker, index, values)
            if best is None or candidate[:3] < best[:3]:
                best = candidate
        assert best is not None
        return best

    def shoot(self, horizon: float) -> Tuple[float, npt.NDArray[np.float64]]:
        """Best (error, amplitudes) found at a fixed horizon."""
        shot = self.shots
        self.shots += 1
        remaining = max(1, min(self.candidates, self.budget - self.simulations))
        per_worker = [remaining // self.workers + (1 if w < remaining % self.workers else 0)
                      for w in range(self.workers)]
        jobs = [(w, count) for w, count in enumerate(per_worker) if count > 0]
        with ThreadPoolExecutor(max_workers=len(jobs)) as executor:
            results = list(executor.map(lambda job: self._worker(job[0], shot, horizon, job[1]), jobs))
        self.simulations += remaining
        best_error, _, _, best_values = min(results, key=lambda r: r[:3])

        limit = self.sys.bound if not math.isinf(self.sys.bound) else UNBOUNDED_SAMPLE_AMPLITUDE
        step = limit / 2
        for _ in range(self.rounds):
            if best_error <= self.eps or self.exhausted:
                break
            improved = False
            for segment in range(self.segments):
                for channel in range(self.sys.m):
                    for direction in (1.0, -1.0):
                        if self.exhausted:
                            break
                        trial = best_values.copy()
                        trial[segment, channel] = np.clip(trial[segment, channel] + direction * step,
                                                          -limit, limit)
                        trial_error = self.error(horizon, trial)
                        self.simulations += 1
                        if trial_error < best_error:
                            best_error, best_values, improved = trial_error, trial, True
                            break
            if not improved:
                step /= 2
        logger.debug(f"Shot at T={horizon:.6g}: error {best_error:.3g} after {self.simulations} simulations")
        return best_error, best_values


def min_time_estimate(
    sys: ControlSystem,
    target: ComplexMatrix,
    eps: float,
    budget: int,
    seed: int,
    workers: int = WORKERS,
    segments: int = MINTIME_SEGMENTS,
    candidates: int = MINTIME_CANDIDATES,
    descent_rounds: int = MINTIME_DESCENT_ROUNDS,
    initial_horizon: float = MINTIME_INITIAL_HORIZON,
    max_horizon: float = MINTIME_MAX_HORIZON,
    bisection_steps: int = MINTIME_BISECTION_STEPS,
) -> MinTimeResult:
    """
    Upper-bound estimate of the infimizing time to reach ``target``.

    The horizon is doubled from ``initial_horizon`` until a shot reaches the
    target within ``eps``, then bisected between the last failure and the
    first success. The result is an upper bound on the true minimum time.

    Args:
        sys: System with a finite control bound.
        target: Element of SU(n).
        eps: Frobenius distance counted as reached.
        budget: Cap on the total number of simulated laws.
        seed: Base seed; worker generators derive from (seed, worker, shot).
        workers: Threads sampling candidate laws.

    Raises:
        InvalidInputError: If the bound is infinite or eps/budget are not positive.
        InvariantViolationError: If the target is not in SU(n).
    """
    if math.isinf(sys.bound):
        raise InvalidInputError("min_time_estimate needs a finite control bound")
    if eps <= 0 or budget < 1:
        raise InvalidInputError("min_time_estimate needs eps > 0 and budget >= 1")
    target = as_matrix(target)
    if target.shape != (sys.n, sys.n):
        raise DimensionMismatchError(f"Target must be {sys.n}x{sys.n}")
    if unitarity_defect(target) > 1e-8 or abs(np.linalg.det(target) - 1.0) > 1e-8:
        raise InvariantViolationError("Target is not an element of SU(n)")

    initial_error = frobenius_norm(target - np.eye(sys.n))
    if initial_error <= eps:
        return MinTimeResult(t_est=0.0, achieved_error=initial_error, reached=True, simulations=0,
                             law=None)

    search = _ShootingSearch(sys, target, eps, budget, seed, workers, segments, candidates, descent_rounds)
    best_error = initial_error
    success: Optional[Tuple[float, float, npt.NDArray[np.float64]]] = None
    lower = 0.0
    horizon = initial_horizon
    while horizon <= max_horizon and not search.exhausted:
        error, values = search.shoot(horizon)
        best_error = min(best_error, error)
        if error <= eps:
            success = (horizon, error, values)
            break
        lower = horizon
        horizon *= 2

    if success is None:
        logger.info(f"Target not reached up to T={max_horizon}; best error {best_error:.3g}")
        return MinTimeResult(t_est=math.inf, achieved_error=best_error, reached=False,
                             simulations=search.simulations)

    upper = success[0]
    for _ in range(bisection_steps):
        if search.exhausted:
            break
        middle = 0.5 * (lower + upper)
        error, values = search.shoot(middle)
        if error <= eps:
            upper, success = middle, (middle, error, values)
        else:
            lower = middle

    horizon, error, values = success
    logger.info(f"Minimum-time estimate {horizon:.6g} (error {error:.3g}, {search.simulations} simulations)")
    return MinTimeResult(
        t_est=horizon,
        achieved_error=error,
        reached=True,
        simulations=search.simulations,
        law=ControlLaw(np.linspace(0.0, horizon, segments + 1), values),
    )


def r2_endpoints(
    breakpoints: npt.ArrayLike,
    values_batch: npt.ArrayLike,
    horizon: float,
    start: Tuple[float, float] = (0.0, 0.0),
    dt: float = R2_DT,
) -> npt.NDArray[np.float64]:
    """
    Batched fourth-order Runge–Kutta for ṗ₁ = p₂², ṗ₂ = u.

    Args:
        breakpoints: Shared law breakpoints, starting at 0.
        values_batch: Shape (batch, K) scalar amplitudes per interval; u = 0
            after the last breakpoint.
        horizon: Integration time T ≥ 0.
        start: Initial point (p₁, p₂).
        dt: Largest step.

    Returns:
        Endpoints, shape (batch, 2).
    """
    if horizon < 0:
        raise InvalidInputError("r2 integration needs T >= 0")
    breaks = np.asarray(breakpoints, dtype=np.float64)
    values = np.atleast_2d(np.asarray(values_batch, dtype=np.float64))
    padded = np.hstack([values, np.zeros((values.shape[0], 1))])
    p1 = np.full(values.shape[0], float(start[0]))
    p2 = np.full(values.shape[0], float(start[1]))
    if horizon == 0:
        return np.column_stack([p1, p2])

    def control(t: float) -> npt.NDArray[np.float64]:
        index = int(np.searchsorted(breaks, t, side="right")) - 1
        return padded[:, min(max(index, 0), values.shape[1])]

    steps = int(math.ceil(horizon / dt - 1e-12))
    h = horizon / steps
    for step in range(steps):
        t = step * h
        u0, uh, u1 = control(t), control(t + h / 2), control(t + h)
        a2 = p2
        b2 = p2 + h / 2 * u0
        c2 = p2 + h / 2 * uh
        d2 = p2 + h * uh
        p1 = p1 + h / 6 * (a2 ** 2 + 2 * b2 ** 2 + 2 * c2 ** 2 + d2 ** 2)
        p2 = p2 + h / 6 * (u0 + 4 * uh + u1)
    return np.column_stack([p1, p2])


def r2_example(law: ControlLaw, horizon: float, start: Tuple[float, float] = (0.0, 0.0)) -> Tuple[float, float]:
    """
    Endpoint of ṗ₁ = p₂², ṗ₂ = u from ``start``.

    p₁ never decreases, so no law leaves the half-plane {s₁ ≥ r₁}.
    """
    if law.m != 1:
        raise DimensionMismatchError("The planar example takes a single control channel")
    p1, p2 = r2_endpoints(law.breakpoints, law.values[:, 0][None, :], horizon, start)[0]
    return float(p1), float(p2)


def r2_random_endpoints(count: int, segments: int, horizon: float, bound: float, seed: int,
                        start: Tuple[float, float] = (0.0, 0.0)) -> npt.NDArray[np.float64]:
    """Endpoints of ``count`` random bounded laws with equal segments."""
    rng = np.random.default_rng(seed)
    values = rng.uniform(-bound, bound, size=(count, segments))
    return r2_endpoints(np.linspace(0.0, horizon, segments + 1), values, horizon, start)


def adjoint_system_directions(
    sys: ControlSystem,
    pair: CartanPair,
    samples: int,
    seed: int,
    tol: float = 1e-8,
) -> List[ComplexMatrix]:
    """
    Sample the directions Ad_k(Ω_d), k ∈ K, of an adjoint control system.

    Raises:
        InvariantViolationError: If the drift is not in p or the controls do
            not generate k.
    """
    if sys.n != pair.ambient_n:
        raise DimensionMismatchError("System and Cartan pair have different dimensions")
    if not pair.p.contains(sys.drift, tol):
        raise InvariantViolationError("Precondition violated: drift is not contained in p")
    closure = lie_closure(list(sys.controls), max_dim=max(pair.k.dim, 1))
    generates_k = closure.dim == pair.k.dim and all(pair.k.contains(b, tol) for b in closure.basis)
    if not generates_k:
        raise InvariantViolationError("Precondition violated: controls do not generate k")
    rng = np.random.default_rng(seed)
    return [adjoint_action(pair.sample_subgroup(rng), sys.drift) for _ in range(samples)]
