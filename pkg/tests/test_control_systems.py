"""
Pytest test suite for the `control_systems` module.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modules.cartan import build_su2_pauli
from modules.control_systems import (ControlLaw, ControlSystem, LinearSystem,
                                     adjoint_system_directions,
                                     controllability_report, endpoint,
                                     group_commutator, kalman_rank,
                                     linear_solution, linearized_system,
                                     min_time_estimate,
                                     ng_convergence_order, ng_generator,
                                     r2_example, r2_random_endpoints,
                                     reachable_samples, simulate)
from modules.exceptions import (BoundViolationError, DimensionMismatchError,
                                InvalidInputError, InvariantViolationError,
                                SchemaError)
from modules.geodesics import p_norm
from modules.lie_algebra import SIGMA_X, SIGMA_Y, SIGMA_Z, is_controllable_rank
from modules.linalg_core import expm, frobenius_norm, haar_special_unitary


@pytest.fixture
def driftless():
    """Single σ_x control, amplitude bounded by 1."""
    return ControlSystem.build([SIGMA_X], bound=1.0)


@pytest.fixture
def drifted():
    """Drift σ_z with a single σ_x control bounded by 1."""
    return ControlSystem.build([SIGMA_X], drift=SIGMA_Z, bound=1.0)


def test_control_system_validation():
    """Test the construction checks of a control system."""
    with pytest.raises(InvalidInputError):
        ControlSystem.build([])
    with pytest.raises(InvalidInputError):
        ControlSystem.build([SIGMA_X], bound=0.0)
    with pytest.raises(InvariantViolationError, match="anti-Hermitian"):
        ControlSystem.build([1j * SIGMA_X])
    with pytest.raises(InvariantViolationError, match="traceless"):
        ControlSystem.build([1j * np.eye(2)])
    with pytest.raises(DimensionMismatchError):
        ControlSystem.build([SIGMA_X], drift=np.zeros((3, 3)))


def test_control_system_from_document():
    """Test the Hermitian convention, the bound keyword and schema errors."""
    document = {
        "n": 2,
        "convention": "hermitian",
        "controls": [{"n": 2, "re": [[0, 1], [1, 0]]}],
        "drift": {"n": 2, "re": [[1, 0], [0, -1]]},
        "bound": 2,
    }
    system = ControlSystem.from_document(document)
    assert np.allclose(system.controls[0], -1j * np.array([[0, 1], [1, 0]]))
    assert system.bound == 2.0
    assert system.has_drift

    unbounded = ControlSystem.from_document({"n": 2, "controls": [{"n": 2, "re": [[0, 1], [-1, 0]]}]})
    assert math.isinf(unbounded.bound)
    assert not unbounded.has_drift

    with pytest.raises(SchemaError):
        ControlSystem.from_document({"n": 2})
    with pytest.raises(SchemaError):
        ControlSystem.from_document({"n": 2, "controls": [{"n": 2, "re": [[0, 1], [-1, 0]]}], "bound": -1})
    with pytest.raises(SchemaError):
        ControlSystem.from_document({"n": 2, "convention": "other", "controls": []})


def test_control_law_basics():
    """Test amplitude lookup, concatenation and validation of a law."""
    law = ControlLaw(np.array([0.0, 1.0, 3.0]), np.array([[1.0], [-2.0]]))
    assert law.duration == 3.0
    assert law.amplitude_at(0.5)[0] == 1.0
    assert law.amplitude_at(1.0)[0] == -2.0
    assert law.amplitude_at(3.0)[0] == 0.0
    assert law.amplitude_at(-1.0)[0] == 0.0

    joined = law.concatenate(ControlLaw.constant([5.0], 2.0))
    assert joined.duration == 5.0
    assert joined.amplitude_at(4.0)[0] == 5.0

    with pytest.raises(InvalidInputError):
        ControlLaw(np.array([0.5, 1.0]), np.array([1.0]))
    with pytest.raises(InvalidInputError):
        ControlLaw(np.array([0.0, 1.0, 1.0]), np.array([1.0, 2.0]))
    with pytest.raises(InvalidInputError):
        ControlLaw(np.array([0.0, 1.0]), np.array([1.0, 2.0]))


def test_control_law_from_document():
    """Test law parsing and its schema errors."""
    law = ControlLaw.from_document({"breakpoints": [0, 1, 2], "values": [[0.5], [0.25]]})
    assert law.m == 1
    assert law.to_dict() == {"breakpoints": [0.0, 1.0, 2.0], "values": [[0.5], [0.25]]}
    with pytest.raises(SchemaError):
        ControlLaw.from_document({"breakpoints": [0, 1]})
    with pytest.raises(SchemaError):
        ControlLaw.from_document({"breakpoints": [0, 1], "values": [["a"]]})


def test_simulate_full_turn(driftless):
    """Test that u ≡ 2π on σ_x for one unit of time gives −I."""
    system = ControlSystem.build([SIGMA_X])
    trajectory = simulate(system, ControlLaw.constant([2 * np.pi], 1.0))
    assert np.allclose(trajectory.final, -np.eye(2), atol=1e-10)
    assert trajectory.times[-1] == 1.0
    assert len(trajectory) == 101


def test_simulate_zero_control_follows_the_drift():
    """Test u ≡ 0: drift σ_z over 2π gives −I and a zero drift leaves I fixed."""
    spinning = ControlSystem.build([SIGMA_X], drift=SIGMA_Z)
    assert np.allclose(simulate(spinning, ControlLaw.constant([0.0], 2 * np.pi)).final,
                       -np.eye(2), atol=1e-10)
    resting = ControlSystem.build([SIGMA_X])
    trajectory = simulate(resting, ControlLaw.constant([0.0], 3.0))
    assert all(np.allclose(point, np.eye(2), atol=1e-14) for point in trajectory.points)


def test_simulate_zero_duration_piece_and_bounds(driftless):
    """Test bound and channel checks of a simulation."""
    with pytest.raises(BoundViolationError):
        simulate(driftless, ControlLaw.constant([2.0], 1.0))
    with pytest.raises(DimensionMismatchError):
        simulate(driftless, ControlLaw.constant([0.5, 0.5], 1.0))
    with pytest.raises(InvalidInputError):
        simulate(driftless, ControlLaw.constant([0.5], 1.0), dt=0.0)


def test_simulate_matches_endpoint_and_concatenation(rng):
    """Test that the propagator of a joined law is the product of the pieces."""
    system = ControlSystem.build([SIGMA_X, SIGMA_Y], drift=SIGMA_Z, bound=2.0)
    first = ControlLaw(np.array([0.0, 0.3, 1.0]), rng.uniform(-2, 2, size=(2, 2)))
    second = ControlLaw(np.array([0.0, 0.7]), rng.uniform(-2, 2, size=(1, 2)))
    joined = first.concatenate(second)
    expected = endpoint(system, second) @ endpoint(system, first)
    assert np.allclose(endpoint(system, joined), expected, atol=1e-12)
    assert np.allclose(simulate(system, joined, dt=0.05).final, expected, atol=1e-12)


def test_simulate_respects_initial_value(drifted):
    """Test that simulation starts from the supplied propagator."""
    start = expm(0.4 * SIGMA_Y)
    law = ControlLaw.constant([0.5], 1.0)
    trajectory = simulate(drifted, law, initial=start)
    assert np.allclose(trajectory.points[0], start)
    assert np.allclose(trajectory.final, endpoint(drifted, law) @ start, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=6))
def test_simulate_stays_unitary(amplitudes):
    """Test that propagators stay in SU(2) for bounded random laws."""
    system = ControlSystem.build([SIGMA_X], drift=SIGMA_Z, bound=1.0)
    law = ControlLaw(np.linspace(0.0, 2.0, len(amplitudes) + 1), np.array(amplitudes))
    trajectory = simulate(system, law, dt=0.05)
    assert trajectory.max_unitarity_defect() <= 1e-12
    assert abs(np.linalg.det(trajectory.final) - 1.0) <= 1e-12


def test_controllability_report_examples(drifted):
    """Test the driftless, drift-needed and abelian cases."""
    both = controllability_report(ControlSystem.build([SIGMA_X, SIGMA_Y]))
    assert both.driftless_controllable and both.controllable_with_drift
    assert not both.drift_needed

    report = controllability_report(drifted)
    assert not report.driftless_controllable
    assert report.controllable_with_drift
    assert report.drift_needed
    assert report.control_dim == 1 and report.full_dim == 3

    abelian = controllability_report(ControlSystem.build([SIGMA_Z]))
    assert not abelian.controllable_with_drift


def test_controllability_report_agrees_with_rank_condition(drifted):
    """Test that the verdicts equal the rank condition on the generator sets."""
    report = controllability_report(drifted)
    assert report.driftless_controllable == is_controllable_rank([SIGMA_X], 3)
    assert report.controllable_with_drift == is_controllable_rank([SIGMA_X, SIGMA_Z], 3)
    document = report.to_dict()
    assert document["drift_needed"] is True
    assert len(document["distributions"]["D"]["basis"]) == 1


def test_controllability_report_linear_distribution():
    """Test the affine distribution AU + span{b_j} of an explicit linear system."""
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    linear = LinearSystem(a, np.array([[0.0, 1.0], [1.0, 0.0]]))
    report = controllability_report(ControlSystem.build([SIGMA_X]), linear=linear)
    distribution = report.to_dict()["distributions"]["D_f_linear"]
    assert distribution["anchor"]["re"] == a.tolist()
    assert [vector["re"] for vector in distribution["inputs"]] == [[0.0, 1.0], [1.0, 0.0]]
    assert distribution["rank"] == kalman_rank(linear) == 2
    assert distribution["state_dim"] == 2


def test_controllability_report_linearizes_by_default(drifted):
    """Test that the third distribution defaults to the linearization about I."""
    document = controllability_report(drifted).to_dict()
    assert set(document["distributions"]) == {"D", "D_f", "D_f_linear"}
    linear = linearized_system(drifted)
    assert np.allclose(linear.a, np.kron(np.eye(2), SIGMA_Z))
    assert np.allclose(linear.b[:, 0], SIGMA_X.reshape(-1, order="F"))
    # vec(σ_x) and (I ⊗ σ_z)·vec(σ_x) are independent; (I ⊗ σ_z)² = −¼·I
    assert document["distributions"]["D_f_linear"]["rank"] == 2
    assert document["distributions"]["D"]["rank"] == 1


def test_group_commutator_generates_the_bracket():
    """Test the second-order expansion of the switched product."""
    product, residual = ng_generator(SIGMA_X, SIGMA_Y, 0.01)
    assert np.allclose(product, group_commutator(SIGMA_X, SIGMA_Y, 0.01))
    assert residual <= 1e-5
    with pytest.raises(InvalidInputError):
        ng_generator(SIGMA_X, SIGMA_Y, 0.0)


def test_group_commutator_residual_is_third_order():
    """Test the fitted order and the halving ratio of the residual."""
    order = ng_convergence_order(SIGMA_X, SIGMA_Y)
    assert 2.7 <= order <= 3.3
    ratio = ng_generator(SIGMA_X, SIGMA_Y, 0.1)[1] / ng_generator(SIGMA_X, SIGMA_Y, 0.05)[1]
    assert 6.5 <= ratio <= 9.5


def test_group_commutator_on_random_su3(rng):
    """Test the third-order residual on random su(3) generators."""
    a = haar_special_unitary(3, rng)
    b = haar_special_unitary(3, rng)
    o1 = 0.5 * (a - a.conj().T)
    o2 = 0.5 * (b - b.conj().T)
    o1 -= np.trace(o1) / 3 * np.eye(3)
    o2 -= np.trace(o2) / 3 * np.eye(3)
    assert 2.7 <= ng_convergence_order(o1, o2, steps=(0.04, 0.02, 0.01)) <= 3.3


def test_kalman_rank_examples():
    """Test the double integrator, a decoupled system and a zero input."""
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert kalman_rank(LinearSystem(a, np.array([0.0, 1.0]))) == 2
    assert LinearSystem(a, np.array([0.0, 1.0])).is_completely_controllable()
    assert kalman_rank(LinearSystem(np.zeros((2, 2)), np.array([1.0, 0.0]))) == 1
    assert kalman_rank(LinearSystem(a, np.zeros(2))) == 0
    with pytest.raises(DimensionMismatchError):
        LinearSystem(a, np.zeros(3))


def test_linear_solution_double_integrator():
    """Test x(1) = (1/2, 1) for u ≡ 1 from the origin."""
    system = LinearSystem(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([0.0, 1.0]))
    state = linear_solution(system, ControlLaw.constant([1.0], 1.0), 1.0, [0.0, 0.0])
    assert np.allclose(state, [0.5, 1.0], atol=1e-12)
    assert np.isrealobj(state)


def test_linear_solution_zero_control_after_law():
    """Test that the state drifts freely once the law has ended."""
    system = LinearSystem(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([0.0, 1.0]))
    state = linear_solution(system, ControlLaw.constant([1.0], 1.0), 2.0, [0.0, 0.0])
    assert np.allclose(state, [1.5, 1.0], atol=1e-12)
    with pytest.raises(DimensionMismatchError):
        linear_solution(system, ControlLaw.constant([1.0], 1.0), 1.0, [0.0])


def test_planar_drift_example():
    """Test the endpoint (1/3, 1) of ṗ₁ = p₂², ṗ₂ = u for u ≡ 1."""
    p1, p2 = r2_example(ControlLaw.constant([1.0], 1.0), 1.0)
    assert p1 == pytest.approx(1 / 3, abs=1e-9)
    assert p2 == pytest.approx(1.0, abs=1e-12)


def test_planar_drift_never_decreases_first_coordinate():
    """Test that 10⁴ random laws keep p₁ ≥ 0 from the origin."""
    endpoints = r2_random_endpoints(10_000, 4, 1.0, 1.0, seed=7)
    assert endpoints.shape == (10_000, 2)
    assert float(np.min(endpoints[:, 0])) >= 0.0


def test_reachable_samples_shrink_to_identity(driftless):
    """Test that short horizons only reach a neighbourhood of I."""
    samples = reachable_samples(driftless, 1e-6, count=50, segments=3, seed=3)
    assert len(samples) == 50
    assert max(frobenius_norm(u - np.eye(2)) for u in samples) <= 1e-5
    with pytest.raises(InvalidInputError):
        reachable_samples(driftless, 0.0, count=1, segments=1, seed=3)


def test_reachable_samples_are_deterministic(drifted):
    """Test that a seed fixes the samples."""
    first = reachable_samples(drifted, 1.0, count=5, segments=2, seed=11)
    second = reachable_samples(drifted, 1.0, count=5, segments=2, seed=11)
    assert all(np.array_equal(a, b) for a, b in zip(first, second))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_reachable_samples_grow_with_horizon(drifted, seed):
    """Test speed-limited samples and a best distance that never grows with T."""
    target = expm(SIGMA_Y)
    pool = []
    best = []
    for horizon in (0.5, 1.0, 2.0, 4.0):
        samples = reachable_samples(drifted, horizon, count=200, segments=4, seed=seed)
        # ‖σ_z + uσ_x‖₂ ≤ 1 for |u| ≤ 1
        assert all(np.linalg.norm(u - np.eye(2), ord=2) <= horizon + 1e-12 for u in samples)
        pool.extend(samples)
        best.append(min(frobenius_norm(u - target) for u in pool))
    assert all(later <= earlier for earlier, later in zip(best, best[1:]))


def test_min_time_identity_target(driftless):
    """Test that the identity is reached at time 0."""
    result = min_time_estimate(driftless, np.eye(2), eps=1e-3, budget=100, seed=1)
    assert result.reached and result.t_est == 0.0
    assert result.simulations == 0


def test_min_time_single_generator(driftless):
    """Test that expm(σ_x) needs time 1 with amplitude bound 1."""
    result = min_time_estimate(driftless, expm(1.0 * SIGMA_X), eps=1e-3, budget=5000, seed=1)
    assert result.reached
    assert 0.95 <= result.t_est <= 1.05
    assert result.achieved_error <= 1e-3
    assert result.law is not None and result.law.duration == pytest.approx(result.t_est)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_min_time_with_drift_is_bounded_away_from_zero(drifted, seed):
    """Test that a drift-required target is not reached in vanishing time."""
    result = min_time_estimate(drifted, expm(1.0 * SIGMA_Y), eps=1e-3, budget=2000, seed=seed)
    assert result.t_est >= 0.1
    assert result.simulations <= 2000 + 1


def test_min_time_larger_bound_is_not_slower():
    """Test that raising the amplitude bound does not increase the estimate."""
    target = expm(SIGMA_Z + 2 * SIGMA_X)
    slow = min_time_estimate(ControlSystem.build([SIGMA_X], drift=SIGMA_Z, bound=1.0),
                             target, eps=1e-3, budget=3000, seed=5)
    fast = min_time_estimate(ControlSystem.build([SIGMA_X], drift=SIGMA_Z, bound=4.0),
                             target, eps=1e-3, budget=3000, seed=5)
    assert fast.t_est <= slow.t_est


def test_min_time_argument_checks(driftless):
    """Test that unbounded systems and non-group targets are refused."""
    with pytest.raises(InvalidInputError):
        min_time_estimate(ControlSystem.build([SIGMA_X]), expm(SIGMA_X), eps=1e-3, budget=10, seed=1)
    with pytest.raises(InvariantViolationError):
        min_time_estimate(driftless, 2 * np.eye(2), eps=1e-3, budget=10, seed=1)
    with pytest.raises(InvalidInputError):
        min_time_estimate(driftless, expm(SIGMA_X), eps=0.0, budget=10, seed=1)


def test_adjoint_system_directions_stay_in_p():
    """Test that Ad_K(drift) stays in p with the drift's length."""
    pair = build_su2_pauli()
    system = ControlSystem.build([SIGMA_Z], drift=SIGMA_X)
    directions = adjoint_system_directions(system, pair, samples=20, seed=4)
    assert len(directions) == 20
    for direction in directions:
        assert pair.p.contains(direction)
        assert p_norm(direction, pair) == pytest.approx(1.0)


def test_adjoint_system_preconditions():
    """Test that the drift must lie in p and the controls must generate k."""
    pair = build_su2_pauli()
    with pytest.raises(InvariantViolationError, match="drift"):
        adjoint_system_directions(ControlSystem.build([SIGMA_Z], drift=SIGMA_Z), pair, 1, 0)
    with pytest.raises(InvariantViolationError, match="generate k"):
        adjoint_system_directions(ControlSystem.build([SIGMA_Y], drift=SIGMA_X), pair, 1, 0)
