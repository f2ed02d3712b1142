"""
Literal-versus-oracle comparisons of the published formulas.

Every entry evaluates a printed formula as written ("literal") next to an
independent numerical value ("oracle") and records the largest deviation.
Verdicts are derived from the numbers, never asserted.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List

import numpy as np

from modules.cartan import build_so_n1, build_su2_pauli, build_su_n, verify_cartan
from modules.control_systems import (ControlLaw, ng_convergence_order,
                                     r2_example, r2_random_endpoints)
from modules.geodesics import (geodesic_trajectory, horizontal_length,
                               so21_geodesic_point, su2_geodesic_closed_form,
                               su2_geodesic_spec, uniform_grid)
from modules.lie_algebra import (SIGMA_X, SIGMA_Y, SIGMA_Z, killing_form,
                                 killing_su_identity_defect, su_basis)
from modules.linalg_core import (ComplexMatrix, commutator, expm,
                                 frobenius_norm)
from modules.util import get_setting

logger = logging.getLogger(__name__)

MATCH = "match"
DEVIATION = "transcription-deviation"

FORMULA_MATCH_TOL = get_setting("formula_match_tol", 1e-9)

THETAS = (0.0, 0.7, 2.0, -1.3)
CS = (0.0, 0.5, 1.3, -2.0)
TIMES = (0.3, 1.0, 2.1, 4.0)


@dataclass
class DiscrepancyEntry:
    """One printed formula checked against its oracle."""

    section: str
    formula: str
    literal: Any
    oracle: Any
    deviation: float
    tol: float

    @property
    def verdict(self) -> str:
        return MATCH if self.deviation <= self.tol else DEVIATION

    def to_dict(self) -> Dict[str, Any]:
        return {
            "section": self.section,
            "formula": self.formula,
            "literal": self.literal,
            "oracle": self.oracle,
            "deviation": self.deviation,
            "tol": self.tol,
            "verdict": self.verdict,
        }


def _pauli_entries() -> List[DiscrepancyEntry]:
    relations = [
        ("[σ_x, σ_y] = σ_z", SIGMA_X, SIGMA_Y, SIGMA_Z),
        ("[σ_y, σ_z] = σ_x", SIGMA_Y, SIGMA_Z, SIGMA_X),
        ("[σ_z, σ_x] = σ_y", SIGMA_Z, SIGMA_X, SIGMA_Y),
    ]
    return [
        DiscrepancyEntry("pauli_commutation", formula, "right-hand side", "computed bracket",
                         frobenius_norm(commutator(left, right) - expected), 1e-15)
        for formula, left, right, expected in relations
    ]


def _second_order_coefficient(o1: ComplexMatrix, o2: ComplexMatrix, dt: float) -> ComplexMatrix:
    def scaled(delta: float) -> ComplexMatrix:
        product = expm(o2 * delta) @ expm(o1 * delta) @ expm(-o2 * delta) @ expm(-o1 * delta)
        return (product - np.eye(o1.shape[0])) / delta ** 2

    return 2 * scaled(dt / 2) - scaled(dt)


def _commutator_generation_entries() -> List[DiscrepancyEntry]:
    # With o_j = iH_j the printed product is exp(o2 δ)exp(o1 δ)exp(−o2 δ)exp(−o1 δ).
    o1, o2 = SIGMA_X, SIGMA_Y
    estimate = _second_order_coefficient(o1, o2, 1e-3)
    bracket = commutator(o1, o2)
    scale = frobenius_norm(bracket)
    entries = [
        DiscrepancyEntry("commutator_generation", "U(δt) ≈ I − δt²[iH₁, iH₂]", "−[o1, o2]",
                         "Richardson estimate of (U − I)/δt²",
                         frobenius_norm(estimate + bracket) / scale, 1e-5),
        DiscrepancyEntry("commutator_generation", "U(δt) ≈ I + δt²[iH₁, iH₂]", "+[o1, o2]",
                         "Richardson estimate of (U − I)/δt²",
                         frobenius_norm(estimate - bracket) / scale, 1e-5),
    ]
    order = ng_convergence_order(o1, o2)
    entries.append(DiscrepancyEntry("commutator_generation", "residual = O(δt³)", 3.0, order,
                                    abs(order - 3.0), 0.3))
    return entries


def _grid_max(function: Callable[[float, float, float], float]) -> float:
    return max(function(theta, c, t) for theta, c, t in itertools.product(THETAS, CS, TIMES))


def _mu_nu_entries() -> List[DiscrepancyEntry]:
    def term(pick: Callable[[complex, complex], float]) -> Callable[[float, float, float], float]:
        def deviation(theta: float, c: float, t: float) -> float:
            literal = su2_geodesic_closed_form(theta, c, t, literal=True)
            oracle = su2_geodesic_closed_form(theta, c, t)
            return abs(pick(*literal) - pick(*oracle))
        return deviation

    entries = [
        DiscrepancyEntry("su2_geodesic", "Re μ", "printed expression", "two-exponential product",
                         _grid_max(term(lambda mu, nu: mu.real)), FORMULA_MATCH_TOL),
        DiscrepancyEntry("su2_geodesic", "Im μ", "printed expression", "two-exponential product",
                         _grid_max(term(lambda mu, nu: mu.imag)), FORMULA_MATCH_TOL),
        DiscrepancyEntry("su2_geodesic", "Re ν", "printed expression", "two-exponential product",
                         _grid_max(term(lambda mu, nu: nu.real)), FORMULA_MATCH_TOL),
        DiscrepancyEntry("su2_geodesic", "Im ν", "printed expression", "two-exponential product",
                         _grid_max(term(lambda mu, nu: nu.imag)), FORMULA_MATCH_TOL),
    ]

    def c_zero(theta: float, _c: float, t: float) -> float:
        mu, nu = su2_geodesic_closed_form(theta, 0.0, t)
        expected = (math.cos(t / 2), complex(math.cos(theta), math.sin(theta)) * math.sin(t / 2))
        return max(abs(mu - expected[0]), abs(nu - expected[1]))

    def sphere(theta: float, c: float, t: float) -> float:
        mu, nu = su2_geodesic_closed_form(theta, c, t)
        return abs(abs(mu) ** 2 + abs(nu) ** 2 - 1.0)

    entries.append(DiscrepancyEntry("su2_geodesic", "c = 0: (cos(t/2), e^{iθ} sin(t/2))",
                                    "closed form", "two-exponential product", _grid_max(c_zero), 1e-12))
    entries.append(DiscrepancyEntry("su2_geodesic", "|μ|² + |ν|² = 1", 1.0, "two-exponential product",
                                    _grid_max(sphere), 1e-12))
    return entries


def _lorentz_entry() -> DiscrepancyEntry:
    # Same geodesics would mean the SO₀(2,1) trace equals the SU(2) adjoint character 4(Re μ)² − 1.
    def deviation(theta: float, c: float, t: float) -> float:
        mu, _ = su2_geodesic_closed_form(theta, -c, t)
        lorentz_trace = float(np.trace(so21_geodesic_point(theta, c, t)).real)
        return abs(lorentz_trace - (4 * mu.real ** 2 - 1))

    return DiscrepancyEntry("so21_geodesic", "SO₀(2,1) geodesics equal the SU(2) geodesics",
                            "SU(2) adjoint character", "trace of the SO₀(2,1) geodesic",
                            _grid_max(deviation), FORMULA_MATCH_TOL)


def _arclength_entry() -> DiscrepancyEntry:
    horizon = 2.0
    spec = su2_geodesic_spec(0.7, 1.3)
    length = horizontal_length(geodesic_trajectory(spec, uniform_grid(horizon, 1000)), spec.pair)
    return DiscrepancyEntry("geodesic_arclength", "ℓ(x|[0,T]) = T for ‖A_p‖ = 1", horizon, length,
                            abs(length - horizon), 1e-4)


def _cartan_entries() -> List[DiscrepancyEntry]:
    pairs = [build_so_n1(n) for n in range(2, 6)] + [build_su_n(n) for n in range(2, 5)] + [build_su2_pauli()]
    entries = []
    for pair in pairs:
        report = verify_cartan(pair)
        worst = max(c.residual for c in report.conditions)
        entries.append(DiscrepancyEntry("cartan", f"{pair.family}(n={pair.ambient_n}) is a Cartan pair",
                                        "all relations hold", "largest residual", worst, 1e-12))
    return entries


def _planar_entries(seed: int) -> List[DiscrepancyEntry]:
    p1, p2 = r2_example(ControlLaw.constant([1.0], 1.0), 1.0)
    endpoints = r2_random_endpoints(10_000, 4, 1.0, 1.0, seed)
    return [
        DiscrepancyEntry("planar_drift", "u ≡ 1, T = 1 ⇒ (1/3, 1)", [1 / 3, 1.0], [p1, p2],
                         max(abs(p1 - 1 / 3), abs(p2 - 1.0)), 1e-6),
        DiscrepancyEntry("planar_drift", "reachable set ⊆ {s₁ ≥ 0} from (0, 0)", 0.0,
                         float(np.min(endpoints[:, 0])), max(0.0, -float(np.min(endpoints[:, 0]))), 0.0),
    ]


def _killing_entries(seed: int) -> List[DiscrepancyEntry]:
    basis = su_basis(2)
    entries = [DiscrepancyEntry("killing_form", "B(σ_z, σ_z) = −2", -2.0,
                                killing_form(SIGMA_Z, SIGMA_Z, basis),
                                abs(killing_form(SIGMA_Z, SIGMA_Z, basis) + 2.0), 1e-12)]
    rng = np.random.default_rng(seed)
    for n in (2, 3):
        algebra = su_basis(n)
        worst = 0.0
        for _ in range(5):
            x = sum(rng.standard_normal() * b for b in algebra.basis)
            y = sum(rng.standard_normal() * b for b in algebra.basis)
            worst = max(worst, killing_su_identity_defect(x, y, n))
        entries.append(DiscrepancyEntry("killing_form", f"B(X, Y) = 2n·Re Tr(XY) on su({n})",
                                        "2n·Re Tr(XY)", "trace of ad X ∘ ad Y", worst, 1e-8))
    return entries


def build_discrepancy_report(seed: int) -> List[DiscrepancyEntry]:
    """Run every built-in comparison; ``seed`` drives the randomized sections."""
    entries = (
        _pauli_entries()
        + _commutator_generation_entries()
        + _mu_nu_entries()
        + [_lorentz_entry(), _arclength_entry()]
        + _cartan_entries()
        + _planar_entries(seed)
        + _killing_entries(seed)
    )
    deviations = [e for e in entries if e.verdict == DEVIATION]
    logger.info(f"Checked {len(entries)} formulas, {len(deviations)} deviations")
    return entries
