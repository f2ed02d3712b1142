"""
Cartan pairs g = k ⊕ p and the group factorizations built on them.

Three families are built in:

* ``su``        – su(n) with k = so(n), p = i·(traceless real symmetric),
                  h = i·(traceless real diagonal).
* ``su2_pauli`` – su(2) with k = span{σ_z}, p = span{σ_x, σ_y}, h = span{σ_x}.
* ``so_n1``     – so(n,1) with k = skew upper-left block, p = symmetric border,
                  h = the first border generator.

On top of a pair this module verifies the commutation relations, factors group
elements as k₁·exp(a)·k₂ (KAK) or k·exp(Y) (KP), enumerates Weyl orbits and
checks Kostant's convexity property by Monte-Carlo sampling.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from modules.exceptions import (DegeneracyError, DimensionMismatchError,
                                InvalidInputError, InvariantViolationError)
from modules.lie_algebra import (SIGMA_X, SIGMA_Y, SIGMA_Z, Subspace,
                                 killing_form, lie_closure)
from modules.linalg_core import (ComplexMatrix, as_matrix, commutator,
                                 expm, frobenius_norm, haar_orthogonal,
                                 matrix_to_literal, rank_of_family,
                                 unitarity_defect)
from modules.util import get_setting

logger = logging.getLogger(__name__)

CARTAN_TOL = get_setting("cartan_tol", 1e-12)
MEMBERSHIP_TOL = get_setting("membership_tol", 1e-10)
KAK_SU2_TOL = get_setting("kak_su2_tol", 1e-10)
KAK_SUN_TOL = get_setting("kak_sun_tol", 1e-8)
KAK_SUN_MAX_N = get_setting("kak_sun_max_n", 8)
KAK_SUN_RETRIES = get_setting("kak_sun_retries", 8)
KOSTANT_TOL = get_setting("kostant_tol", 1e-9)

# Below this modulus a KAK angle is undetermined and fixed by convention.
ANGLE_TIE_TOL = 1e-14
WEYL_DEDUP_TOL = 1e-12

FAMILIES = ("su", "su2_pauli", "so_n1")


def _unit(n: int, row: int, col: int) -> ComplexMatrix:
    matrix = np.zeros((n, n), dtype=np.complex128)
    matrix[row, col] = 1.0
    return matrix


def _lorentz_metric(n: int) -> npt.NDArray[np.float64]:
    return np.diag([1.0] * n + [-1.0])


@dataclass(frozen=True, eq=False)
class CartanPair:
    """
    A Cartan decomposition g = k ⊕ p with an optional Cartan subalgebra h ⊆ p.

    Attributes:
        ambient_n: Matrix dimension.
        k: The +1 eigenspace of the involution.
        p: The −1 eigenspace of the involution.
        h: Maximal abelian subalgebra inside p, when known.
        family: One of ``su``, ``su2_pauli``, ``so_n1``.
        metric_scale: The p-metric is ‖x‖_p² = metric_scale·frobenius_inner(x, x).
        involution: The Cartan involution θ.
    """

    ambient_n: int
    k: Subspace
    p: Subspace
    h: Optional[Subspace]
    family: str
    metric_scale: float
    involution: Callable[[ComplexMatrix], ComplexMatrix] = field(repr=False)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise InvalidInputError(f"Unknown Cartan family {self.family!r}; expected one of {FAMILIES}")
        for name, space in (("k", self.k), ("p", self.p), ("h", self.h)):
            if space is not None and space.ambient_n != self.ambient_n:
                raise DimensionMismatchError(
                    f"Subspace {name} lives in dimension {space.ambient_n}, pair in {self.ambient_n}"
                )

    @property
    def rank(self) -> int:
        """Dimension of h (0 when no Cartan subalgebra is attached)."""
        return self.h.dim if self.h is not None else 0

    def algebra(self) -> Subspace:
        """Orthonormal basis of k ⊕ p."""
        return Subspace.span(self.k.basis + self.p.basis, ambient_n=self.ambient_n)

    def in_group(self, g: ComplexMatrix, tol: float = MEMBERSHIP_TOL) -> bool:
        """Membership in the connected group G of the family (SU(n) or SO₀(n,1))."""
        if g.shape != (self.ambient_n, self.ambient_n):
            return False
        if self.family == "so_n1":
            if frobenius_norm(g.imag) > tol:
                return False
            real = g.real
            metric = _lorentz_metric(self.ambient_n - 1)
            lorentz_defect = float(np.linalg.norm(real.T @ metric @ real - metric))
            scale = max(1.0, float(np.linalg.norm(real)) ** 2)
            return bool(
                lorentz_defect <= tol * scale
                and abs(np.linalg.det(real) - 1.0) <= tol * scale
                and real[-1, -1] >= 1.0 - tol
            )
        return bool(unitarity_defect(g) <= tol and abs(np.linalg.det(g) - 1.0) <= tol)

    def in_subgroup(self, g: ComplexMatrix, tol: float = MEMBERSHIP_TOL) -> bool:
        """
        Membership in the subgroup K = exp(k).

        su: real orthogonal with unit determinant. su2_pauli: diagonal SU(2).
        so_n1: SO(n) in the upper-left block, 1 in the corner.
        """
        if g.shape != (self.ambient_n, self.ambient_n):
            return False
        if self.family == "su2_pauli":
            return bool(
                abs(g[0, 1]) <= tol
                and abs(g[1, 0]) <= tol
                and unitarity_defect(g) <= tol
                and abs(np.linalg.det(g) - 1.0) <= tol
            )
        if frobenius_norm(g.imag) > tol:
            return False
        real = g.real
        orthogonal = float(np.linalg.norm(real.T @ real - np.eye(self.ambient_n))) <= tol
        if not orthogonal or abs(np.linalg.det(real) - 1.0) > tol:
            return False
        if self.family == "so_n1":
            border = np.concatenate([real[-1, :-1], real[:-1, -1]])
            return bool(float(np.linalg.norm(border)) <= tol and abs(real[-1, -1] - 1.0) <= tol)
        return True

    def sample_subgroup(self, rng: np.random.Generator) -> ComplexMatrix:
        """Haar-random element of K."""
        if self.family == "su2_pauli":
            return expm(rng.uniform(0.0, 4 * np.pi) * SIGMA_Z)
        if self.family == "so_n1":
            n = self.ambient_n - 1
            element = np.eye(n + 1, dtype=np.complex128)
            element[:n, :n] = haar_orthogonal(n, rng)
            return element
        return haar_orthogonal(self.ambient_n, rng).astype(np.complex128)


def build_su_n(n: int) -> CartanPair:
    """
    Cartan pair su(n) = so(n) ⊕ i·Sym₀(n) with h = i·(traceless diagonal).

    Raises:
        InvalidInputError: If n < 2.
    """
    if n < 2:
        raise InvalidInputError(f"build_su_n needs n >= 2, got {n}")
    k_gens = [_unit(n, j, l) - _unit(n, l, j) for j in range(n) for l in range(j + 1, n)]
    p_gens = [1j * (_unit(n, j, l) + _unit(n, l, j)) for j in range(n) for l in range(j + 1, n)]
    h_gens = [1j * (_unit(n, j, j) - _unit(n, j + 1, j + 1)) for j in range(n - 1)]
    p_gens.extend(h_gens)
    return CartanPair(
        ambient_n=n,
        k=Subspace.span(k_gens, ambient_n=n),
        p=Subspace.span(p_gens, ambient_n=n),
        h=Subspace.span(h_gens, ambient_n=n),
        family="su",
        metric_scale=0.5,
        involution=lambda x: -x.T,
    )


def build_su2_pauli() -> CartanPair:
    """Cartan pair of su(2) with k = span{σ_z}, p = span{σ_x, σ_y}, h = span{σ_x}."""
    flip = np.diag([1.0, -1.0]).astype(np.complex128)
    return CartanPair(
        ambient_n=2,
        k=Subspace.span([SIGMA_Z]),
        p=Subspace.span([SIGMA_X, SIGMA_Y]),
        h=Subspace.span([SIGMA_X]),
        family="su2_pauli",
        metric_scale=2.0,
        involution=lambda x: flip @ x @ flip,
    )


def build_so_n1(n: int) -> CartanPair:
    """
    Cartan pair of so(n,1) = {A | AᵀJ + JA = 0}, J = diag(1, …, 1, −1).

    k holds the skew-symmetric upper-left n×n block, p the symmetric border
    generators E_{j,n} + E_{n,j}; h is spanned by the first border generator.

    Raises:
        InvalidInputError: If n < 2.
    """
    if n < 2:
        raise InvalidInputError(f"build_so_n1 needs n >= 2, got {n}")
    size = n + 1
    metric = _lorentz_metric(n).astype(np.complex128)
    k_gens = [_unit(size, j, l) - _unit(size, l, j) for j in range(n) for l in range(j + 1, n)]
    p_gens = [_unit(size, j, n) + _unit(size, n, j) for j in range(n)]
    return CartanPair(
        ambient_n=size,
        k=Subspace.span(k_gens, ambient_n=size),
        p=Subspace.span(p_gens, ambient_n=size),
        h=Subspace.span(p_gens[:1], ambient_n=size),
        family="so_n1",
        metric_scale=0.5,
        involution=lambda x: metric @ x @ metric,
    )


@dataclass
class ConditionResult:
    """One checked condition of a report."""

    condition: str
    residual: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"condition": self.condition, "residual": self.residual, "pass": self.passed}


@dataclass
class CartanReport:
    """Per-condition residuals of a Cartan pair."""

    family: str
    tol: float
    conditions: List[ConditionResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failed(self) -> List[str]:
        """Names of the conditions that did not pass."""
        return [c.condition for c in self.conditions if not c.passed]

    def residual(self, condition: str) -> float:
        for result in self.conditions:
            if result.condition == condition:
                return result.residual
        raise KeyError(condition)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "tol": self.tol,
            "pass": self.passed,
            "conditions": [c.to_dict() for c in self.conditions],
        }


def _max_bracket_defect(left: Subspace, right: Subspace, target: Subspace) -> float:
    defect = 0.0
    for x in left.basis:
        for y in right.basis:
            defect = max(defect, target.residual(commutator(x, y)))
    return defect


def verify_cartan(pair: CartanPair, tol: float = CARTAN_TOL) -> CartanReport:
    """
    Check the Cartan relations of a pair.

    Conditions: k ∩ p = {0}, [k,k] ⊆ k, [p,k] ⊆ p, [p,p] ⊆ k, Killing
    orthogonality of k and p, θ = +1 on k and −1 on p, and when h is present
    h ⊆ p and h abelian. Failures are report entries, never exceptions.

    Args:
        pair: The pair to check.
        tol: Pass threshold for every residual.
    """
    k, p = pair.k, pair.p
    results: List[Tuple[str, float]] = []

    overlap = k.dim + p.dim - rank_of_family(list(k.basis + p.basis))
    results.append(("k_p_independent", float(overlap)))
    results.append(("[k,k] in k", _max_bracket_defect(k, k, k)))
    results.append(("[p,k] in p", _max_bracket_defect(p, k, p)))
    results.append(("[p,p] in k", _max_bracket_defect(p, p, k)))

    # Killing form relative to the bracket closure so that a broken pair still
    # yields a number instead of a precondition error.
    enclosing = lie_closure(list(k.basis + p.basis), max_dim=2 * pair.ambient_n ** 2)
    killing = 0.0
    for x in k.basis:
        for y in p.basis:
            killing = max(killing, abs(killing_form(x, y, enclosing)))
    results.append(("killing_orthogonal", killing))

    results.append(("theta_k", max((frobenius_norm(pair.involution(x) - x) for x in k.basis), default=0.0)))
    results.append(("theta_p", max((frobenius_norm(pair.involution(x) + x) for x in p.basis), default=0.0)))

    if pair.h is not None:
        h = pair.h
        results.append(("h in p", max((p.residual(x) for x in h.basis), default=0.0)))
        abelian = 0.0
        for i, x in enumerate(h.basis):
            for y in h.basis[i + 1:]:
                abelian = max(abelian, frobenius_norm(commutator(x, y)))
        results.append(("h abelian", abelian))

    report = CartanReport(
        family=pair.family,
        tol=tol,
        conditions=[ConditionResult(name, value, value <= tol) for name, value in results],
    )
    if not report.passed:
        logger.info(f"Cartan check for {pair.family} failed: {report.failed()}")
    return report


@dataclass
class KAKFactors:
    """
    Factorization U = k1·a·k2 with k1, k2 ∈ K and a = exp(h_element), h_element ∈ h.

    ``angles`` is set for SU(2) only: (α, β, γ) with
    U = exp(ασ_z)·exp(βσ_x)·exp(γσ_z).
    """

    k1: ComplexMatrix
    a: ComplexMatrix
    k2: ComplexMatrix
    h_element: ComplexMatrix
    residual: float
    angles: Optional[Tuple[float, float, float]] = None

    def product(self) -> ComplexMatrix:
        return self.k1 @ self.a @ self.k2

    def to_dict(self) -> Dict[str, Any]:
        document: Dict[str, Any] = {
            "k1": matrix_to_literal(self.k1),
            "a": matrix_to_literal(self.a),
            "k2": matrix_to_literal(self.k2),
            "h_element": matrix_to_literal(self.h_element),
            "residual": self.residual,
        }
        if self.angles is not None:
            document["angles"] = {"alpha": self.angles[0], "beta": self.angles[1], "gamma": self.angles[2]}
        return document


def _require_special_unitary(u: ComplexMatrix, tol: float) -> None:
    defect = unitarity_defect(u)
    if defect > tol:
        raise InvariantViolationError(f"Input is not unitary (‖U†U − I‖ = {defect:.3g})")
    det_defect = abs(np.linalg.det(u) - 1.0)
    if det_defect > tol:
        raise InvariantViolationError(f"Input does not have unit determinant (|det U − 1| = {det_defect:.3g})")


def kak_su2(u: ComplexMatrix, tol: float = KAK_SU2_TOL) -> KAKFactors:
    """
    Closed-form KAK factorization U = exp(ασ_z)·exp(βσ_x)·exp(γσ_z) on SU(2).

    Writing U = [[μ, ν], [−ν̄, μ̄]]: β = 2·atan2(|ν|, |μ|) ∈ [0, π],
    α = arg μ + arg ν and γ = arg μ − arg ν. When |ν| or |μ| vanishes the split
    between α and γ is free; γ is then set to 0.

    Args:
        u: 2×2 special unitary matrix.
        tol: Unitarity and determinant tolerance.

    Raises:
        DimensionMismatchError: If ``u`` is not 2×2.
        InvariantViolationError: If ``u`` is not in SU(2).
    """
    u = as_matrix(u)
    if u.shape != (2, 2):
        raise DimensionMismatchError(f"kak_su2 needs a 2x2 matrix, got {u.shape}")
    _require_special_unitary(u, tol)

    mu, nu = u[0, 0], u[0, 1]
    beta = 2.0 * float(np.arctan2(abs(nu), abs(mu)))
    if abs(nu) <= ANGLE_TIE_TOL:
        alpha, gamma = 2.0 * float(np.angle(mu)), 0.0
    elif abs(mu) <= ANGLE_TIE_TOL:
        alpha, gamma = 2.0 * float(np.angle(nu)), 0.0
    else:
        alpha = float(np.angle(mu) + np.angle(nu))
        gamma = float(np.angle(mu) - np.angle(nu))

    k1 = expm(alpha * SIGMA_Z)
    a = expm(beta * SIGMA_X)
    k2 = expm(gamma * SIGMA_Z)
    residual = frobenius_norm(u - k1 @ a @ k2)
    return KAKFactors(k1=k1, a=a, k2=k2, h_element=beta * SIGMA_X, residual=residual,
                      angles=(alpha, beta, gamma))


def _is_diagonal(matrix: ComplexMatrix, tol: float) -> Tuple[bool, float]:
    off = matrix - np.diag(np.diag(matrix))
    defect = float(np.max(np.abs(off))) if off.size else 0.0
    return defect <= tol, defect


def kak_sun(
    u: ComplexMatrix,
    pair: Optional[CartanPair] = None,
    tol: float = KAK_SUN_TOL,
    seed: int = 0,
    retries: int = KAK_SUN_RETRIES,
) -> KAKFactors:
    """
    KAK factorization U = k1·exp(iD)·k2 on SU(n) with k1, k2 ∈ SO(n).

    The symmetric unitary M = U·Uᵀ has commuting real and imaginary parts, so
    one real orthogonal Q diagonalizes both; it is taken from the eigenvectors
    of Re M + r·Im M for a random r. Then k1 = Q, A = √(QᵀMQ) and
    k2 = A⁻¹·Qᵀ·U, which is real for any branch of the square root. One column
    of Q and one entry of A are flipped to put both factors in SO(n).

    Args:
        u: Element of SU(n), n ≤ ``kak_sun_max_n``.
        pair: ``build_su_n(n)``; built when omitted.
        tol: Unitarity and diagonalization tolerance.
        seed: Seed for the random mixing coefficients.
        retries: Number of mixing coefficients tried.

    Raises:
        InvariantViolationError: If ``u`` is not in SU(n) or ``pair`` does not match.
        InvalidInputError: If n exceeds the supported size.
        DegeneracyError: If no mixing coefficient diagonalizes M.
    """
    u = as_matrix(u)
    n = u.shape[0]
    if n < 2 or n > KAK_SUN_MAX_N:
        raise InvalidInputError(f"kak_sun supports 2 <= n <= {KAK_SUN_MAX_N}, got n = {n}")
    if pair is None:
        pair = build_su_n(n)
    if pair.family != "su" or pair.ambient_n != n:
        raise InvariantViolationError(f"kak_sun needs the su({n}) pair, got {pair.family} in dimension {pair.ambient_n}")
    _require_special_unitary(u, 1e-10)

    m = u @ u.T
    rng = np.random.default_rng(seed)
    diagnostics: List[Dict[str, Any]] = []
    q = None
    for attempt in range(retries):
        mix = float(rng.uniform(0.5, 2.0))
        _, candidate = np.linalg.eigh(m.real + mix * m.imag)
        diagonal, defect = _is_diagonal(candidate.T @ m @ candidate, tol)
        if diagonal:
            q = candidate
            break
        diagnostics.append({"attempt": attempt, "mix": mix, "off_diagonal": defect})
        logger.warning(f"kak_sun attempt {attempt}: off-diagonal residue {defect:.3g}, retrying")
    if q is None:
        raise DegeneracyError("Could not diagonalize U·Uᵀ by a real orthogonal matrix", diagnostics)

    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    eigenvalues = np.diag(q.T @ m @ q)
    roots = np.sqrt(eigenvalues / np.abs(eigenvalues))
    k2 = (q.T @ u) / roots[:, None]
    if np.linalg.det(k2.real) < 0:
        roots[0] = -roots[0]
        k2[0, :] = -k2[0, :]

    phases = np.angle(roots)
    phases[0] -= 2 * np.pi * np.round(np.sum(phases) / (2 * np.pi))
    h_element = 1j * np.diag(phases)
    a = np.diag(np.exp(1j * phases))
    k1 = q.astype(np.complex128)
    k2 = k2.real.astype(np.complex128)
    residual = frobenius_norm(u - k1 @ a @ k2)
    logger.debug(f"kak_sun n={n}: residual {residual:.3g}")
    return KAKFactors(k1=k1, a=a, k2=k2, h_element=h_element, residual=residual)


def conjugate_into_h(
    x: ComplexMatrix, pair: CartanPair, tol: float = 1e-8
) -> Tuple[ComplexMatrix, ComplexMatrix, float]:
    """
    Write X ∈ p as Ad_k(H) with k ∈ K and H ∈ h.

    su: eigendecomposition of −iX with a determinant-fixed orthogonal
    eigenbasis. Rank-one families: rotate the p-coordinates onto the first
    (h) direction.

    Returns:
        (k, H, ‖X − k·H·k⁻¹‖_F)

    Raises:
        InvariantViolationError: If X is not in p or the pair has no h.
    """
    x = as_matrix(x)
    if pair.h is None:
        raise InvariantViolationError("Pair has no Cartan subalgebra h")
    if not pair.p.contains(x, tol):
        raise InvariantViolationError("Precondition violated: X is not contained in p")

    if pair.family == "su":
        symmetric = (-1j * x).real
        symmetric = 0.5 * (symmetric + symmetric.T)
        eigenvalues, vectors = np.linalg.eigh(symmetric)
        if np.linalg.det(vectors) < 0:
            vectors[:, 0] = -vectors[:, 0]
        k = vectors.astype(np.complex128)
        h_element = 1j * np.diag(eigenvalues)
    elif pair.family == "su2_pauli":
        a = 2.0 * float(np.real(np.vdot(SIGMA_X, x)))
        b = 2.0 * float(np.real(np.vdot(SIGMA_Y, x)))
        k = expm(float(np.arctan2(b, a)) * SIGMA_Z)
        h_element = float(np.hypot(a, b)) * SIGMA_X
    else:
        n = pair.ambient_n - 1
        border = x.real[:n, n]
        length = float(np.linalg.norm(border))
        rotation = np.eye(n)
        if length > 0.0:
            q, _ = scipy.linalg.qr(border[:, None])
            if np.dot(q[:, 0], border) < 0:
                q[:, 0] = -q[:, 0]
            if np.linalg.det(q) < 0:
                q[:, -1] = -q[:, -1]
            rotation = q
        k = np.eye(n + 1, dtype=np.complex128)
        k[:n, :n] = rotation
        h_element = length * (_unit(n + 1, 0, n) + _unit(n + 1, n, 0))
    residual = frobenius_norm(x - k @ h_element @ np.linalg.inv(k))
    return k, h_element, residual


def _h_coordinates(x: ComplexMatrix, pair: CartanPair) -> npt.NDArray[np.float64]:
    if pair.family == "su":
        return np.diag(x).imag.copy()
    assert pair.h is not None
    return pair.h.coordinates(x)


def _require_in_h(x: ComplexMatrix, pair: CartanPair) -> None:
    if pair.h is None:
        raise InvariantViolationError("Pair has no Cartan subalgebra h")
    if x.shape != (pair.ambient_n, pair.ambient_n) or not pair.h.contains(x, MEMBERSHIP_TOL):
        raise InvariantViolationError("Precondition violated: X is not contained in h")


def weyl_orbit(x: ComplexMatrix, pair: CartanPair) -> List[ComplexMatrix]:
    """
    Weyl orbit h ∩ Ad_K(X) of X ∈ h.

    su: the distinct permutations of the diagonal (entries closer than 1e−12
    are treated as equal). Rank-one families: {X, −X}. X itself comes first.

    Raises:
        InvariantViolationError: If X is not in h.
    """
    x = as_matrix(x)
    _require_in_h(x, pair)
    if pair.family != "su":
        if frobenius_norm(x) <= WEYL_DEDUP_TOL:
            return [x]
        return [x, -x]

    diagonal = np.diag(x).imag
    labels: List[float] = []
    for value in diagonal:
        match = next((label for label in labels if abs(label - value) <= WEYL_DEDUP_TOL), None)
        labels.append(value if match is None else match)
    perms = dict.fromkeys(itertools.permutations(labels))
    return [1j * np.diag(np.array(perm)) for perm in perms]


def is_majorized(d: npt.ArrayLike, v: npt.ArrayLike, tol: float = KOSTANT_TOL) -> bool:
    """
    True iff d lies in the convex hull of the permutations of v.

    Decided by majorization: the sorted partial sums of d never exceed those
    of v and both totals agree, all up to tol·max(1, ‖v‖₁).
    """
    d = np.sort(np.asarray(d, dtype=np.float64))[::-1]
    v = np.sort(np.asarray(v, dtype=np.float64))[::-1]
    if d.shape != v.shape:
        raise DimensionMismatchError(f"Cannot compare vectors of shapes {d.shape} and {v.shape}")
    slack = tol * max(1.0, float(np.sum(np.abs(v))))
    if abs(float(np.sum(d) - np.sum(v))) > slack:
        return False
    return bool(np.all(np.cumsum(d)[:-1] <= np.cumsum(v)[:-1] + slack))


@dataclass
class KostantReport:
    """Outcome of a Monte-Carlo Kostant convexity check."""

    samples: int
    seed: int
    violations: List[Dict[str, Any]]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {"samples": self.samples, "seed": self.seed, "pass": self.passed, "violations": self.violations}


def kostant_check(
    x: ComplexMatrix,
    pair: CartanPair,
    samples: int,
    seed: int,
    tol: float = KOSTANT_TOL,
) -> KostantReport:
    """
    Check that the projection of Ad_k(X) onto h lies in the hull of the Weyl orbit.

    Draws ``samples`` Haar-random k ∈ K, projects Ad_k(X) orthogonally onto h
    and tests hull membership by majorization (su) or by the segment
    [−X, X] (rank-one families).

    Raises:
        InvariantViolationError: If X is not in h.
        InvalidInputError: If ``samples`` < 1.
    """
    x = as_matrix(x)
    _require_in_h(x, pair)
    if samples < 1:
        raise InvalidInputError("kostant_check needs at least one sample")
    reference = _h_coordinates(x, pair)
    rng = np.random.default_rng(seed)
    violations: List[Dict[str, Any]] = []
    for index in range(samples):
        k = pair.sample_subgroup(rng)
        projected = _h_coordinates(k @ x @ np.conj(k).T, pair)
        if pair.family == "su":
            inside = is_majorized(projected, reference, tol)
        else:
            inside = float(np.linalg.norm(projected)) <= float(np.linalg.norm(reference)) + tol
        if not inside:
            violations.append({"sample": index, "projection": projected.tolist()})
    if violations:
        logger.warning(f"Kostant check found {len(violations)} violations in {samples} samples")
    return KostantReport(samples=samples, seed=seed, violations=violations)


@dataclass
class KPFactors:
    """Factorization g = k·exp(Y) with k ∈ K and Y ∈ p."""

    k: ComplexMatrix
    y: ComplexMatrix
    residual: float
    y_in_p: float
    k_in_subgroup: bool

    @property
    def passed(self) -> bool:
        return self.residual <= KAK_SUN_TOL and self.y_in_p <= KAK_SUN_TOL and self.k_in_subgroup

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": matrix_to_literal(self.k),
            "y": matrix_to_literal(self.y),
            "residual": self.residual,
            "y_in_p": self.y_in_p,
            "k_in_subgroup": self.k_in_subgroup,
            "pass": self.passed,
        }


def verify_kp_decomposition(g: ComplexMatrix, pair: CartanPair) -> KPFactors:
    """
    Factor g = k·exp(Y) with k ∈ K, Y ∈ p and report the reconstruction residual.

    su: from kak_sun, k = k1·k2 and Y = k2ᵀ·(iD)·k2. su2_pauli: from kak_su2,
    k = exp((α+γ)σ_z) and Y = Ad_{exp(−γσ_z)}(βσ_x). so_n1: polar
    decomposition, Y the logarithm of the symmetric positive factor.

    Raises:
        InvariantViolationError: If g is not in the group of the pair.
    """
    g = as_matrix(g)
    if not pair.in_group(g, 1e-8):
        raise InvariantViolationError(f"Input is not an element of the {pair.family} group")

    if pair.family == "su":
        factors = kak_sun(g, pair)
        k = factors.k1 @ factors.k2
        y = factors.k2.T @ factors.h_element @ factors.k2
    elif pair.family == "su2_pauli":
        factors = kak_su2(g, tol=1e-8)
        assert factors.angles is not None
        alpha, beta, gamma = factors.angles
        k = expm((alpha + gamma) * SIGMA_Z)
        rotation = expm(-gamma * SIGMA_Z)
        y = rotation @ (beta * SIGMA_X) @ np.conj(rotation).T
    else:
        orthogonal, positive = scipy.linalg.polar(g.real, side="right")
        eigenvalues, vectors = np.linalg.eigh(0.5 * (positive + positive.T))
        k = orthogonal.astype(np.complex128)
        y = ((vectors * np.log(eigenvalues)) @ vectors.T).astype(np.complex128)

    residual = frobenius_norm(g - k @ expm(y))
    return KPFactors(
        k=k,
        y=y,
        residual=residual,
        y_in_p=pair.p.residual(y),
        k_in_subgroup=pair.in_subgroup(k, 1e-8),
    )
