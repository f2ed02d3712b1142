"""
Dense complex matrix primitives shared by every other module.

Group elements and Lie-algebra elements are both carried as square
``complex128`` NumPy arrays (``ComplexMatrix``). This module provides

* validation and the JSON matrix-literal format,
* the matrix exponential, with an exact-unitarity path for anti-Hermitian input,
* the Frobenius inner product, commutators and the rank of a matrix family,
* Haar sampling on SO(n) and SU(n).

All functions are pure; none of them mutates its arguments.
"""

import logging
from typing import Any, Dict, Sequence

import numpy as np
import numpy.typing as npt
import scipy.linalg

from modules.exceptions import (DimensionMismatchError, GridResolutionError,
                                InvalidInputError, SchemaError)

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
RealVector = npt.NDArray[np.float64]

DEFAULT_RANK_TOL = 1e-9
ANTI_HERMITIAN_FAST_PATH_TOL = 1e-13
LOG_STEP_LIMIT = 0.5


def as_matrix(data: Any) -> ComplexMatrix:
    """
    Convert array-like input into a validated square complex matrix.

    Args:
        data: Anything ``numpy.asarray`` accepts.

    Returns:
        A fresh ``complex128`` copy of the input.

    Raises:
        InvalidInputError: If the input is not square, is empty, or holds
            non-finite entries.
    """
    matrix = np.array(data, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise InvalidInputError(f"Expected a non-empty square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputError("Matrix has non-finite entries")
    return matrix


def dimension(matrix: ComplexMatrix) -> int:
    """Return the dimension n of an n×n matrix."""
    return int(matrix.shape[0])


def check_same_dimension(*matrices: ComplexMatrix) -> int:
    """
    Ensure all matrices share one dimension and return it.

    Raises:
        DimensionMismatchError: If two matrices differ in shape.
    """
    shapes = {m.shape for m in matrices}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"Dimension mismatch: {sorted(shapes)}")
    return int(matrices[0].shape[0])


def dagger(matrix: ComplexMatrix) -> ComplexMatrix:
    """Conjugate transpose."""
    return matrix.conj().T


def frobenius_norm(matrix: ComplexMatrix) -> float:
    """Frobenius norm ‖X‖_F."""
    return float(np.linalg.norm(matrix))


def frobenius_inner(x: ComplexMatrix, y: ComplexMatrix) -> float:
    """
    Real Frobenius inner product Re Tr(X†Y).

    Raises:
        DimensionMismatchError: If the operands differ in shape.
    """
    check_same_dimension(x, y)
    return float(np.real(np.vdot(x, y)))


def commutator(x: ComplexMatrix, y: ComplexMatrix) -> ComplexMatrix:
    """
    Matrix commutator [X, Y] = XY − YX.

    Raises:
        DimensionMismatchError: If the operands differ in shape.
    """
    check_same_dimension(x, y)
    return x @ y - y @ x


def is_anti_hermitian(matrix: ComplexMatrix, tol: float = 1e-10) -> bool:
    """True iff ‖X + X†‖_F ≤ tol·max(1, ‖X‖_F)."""
    return frobenius_norm(matrix + dagger(matrix)) <= tol * max(1.0, frobenius_norm(matrix))


def is_hermitian(matrix: ComplexMatrix, tol: float = 1e-10) -> bool:
    """True iff ‖X − X†‖_F ≤ tol·max(1, ‖X‖_F)."""
    return frobenius_norm(matrix - dagger(matrix)) <= tol * max(1.0, frobenius_norm(matrix))


def is_traceless(matrix: ComplexMatrix, tol: float = 1e-10) -> bool:
    """True iff |Tr X| ≤ tol·max(1, ‖X‖_F)."""
    return abs(np.trace(matrix)) <= tol * max(1.0, frobenius_norm(matrix))


def is_unitary(matrix: ComplexMatrix, tol: float = 1e-10) -> bool:
    """True iff ‖X†X − I‖_F ≤ tol."""
    identity = np.eye(dimension(matrix))
    return frobenius_norm(dagger(matrix) @ matrix - identity) <= tol


def unitarity_defect(matrix: ComplexMatrix) -> float:
    """‖X†X − I‖_F."""
    return frobenius_norm(dagger(matrix) @ matrix - np.eye(dimension(matrix)))


def vectorize(matrix: ComplexMatrix) -> RealVector:
    """
    Real coordinates of a matrix: row-major real parts followed by imaginary parts.

    The map is linear and injective, and the Euclidean dot product of two
    vectorizations equals ``frobenius_inner`` of the matrices.
    """
    return np.concatenate([matrix.real.ravel(), matrix.imag.ravel()])


def devectorize(vector: RealVector, n: int) -> ComplexMatrix:
    """Inverse of :func:`vectorize` for n×n matrices."""
    if vector.shape != (2 * n * n,):
        raise DimensionMismatchError(f"Expected a vector of length {2 * n * n}, got {vector.shape}")
    half = n * n
    return (vector[:half] + 1j * vector[half:]).reshape(n, n)


def expm(matrix: ComplexMatrix) -> ComplexMatrix:
    """
    Matrix exponential e^X.

    Anti-Hermitian input is exponentiated through a unitary eigendecomposition
    of the Hermitian matrix iX, so the result is unitary to rounding. Every
    other input goes through SciPy's scaling-and-squaring with the degree-13
    Padé approximant.

    Raises:
        InvalidInputError: If the matrix has non-finite entries.
    """
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputError("expm input has non-finite entries")
    if is_anti_hermitian(matrix, ANTI_HERMITIAN_FAST_PATH_TOL):
        hermitian = 0.5j * (matrix - dagger(matrix))
        eigenvalues, eigenvectors = np.linalg.eigh(hermitian)
        return (eigenvectors * np.exp(-1j * eigenvalues)) @ dagger(eigenvectors)
    return np.asarray(scipy.linalg.expm(matrix), dtype=np.complex128)


def logm_near_identity(ratio: ComplexMatrix) -> ComplexMatrix:
    """
    Principal logarithm of a group element close to the identity.

    Used for step ratios x_k⁻¹x_{k+1} of sampled trajectories.

    Raises:
        GridResolutionError: If ‖R − I‖₂ ≥ 0.5, where the principal branch is
            no longer a reliable estimate of the step.
    """
    offset = float(np.linalg.norm(ratio - np.eye(dimension(ratio)), ord=2))
    if offset >= LOG_STEP_LIMIT:
        raise GridResolutionError(
            f"Trajectory step too large for the logarithm (‖R − I‖ = {offset:.3g}); use a finer grid"
        )
    return np.asarray(scipy.linalg.logm(ratio), dtype=np.complex128)


def rank_of_family(matrices: Sequence[ComplexMatrix], tol: float = DEFAULT_RANK_TOL) -> int:
    """
    Rank of a family of matrices viewed as real vectors.

    A singular value counts iff σ_i > tol·σ_max.

    Args:
        matrices: Matrices of a common dimension. An empty family has rank 0.
        tol: Relative singular-value cutoff.

    Returns:
        The numerical rank.

    Raises:
        DimensionMismatchError: If the family mixes dimensions.
        InvalidInputError: If tol is not positive.
    """
    if not tol > 0:
        raise InvalidInputError(f"rank_of_family needs tol > 0, got {tol}")
    if len(matrices) == 0:
        return 0
    check_same_dimension(*matrices)
    stacked = np.stack([vectorize(m) for m in matrices])
    singular_values = np.linalg.svd(stacked, compute_uv=False)
    if singular_values[0] == 0.0:
        return 0
    return int(np.sum(singular_values > tol * singular_values[0]))


def haar_orthogonal(n: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
    """
    Haar-random element of SO(n).

    QR of a real Gaussian matrix with the R diagonal made positive, then one
    column flip if the determinant came out negative.
    """
    q, r = scipy.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def haar_special_unitary(n: int, rng: np.random.Generator) -> ComplexMatrix:
    """
    Haar-random element of SU(n).

    QR of a complex Ginibre matrix with the R-diagonal phases removed, then
    divided by an n-th root of its determinant.
    """
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = scipy.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    phase = np.angle(np.linalg.det(q))
    return q * np.exp(-1j * phase / n)


def matrix_from_literal(literal: Any) -> ComplexMatrix:
    """
    Parse the shared matrix literal ``{"n": int, "re": [[...]], "im": [[...]]}``.

    An omitted ``"im"`` means all zeros.

    Raises:
        SchemaError: If a field is missing or has the wrong shape.
        InvalidInputError: If an entry is non-finite.
    """
    if not isinstance(literal, dict):
        raise SchemaError("Matrix literal must be an object with 'n', 're' and optional 'im'")
    n = literal.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError("Matrix literal field 'n' must be a positive integer")
    try:
        real = np.array(literal["re"], dtype=np.float64)
        imag = np.array(literal.get("im", np.zeros((n, n))), dtype=np.float64)
    except KeyError as exc:
        raise SchemaError("Matrix literal is missing field 're'") from exc
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"Matrix literal entries must be numbers: {exc}") from exc
    for name, part in (("re", real), ("im", imag)):
        if part.shape != (n, n):
            raise SchemaError(f"Matrix literal field '{name}' must be {n}x{n}, got {part.shape}")
    return as_matrix(real + 1j * imag)


def matrix_to_literal(matrix: ComplexMatrix) -> Dict[str, Any]:
    """Serialize a matrix to the shared literal format."""
    return {
        "n": dimension(matrix),
        "re": matrix.real.tolist(),
        "im": matrix.imag.tolist(),
    }
