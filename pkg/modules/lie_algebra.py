"""
Lie-algebraic structure on matrix subspaces.

This module provides the :class:`Subspace` type (an orthonormal basis of
matrices under the real Frobenius inner product) and the operations built on
it:

* ``lie_closure`` – the smallest bracket-closed subspace containing a set of
  generators, computed by a worklist of brackets.
* ``is_controllable_rank`` – the Lie-algebra rank (Hörmander) condition.
* ``ad_matrix`` / ``killing_form`` – the adjoint representation and the
  Killing form relative to an explicit bracket-closed basis.
* ``adjoint_action`` – conjugation g X g⁻¹.

Generators are accepted as anti-Hermitian matrices; converting from the
Hermitian −iH convention is the caller's job.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from modules.exceptions import (ClosureDiagnosticsError, InvalidInputError,
                                InvariantViolationError, SingularMatrixError)
from modules.linalg_core import (DEFAULT_RANK_TOL, ComplexMatrix, as_matrix,
                                 check_same_dimension, commutator, dagger,
                                 devectorize, frobenius_norm, is_unitary,
                                 vectorize)

logger = logging.getLogger(__name__)

# Pauli generators in the displayed anti-Hermitian convention:
# [σ_x, σ_y] = σ_z, [σ_y, σ_z] = σ_x, [σ_z, σ_x] = σ_y.
SIGMA_X = np.array([[0, 1], [-1, 0]], dtype=np.complex128) / 2
SIGMA_Y = np.array([[0, 1j], [1j, 0]], dtype=np.complex128) / 2
SIGMA_Z = np.array([[1j, 0], [0, -1j]], dtype=np.complex128) / 2

DEFAULT_MAX_ITERATIONS = 64
CONTAINMENT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Subspace:
    """
    A real linear subspace of n×n complex matrices.

    Attributes:
        ambient_n: Matrix dimension n.
        basis: Basis matrices, orthonormal under ``frobenius_inner``.
    """

    ambient_n: int
    basis: Tuple[ComplexMatrix, ...]

    @classmethod
    def span(
        cls,
        matrices: Sequence[ComplexMatrix],
        ambient_n: int | None = None,
        tol: float = DEFAULT_RANK_TOL,
    ) -> "Subspace":
        """
        Orthonormalize a family of matrices into a subspace.

        Args:
            matrices: Spanning family; dependent members are dropped.
            ambient_n: Required when ``matrices`` is empty.
            tol: Relative residual below which a member counts as dependent.
        """
        if ambient_n is None:
            if not matrices:
                raise InvalidInputError("ambient_n is required to span an empty family")
            ambient_n = int(matrices[0].shape[0])
        subspace = cls(ambient_n=ambient_n, basis=())
        subspace, _ = subspace.extend(matrices, tol=tol)
        return subspace

    @property
    def dim(self) -> int:
        """Number of basis elements."""
        return len(self.basis)

    @cached_property
    def _frame(self) -> npt.NDArray[np.float64]:
        if not self.basis:
            return np.zeros((0, 2 * self.ambient_n ** 2))
        return np.stack([vectorize(b) for b in self.basis])

    def extend(
        self,
        matrices: Sequence[ComplexMatrix],
        tol: float = DEFAULT_RANK_TOL,
    ) -> Tuple["Subspace", List[ComplexMatrix]]:
        """
        Add matrices by modified Gram–Schmidt with one re-orthogonalization pass.

        Returns:
            The enlarged subspace and the list of newly added basis elements.
        """
        frame = [row for row in self._frame]
        added: List[ComplexMatrix] = []
        for matrix in matrices:
            if matrix.shape != (self.ambient_n, self.ambient_n):
                raise InvalidInputError(
                    f"Expected {self.ambient_n}x{self.ambient_n} matrices, got {matrix.shape}"
                )
            if not np.all(np.isfinite(matrix)):
                raise InvalidInputError("Subspace member has non-finite entries")
            vector = vectorize(matrix)
            original_norm = float(np.linalg.norm(vector))
            if original_norm == 0.0:
                continue
            for _ in range(2):
                for q in frame:
                    vector = vector - np.dot(q, vector) * q
            residual = float(np.linalg.norm(vector))
            if residual <= tol * max(1.0, original_norm):
                continue
            vector = vector / residual
            frame.append(vector)
            added.append(devectorize(vector, self.ambient_n))
        return Subspace(self.ambient_n, self.basis + tuple(added)), added

    def coordinates(self, x: ComplexMatrix) -> npt.NDArray[np.float64]:
        """Coordinates of the orthogonal projection of ``x`` in this basis."""
        if x.shape != (self.ambient_n, self.ambient_n):
            raise InvalidInputError(f"Expected {self.ambient_n}x{self.ambient_n} matrix, got {x.shape}")
        if not self.basis:
            return np.zeros(0)
        return self._frame @ vectorize(x)

    def project(self, x: ComplexMatrix) -> ComplexMatrix:
        """Orthogonal projection of ``x`` onto the subspace."""
        coords = self.coordinates(x)
        if coords.size == 0:
            return np.zeros_like(x, dtype=np.complex128)
        return devectorize(coords @ self._frame, self.ambient_n)

    def residual(self, x: ComplexMatrix) -> float:
        """‖x − projection(x)‖_F."""
        return frobenius_norm(x - self.project(x))

    def contains(self, x: ComplexMatrix, tol: float = CONTAINMENT_TOL) -> bool:
        """True iff ‖x − projection(x)‖_F ≤ tol·max(1, ‖x‖_F)."""
        return self.residual(x) <= tol * max(1.0, frobenius_norm(x))

    def gram_defect(self) -> float:
        """Max-norm distance of the basis Gram matrix from the identity."""
        if not self.basis:
            return 0.0
        gram = self._frame @ self._frame.T
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    @cached_property
    def bracket_defect(self) -> float:
        """Largest projection defect of a pairwise basis bracket."""
        defect = 0.0
        for i, left in enumerate(self.basis):
            for right in self.basis[i + 1:]:
                defect = max(defect, self.residual(commutator(left, right)))
        return defect

    def is_bracket_closed(self, tol: float = CONTAINMENT_TOL) -> bool:
        """True iff every pairwise basis bracket stays inside the subspace."""
        return self.bracket_defect <= tol


def su_basis(n: int) -> Subspace:
    """
    Orthonormal basis of su(n): symmetric and antisymmetric off-diagonal
    generators followed by the diagonal generalized Gell-Mann generators.
    """
    if n < 1:
        raise InvalidInputError("su(n) needs n >= 1")
    elements: List[ComplexMatrix] = []
    for j in range(n):
        for k in range(j + 1, n):
            symmetric = np.zeros((n, n), dtype=np.complex128)
            symmetric[j, k] = symmetric[k, j] = 1j / np.sqrt(2)
            antisymmetric = np.zeros((n, n), dtype=np.complex128)
            antisymmetric[j, k] = 1 / np.sqrt(2)
            antisymmetric[k, j] = -1 / np.sqrt(2)
            elements.extend([antisymmetric, symmetric])
    for level in range(1, n):
        diagonal = np.zeros(n)
        diagonal[:level] = 1.0
        diagonal[level] = -level
        elements.append(1j * np.diag(diagonal) / np.sqrt(level * (level + 1)))
    return Subspace.span(elements, ambient_n=n)


def lie_closure(
    generators: Sequence[ComplexMatrix],
    max_dim: int,
    tol: float = DEFAULT_RANK_TOL,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> Subspace:
    """
    Smallest bracket-closed subspace containing the generators.

    Each round brackets the elements added in the previous round against the
    whole current basis and orthonormalizes the results into the basis. The
    loop stops when a round adds nothing or the dimension reaches ``max_dim``.

    Args:
        generators: Non-empty list of matrices of a common dimension.
        max_dim: Dimension at which to stop early (n²−1 for su(n)).
        tol: Relative Gram–Schmidt drop tolerance.
        max_iterations: Round cap.

    Returns:
        The closure as an orthonormal :class:`Subspace`.

    Raises:
        InvalidInputError: If the generator list is empty or non-finite.
        ClosureDiagnosticsError: If the dimension does not stabilize within
            ``max_iterations`` rounds.
    """
    if len(generators) == 0:
        raise InvalidInputError("lie_closure needs at least one generator")
    if max_dim < 1:
        raise InvalidInputError("max_dim must be at least 1")
    mats = [as_matrix(g) for g in generators]
    n = check_same_dimension(*mats)

    closure, frontier = Subspace(n, ()).extend(mats, tol=tol)
    dims = [closure.dim]
    for iteration in range(max_iterations):
        if not frontier or closure.dim >= max_dim:
            logger.debug(f"Closure stabilized at dim {closure.dim} after {iteration} rounds")
            return closure
        brackets = [commutator(new, old) for new in frontier for old in closure.basis]
        closure, frontier = closure.extend(brackets, tol=tol)
        dims.append(closure.dim)
        logger.debug(f"Closure round {iteration + 1}: dim {closure.dim}, {len(frontier)} new")
    if not frontier or closure.dim >= max_dim:
        return closure
    raise ClosureDiagnosticsError(
        f"Bracket closure did not stabilize within {max_iterations} rounds", dims
    )


def is_controllable_rank(generators: Sequence[ComplexMatrix], ambient_dim: int) -> bool:
    """
    Lie-algebra rank condition: the generators' closure fills the ambient algebra.

    Args:
        generators: Anti-Hermitian generators.
        ambient_dim: Dimension of the ambient algebra (n²−1 for su(n)).
    """
    return lie_closure(generators, max_dim=ambient_dim).dim == ambient_dim


def _require_in_closed_basis(x: ComplexMatrix, basis: Subspace, tol: float) -> None:
    if not basis.contains(x, tol):
        raise InvariantViolationError("Precondition violated: X is not contained in span(basis)")
    if not basis.is_bracket_closed(tol):
        raise InvariantViolationError("Precondition violated: basis is not bracket-closed")


def ad_matrix(x: ComplexMatrix, basis: Subspace, tol: float = CONTAINMENT_TOL) -> npt.NDArray[np.float64]:
    """
    Matrix of Y ↦ [X, Y] in an orthonormal bracket-closed basis.

    Column j holds the coordinates of [X, b_j].

    Raises:
        InvariantViolationError: If X is outside span(basis) or the basis is
            not bracket-closed.
    """
    _require_in_closed_basis(x, basis, tol)
    if basis.dim == 0:
        return np.zeros((0, 0))
    return np.column_stack([basis.coordinates(commutator(x, b)) for b in basis.basis])


def killing_form(x: ComplexMatrix, y: ComplexMatrix, basis: Subspace) -> float:
    """Killing form B(X, Y) = Tr(ad X ∘ ad Y) relative to ``basis``."""
    return float(np.trace(ad_matrix(x, basis) @ ad_matrix(y, basis)))


def killing_su_identity_defect(x: ComplexMatrix, y: ComplexMatrix, n: int) -> float:
    """|B(X, Y) − 2n·Re Tr(XY)| on su(n)."""
    return abs(killing_form(x, y, su_basis(n)) - 2 * n * float(np.real(np.trace(x @ y))))


def adjoint_action(g: ComplexMatrix, x: ComplexMatrix) -> ComplexMatrix:
    """
    Conjugation Ad_g(X) = g X g⁻¹.

    Unitary g is inverted by its adjoint; any other g by a linear solve.

    Raises:
        SingularMatrixError: If g is numerically singular.
        DimensionMismatchError: If the shapes differ.
    """
    check_same_dimension(g, x)
    if is_unitary(g, 1e-12):
        return g @ x @ dagger(g)
    if np.linalg.cond(g) > 1e12:
        raise SingularMatrixError("Ad_g needs an invertible g")
    return np.linalg.solve(g.T, (g @ x).T).T
