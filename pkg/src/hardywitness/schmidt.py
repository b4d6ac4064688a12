"""Schmidt decomposition of pure states across arbitrary bipartitions.

The weights are the singular values of the reshaped coefficient matrix,
normalized so their squares sum to one.  Vectors follow a deterministic
phase convention so repeated runs (and golden files) are stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .jacobi import hermitian_eigensystem
from .states import Bipartition, StateVector, matrix_to_state, reshape_bipartite

# Singular values at or below this are dropped from the decomposition.
WEIGHT_FLOOR = 1e-12
# Gram eigenvalues at or below this are roundoff of an exact zero.  Working
# from M M^dagger caps the resolvable singular values at the square root of
# this floor; smaller true weights cannot be told apart from noise here.
GRAM_NOISE_FLOOR = 1e-13
# Singular values closer than this are treated as degenerate for ordering.
DEGENERACY_TOL = 1e-12
# Component magnitude that counts as "significant" when stabilizing the
# ordering inside a degenerate group.
SIGNIFICANT_COMPONENT = 1e-8


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Weights with paired orthonormal side vectors for one bipartition.

    ``weights`` are nonincreasing and strictly above :data:`WEIGHT_FLOOR`;
    ``left_vectors``/``right_vectors`` hold the side-1/side-2 vectors as
    columns, in the same order as the weights.
    """

    dims: tuple[int, ...]
    split: Bipartition
    weights: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.weights)


def _first_significant_index(column: np.ndarray) -> int:
    hits = np.flatnonzero(np.abs(column) > SIGNIFICANT_COMPONENT)
    return int(hits[0]) if hits.size else column.size


def _stable_order(weights: np.ndarray, vectors: np.ndarray) -> list[int]:
    """Nonincreasing weight order; ties broken by first significant component."""
    order = sorted(range(len(weights)), key=lambda i: -weights[i])
    result: list[int] = []
    group: list[int] = []
    for idx in order:
        if group and weights[group[0]] - weights[idx] > DEGENERACY_TOL:
            group.sort(key=lambda i: _first_significant_index(vectors[:, i]))
            result.extend(group)
            group = []
        group.append(idx)
    group.sort(key=lambda i: _first_significant_index(vectors[:, i]))
    result.extend(group)
    return result


def schmidt_decompose(v: StateVector, split: Bipartition) -> SchmidtDecomposition:
    """Decompose a normalized state across ``split``.

    Diagonalizes the side-1 Gram matrix M M^dagger with cyclic Jacobi
    rotations, takes the singular values as square roots of its eigenvalues,
    and recovers the side-2 vectors from the coefficient matrix.  Within each
    left vector the largest-magnitude component is made real and positive
    (ties to the lowest index); the compensating phase moves to the partner.
    """
    m = reshape_bipartite(v, split)
    gram = m @ m.conj().T
    eigvals, eigvecs = hermitian_eigensystem(gram)
    weights = np.sqrt(np.clip(eigvals, 0.0, None))
    order = [
        i
        for i in _stable_order(weights, eigvecs)
        if weights[i] > WEIGHT_FLOOR and eigvals[i] > GRAM_NOISE_FLOOR
    ]
    if not order:
        raise NumericalFailure("state has no Schmidt weight above the floor")
    w = weights[order]
    alphas = eigvecs[:, order].copy()
    betas = (m.T @ alphas.conj()) / w
    # Jacobi leaves the left vectors orthonormal to machine precision; the
    # right vectors inherit a residual of the off-diagonal threshold divided
    # by the weights, so polish them with modified Gram-Schmidt.
    for i in range(betas.shape[1]):
        for j in range(i):
            betas[:, i] -= np.vdot(betas[:, j], betas[:, i]) * betas[:, j]
        nrm = np.linalg.norm(betas[:, i])
        if nrm <= WEIGHT_FLOOR:
            raise NumericalFailure("right Schmidt vector collapsed during polish")
        betas[:, i] /= nrm
    for i in range(alphas.shape[1]):
        k = int(np.argmax(np.abs(alphas[:, i])))
        pivot = alphas[k, i]
        if abs(pivot) > 0.0:
            phase = pivot / abs(pivot)
            alphas[:, i] /= phase
            betas[:, i] *= phase
    alphas.setflags(write=False)
    betas.setflags(write=False)
    w.setflags(write=False)
    return SchmidtDecomposition(v.dims, split, w, alphas, betas)


def reconstruct(d: SchmidtDecomposition) -> StateVector:
    """Rebuild the state as the weighted sum of vector pairs (no renormalizing)."""
    m = (d.left_vectors * d.weights) @ d.right_vectors.T
    return matrix_to_state(m, d.split, d.dims)
