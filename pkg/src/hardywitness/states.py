"""Dense complex state vectors, bipartitions, and local projections.

Amplitudes are stored flat in row-major order over the listed subsystem
dimensions.  All operations are pure: inputs are never mutated and returned
arrays are write-protected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadPartition, DimensionMismatch, ZeroVector

# Norms at or below this are treated as the zero vector.
ZERO_NORM_TOL = 1e-14
# Projection probabilities at or below this count as zero (no residual state).
PROJECTION_FLOOR = 1e-14


@dataclass(frozen=True)
class Bipartition:
    """Ordered two-way split of 0-based subsystem indices.

    The listed order of ``side1``/``side2`` fixes the row-major flattening
    used by :func:`reshape_bipartite`, so two bipartitions with the same
    index sets but different order are distinct objects on purpose.
    """

    side1: tuple[int, ...]
    side2: tuple[int, ...]

    def check(self, n_subsystems: int) -> None:
        if not self.side1 or not self.side2:
            raise BadPartition("both sides of a bipartition need at least one subsystem")
        if sorted(self.side1 + self.side2) != list(range(n_subsystems)):
            raise BadPartition(
                f"sides {self.side1}|{self.side2} do not partition "
                f"{n_subsystems} subsystems"
            )

    def swapped(self) -> "Bipartition":
        return Bipartition(self.side2, self.side1)


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state over subsystems of dimensions ``dims``."""

    dims: tuple[int, ...]
    amps: np.ndarray  # flat complex128, length prod(dims), unit norm


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def make_state(dims, amps) -> StateVector:
    """Validate and normalize raw amplitudes into a :class:`StateVector`."""
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 2 for d in dims):
        raise DimensionMismatch(f"every subsystem dimension must be >= 2, got {dims}")
    a = np.asarray(amps, dtype=np.complex128).reshape(-1)
    total = math.prod(dims)
    if a.size != total:
        raise DimensionMismatch(
            f"expected {total} amplitudes for dims {dims}, got {a.size}"
        )
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise DimensionMismatch("amplitudes must be finite")
    return normalize(StateVector(dims, a))


def norm(v: StateVector) -> float:
    return float(np.linalg.norm(v.amps))


def normalize(v: StateVector) -> StateVector:
    """Rescale to unit norm; raises :class:`ZeroVector` for null input."""
    n = np.linalg.norm(v.amps)
    if n <= ZERO_NORM_TOL:
        raise ZeroVector(f"cannot normalize a vector of norm {n:.3e}")
    return StateVector(v.dims, _freeze(v.amps / n))


def side_dimensions(v: StateVector, split: Bipartition) -> tuple[int, int]:
    split.check(len(v.dims))
    d1 = math.prod(v.dims[i] for i in split.side1)
    d2 = math.prod(v.dims[i] for i in split.side2)
    return d1, d2


def reshape_bipartite(v: StateVector, split: Bipartition) -> np.ndarray:
    """Coefficient matrix M with M[a, b] = amplitude of (a on side1, b on side2).

    Side indices are flattened row-major in the order the bipartition lists
    them.  The map is a pure index permutation: invertible and norm-preserving.
    """
    d1, d2 = side_dimensions(v, split)
    perm = split.side1 + split.side2
    tensor = v.amps.reshape(v.dims).transpose(perm)
    return np.ascontiguousarray(tensor).reshape(d1, d2)


def matrix_to_state(m: np.ndarray, split: Bipartition, dims: tuple[int, ...]) -> StateVector:
    """Inverse of :func:`reshape_bipartite`; assumes ``m`` already has unit norm."""
    split.check(len(dims))
    perm = split.side1 + split.side2
    inverse = np.argsort(perm)
    side_dims = tuple(dims[i] for i in perm)
    tensor = np.asarray(m, dtype=np.complex128).reshape(side_dims).transpose(inverse)
    return StateVector(tuple(dims), _freeze(np.ascontiguousarray(tensor).reshape(-1)))


def _check_side_vector(u, expected: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128).reshape(-1)
    if u.size != expected:
        raise DimensionMismatch(f"projector vector has length {u.size}, expected {expected}")
    return u


def apply_local_projector(
    v: StateVector, split: Bipartition, side: int, basis_vector
) -> tuple[float, StateVector | None]:
    """Project one side onto a unit vector.

    Returns ``(probability, residual)`` where the residual is the normalized
    post-projection state, or ``None`` when the probability is at the noise
    floor.
    """
    m = reshape_bipartite(v, split)
    d1, d2 = m.shape
    if side == 1:
        u = _check_side_vector(basis_vector, d1)
        w = u.conj() @ m  # unnormalized side-2 state given the side-1 outcome
        prob = float(np.vdot(w, w).real)
        if prob <= PROJECTION_FLOOR:
            return prob, None
        residual = np.outer(u, w) / math.sqrt(prob)
    elif side == 2:
        u = _check_side_vector(basis_vector, d2)
        z = m @ u.conj()
        prob = float(np.vdot(z, z).real)
        if prob <= PROJECTION_FLOOR:
            return prob, None
        residual = np.outer(z, u) / math.sqrt(prob)
    else:
        raise DimensionMismatch(f"side must be 1 or 2, got {side}")
    return prob, matrix_to_state(residual, split, v.dims)


def apply_local_complement(
    v: StateVector, split: Bipartition, side: int, basis_vectors
) -> tuple[float, StateVector | None]:
    """Project one side onto the orthogonal complement of a set of unit vectors.

    The complement projector is applied implicitly (never materialized), so
    the cost stays linear in the total dimension.
    """
    m = reshape_bipartite(v, split)
    d1, d2 = m.shape
    residual = m.copy()
    if side == 1:
        for u in basis_vectors:
            u = _check_side_vector(u, d1)
            residual -= np.outer(u, u.conj() @ m)
    elif side == 2:
        for u in basis_vectors:
            u = _check_side_vector(u, d2)
            residual -= np.outer(m @ u.conj(), u)
    else:
        raise DimensionMismatch(f"side must be 1 or 2, got {side}")
    prob = float(np.linalg.norm(residual) ** 2)
    if prob <= PROJECTION_FLOOR:
        return prob, None
    return prob, matrix_to_state(residual / math.sqrt(prob), split, v.dims)


def basis_state(dims, occupation) -> StateVector:
    """Computational basis state |occupation[0], occupation[1], ...>."""
    dims = tuple(int(d) for d in dims)
    occupation = tuple(int(k) for k in occupation)
    if len(occupation) != len(dims) or any(
        not 0 <= k < d for k, d in zip(occupation, dims)
    ):
        raise DimensionMismatch(f"occupation {occupation} invalid for dims {dims}")
    amps = np.zeros(math.prod(dims), dtype=np.complex128)
    flat = 0
    for k, d in zip(occupation, dims):
        flat = flat * d + k
    amps[flat] = 1.0
    return StateVector(dims, _freeze(amps))


def ghz_state(n_subsystems: int, dim: int = 2) -> StateVector:
    """Equal superposition of |k,k,...,k> over k < dim."""
    if n_subsystems < 2 or dim < 2:
        raise DimensionMismatch("GHZ needs at least two subsystems of dimension >= 2")
    dims = (dim,) * n_subsystems
    amps = np.zeros(dim**n_subsystems, dtype=np.complex128)
    step = (dim**n_subsystems - 1) // (dim - 1)
    amps[::step] = 1.0 / math.sqrt(dim)
    return StateVector(dims, _freeze(amps))
