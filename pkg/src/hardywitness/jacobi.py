"""Cyclic Jacobi diagonalization for complex Hermitian matrices.

Each rotation annihilates one off-diagonal pair with a complex Givens
rotation; sweeps repeat until every off-diagonal magnitude drops below the
requested threshold.  Convergence is quadratic, so a handful of sweeps is
enough at the matrix sizes used here (Gram matrices of unit-norm states,
dimension well under 100).
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import DimensionMismatch, NumericalFailure

# Off-diagonal magnitudes below this count as converged.  The threshold is
# absolute and assumes unit-scale input (trace ~ 1), which holds for the
# Gram matrices this package feeds in.
DEFAULT_OFF_TOL = 1e-13
MAX_SWEEPS = 100


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Zero a[p, q] (and a[q, p]) in place; accumulate the rotation into v."""
    g = a[p, q]
    mag = abs(g)
    phase = cmath.exp(1j * cmath.phase(g))
    theta = 0.5 * math.atan2(2.0 * mag, a[p, p].real - a[q, q].real)
    c = math.cos(theta)
    s = math.sin(theta)
    # Rotation R restricted to (p, q): [[c, -s*phase], [s/phase, c]].
    col_p = a[:, p] * c + a[:, q] * (s / phase)
    col_q = a[:, p] * (-s * phase) + a[:, q] * c
    a[:, p] = col_p
    a[:, q] = col_q
    row_p = a[p, :] * c + a[q, :] * (s * phase)
    row_q = a[p, :] * (-s / phase) + a[q, :] * c
    a[p, :] = row_p
    a[q, :] = row_q
    # Exact by construction; drop the roundoff residue.
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    vp = v[:, p] * c + v[:, q] * (s / phase)
    vq = v[:, p] * (-s * phase) + v[:, q] * c
    v[:, p] = vp
    v[:, q] = vq


def hermitian_eigensystem(
    matrix, off_tol: float = DEFAULT_OFF_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and orthonormal eigenvectors of a Hermitian matrix.

    Returns ``(eigenvalues, vectors)`` with eigenvalues in diagonal order
    (unsorted) and eigenvectors as the columns of ``vectors``.  The caller is
    responsible for Hermiticity of the input.
    """
    a = np.array(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return np.array([a[0, 0].real]), v
    for _ in range(MAX_SWEEPS):
        off = float(np.max(np.abs(a - np.diag(np.diag(a)))))
        if off < off_tol:
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) >= off_tol:
                    _rotate(a, v, p, q)
    raise NumericalFailure(
        f"Jacobi diagonalization did not converge within {MAX_SWEEPS} sweeps"
    )
