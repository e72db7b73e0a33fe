"""Dense complex linear algebra: Hermitian eigensystems, unitary exponentials, brackets.

Every exponential in the package goes through the spectral route
``V diag(exp(-i t w)) V^dagger``; matrices are small, so there is no
Pade or scaling-and-squaring path.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-12

__all__ = [
    "HERMITIAN_TOL",
    "EigenSystem",
    "NotHermitianError",
    "anticommutator",
    "as_hermitian",
    "commutator",
    "dagger",
    "herm_eig",
    "max_asymmetry",
    "unitary_exp",
]


class NotHermitianError(ValueError):
    """Raised when a matrix tagged Hermitian fails the asymmetry check."""

    def __init__(self, asymmetry: float, tol: float):
        self.asymmetry = asymmetry
        self.tol = tol
        super().__init__(f"matrix is not Hermitian: max|A - A^dagger| = {asymmetry:.3e} > {tol:.1e}")


class EigenSystem(NamedTuple):
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.conj().T


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def max_asymmetry(a) -> float:
    a = _square(a)
    return float(np.max(np.abs(a - a.conj().T)))


def as_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``a`` as a complex array after checking ``max|a - a^dagger| <= tol``."""
    a = _square(a)
    asym = max_asymmetry(a)
    if asym > tol:
        raise NotHermitianError(asym, tol)
    return a


def herm_eig(a, tol: float = HERMITIAN_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    LAPACK ``zheevd`` (through :func:`numpy.linalg.eigh`) returns the
    eigenvalues in ascending order; degenerate eigenvectors come back in
    whatever order the solver found them.
    """
    a = as_hermitian(a, tol)
    w, v = np.linalg.eigh(a)
    return EigenSystem(w, v)


def unitary_exp(h, t: float, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """``exp(-i t h)`` for Hermitian ``h``."""
    w, v = herm_eig(h, tol)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = _square(a)
    b = _square(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def commutator(a, b) -> np.ndarray:
    a, b = _pair(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = _pair(a, b)
    return a @ b + b @ a
