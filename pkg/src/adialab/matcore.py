"""Dense complex linear algebra for small Hermitian systems.

Matrices are square ``complex128`` numpy arrays, states are 1-d
``complex128`` arrays. Everything is sized for desk-scale problems
(dimension <= 16 or so); nothing here is sparse or blocked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotNormalized, NumericalFailure

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "EigenDecomposition",
    "eig_hermitian",
    "exp_i_hermitian",
    "fix_phase",
    "is_hermitian",
    "max_abs",
    "operator_norm",
    "projector",
    "require_hermitian",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

HERMITICITY_TOL = 1e-12
PHASE_PIVOT_TOL = 1e-12


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(np.float64))):
        raise ValueError("matrix has non-finite entries")
    return a


def max_abs(a: np.ndarray) -> float:
    """Largest entry magnitude, max_ij |a_ij|."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    """True when max|A - A^dag| <= tol * max(1, max|A|)."""
    a = np.asarray(a, dtype=complex)
    return max_abs(a - a.conj().T) <= tol * max(1.0, max_abs(a))


def require_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL, what: str = "matrix") -> np.ndarray:
    """Validate Hermiticity, returning the array; raises NotHermitian."""
    a = _as_square(a)
    dev = max_abs(a - a.conj().T)
    if dev > tol * max(1.0, max_abs(a)):
        raise NotHermitian(f"{what} deviates from Hermiticity by {dev:.3e}")
    return a


def operator_norm(a: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    a = _as_square(a)
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral data of a Hermitian matrix; eigenvalues ascending, column
    k of ``eigenvectors`` paired with ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        """V diag(w) V^dag, for residual checks."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def fix_phase(v: np.ndarray, tol: float = PHASE_PIVOT_TOL) -> np.ndarray:
    """Rotate a vector's global phase so its first nonzero entry is real
    and positive. Near-zero vectors are returned unchanged."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    big = mags > tol * max(1.0, float(mags.max(initial=0.0)))
    if not big.any():
        return v.copy()
    pivot = v[np.argmax(big)]
    return v * (np.conj(pivot) / abs(pivot))


def eig_hermitian(a: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues come back ascending; every eigenvector's global phase is
    fixed so its first nonzero amplitude is real positive, which makes the
    result deterministic for a given input on a given platform.
    """
    a = require_hermitian(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigh did not converge: {exc}") from exc
    for k in range(v.shape[1]):
        v[:, k] = fix_phase(v[:, k])
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def exp_i_hermitian(a: np.ndarray, c: float) -> np.ndarray:
    """exp(i c A) for Hermitian A, via the exact spectral decomposition.

    Unitary to roundoff by construction, no scaling-and-squaring involved.
    """
    dec = eig_hermitian(a)
    v = dec.eigenvectors
    return (v * np.exp(1j * c * dec.eigenvalues)) @ v.conj().T


def projector(v: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Rank-one projector |v><v| for a unit vector; raises NotNormalized."""
    v = np.asarray(v, dtype=complex)
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > tol:
        raise NotNormalized(f"norm deviates from 1 by {abs(nrm - 1.0):.3e}")
    return np.outer(v, v.conj())
