"""Dense complex matrix kernel: Kronecker products, Hermitian eigensystems,
and unitary time evolution exp(-iHt), sized for up to ~6 qubits.

All times are in units of hbar/energy (hbar = 1 throughout).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Tolerance ladder: exact algebraic identities on small integers/phases vs
# results routed through an eigendecomposition.
EXACT_TOL = 1e-12
EIGEN_TOL = 1e-10


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with qubit 1 as the leftmost factor."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(*mats: np.ndarray) -> np.ndarray:
    """Left-to-right Kronecker product of any number of factors."""
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def max_asymmetry(m: np.ndarray) -> float:
    """Largest entrywise deviation of m from its own conjugate transpose."""
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = EIGEN_TOL) -> bool:
    return max_asymmetry(m) <= tol


def is_unitary(m: np.ndarray, tol: float = EIGEN_TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


@dataclass(frozen=True)
class EigenSystem:
    """Spectral data of a Hermitian operator.

    ``values`` are real and ascending; ``vectors`` holds the eigenvectors as
    columns of a unitary matrix, so ``vectors @ diag(values) @ vectors†``
    reconstructs the input.
    """

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def herm_eigen(h: np.ndarray, tol: float = EIGEN_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    Raises ValueError (with the largest asymmetric entry as a diagnostic) if
    the input is not Hermitian within ``tol``.
    """
    h = np.asarray(h, dtype=complex)
    asym = max_asymmetry(h)
    if asym > tol:
        raise ValueError(f"matrix is not Hermitian: max |H - H†| entry = {asym:.3e}")
    values, vectors = np.linalg.eigh(h)
    return EigenSystem(values=values, vectors=vectors)


def evolve(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary evolution exp(-i h t) of a Hermitian generator.

    Computed through the spectral form sum_g exp(-i E_g t) |g><g|.
    """
    es = herm_eigen(h)
    phases = np.exp(-1j * es.values * t)
    return (es.vectors * phases) @ es.vectors.conj().T
