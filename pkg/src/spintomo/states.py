"""Density matrices, Bloch-coefficient vectors, random state sources, and
distance/fidelity metrics.

Convention: |0> = |up>, |1> = |down>; the projective operator measurement
(POM) is |1><1| = (sigma_0 - sigma_z)/2, so sigma_z |0> = +|0>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .linalg import EIGEN_TOL, herm_eigen, max_asymmetry
from .pauli import PauliString, PauliPolynomial, all_strings, to_matrix

PSD_TOL = 1e-10


@dataclass(frozen=True)
class DensityMatrix:
    """A 2^n x 2^n Hermitian unit-trace state.

    ``psd`` records whether the matrix was positive semidefinite (within
    tolerance) when built. Linear inversion of noisy data can produce
    non-physical matrices; those are carried with ``psd=False`` rather than
    silently repaired, so raw inversion output stays inspectable.
    """

    n: int
    matrix: np.ndarray
    psd: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2**self.n, 2**self.n):
            raise ValueError(f"expected {2**self.n}x{2**self.n} matrix, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.matrix)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def validate(self, tol: float = EIGEN_TOL):
        """Raise unless Hermitian, unit trace, and PSD within tolerance."""
        asym = max_asymmetry(self.matrix)
        if asym > tol:
            raise ValueError(f"not Hermitian: max asymmetry {asym:.3e}")
        tr = complex(np.trace(self.matrix))
        if abs(tr - 1.0) > tol:
            raise ValueError(f"trace {tr} != 1")
        lo = self.min_eigenvalue()
        if lo < -PSD_TOL:
            raise ValueError(f"negative eigenvalue {lo:.3e}")

    def expectation(self, p: PauliString) -> float:
        return float(np.real(np.trace(self.matrix @ to_matrix(p))))


def make_density(matrix: np.ndarray, tol: float = EIGEN_TOL) -> DensityMatrix:
    """Wrap a matrix as a DensityMatrix, setting the PSD flag from its spectrum."""
    matrix = np.asarray(matrix, dtype=complex)
    n = int(np.log2(matrix.shape[0]))
    if 2**n != matrix.shape[0]:
        raise ValueError("dimension is not a power of 2")
    asym = max_asymmetry(matrix)
    if asym > tol:
        raise ValueError(f"not Hermitian: max asymmetry {asym:.3e}")
    lo = float(np.min(np.linalg.eigvalsh(matrix)))
    return DensityMatrix(n=n, matrix=matrix, psd=lo >= -PSD_TOL)


@dataclass(frozen=True)
class BlochVector:
    """Expectation values r_P = Tr(rho P) for every non-identity string P.

    The identity coefficient is fixed to 1 by normalization and never stored.
    """

    n: int
    r: dict[PauliString, float] = field(default_factory=dict)

    def __post_init__(self):
        for p in self.r:
            if p.n != self.n:
                raise ValueError("string length mismatch")
            if p.weight == 0:
                raise ValueError("identity string is implicit and not stored")

    def __getitem__(self, p: PauliString) -> float:
        return self.r.get(p, 0.0)

    def to_dict(self) -> dict[str, float]:
        return {str(p): v for p, v in sorted(self.r.items(), key=lambda kv: kv[0].sort_key())}

    @classmethod
    def from_dict(cls, n: int, d: Mapping[str, float]) -> "BlochVector":
        return cls(n, {PauliString.from_text(k): float(v) for k, v in d.items()})


def coefficient_count(n: int) -> int:
    """Number of independent state coefficients: 4^n - 1 = sum_j 3^j C(n, j)."""
    from math import comb

    return sum(3**j * comb(n, j) for j in range(1, n + 1))


def to_bloch(rho: DensityMatrix) -> BlochVector:
    """All 4^n - 1 expectation values of rho."""
    r = {}
    for p in all_strings(rho.n, min_weight=1):
        v = rho.expectation(p)
        if abs(v) > 1e-15:
            r[p] = v
    return BlochVector(rho.n, r)


def from_bloch(b: BlochVector) -> DensityMatrix:
    """Assemble rho = (I + sum_P r_P P) / 2^n.

    Hermitian with unit trace by construction; the PSD flag on the result
    marks whether the assembled matrix is physical.
    """
    dim = 2**b.n
    m = np.eye(dim, dtype=complex)
    for p, v in b.r.items():
        m += v * to_matrix(p)
    return make_density(m / dim)


def bloch_from_poly(poly: PauliPolynomial) -> BlochVector:
    return BlochVector(poly.n, {p: c for p, c in poly.items() if p.weight > 0})


def random_density(n: int, kind: str = "pure", seed: int = 0) -> DensityMatrix:
    """Seeded random state: a Haar-ish pure projector or a Wishart mixed state."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    dim = 2**n
    if kind == "pure":
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        m = np.outer(psi, psi.conj())
    elif kind == "mixed":
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        m = g @ g.conj().T
        m /= np.trace(m).real
    else:
        raise ValueError(f"kind must be 'pure' or 'mixed', got {kind!r}")
    return DensityMatrix(n=n, matrix=m, psd=True)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    es = herm_eigen(m)
    vals = np.clip(es.values, 0.0, None)
    return (es.vectors * np.sqrt(vals)) @ es.vectors.conj().T


def fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, clipped to [0, 1]."""
    if a.n != b.n:
        raise ValueError("qubit counts differ")
    ra = _psd_sqrt(a.matrix)
    mid = ra @ b.matrix @ ra
    mid = (mid + mid.conj().T) / 2
    vals = np.clip(np.linalg.eigvalsh(mid), 0.0, None)
    f = float(np.sum(np.sqrt(vals)) ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of a - b, clipped to [0, 1]."""
    if a.n != b.n:
        raise ValueError("qubit counts differ")
    d = a.matrix - b.matrix
    vals = np.linalg.eigvalsh((d + d.conj().T) / 2)
    t = float(0.5 * np.sum(np.abs(vals)))
    return min(max(t, 0.0), 1.0)


def density_to_json(rho: DensityMatrix) -> dict:
    return {
        "n": rho.n,
        "re": np.real(rho.matrix).tolist(),
        "im": np.imag(rho.matrix).tolist(),
    }


def density_from_json(d: Mapping) -> DensityMatrix:
    m = np.array(d["re"], dtype=float) + 1j * np.array(d["im"], dtype=float)
    return make_density(m)
