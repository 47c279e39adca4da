"""Exact symbolic algebra of Pauli strings: phased products, matrix
realization, and expansion of Hermitian operators in the Pauli basis.

Labels are 0 (identity), x, y, z per qubit; qubit 1 is always the leftmost
factor in both text renderings ("ZX0") and Kronecker products.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping

import numpy as np

from .linalg import EXACT_TOL, EIGEN_TOL, is_unitary, kron_all, max_asymmetry

COEFF_PRUNE = 1e-12

_AXES = "0xyz"

SIGMA = {
    0: np.eye(2, dtype=complex),
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}

# Single-qubit products sigma_a sigma_b = phase * sigma_c, phase in {1,+-i,-1}.
_MUL: dict[tuple[int, int], tuple[complex, int]] = {}
for _a in range(4):
    for _b in range(4):
        _m = SIGMA[_a] @ SIGMA[_b]
        for _c in range(4):
            _p = np.trace(SIGMA[_c].conj().T @ _m) / 2
            if abs(_p) > 0.5:
                _MUL[(_a, _b)] = (complex(np.round(_p.real) + 1j * np.round(_p.imag)), _c)


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of per-qubit Pauli labels, without phase."""

    labels: tuple[int, ...]

    def __post_init__(self):
        if not all(0 <= l <= 3 for l in self.labels):
            raise ValueError(f"labels must be in 0..3, got {self.labels}")

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse renderings like "ZX0" (qubit 1 first, 0 = identity)."""
        table = {"0": 0, "I": 0, "X": 1, "Y": 2, "Z": 3}
        try:
            return cls(tuple(table[ch] for ch in text.upper()))
        except KeyError as exc:
            raise ValueError(f"bad Pauli label in {text!r}") from exc

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls((0,) * n)

    @classmethod
    def single(cls, n: int, qubit: int, axis: int) -> "PauliString":
        """The weight-1 string with ``axis`` (1..3) at ``qubit`` (0-based)."""
        labels = [0] * n
        labels[qubit] = axis
        return cls(tuple(labels))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def weight(self) -> int:
        return sum(1 for l in self.labels if l != 0)

    def sort_key(self) -> tuple:
        return (self.weight, self.labels)

    def __str__(self) -> str:
        return "".join(_AXES[l].upper() if l else "0" for l in self.labels)

    def __repr__(self) -> str:
        return f"PauliString({self})"


def pauli_mul(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    """Product of two Pauli strings as (phase, string), phase a 4th root of 1."""
    if p.n != q.n:
        raise ValueError(f"length mismatch: {p.n} vs {q.n}")
    phase = 1.0 + 0j
    labels = []
    for a, b in zip(p.labels, q.labels):
        ph, c = _MUL[(a, b)]
        phase *= ph
        labels.append(c)
    return phase, PauliString(tuple(labels))


@lru_cache(maxsize=4096)
def _matrix_cached(labels: tuple[int, ...]) -> np.ndarray:
    m = kron_all(*[SIGMA[l] for l in labels])
    m.setflags(write=False)
    return m


def to_matrix(p: PauliString) -> np.ndarray:
    """Dense realization, qubit 1 leftmost."""
    return _matrix_cached(p.labels)


class PauliPolynomial:
    """Real-coefficient linear combination of Pauli strings.

    Coefficients below 1e-12 are pruned so symbolic fixtures compare as exact
    term sets. Iteration order is canonical: (weight, labels).
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[PauliString, float] | None = None):
        self.n = n
        self._terms: dict[PauliString, float] = {}
        if terms:
            for p, c in terms.items():
                self[p] = c

    def __getitem__(self, p: PauliString) -> float:
        return self._terms.get(p, 0.0)

    def __setitem__(self, p: PauliString, c: float):
        if p.n != self.n:
            raise ValueError("string length does not match polynomial")
        if abs(c) <= COEFF_PRUNE:
            self._terms.pop(p, None)
        else:
            self._terms[p] = float(c)

    def add(self, p: PauliString, c: float):
        self[p] = self._terms.get(p, 0.0) + c

    def items(self) -> Iterator[tuple[PauliString, float]]:
        return iter(sorted(self._terms.items(), key=lambda kv: kv[0].sort_key()))

    def strings(self) -> list[PauliString]:
        return [p for p, _ in self.items()]

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, p: PauliString) -> bool:
        return p in self._terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliPolynomial):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def norm_sq(self) -> float:
        return sum(c * c for c in self._terms.values())

    def allclose(self, other: "PauliPolynomial", tol: float = EIGEN_TOL) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(abs(self[k] - other[k]) <= tol for k in keys)

    def to_matrix(self) -> np.ndarray:
        out = np.zeros((2**self.n, 2**self.n), dtype=complex)
        for p, c in self._terms.items():
            out += c * to_matrix(p)
        return out

    def to_dict(self) -> dict[str, float]:
        return {str(p): c for p, c in self.items()}

    @classmethod
    def from_dict(cls, n: int, d: Mapping[str, float]) -> "PauliPolynomial":
        return cls(n, {PauliString.from_text(k): v for k, v in d.items()})

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for p, c in self.items():
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {abs(c):g}*{p}")
        return " ".join(parts).lstrip("+ ")

    def __repr__(self) -> str:
        return f"PauliPolynomial({self})"


def expand(m: np.ndarray, tol: float = EIGEN_TOL) -> PauliPolynomial:
    """Expand a Hermitian matrix in the Pauli basis: c_P = Tr(P m) / 2^n."""
    m = np.asarray(m, dtype=complex)
    dim = m.shape[0]
    n = int(np.log2(dim))
    if 2**n != dim or m.shape != (dim, dim):
        raise ValueError(f"matrix dimension {m.shape} is not a square power of 2")
    asym = max_asymmetry(m)
    if asym > tol:
        raise ValueError(f"matrix is not Hermitian: max |M - M†| entry = {asym:.3e}")
    poly = PauliPolynomial(n)
    # Tensor-reshaped partial traces beat 4^n dense products for n >= 3.
    for p, c in _expand_coeffs(m, n):
        poly[p] = c
    return poly


def _expand_coeffs(m: np.ndarray, n: int):
    from itertools import product as _product

    t = m.reshape((2,) * (2 * n))
    for labels in _product(range(4), repeat=n):
        p = PauliString(labels)
        coeff = t
        for q in range(n):
            # Contract qubit q's row/column indices against sigma_{label}.
            # After q contractions the leading axes shrink accordingly.
            sig = SIGMA[labels[q]]
            coeff = np.tensordot(sig, coeff, axes=([1, 0], [0, n - q]))
        val = complex(coeff) / 2**n
        if abs(val.real) > COEFF_PRUNE:
            yield p, val.real


def conjugate_expand(w: np.ndarray, p: PauliString, tol: float = EIGEN_TOL) -> PauliPolynomial:
    """Pauli expansion of W† P W for unitary W.

    The result has real coefficients with sum of squares 1 (conjugation is an
    orthogonal map on the Pauli basis under the Frobenius inner product).
    """
    w = np.asarray(w, dtype=complex)
    if not is_unitary(w, tol):
        raise ValueError("conjugating operator is not unitary within tolerance")
    return expand(w.conj().T @ to_matrix(p) @ w, tol=tol)


def all_strings(n: int, min_weight: int = 0) -> list[PauliString]:
    """All Pauli strings on n qubits (weight >= min_weight), canonical order."""
    from itertools import product as _product

    out = [PauliString(labels) for labels in _product(range(4), repeat=n)]
    return sorted((p for p in out if p.weight >= min_weight), key=lambda p: p.sort_key())
