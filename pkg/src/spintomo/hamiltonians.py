"""Spin Hamiltonians with diagonal exchange couplings, model presets
(XY / XXZ / Heisenberg, switchable or fixed one-qubit z-energy), the
closed-form two-qubit evolution, and commensurate-timing solvers.

The general Hamiltonian is
    H = sum_l sum_a eps[l,a] sigma_{l,a}
      + sum_{l<m} sum_a J[l,m,a] sigma_{l,a} sigma_{m,a}
with a in {x, y, z} and hbar = 1. Note the Pauli operators enter bare (no
factor 1/2), so e.g. an x-rotation by pi/2 takes time pi/(4 eps_x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import evolve, kron
from .pauli import SIGMA, PauliPolynomial, PauliString

_SX, _SY, _SZ = SIGMA[1], SIGMA[2], SIGMA[3]
_I4 = np.eye(4, dtype=complex)
_XX = kron(_SX, _SX)
_YY = kron(_SY, _SY)
_ZZ = kron(_SZ, _SZ)
_Z1 = kron(_SZ, SIGMA[0])
_Z2 = kron(SIGMA[0], _SZ)


class ClosedFormInapplicable(ValueError):
    """The closed-form evolution is undefined for these parameters."""


class TimingError(ValueError):
    """No commensurate evolution time exists for the given integers."""


@dataclass(frozen=True)
class SpinHamiltonianSpec:
    """Parameters of the general spin Hamiltonian.

    ``eps[l][a]`` are one-qubit energies (a = 0,1,2 for x,y,z) and
    ``couplings[(l, m)]`` the diagonal exchange triple (Jx, Jy, Jz) for the
    qubit pair l < m (0-based).
    """

    n: int
    eps: tuple[tuple[float, float, float], ...] = ()
    couplings: dict[tuple[int, int], tuple[float, float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        eps = self.eps if self.eps else tuple((0.0, 0.0, 0.0) for _ in range(self.n))
        if len(eps) != self.n:
            raise ValueError("eps must have one (x, y, z) triple per qubit")
        object.__setattr__(self, "eps", tuple(tuple(map(float, row)) for row in eps))
        for (l, m) in self.couplings:
            if not (0 <= l < m < self.n):
                raise ValueError(f"bad pair ({l}, {m})")


def build_hamiltonian(spec: SpinHamiltonianSpec) -> PauliPolynomial:
    """Assemble H as a Pauli polynomial (Hermitian by construction)."""
    poly = PauliPolynomial(spec.n)
    for l in range(spec.n):
        for a in range(3):
            v = spec.eps[l][a]
            if v:
                poly.add(PauliString.single(spec.n, l, a + 1), v)
    for (l, m), js in spec.couplings.items():
        for a in range(3):
            if js[a]:
                labels = [0] * spec.n
                labels[l] = a + 1
                labels[m] = a + 1
                poly.add(PauliString(tuple(labels)), js[a])
    return poly


def pair_hamiltonian(jx: float, jy: float, jz: float, eps_z: float = 0.0) -> np.ndarray:
    """Two-qubit block: eps_z (s1z + s2z) + Jx xx + Jy yy + Jz zz."""
    return eps_z * (_Z1 + _Z2) + jx * _XX + jy * _YY + jz * _ZZ


@dataclass(frozen=True)
class TwoQubitParams:
    """Parameters of the closed-form two-qubit evolution, with its derived
    mixing quantities.

    The quadratic a^2 - 4ab - 1 = 0 defining ``a`` has two roots; the root
    sign must follow sign(Jx - Jy) for the closed form to reproduce the true
    evolution (the printed formula implicitly assumes Jx > Jy).
    """

    jx: float
    jy: float
    jz: float
    eps_z: float
    t: float

    @property
    def gamma(self) -> float:
        return self.t * (self.jx + self.jy)

    @property
    def beta(self) -> float:
        return self.t * math.sqrt(4 * self.eps_z**2 + (self.jx - self.jy) ** 2)

    @property
    def phi(self) -> float:
        return self.t * self.jz

    @property
    def b(self) -> float:
        if self.jx == self.jy:
            if self.eps_z != 0.0:
                raise ClosedFormInapplicable(
                    "b = eps_z / (Jx - Jy) undefined: Jx = Jy with eps_z != 0"
                )
            return 0.0
        return self.eps_z / (self.jx - self.jy)

    @property
    def a(self) -> float:
        s = -1.0 if self.jx < self.jy else 1.0
        b = self.b
        return 2 * b + s * math.sqrt(4 * b * b + 1)

    @property
    def c(self) -> float:
        a = self.a
        return 1.0 / (1.0 + a * a)


def closed_form_pair_unitary(p: TwoQubitParams) -> np.ndarray:
    """The five-term closed form of the two-qubit evolution exp(-i H12 t).

    Raises ClosedFormInapplicable when Jx = Jy with eps_z != 0 (callers fall
    back to the numerical exponential). Validity elsewhere is operational:
    the result agrees with evolve(H12, t) to 1e-8 over the full admissible
    parameter range.
    """
    g, beta, phi = p.gamma, p.beta, p.phi
    a, c = p.a, p.c
    eip, eim = np.exp(1j * phi), np.exp(-1j * phi)
    return (
        0.5 * (eip * math.cos(g) + eim * math.cos(beta)) * _I4
        + 0.5j * (1 - a * a) * c * eim * math.sin(beta) * (_Z1 + _Z2)
        + 0.5 * (eim * math.cos(beta) - eip * math.cos(g)) * _ZZ
        - 0.5j * (eip * math.sin(g) + 2 * a * c * eim * math.sin(beta)) * _XX
        - 0.5j * (eip * math.sin(g) - 2 * a * c * eim * math.sin(beta)) * _YY
    )


def pair_unitary_numeric(p: TwoQubitParams) -> np.ndarray:
    return evolve(pair_hamiltonian(p.jx, p.jy, p.jz, p.eps_z), p.t)


def xy_pair_unitary() -> np.ndarray:
    """XY-model pair evolution at time pi/(8 Jx): the closed-form constant
    [(sqrt2+1) I + (sqrt2-1) zz - i yy - i xx] / (2 sqrt2)."""
    r2 = math.sqrt(2)
    return ((r2 + 1) * _I4 + (r2 - 1) * _ZZ - 1j * _YY - 1j * _XX) / (2 * r2)


def heisenberg_pair_unitary() -> np.ndarray:
    """Heisenberg-model pair evolution at time pi/(8 J), as the closed-form
    constant [(2-i) I - i zz - i yy - i xx] / (2 sqrt2).

    Carries a global phase exp(-i pi/8) relative to the numerical
    exponential of the Heisenberg block.
    """
    r2 = math.sqrt(2)
    return ((2 - 1j) * _I4 - 1j * _ZZ - 1j * _YY - 1j * _XX) / (2 * r2)


def global_phase_match(a: np.ndarray, b: np.ndarray) -> tuple[float, complex]:
    """(|Tr(a† b)| / dim, Tr(a† b)/|Tr|): overlap magnitude and measured phase."""
    tr = complex(np.trace(a.conj().T @ b)) / a.shape[0]
    mag = abs(tr)
    return mag, tr / mag if mag > 0 else 0j


def _nearest_ratio_indices(ratio: float, form, bound: int = 30) -> tuple[int, int]:
    best = (1, 1)
    err = abs(form(1, 1) - ratio)
    for m in range(1, bound + 1):
        for n in range(1, bound + 1):
            e = abs(form(m, n) - ratio)
            if e < err - 1e-15:
                best, err = (m, n), e
    return best


def solve_fixed_ez_time(eps_z: float, jx: float, m: int, n: int, tol: float = 1e-9) -> float:
    """Evolution time for the fixed-eps_z protocol.

    Requires the commensurate ratio eps_z/Jx = 4m/(2n-1); then the time is
    tau = n pi / (2 eps_z). Rejects otherwise, naming the nearest admissible
    (m, n).
    """
    if eps_z <= 0 or jx <= 0:
        raise ValueError("eps_z and Jx must be positive")
    if m < 1 or n < 1:
        raise ValueError("m, n must be positive integers")
    ratio = eps_z / jx
    want = 4 * m / (2 * n - 1)
    if abs(ratio - want) > tol:
        bm, bn = _nearest_ratio_indices(ratio, lambda mm, nn: 4 * mm / (2 * nn - 1))
        raise TimingError(
            f"eps_z/Jx = {ratio:.6g} != 4m/(2n-1) = {want:.6g} for (m, n) = ({m}, {n}); "
            f"nearest admissible (m, n) = ({bm}, {bn}) with ratio {4 * bm / (2 * bn - 1):.6g}"
        )
    return n * math.pi / (2 * eps_z)


def solve_xxz_times(
    jz: float,
    jx: float,
    eps_z: float,
    l: int,
    m: int,
    n: int,
    tol: float = 1e-9,
) -> float:
    """Evolution time for the XXZ protocol.

    Simultaneous constraints: Jz tau = 2 n pi and Jx tau = (2m-1) pi/8, plus
    eps_z tau = l pi/2 when eps_z > 0. A common tau exists iff
    Jz/Jx = 16n/(2m-1) (and eps_z/Jx = 4l/(2m-1) in the fixed-eps_z case).
    """
    if jz <= 0 or jx <= 0:
        raise ValueError("Jz and Jx must be positive")
    if m < 1 or n < 1 or (eps_z > 0 and l < 1):
        raise ValueError("integer indices must be positive")
    tau = 2 * n * math.pi / jz
    if abs(jx * tau - (2 * m - 1) * math.pi / 8) > tol:
        raise TimingError(
            f"no common tau: Jz/Jx = {jz / jx:.6g} != 16n/(2m-1) = {16 * n / (2 * m - 1):.6g} "
            f"for (m, n) = ({m}, {n})"
        )
    if eps_z > 0 and abs(eps_z * tau - l * math.pi / 2) > tol:
        raise TimingError(
            f"no common tau: eps_z/Jx = {eps_z / jx:.6g} != 4l/(2m-1) = "
            f"{4 * l / (2 * m - 1):.6g} for (l, m) = ({l}, {m})"
        )
    return tau


MODEL_NAMES = ("xy", "xxz", "heisenberg")
MODE_NAMES = ("switchable", "fixed_ez")


@dataclass(frozen=True)
class ModelPreset:
    """A named two-qubit interaction model with its prescribed evolution time.

    ``pair_unitary()`` is the entangling primitive handed to the tomography
    planner; uniform couplings are assumed across all pairs used.
    """

    model: str
    mode: str
    jx: float
    jy: float
    jz: float
    eps_z: float
    tau: float

    def pair_hamiltonian(self) -> np.ndarray:
        return pair_hamiltonian(self.jx, self.jy, self.jz, self.eps_z)

    def pair_unitary(self) -> np.ndarray:
        return evolve(self.pair_hamiltonian(), self.tau)

    def xy_equivalence(self) -> tuple[float, complex]:
        """Overlap of this preset's pair unitary with the XY-model primitive."""
        return global_phase_match(xy_pair_unitary(), self.pair_unitary())

    def describe(self) -> str:
        return (
            f"{self.model}/{self.mode}: Jx={self.jx:g} Jy={self.jy:g} Jz={self.jz:g} "
            f"eps_z={self.eps_z:g} tau={self.tau:g}"
        )


def make_preset(
    model: str,
    mode: str = "switchable",
    j: float = 1.0,
    jz: float | None = None,
    eps_z: float | None = None,
    l: int = 2,
    m: int = 1,
    n: int = 1,
) -> ModelPreset:
    """Build a model preset from config-level names and parameters.

    Integer indices (l, m, n) select the commensurate timing branch for the
    fixed-eps_z and XXZ protocols; defaults give the shortest times.
    """
    if model not in MODEL_NAMES:
        raise ValueError(f"unknown model {model!r}; expected one of {MODEL_NAMES}")
    if mode not in MODE_NAMES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODE_NAMES}")
    if j <= 0:
        raise ValueError("J must be positive")

    if model == "xy":
        jzv = 0.0
        if mode == "switchable":
            ez, tau = 0.0, math.pi / (8 * j)
        else:
            ez = eps_z if eps_z is not None else 4 * m * j / (2 * n - 1)
            tau = solve_fixed_ez_time(ez, j, m, n)
    elif model == "heisenberg":
        jzv = j
        tau = math.pi / (8 * j)
        if mode == "switchable":
            ez = 0.0
        else:
            # eps_z tau must be a multiple of pi so the one-qubit term reduces
            # to a phase on the fixed pair time; eps_z = 8 l J achieves that.
            ez = eps_z if eps_z is not None else 8 * l * j
            if abs(ez * tau / math.pi - round(ez * tau / math.pi)) > 1e-9:
                raise TimingError(
                    f"heisenberg fixed_ez needs eps_z = 8 k J; got eps_z/J = {ez / j:.6g}"
                )
    else:  # xxz
        jzv = jz if jz is not None else 16 * n * j / (2 * m - 1)
        if mode == "switchable":
            ez = 0.0
            tau = solve_xxz_times(jzv, j, 0.0, 1, m, n)
        else:
            ez = eps_z if eps_z is not None else 4 * l * j / (2 * m - 1)
            tau = solve_xxz_times(jzv, j, ez, l, m, n)
    return ModelPreset(model=model, mode=mode, jx=j, jy=j, jz=jzv, eps_z=ez, tau=tau)
