"""Execute a plan against a known simulated state: exact POM probabilities,
seeded shot sampling, and the spin-measurement adapter.

Probabilities are always computed along two independent routes (direct trace
of the rotated projector vs the linear form in the Bloch coefficients) and
must agree to 1e-10; disagreement indicates a convention bug and raises.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .pauli import PauliString, to_matrix
from .pulses import MeasurementSetting, compile_sequence, gate_xbar, gate_y, Gate
from .states import DensityMatrix

DUAL_PATH_TOL = 1e-10


class ConsistencyError(AssertionError):
    """The two probability routes disagree beyond tolerance."""


@dataclass(frozen=True)
class ShotRecord:
    """Outcome counts of one setting: ``ones`` |1> outcomes in ``shots``
    repetitions. ``shots == 0`` marks an exact-probability record carrying
    ``p_exact`` instead of counts."""

    setting_index: int
    shots: int
    ones: int
    p_exact: float | None = None

    @property
    def p_hat(self) -> float:
        if self.shots == 0:
            if self.p_exact is None:
                raise ValueError("exact record without probability")
            return self.p_exact
        return self.ones / self.shots

    def to_json(self) -> dict:
        d = {"setting": self.setting_index, "shots": self.shots, "ones": self.ones}
        if self.p_exact is not None:
            d["p"] = self.p_exact
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ShotRecord":
        return cls(
            setting_index=d["setting"], shots=d["shots"], ones=d["ones"],
            p_exact=d.get("p"),
        )


def pom_projector(n: int, pom_qubit: int) -> np.ndarray:
    """|1><1| on the POM qubit: (I - sigma_z^(l)) / 2."""
    dim = 2**n
    z = to_matrix(PauliString.single(n, pom_qubit, 3))
    return (np.eye(dim) - z) / 2


def exact_probability(
    rho: DensityMatrix,
    setting: MeasurementSetting,
    pair_unitary: np.ndarray | None = None,
    check: bool = True,
) -> float:
    """Probability of the |1> outcome for a setting, p = Tr[W rho W† |1><1|].

    When ``check`` is on (the default), the value is also computed through
    the equivalent-measurement relation p = (1 - sum_P c_P r_P)/2 and the two
    routes must agree to 1e-10.
    """
    n = rho.n
    em_value = 0.0
    for p, c in setting.em.items():
        em_value += c * rho.expectation(p)
    p_em = (1.0 - em_value) / 2.0

    if check:
        w = setting.compiled(n, pair_unitary)
        proj = pom_projector(n, setting.pom_qubit)
        p_trace = float(np.real(np.trace(w @ rho.matrix @ w.conj().T @ proj)))
        if abs(p_trace - p_em) > DUAL_PATH_TOL:
            raise ConsistencyError(
                f"probability routes disagree for {setting.label()}: "
                f"trace {p_trace!r} vs linear form {p_em!r}"
            )
    # Floating-point dust near the ends is clamped; larger excursions would
    # have failed the dual-path check.
    return min(max(p_em, 0.0), 1.0)


def setting_rng(master_seed: int, setting_index: int) -> np.random.Generator:
    """Per-setting generator derived from the master seed by setting index,
    so parallel and serial execution would produce identical records."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(setting_index,))
    )


def sample(
    rho: DensityMatrix,
    setting: MeasurementSetting,
    setting_index: int,
    shots: int,
    master_seed: int,
    pair_unitary: np.ndarray | None = None,
) -> ShotRecord:
    """Binomial shot sampling of one setting, reproducible from the master seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1 (use exact records for shots = 0)")
    p = exact_probability(rho, setting, pair_unitary)
    rng = setting_rng(master_seed, setting_index)
    ones = int(rng.binomial(shots, p))
    return ShotRecord(setting_index=setting_index, shots=shots, ones=ones)


def exact_record(
    rho: DensityMatrix,
    setting: MeasurementSetting,
    setting_index: int,
    pair_unitary: np.ndarray | None = None,
) -> ShotRecord:
    p = exact_probability(rho, setting, pair_unitary)
    return ShotRecord(setting_index=setting_index, shots=0, ones=0, p_exact=p)


def spin_adapter(kind: str, l: int) -> list[Gate]:
    """Prefix gates mapping a direct spin measurement onto the POM.

    For sigma_x the qubit is rotated pi/2 about y (the Y gate); for sigma_y
    it is rotated -pi/2 about x (realized by the XBAR gate, which equals that
    rotation up to a global phase). The composed equivalent measurement
    contains the requested Pauli with |coefficient| = 1.
    """
    if kind == "sigma_x":
        return [gate_y(l)]
    if kind == "sigma_y":
        return [gate_xbar(l)]
    raise ValueError(f"kind must be 'sigma_x' or 'sigma_y', got {kind!r}")


def records_to_jsonl(records: Iterable[ShotRecord]) -> str:
    import json

    return "\n".join(json.dumps(r.to_json(), sort_keys=True) for r in records) + "\n"


def records_from_jsonl(text: str) -> list[ShotRecord]:
    import json

    out = []
    for line in text.splitlines():
        line = line.strip()
        if line:
            out.append(ShotRecord.from_json(json.loads(line)))
    return out
