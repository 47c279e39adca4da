"""Invert measured probabilities into Bloch coefficients along the plan's
triangular structure, assemble the density matrix, and optionally refine by
maximum-likelihood estimation to restore positivity.

Raw linear-inversion output is never silently repaired: a non-PSD matrix is
returned flagged, and physicality restoration (projection or MLE) is an
explicit step.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .linalg import herm_eigen, max_asymmetry
from .measure import ShotRecord
from .pauli import PauliString
from .planner import TomographyPlan
from .pulses import MeasurementSetting
from .states import (
    BlochVector,
    DensityMatrix,
    fidelity,
    from_bloch,
    make_density,
    trace_distance,
)

MLE_MAX_ITER = 5000
MLE_REL_TOL = 1e-9
PROB_FLOOR = 1e-12


class InversionError(RuntimeError):
    """A coefficient needed by the triangular solve is not yet determined."""


def linear_invert(plan: TomographyPlan, probs: Mapping[int, float]) -> BlochVector:
    """Solve the triangular system relating probabilities to coefficients.

    Processes targets in the plan's solve order; for the setting determining
    target P, r_P = [(1 - 2p) - sum_{Q != P} c_Q r_Q] / c_P with every r_Q
    already determined.
    """
    for idx in range(len(plan.settings)):
        if idx not in probs:
            raise InversionError(f"probability for setting {idx} missing")
    r: dict[PauliString, float] = {}
    for target in plan.solve_order:
        idx, c_target = plan.targets[target]
        p = probs[idx]
        em = plan.settings[idx].em
        acc = 1.0 - 2.0 * p
        for q, c in em.items():
            if q == target:
                continue
            if q not in r:
                raise InversionError(
                    f"triangularity violated at runtime: {q} undetermined while solving {target}"
                )
            acc -= c * r[q]
        r[target] = acc / c_target
    return BlochVector(plan.n, r)


def psd_project(matrix: np.ndarray) -> DensityMatrix:
    """Clip negative eigenvalues to zero in the eigenbasis and renormalize.

    Fallback physicality repair when MLE is not requested. Rejects matrices
    with no positive spectral weight.
    """
    matrix = np.asarray(matrix, dtype=complex)
    asym = max_asymmetry(matrix)
    if asym > 1e-8:
        raise ValueError(f"not Hermitian: max asymmetry {asym:.3e}")
    es = herm_eigen((matrix + matrix.conj().T) / 2, tol=1e-8)
    vals = np.clip(es.values, 0.0, None)
    total = float(np.sum(vals))
    if total <= 0.0:
        raise ValueError("degenerate data: no positive eigenvalue to keep")
    vals /= total
    out = (es.vectors * vals) @ es.vectors.conj().T
    return DensityMatrix(n=int(np.log2(matrix.shape[0])), matrix=out, psd=True)


def _measurement_operators(
    plan: TomographyPlan, pair_unitary: np.ndarray | None = None
) -> list[np.ndarray]:
    """Effective POM element per setting on the original state:
    M = (I - sum_P c_P P) / 2, which is W† |1><1| W."""
    dim = 2**plan.n
    out = []
    for s in plan.settings:
        m = np.eye(dim, dtype=complex)
        m -= s.em.to_matrix()
        out.append(m / 2)
    return out


def _factor_from_state(rho: DensityMatrix) -> np.ndarray:
    """Lower-triangular T with T T† = rho (Cholesky-style, valid for singular
    PSD input: eigen square root followed by an LQ reduction)."""
    es = herm_eigen(rho.matrix, tol=1e-8)
    vals = np.clip(es.values, 0.0, None)
    f = es.vectors * np.sqrt(vals)
    _, r = np.linalg.qr(f.conj().T)
    return r.conj().T


def log_likelihood(
    rho_matrix: np.ndarray, ops: Sequence[np.ndarray], records: Sequence[ShotRecord]
) -> float:
    ll = 0.0
    for rec, m in zip(records, ops):
        p = float(np.real(np.trace(rho_matrix @ m)))
        p = min(max(p, PROB_FLOOR), 1.0 - PROB_FLOOR)
        w = rec.shots if rec.shots > 0 else 1.0
        y = rec.p_hat
        ll += w * (y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    return ll


def mle_refine(
    plan: TomographyPlan,
    records: Sequence[ShotRecord],
    init: DensityMatrix,
    max_iter: int = MLE_MAX_ITER,
    rel_tol: float = MLE_REL_TOL,
) -> tuple[DensityMatrix, list[float]]:
    """Maximize the binomial log-likelihood over physical states.

    The state is parametrized as rho = T T† / tr(T T†), which is PSD with
    unit trace by construction, and climbed by projected gradient ascent with
    a backtracking step size, so the log-likelihood trace is nondecreasing.
    Converges when the relative log-likelihood change drops below ``rel_tol``
    or after ``max_iter`` iterations. Returns (refined state, log-likelihood
    trace).
    """
    if not records:
        raise ValueError("records must be nonempty")
    recs = sorted(records, key=lambda r: r.setting_index)
    if [r.setting_index for r in recs] != list(range(len(plan.settings))):
        raise ValueError("records must cover every plan setting exactly once")
    ops = _measurement_operators(plan)
    dim = 2**plan.n

    t = _factor_from_state(init if init.psd else psd_project(init.matrix))
    if np.linalg.norm(t) < 1e-12:
        t = np.eye(dim, dtype=complex)

    def rho_of(tm):
        g = tm @ tm.conj().T
        return g / np.real(np.trace(g))

    def grad_t(tm, rho):
        # Wirtinger gradient of the likelihood wrt conj(T):
        #   dL/dT* = (G - tr(G rho) I) T / tr(T T†),
        # with G the gradient of the likelihood in rho.
        g_rho = np.zeros((dim, dim), dtype=complex)
        for rec, m in zip(recs, ops):
            p = float(np.real(np.trace(rho @ m)))
            p = min(max(p, PROB_FLOOR), 1.0 - PROB_FLOOR)
            w = rec.shots if rec.shots > 0 else 1.0
            y = rec.p_hat
            g_rho += w * (y / p - (1.0 - y) / (1.0 - p)) * m
        tau = float(np.real(np.trace(tm @ tm.conj().T)))
        mean = float(np.real(np.trace(g_rho @ rho)))
        # Project onto the lower-triangular parametrization.
        return np.tril((g_rho - mean * np.eye(dim)) @ tm / tau)

    rho = rho_of(t)
    ll = log_likelihood(rho, ops, recs)
    trace = [ll]
    step = 1.0
    for _ in range(max_iter):
        g = grad_t(t, rho)
        gnorm = float(np.linalg.norm(g))
        if gnorm < 1e-14:
            break
        improved = False
        while step > 1e-18:
            t_new = t + step * g
            rho_new = rho_of(t_new)
            ll_new = log_likelihood(rho_new, ops, recs)
            if ll_new >= ll:
                improved = True
                break
            step /= 2
        if not improved:
            break
        rel = abs(ll_new - ll) / max(abs(ll), 1.0)
        t, rho, ll = t_new, rho_new, ll_new
        trace.append(ll)
        step = min(step * 2, 1e6)
        if rel < rel_tol:
            break
    refined = make_density((rho + rho.conj().T) / 2)
    return refined, trace


@dataclass(frozen=True)
class ReconstructionResult:
    """Raw linear inversion (possibly non-PSD, flagged), optional MLE
    refinement, per-setting residuals of the reported state, and metrics
    against the ground truth when one is provided."""

    raw: DensityMatrix
    refined: DensityMatrix | None
    residuals: tuple[float, ...]
    ll_trace: tuple[float, ...]
    metrics: dict | None

    @property
    def state(self) -> DensityMatrix:
        return self.refined if self.refined is not None else self.raw


def reconstruct(
    plan: TomographyPlan,
    records: Sequence[ShotRecord],
    mle: bool = True,
    truth: DensityMatrix | None = None,
) -> ReconstructionResult:
    """Full reconstruction: triangular inversion, then optional MLE refinement."""
    recs = sorted(records, key=lambda r: r.setting_index)
    probs = {r.setting_index: r.p_hat for r in recs}
    bloch = linear_invert(plan, probs)
    raw = from_bloch(bloch)

    refined = None
    ll_trace: tuple[float, ...] = ()
    if mle:
        init = raw if raw.psd else psd_project(raw.matrix)
        refined, trace = mle_refine(plan, recs, init)
        ll_trace = tuple(trace)

    ops = _measurement_operators(plan)
    reported = refined if refined is not None else raw
    residuals = tuple(
        abs(float(np.real(np.trace(reported.matrix @ m))) - r.p_hat)
        for r, m in zip(recs, ops)
    )

    metrics = None
    if truth is not None:
        physical = reported if reported.psd else psd_project(reported.matrix)
        metrics = {
            "fidelity": fidelity(physical, truth),
            "trace_distance": trace_distance(physical, truth),
            "raw_min_eigenvalue": raw.min_eigenvalue(),
        }
    return ReconstructionResult(
        raw=raw, refined=refined, residuals=residuals, ll_trace=ll_trace, metrics=metrics
    )


def plan_fingerprint(plan_json: dict) -> str:
    blob = json.dumps(plan_json, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def result_to_json(
    result: ReconstructionResult, plan_json: dict, master_seed: int | None
) -> dict:
    from .states import density_to_json

    out = {
        "schema": 1,
        "plan_fingerprint": plan_fingerprint(plan_json),
        "master_seed": master_seed,
        "raw": density_to_json(result.raw),
        "raw_psd": result.raw.psd,
        "raw_eigenvalues": np.linalg.eigvalsh(result.raw.matrix).tolist(),
        "residuals": list(result.residuals),
    }
    if result.refined is not None:
        out["refined"] = density_to_json(result.refined)
        out["refined_eigenvalues"] = np.linalg.eigvalsh(result.refined.matrix).tolist()
        out["ll_trace_head"] = list(result.ll_trace[:5])
        out["ll_final"] = result.ll_trace[-1] if result.ll_trace else None
        out["ll_iterations"] = len(result.ll_trace)
    if result.metrics is not None:
        out["metrics"] = result.metrics
    return out
