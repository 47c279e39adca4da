"""Tomography planner: breadth-first search over pulse sequences that assigns
a determining measurement setting to every Bloch coefficient, with a
triangular dependency structure so probabilities invert sequentially.

The search works in the Heisenberg picture: a node is the equivalent
measurement (a Pauli polynomial) of some sequence-plus-POM choice, and an
edge conjugates it by one vocabulary gate. Appending a gate at the earlier
end of a sequence conjugates its equivalent measurement by that gate, so
breadth-first expansion enumerates sequences shortest-first without
recompiling matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .linalg import EIGEN_TOL
from .pauli import SIGMA, PauliPolynomial, PauliString, all_strings, conjugate_expand
from .pulses import (
    Gate,
    MeasurementSetting,
    PulseSequence,
    compile_sequence,
    gate_pair,
    gate_x,
    gate_xbar,
    gate_y,
    gate_z,
    single_qubit_unitary,
)

# A setting may determine a target only if the target's coefficient in its
# equivalent measurement is at least this large; guards the conditioning of
# the triangular inversion.
MIN_TARGET_COEFF = 0.2

DEFAULT_MAX_DEPTH = 4

_VOCAB_SINGLE = (("x", gate_x), ("y", gate_y), ("z", gate_z), ("xbar", gate_xbar))


class PlanningError(RuntimeError):
    """No admissible plan within the allowed sequence depth."""


def _conj1_table(u: np.ndarray) -> dict[int, tuple[int, float]]:
    """label -> (label', sign) for conjugation by a single-qubit Clifford."""
    out = {0: (0, 1.0)}
    for a in range(1, 4):
        m = u.conj().T @ SIGMA[a] @ u
        for b in range(1, 4):
            c = float(np.real(np.trace(SIGMA[b] @ m))) / 2
            if abs(c) > 0.5:
                out[a] = (b, round(c))
    if len(out) != 4:
        raise ValueError("gate does not map Pauli axes to Pauli axes")
    return out


def _conj2_table(u: np.ndarray) -> dict[tuple[int, int], tuple[tuple[tuple[int, int], float], ...]]:
    """(a, b) -> expansion of U† (sigma_a x sigma_b) U over pair labels."""
    pp = {(a, b): np.kron(SIGMA[a], SIGMA[b]) for a in range(4) for b in range(4)}
    out = {}
    for a in range(4):
        for b in range(4):
            m = u.conj().T @ pp[(a, b)] @ u
            terms = []
            for c in range(4):
                for d in range(4):
                    v = complex(np.trace(pp[(c, d)].conj().T @ m)) / 4
                    if abs(v.real) > 1e-12:
                        terms.append(((c, d), v.real))
            out[(a, b)] = tuple(terms)
    return out


def _apply_single(state: dict, table, q: int) -> dict:
    out: dict[tuple, float] = {}
    for lab, c in state.items():
        l2, s = table[lab[q]]
        key = lab[:q] + (l2,) + lab[q + 1:]
        out[key] = out.get(key, 0.0) + s * c
    return {k: v for k, v in out.items() if abs(v) > 1e-12}

def _apply_pair(state: dict, table, l: int, m: int) -> dict:
    out: dict[tuple, float] = {}
    for lab, c in state.items():
        for (a2, b2), v in table[(lab[l], lab[m])]:
            key = list(lab)
            key[l], key[m] = a2, b2
            tkey = tuple(key)
            out[tkey] = out.get(tkey, 0.0) + c * v
    return {k: v for k, v in out.items() if abs(v) > 1e-12}


def _canon(pom: int, state: dict) -> tuple:
    return (pom,) + tuple(sorted((k, round(v, 10)) for k, v in state.items()))


@dataclass(frozen=True)
class TomographyPlan:
    """Measurement settings plus the target map that drives linear inversion.

    ``targets`` sends every non-identity Pauli string to (setting index,
    coefficient of that string in the setting's equivalent measurement);
    ``solve_order`` lists targets in nondecreasing weight such that, at each
    step, every other term of the determining setting's equivalent
    measurement is already solved.
    """

    n: int
    model: str
    mode: str
    tau: float
    max_depth: int
    settings: tuple[MeasurementSetting, ...]
    targets: dict[PauliString, tuple[int, float]]
    solve_order: tuple[PauliString, ...]

    def setting_for(self, p: PauliString) -> MeasurementSetting:
        return self.settings[self.targets[p][0]]


def plan_tomography(
    pair_unitary: np.ndarray,
    n: int,
    max_depth: int = DEFAULT_MAX_DEPTH,
    model: str = "custom",
    mode: str = "custom",
    tau: float = 0.0,
) -> TomographyPlan:
    """Find a triangular plan covering all 4^n - 1 Bloch coefficients.

    Breadth-first search over sequences from the vocabulary {X_l, Y_l, Z_l,
    XBAR_l, U_pair(l,m)} up to ``max_depth`` gates and over POM qubit
    choices. A sequence is accepted for a target P when its equivalent
    measurement contains P with |coefficient| >= 0.2 and every other term is
    of strictly lower weight or an already-covered equal-weight target.
    Settings are reused when one equivalent measurement determines several
    targets. Raises PlanningError naming the first uncovered target if the
    depth budget is exhausted.
    """
    if n < 1:
        raise ValueError("n must be >= 1")

    tables1 = {
        name: _conj1_table(single_qubit_unitary(maker(0))) for name, maker in _VOCAB_SINGLE
    }
    table2 = _conj2_table(pair_unitary) if n >= 2 else None

    moves: list[tuple[str, tuple]] = []
    for l in range(n):
        for m in range(l + 1, n):
            moves.append(("pair", (l, m)))
    for name, _ in _VOCAB_SINGLE:
        for q in range(n):
            moves.append((name, (q,)))

    targets = all_strings(n, min_weight=1)
    covered: dict[PauliString, tuple[int, float]] = {}
    order: list[PauliString] = []

    # Pool entries: (state dict, pom, gate list in written order). A state's
    # conjugation chain applies the written-leftmost gate first, which is the
    # latest gate in time, so prepending moves appends at the sequence tail.
    pool: list[tuple[dict, int, tuple]] = []
    seen: set = set()
    frontier: list[tuple[dict, int, tuple]] = []
    for pom in range(n):
        st = {tuple(3 if i == pom else 0 for i in range(n)): 1.0}
        seen.add(_canon(pom, st))
        pool.append((st, pom, ()))
        frontier.append((st, pom, ()))

    setting_index: dict[tuple, int] = {}
    accepted: list[tuple[dict, int, tuple]] = []

    def admissible(state: dict, t: PauliString) -> bool:
        c = state.get(t.labels, 0.0)
        if abs(c) < MIN_TARGET_COEFF:
            return False
        wt = t.weight
        for lab in state:
            if lab == t.labels:
                continue
            w = sum(1 for x in lab if x)
            if w > wt:
                return False
            if w == wt and PauliString(lab) not in covered:
                return False
        return True

    def try_cover():
        progress = True
        while progress:
            progress = False
            for t in targets:
                if t in covered:
                    continue
                for st, pom, seq in pool:
                    if admissible(st, t):
                        key = (pom, seq)
                        if key not in setting_index:
                            setting_index[key] = len(accepted)
                            accepted.append((st, pom, seq))
                        covered[t] = (setting_index[key], st[t.labels])
                        order.append(t)
                        progress = True
                        break

    try_cover()
    depth = 0
    while len(covered) < len(targets) and depth < max_depth:
        depth += 1
        new_frontier = []
        for st, pom, seq in frontier:
            for kind, args in moves:
                if kind == "pair":
                    st2 = _apply_pair(st, table2, *args)
                    g = ("pair", args)
                else:
                    st2 = _apply_single(st, tables1[kind], args[0])
                    g = (kind, args)
                key = _canon(pom, st2)
                if key in seen:
                    continue
                seen.add(key)
                ent = (st2, pom, seq + (g,))
                pool.append(ent)
                new_frontier.append(ent)
        frontier = new_frontier
        try_cover()

    if len(covered) < len(targets):
        missing = next(t for t in targets if t not in covered)
        raise PlanningError(
            f"no admissible setting for target {missing} within max_depth={max_depth} "
            f"({len(covered)}/{len(targets)} covered)"
        )

    settings = tuple(
        _finalize_setting(st, pom, seq, n, pair_unitary) for st, pom, seq in accepted
    )
    solve_order = tuple(sorted(order, key=lambda p: (p.weight, order.index(p))))
    return TomographyPlan(
        n=n, model=model, mode=mode, tau=tau, max_depth=max_depth,
        settings=settings, targets=covered, solve_order=solve_order,
    )


def _finalize_setting(
    state: dict, pom: int, seq: tuple, n: int, pair_unitary: np.ndarray
) -> MeasurementSetting:
    """Build the MeasurementSetting, cross-checking the search-engine
    polynomial against the matrix-route equivalent measurement."""
    gates = []
    for kind, args in seq:
        if kind == "pair":
            gates.append(gate_pair(*args))
        else:
            gates.append(dict(_VOCAB_SINGLE)[kind](args[0]))
    ps = PulseSequence(tuple(gates))
    w = compile_sequence(ps, n, pair_unitary)
    em_matrix = conjugate_expand(w, PauliString.single(n, pom, 3))
    em_symbolic = PauliPolynomial(n, {PauliString(lab): c for lab, c in state.items()})
    if not em_matrix.allclose(em_symbolic, tol=1e-9):
        raise AssertionError(
            f"planner/compiler disagreement for {ps.label()} POM q{pom + 1}: "
            f"{em_symbolic} vs {em_matrix}"
        )
    return MeasurementSetting(sequence=ps, pom_qubit=pom, em=em_matrix, unitary=w)


def check_triangular(plan: TomographyPlan) -> None:
    """Validate the plan invariants; raises AssertionError on violation.

    Checks: every non-identity string is a target exactly once; each
    setting's equivalent measurement has unit squared-coefficient mass; the
    solve order is nondecreasing in weight; and the target-coefficient matrix
    in solve order is lower triangular with |diagonal| >= 0.2.
    """
    expect = set(all_strings(plan.n, min_weight=1))
    have = set(plan.targets)
    if have != expect:
        raise AssertionError(f"targets do not cover all strings: missing {expect - have}")
    if len(plan.solve_order) != len(expect):
        raise AssertionError("solve order misses targets")
    for s in plan.settings:
        if abs(s.em.norm_sq() - 1.0) > EIGEN_TOL:
            raise AssertionError(f"setting {s.label()} em norm {s.em.norm_sq()} != 1")
    pos = {p: i for i, p in enumerate(plan.solve_order)}
    last_w = 0
    for p in plan.solve_order:
        if p.weight < last_w:
            raise AssertionError("solve order decreases in weight")
        last_w = p.weight
        idx, coeff = plan.targets[p]
        em = plan.settings[idx].em
        if abs(coeff) < MIN_TARGET_COEFF:
            raise AssertionError(f"target {p} coefficient {coeff} below 0.2")
        if abs(em[p] - coeff) > 1e-12:
            raise AssertionError(f"target map coefficient mismatch for {p}")
        for q, _ in em.items():
            if q.weight == 0 or q == p:
                continue
            if pos[q] >= pos[p]:
                raise AssertionError(
                    f"setting for {p} depends on {q}, which is not solved earlier"
                )


def plan_to_json(plan: TomographyPlan) -> dict:
    return {
        "schema": 1,
        "n": plan.n,
        "model": plan.model,
        "mode": plan.mode,
        "tau": plan.tau,
        "max_depth": plan.max_depth,
        "settings": [
            {
                "gates": [_gate_json(g) for g in s.sequence.gates],
                "pom_qubit": s.pom_qubit + 1,
                "em": s.em.to_dict(),
            }
            for s in plan.settings
        ],
        "targets": {
            str(p): {"setting": idx, "coeff": coeff}
            for p, (idx, coeff) in sorted(plan.targets.items(), key=lambda kv: kv[0].sort_key())
        },
        "solve_order": [str(p) for p in plan.solve_order],
    }


def _gate_json(g: Gate) -> dict:
    d: dict = {"name": g.kind, "qubits": [q + 1 for q in g.qubits]}
    if g.angle is not None:
        d["angle"] = g.angle
    if g.axes is not None:
        d["axes"] = list(g.axes)
    return d


def _gate_from_json(d: Mapping) -> Gate:
    return Gate(
        kind=d["name"],
        qubits=tuple(q - 1 for q in d["qubits"]),
        angle=d.get("angle"),
        axes=tuple(d["axes"]) if "axes" in d else None,
    )


def plan_from_json(d: Mapping) -> TomographyPlan:
    n = d["n"]
    settings = tuple(
        MeasurementSetting(
            sequence=PulseSequence(tuple(_gate_from_json(g) for g in s["gates"])),
            pom_qubit=s["pom_qubit"] - 1,
            em=PauliPolynomial.from_dict(n, s["em"]),
        )
        for s in d["settings"]
    )
    targets = {
        PauliString.from_text(k): (v["setting"], v["coeff"]) for k, v in d["targets"].items()
    }
    return TomographyPlan(
        n=n, model=d["model"], mode=d["mode"], tau=d["tau"], max_depth=d["max_depth"],
        settings=settings, targets=targets,
        solve_order=tuple(PauliString.from_text(s) for s in d["solve_order"]),
    )
