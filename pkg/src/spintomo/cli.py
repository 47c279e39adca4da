"""Batch command-line surface: verify the operation-table and closed-form
identities, then plan, simulate, reconstruct, or run the whole pipeline.

Exit codes: 0 success, 1 verification failure, 2 usage/config error,
3 I/O error. All artifacts are JSON with a schema version field; runs are
byte-reproducible given the same config and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .hamiltonians import (
    ModelPreset,
    TwoQubitParams,
    closed_form_pair_unitary,
    global_phase_match,
    heisenberg_pair_unitary,
    make_preset,
    pair_hamiltonian,
    xy_pair_unitary,
    ClosedFormInapplicable,
    TimingError,
)
from .linalg import evolve
from .measure import exact_record, records_from_jsonl, records_to_jsonl, sample
from .planner import (
    DEFAULT_MAX_DEPTH,
    PlanningError,
    check_triangular,
    plan_from_json,
    plan_to_json,
    plan_tomography,
)
from .pulses import make_setting, verify_operation_table, gate_y, gate_pair
from .reconstruct import reconstruct, result_to_json
from .states import density_from_json, random_density
from . import __version__

OUT_ENV_VAR = "SPINTOMO_OUT"

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_IO = 3

VERIFY_SCOPES = ("table1", "eq7", "eq10", "all")


@dataclass(frozen=True)
class RunConfig:
    """Run description: model, chain size, state source, and statistics."""

    model: str = "xy"
    mode: str = "switchable"
    n: int = 2
    j: float = 1.0
    jz: float | None = None
    eps_z: float | None = None
    l_index: int = 2
    m_index: int = 1
    n_index: int = 1
    state_kind: str = "random_pure"   # random_pure | random_mixed | file
    state_seed: int = 1
    state_path: str | None = None
    shots: int = 0                    # 0 = exact probabilities
    seed: int = 0
    max_depth: int = DEFAULT_MAX_DEPTH
    mle: bool = True
    schema: int = 1

    def to_json(self) -> dict:
        return dict(sorted(asdict(self).items()))

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        fields = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**fields)

    def preset(self) -> ModelPreset:
        return make_preset(
            self.model, self.mode, j=self.j, jz=self.jz, eps_z=self.eps_z,
            l=self.l_index, m=self.m_index, n=self.n_index,
        )

    def state(self):
        if self.state_kind in ("random_pure", "random_mixed"):
            kind = "pure" if self.state_kind == "random_pure" else "mixed"
            return random_density(self.n, kind, self.state_seed)
        if self.state_kind == "file":
            if not self.state_path:
                raise ValueError("state_kind 'file' needs state_path")
            with open(self.state_path) as fh:
                return density_from_json(json.load(fh))
        raise ValueError(f"unknown state_kind {self.state_kind!r}")


def _load_config(path: str) -> RunConfig:
    with open(path) as fh:
        return RunConfig.from_json(json.load(fh))


def _write_json(path: Path, data: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")


def _outdir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV_VAR) or "."
    return Path(out)


# -- verification suites ----------------------------------------------------

def verify_closed_form(samples: int = 1000, seed: int = 20240) -> dict:
    """Randomized sweep comparing the closed-form two-qubit evolution with
    the numerical matrix exponential."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    skipped = 0
    for _ in range(samples):
        jx, jy, jz = rng.uniform(0.1, 2.0, size=3)
        ez = rng.uniform(0.0, 2.0)
        t = rng.uniform(0.0, 4.0)
        if ez > 0 and abs(jx - jy) < 1e-6:
            jy = jx + 0.5
        params = TwoQubitParams(jx=jx, jy=jy, jz=jz, eps_z=ez, t=t)
        try:
            u_closed = closed_form_pair_unitary(params)
        except ClosedFormInapplicable:
            skipped += 1
            continue
        u_num = evolve(pair_hamiltonian(jx, jy, jz, ez), t)
        worst = max(worst, float(np.linalg.norm(u_closed - u_num)))
    ok = worst <= 1e-8

    u1 = xy_pair_unitary()
    u1_num = evolve(pair_hamiltonian(1.0, 1.0, 0.0), math.pi / 8)
    u1_dev = float(np.max(np.abs(u1 - u1_num)))
    u2 = heisenberg_pair_unitary()
    u2_num = evolve(pair_hamiltonian(1.0, 1.0, 1.0), math.pi / 8)
    mag, phase = global_phase_match(u2_num, u2)
    return {
        "samples": samples,
        "skipped_inapplicable": skipped,
        "max_frobenius_deviation": worst,
        "xy_constant_max_deviation": u1_dev,
        "heisenberg_overlap": mag,
        "heisenberg_global_phase": [phase.real, phase.imag],
        "passed": bool(ok and u1_dev <= 1e-10 and mag >= 1 - 1e-10),
    }


def verify_chain(samples: int = 100, seed: int = 77) -> dict:
    """Three-qubit equivalent measurement and its probability formula.

    The computed expansion is -(1/sqrt2) X00 - (1/2) ZY0 + (1/2) ZZX; the
    published rendering of the same expansion carries coefficients half this
    size (its squared coefficients do not sum to 1), while the published
    probability formula agrees with the computed expansion. Both facts are
    recorded here.
    """
    from .measure import exact_probability
    from .states import to_bloch
    from .pauli import PauliString

    u1 = xy_pair_unitary()
    setting = make_setting(
        [gate_y(0), gate_pair(0, 1), gate_pair(1, 2)], pom_qubit=0, n=3, pair_unitary=u1
    )
    em = setting.em.to_dict()
    expected = {"X00": -1 / math.sqrt(2), "ZY0": -0.5, "ZZX": 0.5}
    em_ok = set(em) == set(expected) and all(abs(em[k] - v) < 1e-10 for k, v in expected.items())

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        rho = random_density(3, "mixed", int(rng.integers(0, 2**31)))
        b = to_bloch(rho)
        p = exact_probability(rho, setting, u1)
        r2 = math.sqrt(2)
        formula = (2 * r2 + 2 * b[PauliString.from_text("X00")]
                   + r2 * b[PauliString.from_text("ZY0")]
                   - r2 * b[PauliString.from_text("ZZX")]) / (4 * r2)
        worst = max(worst, abs(p - formula))
    return {
        "computed_em": em,
        "em_matches_probability_formula": em_ok,
        "printed_em_note": "published expansion prints these terms at half size "
                           "(squared coefficients would sum to 1/4); the probability "
                           "formula matches the computed expansion",
        "samples": samples,
        "max_probability_deviation": worst,
        "passed": bool(em_ok and worst <= 1e-10),
    }


def cmd_verify(args) -> int:
    scope = args.scope
    report: dict = {"schema": 1, "version": __version__, "scope": scope}
    ok = True
    if scope in ("eq7", "all"):
        r = verify_closed_form()
        report["closed_form"] = r
        ok &= r["passed"]
        print(f"closed-form sweep: max deviation {r['max_frobenius_deviation']:.3e} "
              f"({'pass' if r['passed'] else 'FAIL'})")
        ph = r["heisenberg_global_phase"]
        print(f"pair constants: xy dev {r['xy_constant_max_deviation']:.3e}, "
              f"heisenberg overlap {r['heisenberg_overlap']:.12f}, "
              f"measured phase {ph[0]:+.6f}{ph[1]:+.6f}i")
    if scope in ("table1", "all"):
        t = verify_operation_table(xy_pair_unitary(), heisenberg_pair_unitary())
        report["operation_table"] = t.to_json()
        ok &= t.internal_ok
        print(t.render())
    if scope in ("eq10", "all"):
        r = verify_chain()
        report["three_qubit_chain"] = r
        ok &= r["passed"]
        print(f"three-qubit chain: em ok {r['em_matches_probability_formula']}, "
              f"max probability deviation {r['max_probability_deviation']:.3e} "
              f"({'pass' if r['passed'] else 'FAIL'})")
    if args.out:
        _write_json(_outdir(args) / "verify_report.json", report)
    return EXIT_OK if ok else EXIT_VERIFY


# -- pipeline commands ------------------------------------------------------

def _build_plan(cfg: RunConfig):
    preset = cfg.preset()
    plan = plan_tomography(
        preset.pair_unitary(), cfg.n, max_depth=cfg.max_depth,
        model=cfg.model, mode=cfg.mode, tau=preset.tau,
    )
    check_triangular(plan)
    return preset, plan


def cmd_plan(args) -> int:
    cfg = _load_config(args.config)
    _, plan = _build_plan(cfg)
    out = _outdir(args)
    _write_json(out / "plan.json", plan_to_json(plan))
    print(f"plan: {len(plan.targets)} targets, {len(plan.settings)} settings -> {out / 'plan.json'}")
    return EXIT_OK


def _simulate(cfg: RunConfig, preset, plan, seed: int, shots: int):
    rho = cfg.state()
    pair_u = preset.pair_unitary()
    records = []
    for idx, setting in enumerate(plan.settings):
        if shots == 0:
            records.append(exact_record(rho, setting, idx, pair_u))
        else:
            records.append(sample(rho, setting, idx, shots, seed, pair_u))
    return rho, records


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    shots = args.shots if args.shots is not None else cfg.shots
    with open(args.plan) as fh:
        plan = plan_from_json(json.load(fh))
    preset = cfg.preset()
    _, records = _simulate(cfg, preset, plan, seed, shots)
    out = _outdir(args)
    out.mkdir(parents=True, exist_ok=True)
    (out / "records.jsonl").write_text(records_to_jsonl(records))
    print(f"simulate: {len(records)} records (shots={shots}) -> {out / 'records.jsonl'}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    cfg = _load_config(args.config)
    with open(args.plan) as fh:
        plan_json = json.load(fh)
    plan = plan_from_json(plan_json)
    records = records_from_jsonl(Path(args.records).read_text())
    truth = cfg.state() if args.with_truth else None
    result = reconstruct(plan, records, mle=cfg.mle, truth=truth)
    out = _outdir(args)
    seed = args.seed if args.seed is not None else cfg.seed
    _write_json(out / "report.json", result_to_json(result, plan_json, seed))
    if result.metrics:
        print(f"reconstruct: fidelity {result.metrics['fidelity']:.9f} -> {out / 'report.json'}")
    else:
        print(f"reconstruct -> {out / 'report.json'}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    shots = args.shots if args.shots is not None else cfg.shots
    preset, plan = _build_plan(cfg)
    plan_json = plan_to_json(plan)
    rho, records = _simulate(cfg, preset, plan, seed, shots)
    result = reconstruct(plan, records, mle=cfg.mle, truth=rho)
    out = _outdir(args)
    _write_json(out / "plan.json", plan_json)
    (out / "records.jsonl").write_text(records_to_jsonl(records))
    _write_json(out / "report.json", result_to_json(result, plan_json, seed))
    fid = result.metrics["fidelity"] if result.metrics else float("nan")
    print(f"pipeline: n={cfg.n} {cfg.model}/{cfg.mode} shots={shots} "
          f"fidelity={fid:.9f} -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spintomo",
        description="Spin-qubit state tomography: verification, planning, "
                    "measurement simulation, and reconstruction.",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run named identity/oracle check suites")
    v.add_argument("--scope", choices=VERIFY_SCOPES, default="all",
                   help="check suite: operation table, closed-form sweep, "
                        "three-qubit chain, or everything")
    v.add_argument("--out", help="directory for verify_report.json (optional)")
    v.set_defaults(fn=cmd_verify)

    p = sub.add_parser("plan", help="compute a tomography plan from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help=f"output dir (default ${OUT_ENV_VAR} or .)")
    p.set_defaults(fn=cmd_plan)

    s = sub.add_parser("simulate", help="sample shot records against a plan")
    s.add_argument("--config", required=True)
    s.add_argument("--plan", required=True)
    s.add_argument("--seed", type=int, help="master seed (overrides config)")
    s.add_argument("--shots", type=int, help="shots per setting (overrides config)")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_simulate)

    r = sub.add_parser("reconstruct", help="invert records into a state report")
    r.add_argument("--config", required=True)
    r.add_argument("--plan", required=True)
    r.add_argument("--records", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--with-truth", action="store_true",
                   help="include metrics against the config's state source")
    r.add_argument("--out")
    r.set_defaults(fn=cmd_reconstruct)

    pl = sub.add_parser("pipeline", help="plan + simulate + reconstruct in one run")
    pl.add_argument("--config", required=True)
    pl.add_argument("--seed", type=int)
    pl.add_argument("--shots", type=int)
    pl.add_argument("--out")
    pl.set_defaults(fn=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (PlanningError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ValueError, TimingError, KeyError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AssertionError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
