import json
from pathlib import Path

import pytest

from spintomo.cli import RunConfig, main


def write_config(path: Path, **overrides) -> Path:
    cfg = RunConfig(**overrides)
    p = path / "config.json"
    p.write_text(json.dumps(cfg.to_json(), sort_keys=True, indent=2))
    return p


def read_tree(out: Path) -> dict[str, bytes]:
    return {f.name: f.read_bytes() for f in sorted(out.iterdir()) if f.is_file()}


class TestConfig:
    def test_round_trip(self):
        cfg = RunConfig(model="xxz", n=3, shots=500, seed=9, jz=16.0)
        again = RunConfig.from_json(json.loads(json.dumps(cfg.to_json())))
        assert again == cfg

    def test_ignores_unknown_keys(self):
        cfg = RunConfig.from_json({"model": "xy", "comment": "hi"})
        assert cfg.model == "xy"


class TestVerify:
    def test_verify_all_passes(self, capsys):
        assert main(["verify", "--scope", "all"]) == 0
        out = capsys.readouterr().out
        assert "17/18 rows match" in out

    def test_scopes(self):
        for scope in ("table1", "eq7", "eq10"):
            assert main(["verify", "--scope", scope]) == 0

    def test_writes_report(self, tmp_path):
        assert main(["verify", "--scope", "table1", "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["operation_table"]["matches"] == 17


class TestPipeline:
    def test_exact_pipeline_fidelity(self, tmp_path, capsys):
        cfg = write_config(tmp_path, model="xy", n=2, shots=0, mle=False)
        out = tmp_path / "run"
        assert main(["pipeline", "--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["metrics"]["fidelity"] >= 1 - 1e-9
        plan = json.loads((out / "plan.json").read_text())
        assert len(plan["targets"]) == 15

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, model="xy", n=1, shots=10**5, seed=33, mle=True)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["pipeline", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["pipeline", "--config", str(cfg), "--out", str(out2)]) == 0
        assert read_tree(out1) == read_tree(out2)

    def test_seed_flag_overrides_config(self, tmp_path):
        cfg = write_config(tmp_path, model="xy", n=1, shots=1000, seed=1)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["pipeline", "--config", str(cfg), "--seed", "2", "--out", str(out1)]) == 0
        assert main(["pipeline", "--config", str(cfg), "--out", str(out2)]) == 0
        r1 = (out1 / "records.jsonl").read_bytes()
        r2 = (out2 / "records.jsonl").read_bytes()
        assert r1 != r2

    def test_staged_commands_match_pipeline(self, tmp_path):
        cfg = write_config(tmp_path, model="heisenberg", n=2, shots=2000, seed=7)
        pipe_out = tmp_path / "pipe"
        assert main(["pipeline", "--config", str(cfg), "--out", str(pipe_out)]) == 0
        staged = tmp_path / "staged"
        assert main(["plan", "--config", str(cfg), "--out", str(staged)]) == 0
        assert main(["simulate", "--config", str(cfg), "--plan", str(staged / "plan.json"),
                     "--out", str(staged)]) == 0
        assert main(["reconstruct", "--config", str(cfg), "--plan", str(staged / "plan.json"),
                     "--records", str(staged / "records.jsonl"), "--with-truth",
                     "--out", str(staged)]) == 0
        assert (staged / "plan.json").read_bytes() == (pipe_out / "plan.json").read_bytes()
        assert (staged / "records.jsonl").read_bytes() == (pipe_out / "records.jsonl").read_bytes()
        assert (staged / "report.json").read_bytes() == (pipe_out / "report.json").read_bytes()

    def test_plan_n3_has_63_targets(self, tmp_path):
        cfg = write_config(tmp_path, model="xy", n=3, max_depth=4)
        out = tmp_path / "plan3"
        assert main(["plan", "--config", str(cfg), "--out", str(out)]) == 0
        plan = json.loads((out / "plan.json").read_text())
        assert len(plan["targets"]) == 63
        assert len(plan["solve_order"]) == 63


class TestExitCodes:
    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["plan", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path)]) == 3

    def test_bad_json_is_usage_error(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert main(["plan", "--config", str(p), "--out", str(tmp_path)]) == 2

    def test_unknown_model_is_usage_error(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"model": "ising"}))
        assert main(["plan", "--config", str(p), "--out", str(tmp_path)]) == 2

    def test_unplannable_depth_fails_verification(self, tmp_path):
        cfg = write_config(tmp_path, model="heisenberg", n=2, max_depth=2)
        assert main(["plan", "--config", str(cfg), "--out", str(tmp_path)]) == 1

    def test_usage_error_on_bad_flags(self):
        assert main(["verify", "--scope", "bogus"]) == 2

    def test_env_var_default_outdir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SPINTOMO_OUT", str(tmp_path / "envout"))
        cfg = write_config(tmp_path, model="xy", n=1)
        assert main(["plan", "--config", str(cfg)]) == 0
        assert (tmp_path / "envout" / "plan.json").exists()
