import json

import pytest
import yaml
from deepdiff import DeepDiff

from models.model_spec import TraceGenConfig
from mozart_cli import main
from services.trace_generation_service import generate_trace
from tools.trace_codec import write_trace
from utils.preset_loader import load_model_preset


def _experiment(tmp_path, name="small", **extra) -> str:
    doc = {
        "name": name,
        "model": {"preset": "olmoe", "n_layers": 2},
        "hardware": "olmoe",
        "trace": {"generate": {"seed": 1, "skew": 1.0, "n_collab_groups": 16, "collab_strength": 0.8,
                               "n_tokens": 512}},
        "run": {"batch_samples": 4, "micro_batches": 2, "seq_len": 64},
    }
    doc.update(extra)
    path = tmp_path / f"{name}.yaml"
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def _cli(*args) -> int:
    return main([*args, "--no-log-file", "--log-level", "WARNING"])


def test_profile_writes_one_file_per_layer(tmp_path):
    cfg = _experiment(tmp_path, model="olmoe")
    assert _cli("profile", "--config", cfg, "--out", str(tmp_path / "out")) == 0
    files = sorted((tmp_path / "out" / "profiles").glob("layer_*.json"))
    assert len(files) == 16
    doc = json.loads(files[0].read_text())
    assert doc["layer"] == 0 and len(doc["v"]) == 64


def test_same_seed_same_bytes(tmp_path):
    cfg = _experiment(tmp_path)
    for out in ("a", "b"):
        assert _cli("place", "--config", cfg, "--out", str(tmp_path / out), "--seed", "4") == 0
    first = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert first
    for rel in first:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_saved_layouts_reproduce_inline_placement(tmp_path):
    cfg = _experiment(tmp_path)
    assert _cli("place", "--config", cfg, "--out", str(tmp_path / "placed")) == 0
    assert _cli("simulate", "--config", cfg, "--out", str(tmp_path / "inline"), "--format", "json") == 0
    saved = _experiment(tmp_path, name="saved", run={"batch_samples": 4, "micro_batches": 2, "seq_len": 64,
                                                     "layout_file": str(tmp_path / "placed" / "layouts")})
    assert _cli("simulate", "--config", saved, "--out", str(tmp_path / "saved"), "--format", "json") == 0
    inline = json.loads((tmp_path / "inline" / "step_report.json").read_text())
    from_file = json.loads((tmp_path / "saved" / "step_report.json").read_text())
    assert DeepDiff(inline, from_file) == {}


def test_ladder_writes_reports(tmp_path):
    cfg = _experiment(tmp_path)
    out = tmp_path / "ladder"
    assert _cli("ladder", "--config", cfg, "--out", str(out)) == 0
    doc = json.loads((out / "ladder.json").read_text())
    assert [r["method"] for r in doc["rows"]] == ["Baseline", "MozartA", "MozartB", "MozartC"]
    assert doc["rows"][0]["normalized_latency"] == 1.0
    assert (out / "ladder.csv").exists()
    assert "| MozartC |" in (out / "ladder.md").read_text()


def test_ladder_rerun_same_csv_bytes(tmp_path):
    cfg = _experiment(tmp_path)
    for out in ("r1", "r2"):
        assert _cli("ladder", "--config", cfg, "--out", str(tmp_path / out), "--format", "csv") == 0
    assert (tmp_path / "r1" / "ladder.csv").read_bytes() == (tmp_path / "r2" / "ladder.csv").read_bytes()


def test_sweep_skips_placement_without_specialized_methods(tmp_path):
    cfg = _experiment(tmp_path, sweep={"seq_lens": [32], "dram_kinds": ["HBM2"], "methods": ["Baseline", "MozartA"]})
    out = tmp_path / "sweep"
    assert _cli("sweep", "--config", cfg, "--out", str(out), "--format", "csv") == 0
    assert (out / "sweep.csv").exists() and not (out / "sweep.json").exists()
    assert not (out / "layouts").exists()


def test_missing_trace_file_exits_3(tmp_path, capsys):
    missing = tmp_path / "absent.bin"
    cfg = _experiment(tmp_path, trace={"file": str(missing)})
    assert _cli("simulate", "--config", cfg, "--out", str(tmp_path / "out")) == 3
    assert str(missing) in capsys.readouterr().err


def test_indivisible_topology_exits_2(tmp_path, capsys):
    cfg = _experiment(tmp_path, model={"preset": "olmoe", "n_layers": 2, "n_routed_experts": 10, "top_k": 2},
                      hardware={"preset": "olmoe", "n_moe_chiplets": 4, "n_groups": 2})
    assert _cli("place", "--config", cfg, "--out", str(tmp_path / "out")) == 2
    assert "error:" in capsys.readouterr().err


def test_bad_jobs_exits_2(tmp_path):
    assert _cli("ladder", "--config", _experiment(tmp_path), "--jobs", "0") == 2


def test_validate_trace(tmp_path, capsys):
    model = load_model_preset("olmoe").model_copy(update={"n_layers": 2})
    path = write_trace(generate_trace(model, TraceGenConfig(seed=2, n_tokens=100)), tmp_path / "t.bin")
    assert main(["validate-trace", "--trace", str(path), "--no-log-file"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["n_tokens"] == 100 and summary["n_layers"] == 2 and summary["top_k"] == 8


def test_validate_trace_against_wrong_model(tmp_path):
    model = load_model_preset("olmoe").model_copy(update={"n_layers": 2})
    path = write_trace(generate_trace(model, TraceGenConfig(seed=2, n_tokens=10)), tmp_path / "t.bin")
    assert main(["validate-trace", "--trace", str(path), "--model", "qwen3", "--no-log-file"]) != 0


def test_subcommand_is_required():
    with pytest.raises(SystemExit):
        main([])
