import pytest
import yaml

from config.settings import SETTINGS
from models.hardware_model import DRAM_BANDWIDTH, HardwareSpec
from models.run_model import Method
from utils.errors import ConfigError, PresetNotFoundError
from utils.preset_loader import deep_merge, load_experiment, load_hardware_preset, load_model_preset


@pytest.mark.parametrize("alias", ["qwen3", "Qwen3-30B-A3B", "qwen3_30b_a3b", "qwen3-30b-a3b"])
def test_model_aliases(alias):
    m = load_model_preset(alias)
    assert m.name == "qwen3-30b-a3b"
    assert (m.n_routed_experts, m.top_k, m.n_layers) == (128, 8, 48)


def test_hardware_presets():
    olmoe = load_hardware_preset("olmoe")
    assert (olmoe.tiles_per_chiplet, olmoe.attention_tiles, olmoe.pes_per_sa) == (49, 64, 256)
    assert olmoe.sram_capacity("attention") == 64 * 2265000
    ssd = load_hardware_preset("deepseek", dram="SSD")
    assert ssd.dram.kind == "SSD" and ssd.dram.bandwidth_bytes_per_s == 15.8e9
    assert ssd.group_of_chiplet == [0] * 4 + [1] * 4 + [2] * 4 + [3] * 4


def test_unknown_preset():
    with pytest.raises(PresetNotFoundError) as exc:
        load_model_preset("mixtral")
    assert "qwen3-30b-a3b" in exc.value.message


def test_deep_merge_keeps_siblings():
    merged = deep_merge({"dram": {"kind": "HBM2", "attention_channels": 2}}, {"dram": {"kind": "SSD"}})
    assert merged == {"dram": {"kind": "SSD", "attention_channels": 2}}


@pytest.mark.parametrize("path", sorted(SETTINGS.EXPERIMENTS_DIR.glob("*.yaml")))
def test_shipped_experiments_load(path):
    cfg = load_experiment(path)
    assert cfg.name == path.stem
    assert cfg.model.n_routed_experts % cfg.hardware.n_moe_chiplets == 0


def test_preset_overrides_and_defaults():
    cfg = load_experiment(SETTINGS.EXPERIMENTS_DIR / "deepseek_ssd_override.yaml")
    assert cfg.model.n_layers == 4 and cfg.model.top_k == 6
    assert cfg.hardware.dram.kind == "SSD"
    assert cfg.hardware.dram.attention_channels == 2
    assert cfg.run.method == Method.MOZART_C and cfg.run.seq_len == 128
    assert cfg.run.micro_batches == 4
    assert cfg.trace.generate.seed == 3
    assert cfg.placement.mode == "greedy"


def test_inline_overrides_replace_trace_source(tmp_path):
    cfg = load_experiment(overrides={"model": "olmoe", "hardware": "olmoe", "trace": {"file": str(tmp_path / "t.bin")}})
    assert cfg.trace.generate is None and cfg.trace.file.endswith("t.bin")


def test_trace_needs_exactly_one_source(tmp_path):
    doc = {"model": "olmoe", "hardware": "olmoe",
           "trace": {"file": "a.bin", "generate": {"seed": 1, "n_tokens": 8}}}
    path = tmp_path / "both.yaml"
    path.write_text(yaml.safe_dump(doc))
    with pytest.raises(ConfigError):
        load_experiment(path)


def test_indivisible_topology(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump({"model": {"preset": "olmoe", "n_routed_experts": 10, "top_k": 2},
                                    "hardware": {"preset": "olmoe", "n_moe_chiplets": 4, "n_groups": 2}}))
    with pytest.raises(ConfigError) as exc:
        load_experiment(path)
    assert "10 experts" in exc.value.message


def test_missing_or_broken_files(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment(tmp_path / "nope.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("model: [olmoe\n")
    with pytest.raises(ConfigError):
        load_experiment(broken)
    no_model = tmp_path / "no_model.yaml"
    no_model.write_text("hardware: olmoe\n")
    with pytest.raises(ConfigError):
        load_experiment(no_model)


@pytest.mark.parametrize("name,dram", [("qwen3", "HBM2"), ("olmoe", "SSD"), ("deepseek", "HBM2")])
def test_hardware_spec_survives_serialization(name, dram):
    hw = load_hardware_preset(name, dram=dram)
    again = HardwareSpec.model_validate_json(hw.model_dump_json())
    assert again == hw
    assert again.link_2p5d.links_per_edge == 192
    assert again.group_of_chiplet == hw.group_of_chiplet


def test_hardware_presets_carry_only_read_sections():
    doc = yaml.safe_load(SETTINGS.HARDWARE_PRESETS_PATH.read_text())
    assert set(doc) == {"defaults", "hardware", "aliases"}
    for kind, bandwidth in DRAM_BANDWIDTH.items():
        assert load_hardware_preset("olmoe", dram=kind).dram.bandwidth_bytes_per_s == bandwidth
