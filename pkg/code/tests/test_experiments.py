import numpy as np
import pytest

from models.model_spec import TraceGenConfig
from models.run_model import LADDER, Method, RunConfig
from services.experiment_service import check_work_invariance, layouts_for_methods, run_ladder, sweep_grid
from services.placement_service import baseline_layout
from services.profiling_service import profile_trace
from services.simulation_service import simulate_step
from services.trace_generation_service import generate_trace
from utils.errors import SimulationInvariantError
from utils.preset_loader import load_hardware_preset, load_model_preset

RUN = RunConfig(batch_samples=4, micro_batches=2, seq_len=32)


def test_ladder_rows_and_normalization(tiny_model, tiny_hw, tiny_trace):
    ladder = run_ladder(tiny_model, tiny_hw, RUN, tiny_trace)
    assert [r.method for r in ladder.rows] == LADDER
    base, a, b, c = (ladder.row(m) for m in LADDER)
    assert base.normalized_latency == 1.0
    assert a.normalized_latency < 1.0
    assert b.latency_s <= a.latency_s
    assert a.c_t == tiny_model.top_k
    assert c.c_t < b.c_t <= a.c_t
    assert ladder.reports[0].total_flops == ladder.reports[1].total_flops


def test_profiles_are_reused(tiny_model, tiny_hw, tiny_trace):
    profiles = profile_trace(tiny_trace)
    layouts = layouts_for_methods(tiny_model, tiny_hw, tiny_trace, LADDER, profiles=profiles)
    assert layouts[Method.BASELINE] == layouts[Method.MOZART_B] == [
        baseline_layout(tiny_model, tiny_hw, l) for l in range(tiny_model.n_layers)]
    assert layouts[Method.MOZART_C] != layouts[Method.MOZART_B]
    fixed = run_ladder(tiny_model, tiny_hw, RUN, tiny_trace, mozart_layouts=layouts[Method.MOZART_C])
    inline = run_ladder(tiny_model, tiny_hw, RUN, tiny_trace, profiles=profiles)
    assert fixed.row(Method.MOZART_C).latency_s == inline.row(Method.MOZART_C).latency_s


def test_work_invariance_flags_lost_work(tiny_model, tiny_hw, tiny_trace):
    ladder = run_ladder(tiny_model, tiny_hw, RUN, tiny_trace)
    base, a = ladder.reports[0], ladder.reports[1]
    with pytest.raises(SimulationInvariantError):
        check_work_invariance(base, a.model_copy(update={"total_flops": a.total_flops + 10}))


def test_sweep_grid_shape_and_trends(tiny_model, tiny_hw, tiny_trace):
    report = sweep_grid(tiny_model, tiny_hw, RUN, tiny_trace, seq_lens=[16, 32], dram_kinds=["HBM2", "SSD"])
    df = report.to_frame()
    assert len(df) == 16
    assert (df[df["method"] == "Baseline"]["speedup_vs_baseline"] == 1.0).all()
    lat = df.set_index(["method", "dram_kind", "seq_len"])["latency_s"]
    for m in LADDER:
        for s in (16, 32):
            assert lat[(m.value, "HBM2", s)] < lat[(m.value, "SSD", s)]
    for dram in ("HBM2", "SSD"):
        assert lat[("Baseline", dram, 16)] < lat[("Baseline", dram, 32)]


def test_sweep_with_parallel_workers(tiny_model, tiny_hw, tiny_trace):
    serial = sweep_grid(tiny_model, tiny_hw, RUN, tiny_trace, seq_lens=[16], dram_kinds=["HBM2"])
    parallel = sweep_grid(tiny_model, tiny_hw, RUN, tiny_trace, seq_lens=[16], dram_kinds=["HBM2"], jobs=2)
    assert [c.latency_s for c in serial.cells] == [c.latency_s for c in parallel.cells]


def test_empty_sweep(tiny_model, tiny_hw, tiny_trace):
    report = sweep_grid(tiny_model, tiny_hw, RUN, tiny_trace, seq_lens=[], dram_kinds=["HBM2"])
    assert report.cells == [] and report.to_frame().empty


# ---------- statistical suites ----------

STEP_RUN = RunConfig(batch_samples=32, micro_batches=4, seq_len=256)
LADDER_SEEDS = 50


def _planted(model, seed: int, n_tokens: int = 8192):
    return generate_trace(model, TraceGenConfig(seed=seed, skew=1.0, n_collab_groups=16, collab_strength=0.8,
                                                n_tokens=n_tokens))


@pytest.mark.slow
@pytest.mark.parametrize("preset", ["deepseek", "qwen3"])
def test_ladder_ordering_over_seeds(preset):
    model = load_model_preset(preset).model_copy(update={"n_layers": 2})
    hw = load_hardware_preset(preset)
    ordered = 0
    for seed in range(LADDER_SEEDS):
        ladder = run_ladder(model, hw, STEP_RUN, _planted(model, seed))
        base, a, b, c = (ladder.row(m) for m in LADDER)
        if base.latency_s > a.latency_s > b.latency_s >= c.latency_s:
            ordered += 1
        assert c.c_t <= b.c_t <= a.c_t == model.top_k, f"seed {seed}"
    assert ordered >= 0.95 * LADDER_SEEDS


@pytest.mark.slow
def test_dedup_gain_survives_ssd():
    model = load_model_preset("qwen3").model_copy(update={"n_layers": 2})
    hw = load_hardware_preset("qwen3", dram="SSD")
    layouts = [baseline_layout(model, hw, l) for l in range(model.n_layers)]
    for seed in range(5):
        trace = _planted(model, seed)
        a, b = (simulate_step(model, hw, STEP_RUN.model_copy(update={"method": m}), layouts, trace,
                              with_timeline=False)[0] for m in (Method.MOZART_A, Method.MOZART_B))
        assert b.c_t_mean < a.c_t_mean
        assert b.latency_s < a.latency_s, f"seed {seed}"


@pytest.mark.slow
def test_placement_gains_vanish_on_uniform_routing(olmoe_2layer, olmoe_hw):
    gaps = []
    for seed in range(20):
        trace = generate_trace(olmoe_2layer, TraceGenConfig(seed=seed, skew=0.0, n_tokens=4096))
        ladder = run_ladder(olmoe_2layer, olmoe_hw, STEP_RUN, trace)
        b, c = ladder.row(Method.MOZART_B), ladder.row(Method.MOZART_C)
        gaps.append(abs(c.latency_s - b.latency_s) / b.latency_s)
    assert np.mean(gaps) < 0.03


@pytest.mark.slow
@pytest.mark.parametrize("preset", ["olmoe", "deepseek"])
def test_sweep_trends(preset):
    model = load_model_preset(preset).model_copy(update={"n_layers": 2})
    hw = load_hardware_preset(preset)
    trace = _planted(model, seed=11, n_tokens=16384)
    df = sweep_grid(model, hw, STEP_RUN, trace, seq_lens=[128, 256, 512],
                    dram_kinds=["HBM2", "SSD"]).to_frame()
    assert len(df) == 24
    lat = df.set_index(["method", "dram_kind", "seq_len"])["latency_s"]
    for m in LADDER:
        for dram in ("HBM2", "SSD"):
            assert lat[(m.value, dram, 128)] < lat[(m.value, dram, 256)] < lat[(m.value, dram, 512)]
        for s in (128, 256, 512):
            assert lat[(m.value, "HBM2", s)] < lat[(m.value, "SSD", s)]
    # a faster memory leaves more of the step to the placement
    speedup = df[df["method"] == Method.MOZART_C.value].set_index(["dram_kind", "seq_len"])["speedup_vs_baseline"]
    for s in (128, 256, 512):
        assert speedup[("HBM2", s)] > speedup[("SSD", s)] > 1.0
