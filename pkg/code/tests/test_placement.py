import numpy as np
import pytest

from conftest import make_profile
from models.layout_model import ClusterAssignment
from models.model_spec import TraceGenConfig
from reports.report_writer import layout_from_json, layout_to_json, read_layouts, write_layouts
from services.placement_service import (
    PlacementService, baseline_layout, mozart_layout, placement_objective, random_layout, rank_loading_priority,
)
from services.profiling_service import profile_trace
from services.trace_generation_service import generate_trace
from utils.errors import DivisibilityError
from utils.preset_loader import load_hardware_preset, load_model_preset


def _assignment(clusters, group_of_cluster, n_groups):
    return ClusterAssignment(clusters=clusters, group_of_cluster=group_of_cluster, cluster_loads=[0.0] * len(clusters),
                             group_loads=[0.0] * n_groups, objective=0.0, mode="exact")


def test_heavier_cluster_streams_first():
    prof = make_profile(np.zeros((4, 4), dtype=np.int64), v=[0.2, 0.1, 0.3, 0.4])
    # cluster 0 = {0,1} -> 0.3, cluster 1 = {2,3} -> 0.7
    order = rank_loading_priority(_assignment([[0, 1], [2, 3]], [0, 0], 1), prof)
    assert order == [[1, 0]]


def test_equal_loads_order_by_lowest_member():
    prof = make_profile(np.zeros((6, 6), dtype=np.int64))
    order = rank_loading_priority(_assignment([[4, 5], [0, 3], [1, 2]], [0, 0, 0], 1), prof)
    assert order == [[1, 2, 0]]


def test_baseline_layout_is_contiguous(tiny_hw):
    deepseek = load_model_preset("deepseek")
    hw = load_hardware_preset("deepseek")
    layout = baseline_layout(deepseek, hw)
    assert layout.clusters[0] == [0, 1, 2, 3]
    assert layout.expert_to_chiplet()[63] == 15

    small = deepseek.model_copy(update={"n_routed_experts": 8})
    hw2 = hw.model_copy(update={"n_moe_chiplets": 4, "n_groups": 2})
    layout = baseline_layout(small, hw2)
    group0 = [e for c in range(4) if layout.group_of_cluster(c) == 0 for e in layout.clusters[c]]
    assert sorted(group0) == [0, 1, 2, 3]
    assert [layout.chiplet_of_cluster[c] for c in range(4) if layout.group_of_cluster(c) == 0] == [0, 1]


def test_indivisible_expert_count(tiny_hw, tiny_model):
    with pytest.raises(DivisibilityError):
        baseline_layout(tiny_model.model_copy(update={"n_routed_experts": 10}), tiny_hw)


def test_random_layout_is_valid_and_seeded(tiny_model, tiny_hw):
    a = random_layout(tiny_model, tiny_hw, seed=3)
    b = random_layout(tiny_model, tiny_hw, seed=3)
    assert a == b
    assert sorted(e for cl in a.clusters for e in cl) == list(range(16))


def test_uniform_deepseek_pipeline_balances_groups():
    model = load_model_preset("deepseek").model_copy(update={"n_layers": 1})
    hw = load_hardware_preset("deepseek")
    trace = generate_trace(model, TraceGenConfig(seed=0, skew=0.0, n_tokens=20_000))
    prof = profile_trace(trace)[0]
    layout = mozart_layout(prof, hw, "exact")
    assert len(layout.clusters) == 16 and {len(c) for c in layout.clusters} == {4}
    for g, order in enumerate(layout.load_priority):
        assert len(order) == 4 and len(set(order)) == 4
        assert all(layout.group_of_cluster(c) == g for c in order)
    obj = placement_objective(layout, prof)
    assert all(abs(load - 0.25) <= 0.02 for load in obj.group_loads)


def test_planted_communities_beat_random_layout(tiny_model, tiny_hw):
    trace = generate_trace(tiny_model, TraceGenConfig(seed=2, skew=0.2, n_collab_groups=4,
                                                      collab_strength=1.0, n_tokens=4000))
    prof = profile_trace(trace)[0]
    ours = placement_objective(mozart_layout(prof, tiny_hw), prof)
    rand = placement_objective(random_layout(tiny_model, tiny_hw, seed=0), prof)
    assert ours.intra_collab > rand.intra_collab
    assert ours.inter_collab < rand.inter_collab


def test_priority_matches_chiplet_rank(tiny_trace, tiny_hw):
    layout = mozart_layout(profile_trace(tiny_trace)[0], tiny_hw)
    cpg = tiny_hw.chiplets_per_group
    for g, order in enumerate(layout.load_priority):
        assert [layout.chiplet_of_cluster[c] for c in order] == list(range(g * cpg, (g + 1) * cpg))


def test_service_places_every_layer_and_files_round_trip(tmp_path, tiny_trace, tiny_hw):
    placer = PlacementService(tiny_hw, "greedy")
    profiles = profile_trace(tiny_trace)
    layouts = placer.place(profiles)
    assert [l.layer for l in layouts] == [0, 1]
    assert layout_from_json(layout_to_json(layouts[1]), tiny_hw.group_of_chiplet) == layouts[1]

    write_layouts(layouts, placer.objectives(layouts, profiles), tmp_path)
    assert read_layouts(tmp_path / "layouts", tiny_hw.group_of_chiplet) == layouts
    assert (tmp_path / "layouts" / "placement_objective.csv").exists()
