import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Literal, Sequence

import numpy as np

from config.settings import SETTINGS
from models.hardware_model import HardwareSpec
from models.layout_model import ClusterAssignment, ExpertLayout, PlacementObjective
from models.model_spec import ModelSpec
from models.profile_model import ExpertProfile
from services.allocation_service import allocate_clusters, imbalance
from services.clustering_service import cluster_experts
from utils.errors import DivisibilityError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".services.placement_service")


def rank_loading_priority(assignment: ClusterAssignment, profile: ExpertProfile) -> List[List[int]]:
    """Per group, clusters by descending summed workload; ties by lowest member index."""
    loads = [float(profile.v[list(c)].sum()) for c in assignment.clusters]
    return [
        sorted(assignment.members_of(g), key=lambda c: (-loads[c], min(assignment.clusters[c])))
        for g in range(assignment.n_groups)
    ]


def layout_from_assignment(layer: int, assignment: ClusterAssignment, load_priority: List[List[int]],
                           hw: HardwareSpec) -> ExpertLayout:
    """Clusters of group g land on its chiplets in priority order: chiplet = g * per_group + rank."""
    cpg = hw.chiplets_per_group
    chiplet_of_cluster = [0] * len(assignment.clusters)
    for g, order in enumerate(load_priority):
        for rank, c in enumerate(order):
            chiplet_of_cluster[c] = g * cpg + rank
    return ExpertLayout(
        layer=layer,
        clusters=assignment.clusters,
        chiplet_of_cluster=chiplet_of_cluster,
        group_of_chiplet=hw.group_of_chiplet,
        load_priority=load_priority,
    )


def _check_divisible(n_experts: int, hw: HardwareSpec) -> int:
    if n_experts % hw.n_moe_chiplets:
        raise DivisibilityError(
            f"{n_experts} experts cannot be split evenly over {hw.n_moe_chiplets} chiplets; "
            f"pick n_moe_chiplets dividing {n_experts}",
            n_experts=n_experts, n_chiplets=hw.n_moe_chiplets,
        )
    return n_experts // hw.n_moe_chiplets


def baseline_layout(model: ModelSpec, hw: HardwareSpec, layer: int = 0) -> ExpertLayout:
    """Contiguous placement that ignores profiles: expert i on chiplet i // (N_e / N_c)."""
    per_chiplet = _check_divisible(model.n_routed_experts, hw)
    n_c, cpg = hw.n_moe_chiplets, hw.chiplets_per_group
    return ExpertLayout(
        layer=layer,
        clusters=[list(range(c * per_chiplet, (c + 1) * per_chiplet)) for c in range(n_c)],
        chiplet_of_cluster=list(range(n_c)),
        group_of_chiplet=hw.group_of_chiplet,
        load_priority=[list(range(g * cpg, (g + 1) * cpg)) for g in range(hw.n_groups)],
    )


def random_layout(model: ModelSpec, hw: HardwareSpec, seed: int, layer: int = 0) -> ExpertLayout:
    """Equal-size random partition, contiguous groups. Comparator for clustering quality."""
    per_chiplet = _check_divisible(model.n_routed_experts, hw)
    perm = np.random.default_rng(seed).permutation(model.n_routed_experts)
    clusters = [sorted(int(e) for e in perm[c * per_chiplet:(c + 1) * per_chiplet]) for c in range(hw.n_moe_chiplets)]
    cpg = hw.chiplets_per_group
    return ExpertLayout(
        layer=layer,
        clusters=clusters,
        chiplet_of_cluster=list(range(hw.n_moe_chiplets)),
        group_of_chiplet=hw.group_of_chiplet,
        load_priority=[list(range(g * cpg, (g + 1) * cpg)) for g in range(hw.n_groups)],
    )


def mozart_layout(profile: ExpertProfile, hw: HardwareSpec, mode: Literal["exact", "greedy"] = "exact") -> ExpertLayout:
    clusters = cluster_experts(profile, hw.n_moe_chiplets)
    assignment = allocate_clusters(clusters, profile, hw.n_groups, mode)
    priority = rank_loading_priority(assignment, profile)
    return layout_from_assignment(profile.layer, assignment, priority, hw)


def _pair_mean(p: np.ndarray, mask: np.ndarray) -> float:
    n = int(mask.sum())
    return float(p[mask].sum() / n) if n else 0.0


def placement_objective(layout: ExpertLayout, profile: ExpertProfile) -> PlacementObjective:
    n = profile.n_experts
    cluster_of = np.empty(n, dtype=np.intp)
    for c, members in enumerate(layout.clusters):
        cluster_of[members] = c
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    same = cluster_of[:, None] == cluster_of[None, :]
    group_loads = [0.0] * layout.n_groups
    for c, members in enumerate(layout.clusters):
        group_loads[layout.group_of_cluster(c)] += float(profile.v[members].sum())
    return PlacementObjective(
        layer=layout.layer,
        intra_collab=_pair_mean(profile.p, upper & same),
        inter_collab=_pair_mean(profile.p, upper & ~same),
        group_imbalance=imbalance(group_loads),
        group_loads=group_loads,
    )


def _place_one(args) -> ExpertLayout:
    profile, hw, mode = args
    return mozart_layout(profile, hw, mode)


class PlacementService:
    """Per-layer placement. Layers are independent; `jobs > 1` fans them out to processes."""

    def __init__(self, hw: HardwareSpec, mode: Literal["exact", "greedy"] = "exact", jobs: int = 1):
        self.hw = hw
        self.mode = mode
        self.jobs = jobs
        log.info({"event": "placement_service_ready", "mode": mode, "chiplets": hw.n_moe_chiplets,
                  "groups": hw.n_groups, "jobs": jobs})

    def place(self, profiles: Sequence[ExpertProfile]) -> List[ExpertLayout]:
        work = [(p, self.hw, self.mode) for p in profiles]
        if self.jobs > 1 and len(work) > 1:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                layouts = list(pool.map(_place_one, work))
        else:
            layouts = [_place_one(w) for w in work]
        log.info({"event": "layouts_computed", "layers": len(layouts), "mode": self.mode})
        return layouts

    def baseline(self, model: ModelSpec) -> List[ExpertLayout]:
        return [baseline_layout(model, self.hw, layer) for layer in range(model.n_layers)]

    def objectives(self, layouts: Sequence[ExpertLayout], profiles: Sequence[ExpertProfile]) -> List[PlacementObjective]:
        return [placement_objective(l, p) for l, p in zip(layouts, profiles)]
