import logging
from itertools import combinations
from typing import List, Literal, Sequence

import numpy as np

from config.settings import SETTINGS
from models.layout_model import ClusterAssignment
from models.profile_model import ExpertProfile
from utils.errors import DivisibilityError, PlacementError, SolverSizeError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".services.allocation_service")

EXACT_MAX_CLUSTERS = 16
EXACT_MAX_GROUPS = 4


def cluster_workloads(clusters: Sequence[Sequence[int]], profile: ExpertProfile) -> np.ndarray:
    return np.array([float(profile.v[list(c)].sum()) for c in clusters], dtype=np.float64)


def imbalance(group_loads: Sequence[float]) -> float:
    """L1 distance of the group loads from the even split 1/N_g."""
    target = 1.0 / len(group_loads)
    return float(sum(abs(x - target) for x in group_loads))


def _group_loads(loads: np.ndarray, group_of_cluster: Sequence[int], n_groups: int) -> List[float]:
    out = [0.0] * n_groups
    for c, g in enumerate(group_of_cluster):
        out[g] += float(loads[c])
    return out


def _exact(loads: np.ndarray, n_groups: int) -> List[int]:
    """
    Memoized search over canonical balanced partitions: the lowest unassigned
    cluster always opens the next group, so each partition is visited once.
    The L1 objective is separable per group, so best(remaining) is well defined.
    """
    n = len(loads)
    size = n // n_groups
    target = 1.0 / n_groups
    subsets = list(combinations(range(n), size))
    masks = np.array([sum(1 << i for i in s) for s in subsets], dtype=np.int64)
    cost = np.abs(np.array([loads[list(s)].sum() for s in subsets]) - target)
    first = np.array([s[0] for s in subsets], dtype=np.int64)
    by_first = {b: np.flatnonzero(first == b) for b in range(n)}

    full = (1 << n) - 1
    best = np.full(1 << n, np.inf)
    choice = np.full(1 << n, -1, dtype=np.int64)
    best[0] = 0.0
    all_masks = np.arange(1 << n, dtype=np.int64)
    popcount = np.zeros(1 << n, dtype=np.int64)
    for bit in range(n):
        popcount += (all_masks >> bit) & 1

    for filled in range(size, n + 1, size):
        for remaining in all_masks[popcount == filled]:
            remaining = int(remaining)
            low = (remaining & -remaining).bit_length() - 1
            cand = by_first[low]
            cand = cand[(masks[cand] & ~remaining) == 0]
            total = cost[cand] + best[remaining ^ masks[cand]]
            k = int(np.argmin(total))  # first minimum == first in combinations order
            best[remaining] = total[k]
            choice[remaining] = cand[k]

    group_of_cluster = [0] * n
    remaining, g = full, 0
    while remaining:
        for c in subsets[int(choice[remaining])]:
            group_of_cluster[c] = g
        remaining ^= int(masks[choice[remaining]])
        g += 1
    return group_of_cluster


def _greedy(loads: np.ndarray, n_groups: int) -> List[int]:
    """Longest-processing-time: heaviest cluster first onto the lightest open group."""
    n = len(loads)
    cap = n // n_groups
    order = sorted(range(n), key=lambda c: (-loads[c], c))
    group_load = [0.0] * n_groups
    group_size = [0] * n_groups
    group_of_cluster = [0] * n
    for c in order:
        open_groups = [g for g in range(n_groups) if group_size[g] < cap]
        g = min(open_groups, key=lambda x: (group_load[x], x))
        group_of_cluster[c] = g
        group_load[g] += float(loads[c])
        group_size[g] += 1
    return group_of_cluster


def allocate_clusters(
    clusters: Sequence[Sequence[int]],
    profile: ExpertProfile,
    n_groups: int,
    mode: Literal["exact", "greedy"] = "exact",
) -> ClusterAssignment:
    n_clusters = len(clusters)
    if n_groups < 1 or n_clusters % n_groups:
        raise DivisibilityError(
            f"{n_clusters} clusters cannot be split evenly over {n_groups} groups",
            n_clusters=n_clusters, n_groups=n_groups, layer=profile.layer,
        )
    loads = cluster_workloads(clusters, profile)
    if mode == "exact":
        if n_clusters > EXACT_MAX_CLUSTERS or n_groups > EXACT_MAX_GROUPS:
            raise SolverSizeError(
                f"exact allocation supports at most {EXACT_MAX_CLUSTERS} clusters and {EXACT_MAX_GROUPS} groups "
                f"(got {n_clusters}, {n_groups}); use mode 'greedy'",
                n_clusters=n_clusters, n_groups=n_groups,
            )
        group_of_cluster = _exact(loads, n_groups)
    elif mode == "greedy":
        group_of_cluster = _greedy(loads, n_groups)
    else:
        raise PlacementError(f"unknown allocation mode '{mode}'")

    group_loads = _group_loads(loads, group_of_cluster, n_groups)
    assignment = ClusterAssignment(
        clusters=[list(map(int, c)) for c in clusters],
        group_of_cluster=group_of_cluster,
        cluster_loads=[float(x) for x in loads],
        group_loads=group_loads,
        objective=imbalance(group_loads),
        mode=mode,
    )
    log.debug({"event": "clusters_allocated", "layer": profile.layer, "mode": mode,
               "objective": assignment.objective, "group_loads": group_loads})
    return assignment
