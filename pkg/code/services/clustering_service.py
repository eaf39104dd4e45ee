import logging
from typing import List

import numpy as np

from config.settings import SETTINGS
from models.profile_model import ExpertProfile
from utils.errors import DivisibilityError, PlacementError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".services.clustering_service")


def _argmax_low(scores: np.ndarray, allowed: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the lowest index on ties
    masked = np.where(allowed, scores, np.iinfo(np.int64).min)
    return int(np.argmax(masked))


def _argmin_low(scores: np.ndarray, allowed: np.ndarray) -> int:
    masked = np.where(allowed, scores, np.iinfo(np.int64).max)
    return int(np.argmin(masked))


def _best_pair(c: np.ndarray) -> tuple[int, int]:
    n = c.shape[0]
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    flat = np.where(upper, c, np.iinfo(np.int64).min)
    i, j = np.unravel_index(int(np.argmax(flat)), flat.shape)  # row-major: lexicographic first
    return int(i), int(j)


def cluster_experts(profile: ExpertProfile, n_chiplets: int) -> List[List[int]]:
    """
    Greedy collaboration clustering of one layer's experts into `n_chiplets`
    equal clusters.

    Cluster 0 starts from the most co-activated pair. Every later cluster
    starts from the unselected expert least co-activated with everything
    already selected. Clusters then grow by the unselected expert most
    co-activated with the current members. Means over a fixed member set rank
    exactly like sums, so integer sums are compared; ties go to the lowest index.
    """
    n_experts = profile.n_experts
    if n_chiplets < 1:
        raise PlacementError(f"need at least one chiplet, got {n_chiplets}")
    if n_experts % n_chiplets:
        raise DivisibilityError(
            f"{n_experts} experts cannot form {n_chiplets} equal clusters; "
            f"use a chiplet count that divides {n_experts}",
            n_experts=n_experts, n_chiplets=n_chiplets, layer=profile.layer,
        )
    size = n_experts // n_chiplets
    c = profile.c.astype(np.int64)

    free = np.ones(n_experts, dtype=bool)
    selected_sum = np.zeros(n_experts, dtype=np.int64)  # co-activation with every selected expert
    clusters: List[List[int]] = []

    for ci in range(n_chiplets):
        if ci == 0:
            if n_experts == 1:
                seed = [0]
            else:
                i, j = _best_pair(c)
                seed = [i, j] if size >= 2 else [i]
        else:
            seed = [_argmin_low(selected_sum, free)]
        cluster = list(seed)
        member_sum = np.zeros(n_experts, dtype=np.int64)
        for e in cluster:
            free[e] = False
            member_sum += c[:, e]
        while len(cluster) < size:
            e = _argmax_low(member_sum, free)
            cluster.append(e)
            free[e] = False
            member_sum += c[:, e]
        selected_sum += member_sum
        clusters.append(cluster)

    log.debug({"event": "experts_clustered", "layer": profile.layer, "clusters": clusters})
    return clusters
