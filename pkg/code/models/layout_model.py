from __future__ import annotations
from typing import Any, Dict, List, Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator


class ExpertLayout(BaseModel):
    """
    Placement of one layer's routed experts.

    clusters[c] lists the experts of cluster c; cluster c lives on chiplet
    chiplet_of_cluster[c]; chiplet j belongs to group group_of_chiplet[j].
    load_priority[g] is the streaming order of the clusters hosted by group g.
    """

    layer: int
    clusters: List[List[int]]
    chiplet_of_cluster: List[int]
    group_of_chiplet: List[int]
    load_priority: List[List[int]]

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_partition(self) -> "ExpertLayout":
        n_c = len(self.clusters)
        if n_c == 0:
            raise ValueError("layout has no clusters")
        size = len(self.clusters[0])
        if size == 0 or any(len(c) != size for c in self.clusters):
            raise ValueError(f"layer {self.layer}: clusters must share one nonzero size")
        members = sorted(e for c in self.clusters for e in c)
        if members != list(range(n_c * size)):
            raise ValueError(f"layer {self.layer}: clusters do not partition 0..{n_c * size - 1}")
        if sorted(self.chiplet_of_cluster) != list(range(n_c)):
            raise ValueError(f"layer {self.layer}: chiplet_of_cluster is not a permutation")
        if len(self.group_of_chiplet) != n_c:
            raise ValueError(f"layer {self.layer}: group_of_chiplet covers {len(self.group_of_chiplet)} chiplets, expected {n_c}")
        n_g = max(self.group_of_chiplet) + 1
        per_group = np.bincount(self.group_of_chiplet, minlength=n_g)
        if n_c % n_g or (per_group != n_c // n_g).any():
            raise ValueError(f"layer {self.layer}: every group must host {n_c // n_g} clusters")
        if len(self.load_priority) != n_g:
            raise ValueError(f"layer {self.layer}: load_priority needs one order per group")
        for g, order in enumerate(self.load_priority):
            hosted = sorted(c for c in range(n_c) if self.group_of_chiplet[self.chiplet_of_cluster[c]] == g)
            if sorted(order) != hosted or len(set(order)) != len(order):
                raise ValueError(f"layer {self.layer}: load_priority of group {g} is not a total order over its clusters")
        return self

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def n_experts(self) -> int:
        return len(self.clusters) * len(self.clusters[0])

    @property
    def n_groups(self) -> int:
        return max(self.group_of_chiplet) + 1

    def group_of_cluster(self, cluster: int) -> int:
        return self.group_of_chiplet[self.chiplet_of_cluster[cluster]]

    def expert_to_chiplet(self) -> np.ndarray:
        out = np.empty(self.n_experts, dtype=np.intp)
        for c, members in enumerate(self.clusters):
            out[members] = self.chiplet_of_cluster[c]
        return out

    def cluster_on_chiplet(self) -> np.ndarray:
        out = np.empty(self.n_clusters, dtype=np.intp)
        out[self.chiplet_of_cluster] = np.arange(self.n_clusters)
        return out

    def assignment_matrix(self) -> np.ndarray:
        """M (N_g x N_c): M[g, c] = 1 when cluster c sits in group g."""
        m = np.zeros((self.n_groups, self.n_clusters), dtype=np.int64)
        for c in range(self.n_clusters):
            m[self.group_of_cluster(c), c] = 1
        return m

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "layer": self.layer,
            "clusters": self.clusters,
            "chiplet_of_cluster": self.chiplet_of_cluster,
            "load_priority": self.load_priority,
        }

    @classmethod
    def from_json_dict(cls, doc: Dict[str, Any], group_of_chiplet: List[int]) -> "ExpertLayout":
        return cls(
            layer=int(doc["layer"]),
            clusters=[list(map(int, c)) for c in doc["clusters"]],
            chiplet_of_cluster=list(map(int, doc["chiplet_of_cluster"])),
            group_of_chiplet=list(group_of_chiplet),
            load_priority=[list(map(int, o)) for o in doc["load_priority"]],
        )


class ClusterAssignment(BaseModel):
    """Cluster-to-group assignment (the matrix M realized as a list)."""

    clusters: List[List[int]]
    group_of_cluster: List[int]
    cluster_loads: List[float]
    group_loads: List[float]
    objective: float
    mode: Literal["exact", "greedy", "contiguous", "random"]

    model_config = {"frozen": True}

    @property
    def n_groups(self) -> int:
        return len(self.group_loads)

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n_groups, len(self.clusters)), dtype=np.int64)
        m[self.group_of_cluster, np.arange(len(self.clusters))] = 1
        return m

    def members_of(self, group: int) -> List[int]:
        return [c for c, g in enumerate(self.group_of_cluster) if g == group]


class PlacementObjective(BaseModel):
    layer: int
    intra_collab: float = Field(..., ge=0.0)
    inter_collab: float = Field(..., ge=0.0)
    group_imbalance: float = Field(..., ge=0.0)
    group_loads: List[float] = Field(default_factory=list)
