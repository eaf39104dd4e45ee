from __future__ import annotations
from typing import Any, Dict

import numpy as np
from pydantic import BaseModel, Field, model_validator


class RoutingCounts(BaseModel):
    """Replica and work counts of one token set routed through a layout."""

    dedup: bool
    replicas_per_token: np.ndarray    # (n,)
    replicas_per_chiplet: np.ndarray  # (N_c,) dispatch replicas landing on each chiplet
    replicas_per_group: np.ndarray    # (N_g,) dispatch replicas crossing each root edge
    touches_per_group: np.ndarray     # (N_g,) tokens touching each group (combine after aggregation)
    tokens_per_expert: np.ndarray     # (N_e,)
    pairs_per_chiplet: np.ndarray     # (N_c,) token-expert pairs computed on each chiplet

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @property
    def n_tokens(self) -> int:
        return int(self.replicas_per_token.shape[0])

    @property
    def total_replicas(self) -> int:
        return int(self.replicas_per_token.sum())


class A2AAccount(BaseModel):
    layer: int
    n_tokens: int = Field(..., ge=0)
    top_k: int = Field(..., ge=1)
    dedup: bool = True
    c_t: float
    min_replicas: int
    max_replicas: int
    total_replicas: int
    inter_chiplet_tokens: int = Field(..., ge=0)
    intra_chiplet_tokens: int = Field(..., ge=0)
    group_touches: int = Field(..., ge=0)
    hidden_size: int
    bytes_per_element: int = 2
    bytes_dispatched: int = Field(..., ge=0)
    bytes_combined: int = Field(..., ge=0)

    @model_validator(mode="after")
    def _check_chain(self) -> "A2AAccount":
        if self.n_tokens and not 1.0 <= self.c_t <= self.top_k:
            raise ValueError(f"layer {self.layer}: C_T={self.c_t} outside [1, {self.top_k}]")
        if self.inter_chiplet_tokens + self.intra_chiplet_tokens != self.total_replicas:
            raise ValueError(f"layer {self.layer}: inter + intra replicas != total replicas")
        return self

    def to_row(self) -> Dict[str, Any]:
        return {
            "layer": self.layer,
            "c_t": self.c_t,
            "inter_chiplet_tokens": self.inter_chiplet_tokens,
            "bytes_dispatched": self.bytes_dispatched,
            "bytes_combined": self.bytes_combined,
        }


class BoundCertificate(BaseModel):
    """Numbers behind inter-chiplet volume <= C_T * n <= k * n."""

    inter_chiplet_tokens: int
    replica_volume: int  # C_T * n, kept as the exact integer sum of replicas
    upper_bound: int     # k * n
    holds: bool
