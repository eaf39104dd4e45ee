from __future__ import annotations
from typing import Optional

import numpy as np
from pydantic import BaseModel, model_validator

from models.model_spec import ModelSpec

WEIGHT_SUM_TOL = 1e-6


def _first_index(mask: np.ndarray) -> tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(int(np.argmax(mask)), mask.shape))


class RoutingTrace(BaseModel):
    """
    Top-k routing decisions of a token batch, for every MoE layer.

    experts: (n_layers, n_tokens, top_k) uint16, distinct per row, in [0, n_experts)
    weights: (n_layers, n_tokens, top_k) float32, rows sum to 1 within 1e-6
    Arrays are read-only after construction.
    """

    n_experts: int
    top_k: int
    experts: np.ndarray
    weights: np.ndarray
    model: Optional[ModelSpec] = None

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @model_validator(mode="after")
    def _check_invariants(self) -> "RoutingTrace":
        e, w = self.experts, self.weights
        if e.ndim != 3 or e.shape != w.shape:
            raise ValueError(f"experts {e.shape} and weights {w.shape} must share a 3-d shape")
        if e.shape[2] != self.top_k:
            raise ValueError(f"selection width {e.shape[2]} != top_k {self.top_k}")
        if not 1 <= self.top_k <= self.n_experts:
            raise ValueError(f"top_k={self.top_k} outside [1, {self.n_experts}]")
        if self.model is not None:
            if self.model.n_routed_experts != self.n_experts or self.model.top_k != self.top_k:
                raise ValueError(f"trace (N_e={self.n_experts}, k={self.top_k}) does not match model {self.model.name}")
            if self.model.n_layers != e.shape[0]:
                raise ValueError(f"trace has {e.shape[0]} layers, model {self.model.name} has {self.model.n_layers}")
        if e.size:
            if int(e.max()) >= self.n_experts:
                l, t, _ = _first_index(e >= self.n_experts)
                raise ValueError(f"expert index out of range at layer {l}, token {t}")
            dup = (np.diff(np.sort(e, axis=2), axis=2) == 0).any(axis=2)
            if dup.any():
                l, t = _first_index(dup)
                raise ValueError(f"duplicate expert at layer {l}, token {t}")
            bad = np.abs(w.astype(np.float64).sum(axis=2) - 1.0) > WEIGHT_SUM_TOL
            if bad.any():
                l, t = _first_index(bad)
                raise ValueError(f"gate weights do not sum to 1 at layer {l}, token {t}")
        object.__setattr__(self, "experts", e.astype(np.uint16, copy=False))
        object.__setattr__(self, "weights", w.astype(np.float32, copy=False))
        self.experts.setflags(write=False)
        self.weights.setflags(write=False)
        return self

    @property
    def n_layers(self) -> int:
        return int(self.experts.shape[0])

    @property
    def n_tokens(self) -> int:
        return int(self.experts.shape[1])

    def layer(self, layer: int, token_index: Optional[np.ndarray] = None) -> np.ndarray:
        """(n, k) expert selections of one layer, as intp for indexing."""
        if not 0 <= layer < self.n_layers:
            raise IndexError(f"layer {layer} outside [0, {self.n_layers})")
        sel = self.experts[layer]
        if token_index is not None:
            sel = sel[token_index]
        return sel.astype(np.intp)

    def slice_tokens(self, token_index: np.ndarray) -> "RoutingTrace":
        idx = np.asarray(token_index, dtype=np.intp)
        return RoutingTrace(
            n_experts=self.n_experts, top_k=self.top_k,
            experts=np.ascontiguousarray(self.experts[:, idx]),
            weights=np.ascontiguousarray(self.weights[:, idx]),
            model=self.model,
        )

    def same_as(self, other: "RoutingTrace") -> bool:
        return (
            self.n_experts == other.n_experts
            and self.top_k == other.top_k
            and np.array_equal(self.experts, other.experts)
            and np.array_equal(self.weights, other.weights)
        )
