from __future__ import annotations
from typing import Any, Dict, Optional

import numpy as np
from pydantic import BaseModel, model_validator


class ExpertProfile(BaseModel):
    """
    Workload vector and co-activation matrices of one MoE layer.

    v: (N_e,) fractions summing to 1
    c: (N_e, N_e) symmetric integer pair counts, zero diagonal
    p: c / max(c), all-zero when c is all-zero
    counts: raw activation counts (absent for profiles loaded from JSON)
    """

    layer: int
    v: np.ndarray
    c: np.ndarray
    p: np.ndarray
    counts: Optional[np.ndarray] = None
    n_tokens: Optional[int] = None

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @model_validator(mode="after")
    def _check_shapes(self) -> "ExpertProfile":
        n = self.v.shape[0]
        if self.c.shape != (n, n) or self.p.shape != (n, n):
            raise ValueError(f"profile matrices must be {n}x{n}")
        if abs(float(self.v.sum()) - 1.0) > 1e-9:
            raise ValueError(f"layer {self.layer}: workload sums to {float(self.v.sum())}")
        if not np.array_equal(self.c, self.c.T):
            raise ValueError(f"layer {self.layer}: co-activation matrix is not symmetric")
        return self

    @property
    def n_experts(self) -> int:
        return int(self.v.shape[0])

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "layer": int(self.layer),
            "v": [float(x) for x in self.v],
            "c": self.c.astype(np.int64).tolist(),
            "p": [[float(x) for x in row] for row in self.p],
        }

    @classmethod
    def from_json_dict(cls, doc: Dict[str, Any]) -> "ExpertProfile":
        return cls(
            layer=int(doc["layer"]),
            v=np.asarray(doc["v"], dtype=np.float64),
            c=np.asarray(doc["c"], dtype=np.int64),
            p=np.asarray(doc["p"], dtype=np.float64),
        )
