from __future__ import annotations
from enum import Enum
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field, PositiveInt, model_validator


class Method(str, Enum):
    BASELINE = "Baseline"
    MOZART_A = "MozartA"
    MOZART_B = "MozartB"
    MOZART_C = "MozartC"


class MethodFlags(BaseModel):
    overlap: bool
    efficient_a2a: bool
    specialized_layout: bool


METHOD_FLAGS: Dict[Method, MethodFlags] = {
    Method.BASELINE: MethodFlags(overlap=False, efficient_a2a=False, specialized_layout=False),
    Method.MOZART_A: MethodFlags(overlap=True, efficient_a2a=False, specialized_layout=False),
    Method.MOZART_B: MethodFlags(overlap=True, efficient_a2a=True, specialized_layout=False),
    Method.MOZART_C: MethodFlags(overlap=True, efficient_a2a=True, specialized_layout=True),
}
LADDER = [Method.BASELINE, Method.MOZART_A, Method.MOZART_B, Method.MOZART_C]


class RunConfig(BaseModel):
    method: Method = Method.MOZART_C
    batch_samples: PositiveInt = 32
    micro_batches: PositiveInt = 4
    seq_len: PositiveInt = 256
    n_steps: PositiveInt = 1
    layout_file: Optional[str] = None

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_batching(self) -> "RunConfig":
        if self.batch_samples % self.micro_batches:
            raise ValueError(f"batch_samples={self.batch_samples} not divisible by micro_batches={self.micro_batches}")
        return self

    @property
    def flags(self) -> MethodFlags:
        return METHOD_FLAGS[self.method]

    @property
    def tokens_per_step(self) -> int:
        return self.batch_samples * self.seq_len

    @property
    def tokens_per_micro_batch(self) -> int:
        return self.tokens_per_step // self.micro_batches


class Breakdown(BaseModel):
    """Busy time per category, each the length of a union of task intervals."""

    attention_compute: float = 0.0
    expert_compute: float = 0.0
    weight_stream: float = 0.0
    a2a: float = 0.0
    aggregate_combine: float = 0.0
    backward: float = 0.0

    def total(self) -> float:
        return sum(self.model_dump().values())


class LayerRow(BaseModel):
    layer: int
    c_t: float
    inter_chiplet_tokens: int
    bytes_dispatched: int
    bytes_combined: int
    expert_flops: int
    weight_bytes: int


class StepReport(BaseModel):
    model: str
    hardware: str
    dram_kind: str
    method: Method
    seq_len: int
    n_steps: int
    latency_s: float
    breakdown: Breakdown
    energy_j: float
    c_t_mean: float
    total_flops: int
    total_dram_bytes: int
    total_nop_bytes: int
    n_tasks: int
    per_layer: List[LayerRow] = Field(default_factory=list)

    def to_row(self) -> Dict[str, Any]:
        row = {
            "model": self.model,
            "hardware": self.hardware,
            "dram_kind": self.dram_kind,
            "method": self.method.value,
            "seq_len": self.seq_len,
            "n_steps": self.n_steps,
            "latency_s": self.latency_s,
            "energy_j": self.energy_j,
            "c_t_mean": self.c_t_mean,
            "total_flops": self.total_flops,
            "total_dram_bytes": self.total_dram_bytes,
            "total_nop_bytes": self.total_nop_bytes,
        }
        row.update({f"breakdown_{k}": v for k, v in self.breakdown.model_dump().items()})
        return row


class TimelineEvent(BaseModel):
    step: int
    time_s: float
    duration_s: float
    resource: str
    kind: str
    layer: int
    micro_batch: int
    pass_: str = Field(..., alias="pass")
    bytes: int = 0
    flops: int = 0

    model_config = {"populate_by_name": True}


class EventTimeline(BaseModel):
    events: List[TimelineEvent] = Field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        cols = ["step", "time_s", "resource", "kind", "duration_s", "layer", "micro_batch", "pass", "bytes", "flops"]
        if not self.events:
            return pd.DataFrame(columns=cols)
        return pd.DataFrame([e.model_dump(by_alias=True) for e in self.events])[cols]

    def by_resource(self) -> Dict[str, List[TimelineEvent]]:
        out: Dict[str, List[TimelineEvent]] = {}
        for e in self.events:
            out.setdefault(e.resource, []).append(e)
        return out


class LadderRow(BaseModel):
    method: Method
    latency_s: float
    normalized_latency: float
    c_t: float
    energy_j: float


class LadderReport(BaseModel):
    model: str
    dram_kind: str
    seq_len: int
    rows: List[LadderRow]
    reports: List[StepReport]

    def row(self, method: Method) -> LadderRow:
        return next(r for r in self.rows if r.method == method)


class SweepReport(BaseModel):
    model: str
    cells: List[StepReport]

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame([c.to_row() for c in self.cells])
        if df.empty:
            return df
        base = df[df["method"] == Method.BASELINE.value].set_index(["seq_len", "dram_kind"])["latency_s"]
        df["speedup_vs_baseline"] = [
            base.get((s, d), float("nan")) / lat if lat else float("nan")
            for s, d, lat in zip(df["seq_len"], df["dram_kind"], df["latency_s"])
        ]
        return df
