from __future__ import annotations
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, PositiveInt, model_validator

from models.hardware_model import DramKind, HardwareSpec
from models.model_spec import ModelSpec, TraceGenConfig
from models.run_model import LADDER, Method, RunConfig


class TraceSource(BaseModel):
    generate: Optional[TraceGenConfig] = None
    file: Optional[str] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "TraceSource":
        if (self.generate is None) == (self.file is None):
            raise ValueError("trace needs exactly one of 'generate' or 'file'")
        return self


class PlacementConfig(BaseModel):
    mode: Literal["exact", "greedy"] = "exact"


class SweepConfig(BaseModel):
    seq_lens: List[PositiveInt] = Field(default_factory=lambda: [128, 256, 512])
    dram_kinds: List[DramKind] = Field(default_factory=lambda: ["HBM2", "SSD"])
    methods: List[Method] = Field(default_factory=lambda: list(LADDER))


class OutputConfig(BaseModel):
    dir: Optional[str] = None
    formats: List[Literal["json", "csv"]] = Field(default_factory=lambda: ["json", "csv"])
    timeline: bool = False


class ExperimentConfig(BaseModel):
    name: str = "experiment"
    model: ModelSpec
    hardware: HardwareSpec
    trace: TraceSource
    run: RunConfig = Field(default_factory=RunConfig)
    placement: PlacementConfig = Field(default_factory=PlacementConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    jobs: PositiveInt = 1

    @model_validator(mode="after")
    def _check_topology(self) -> "ExperimentConfig":
        if self.model.n_routed_experts % self.hardware.n_moe_chiplets:
            raise ValueError(
                f"{self.model.n_routed_experts} experts cannot be split evenly over "
                f"{self.hardware.n_moe_chiplets} chiplets; choose a chiplet count that divides N_e"
            )
        return self
