from __future__ import annotations
from typing import Literal, Optional

from pydantic import BaseModel, Field, PositiveFloat, PositiveInt, model_validator

DramKind = Literal["HBM2", "SSD"]
Channel = Literal["dram_group", "dram_attention", "nop_edge", "hybrid_bond", "sram"]
ChipletClass = Literal["attention", "moe"]

DRAM_BANDWIDTH = {"HBM2": 256.0e9, "SSD": 15.8e9}
FRACTION_TOL = 1e-6


class DramSpec(BaseModel):
    kind: DramKind = "HBM2"
    bandwidth_bytes_per_s: PositiveFloat = DRAM_BANDWIDTH["HBM2"]
    capacity_bytes: PositiveInt = 8192 * 2**20
    per_group_channels: PositiveInt = 1
    attention_channels: PositiveInt = 2


class SramSpec(BaseModel):
    capacity_bytes: PositiveFloat = 2.265e6  # per tile
    bandwidth_bytes_per_s: PositiveFloat = 32.0e9  # per tile


class Link2p5dSpec(BaseModel):
    bandwidth_bytes_per_s: PositiveFloat = 0.125e9  # per link
    links_per_edge: PositiveInt = 192
    pitch_um: PositiveFloat = 50.0


class Link3dSpec(BaseModel):
    bandwidth_bytes_per_s: PositiveFloat = 0.125e9  # per link
    horizontal: PositiveInt = 64
    vertical: PositiveInt = 64
    pitch_um: PositiveFloat = 50.0


class PowerFractions(BaseModel):
    attention: float = Field(0.15, ge=0.0, le=1.0)
    moe: float = Field(0.60, ge=0.0, le=1.0)
    switch: float = Field(0.05, ge=0.0, le=1.0)
    dram: float = Field(0.20, ge=0.0, le=1.0)

    def total(self) -> float:
        return self.attention + self.moe + self.switch + self.dram


class PowerSpec(BaseModel):
    total_kw: PositiveFloat
    fractions: PowerFractions = Field(default_factory=PowerFractions)
    idle_fraction: float = Field(0.1, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _fractions_sum_to_one(self) -> "PowerSpec":
        if abs(self.fractions.total() - 1.0) > FRACTION_TOL:
            raise ValueError(f"power fractions sum to {self.fractions.total()}, expected 1")
        return self


class CalibrationSpec(BaseModel):
    utilization: float = Field(0.7, gt=0.0, le=1.0)
    backward_multiplier: PositiveFloat = 2.0


class HardwareSpec(BaseModel):
    name: str = "custom"
    n_moe_chiplets: PositiveInt = 16
    n_groups: PositiveInt = 4
    attention_chiplets: PositiveInt = 1
    tiles_per_chiplet: PositiveInt
    attention_tiles: Optional[PositiveInt] = None
    sas_per_tile: PositiveInt = 16
    pes_per_sa: PositiveInt
    clock_hz: PositiveFloat = 1.0e9
    dram: DramSpec = Field(default_factory=DramSpec)
    sram: SramSpec = Field(default_factory=SramSpec)
    link_2p5d: Link2p5dSpec = Field(default_factory=Link2p5dSpec)
    link_3d: Link3dSpec = Field(default_factory=Link3dSpec)
    power: PowerSpec
    calibration: CalibrationSpec = Field(default_factory=CalibrationSpec)
    area_mm2: Optional[float] = None  # documentation only

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_topology(self) -> "HardwareSpec":
        if self.n_moe_chiplets % self.n_groups:
            raise ValueError(f"n_moe_chiplets={self.n_moe_chiplets} not divisible by n_groups={self.n_groups}")
        return self

    @property
    def chiplets_per_group(self) -> int:
        return self.n_moe_chiplets // self.n_groups

    @property
    def group_of_chiplet(self) -> list[int]:
        return [c // self.chiplets_per_group for c in range(self.n_moe_chiplets)]

    def tiles_of(self, chiplet_class: ChipletClass) -> int:
        if chiplet_class == "attention" and self.attention_tiles:
            return self.attention_tiles
        return self.tiles_per_chiplet

    def sram_capacity(self, chiplet_class: ChipletClass) -> float:
        return self.tiles_of(chiplet_class) * self.sram.capacity_bytes

    def with_dram(self, kind: DramKind) -> "HardwareSpec":
        dram = self.dram.model_copy(update={"kind": kind, "bandwidth_bytes_per_s": DRAM_BANDWIDTH[kind]})
        return self.model_copy(update={"dram": dram})


class CostQuote(BaseModel):
    latency_s: float = Field(0.0, ge=0.0)
    energy_j: float = Field(0.0, ge=0.0)
    bytes_moved: int = Field(0, ge=0)
    flops: int = Field(0, ge=0)

    model_config = {"frozen": True}

    def __add__(self, other: "CostQuote") -> "CostQuote":
        return CostQuote(
            latency_s=self.latency_s + other.latency_s,
            energy_j=self.energy_j + other.energy_j,
            bytes_moved=self.bytes_moved + other.bytes_moved,
            flops=self.flops + other.flops,
        )
