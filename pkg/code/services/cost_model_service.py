import logging
from typing import Dict, Mapping, Optional

from config.settings import SETTINGS
from models.hardware_model import Channel, ChipletClass, CostQuote, FRACTION_TOL, HardwareSpec
from models.model_spec import ModelSpec
from utils.errors import ConfigError, CostModelError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".services.cost_model_service")

POWER_DOMAINS = ("attention", "moe", "switch", "dram")
_CHANNEL_DOMAIN = {
    "dram_group": "dram",
    "dram_attention": "dram",
    "nop_edge": "switch",
    "hybrid_bond": "dram",
    "sram": "moe",
}


# ---------- primitive costs ----------

def peak_flops(chiplet_class: ChipletClass, hw: HardwareSpec) -> float:
    """Sustained FLOP/s: two ops per PE per cycle, derated by utilization."""
    return (hw.tiles_of(chiplet_class) * hw.sas_per_tile * hw.pes_per_sa * 2
            * hw.clock_hz * hw.calibration.utilization)


def channel_bandwidth(channel: Channel, hw: HardwareSpec) -> float:
    if channel == "dram_group":
        return hw.dram.bandwidth_bytes_per_s * hw.dram.per_group_channels
    if channel == "dram_attention":
        # two dedicated stacks act as one doubled channel
        return hw.dram.bandwidth_bytes_per_s * hw.dram.attention_channels
    if channel == "nop_edge":
        return hw.link_2p5d.bandwidth_bytes_per_s * hw.link_2p5d.links_per_edge
    if channel == "hybrid_bond":
        return hw.link_3d.bandwidth_bytes_per_s * hw.link_3d.horizontal * hw.link_3d.vertical
    if channel == "sram":
        return hw.sram.bandwidth_bytes_per_s * hw.tiles_per_chiplet
    raise CostModelError(f"Unknown channel '{channel}'", channel=channel)


def domain_instances(hw: HardwareSpec) -> Dict[str, int]:
    return {
        "attention": hw.attention_chiplets,
        "moe": hw.n_moe_chiplets,
        "switch": hw.n_groups,
        "dram": hw.n_groups + 1,
    }


def domain_power_w(hw: HardwareSpec) -> Dict[str, float]:
    fr = hw.power.fractions
    if abs(fr.total() - 1.0) > FRACTION_TOL:
        raise ConfigError(f"power fractions sum to {fr.total()}, expected 1")
    total_w = hw.power.total_kw * 1e3
    return {d: total_w * getattr(fr, d) for d in POWER_DOMAINS}


def _instance_power_w(domain: str, hw: HardwareSpec) -> float:
    return domain_power_w(hw)[domain] / domain_instances(hw)[domain]


def compute_latency(flops: int | float, chiplet_class: ChipletClass, hw: HardwareSpec) -> CostQuote:
    if flops < 0:
        raise CostModelError(f"negative flops {flops}")
    if chiplet_class not in ("attention", "moe"):
        raise CostModelError(f"Unknown chiplet class '{chiplet_class}'")
    latency = flops / peak_flops(chiplet_class, hw) if flops else 0.0
    return CostQuote(
        latency_s=latency,
        energy_j=latency * _instance_power_w(chiplet_class, hw),
        flops=int(flops),
    )


def transfer_latency(nbytes: int | float, channel: Channel, hw: HardwareSpec) -> CostQuote:
    bandwidth = channel_bandwidth(channel, hw)
    if nbytes < 0:
        raise CostModelError(f"negative byte count {nbytes}")
    latency = nbytes / bandwidth if nbytes else 0.0
    return CostQuote(
        latency_s=latency,
        energy_j=latency * _instance_power_w(_CHANNEL_DOMAIN[channel], hw),
        bytes_moved=int(nbytes),
    )


def energy_of(latency_by_component: Mapping[str, float], hw: HardwareSpec, span_s: Optional[float] = None) -> float:
    """
    Joules for busy seconds per power domain, summed over that domain's instances.
    With `span_s`, every instance's idle remainder of the span is charged at
    the configured idle fraction of its active power.
    """
    power = domain_power_w(hw)
    instances = domain_instances(hw)
    idle = hw.power.idle_fraction
    energy = 0.0
    for domain, busy in latency_by_component.items():
        if domain not in power:
            raise CostModelError(f"Unknown power domain '{domain}'")
        if busy < 0:
            raise CostModelError(f"negative active time for {domain}")
        per_instance = power[domain] / instances[domain]
        energy += busy * per_instance
        if span_s is not None:
            energy += max(0.0, instances[domain] * span_s - busy) * per_instance * idle
    return energy


# ---------- work accounting from model shapes ----------

def attention_flops(model: ModelSpec, n_tokens: int, seq_len: int) -> int:
    """Projections plus score and value products over the full sequence."""
    projections = 2 * model.attention_params
    scores = 2 * 2 * seq_len * model.q_dim
    return n_tokens * (projections + scores)


def router_flops(model: ModelSpec, n_tokens: int) -> int:
    return 2 * n_tokens * model.hidden_size * model.n_routed_experts


def expert_flops(model: ModelSpec, n_pairs: int) -> int:
    """Gated FFN on `n_pairs` token-expert pairs."""
    return 2 * n_pairs * model.expert_params


def shared_expert_flops(model: ModelSpec, n_tokens: int) -> int:
    return 2 * n_tokens * model.shared_expert_params


def attention_weight_bytes(model: ModelSpec) -> int:
    """Attention, router and shared experts all stream over the attention channel."""
    return (model.attention_params + model.router_params + model.shared_expert_params) * SETTINGS.BYTES_PER_ELEMENT


def expert_weight_bytes(model: ModelSpec) -> int:
    return model.expert_params * SETTINGS.BYTES_PER_ELEMENT


def attention_activation_bytes(model: ModelSpec, n_tokens: int) -> int:
    """Input, output, Q and K/V of every token kept for the backward pass."""
    return n_tokens * (2 * model.hidden_size + model.q_dim + 2 * model.kv_dim) * SETTINGS.BYTES_PER_ELEMENT


def expert_activation_bytes(model: ModelSpec, n_pairs: int) -> int:
    """Input and both FFN intermediates of every token-expert pair."""
    return n_pairs * (model.hidden_size + 2 * model.expert_ffn_dim) * SETTINGS.BYTES_PER_ELEMENT


def token_bytes(model: ModelSpec, n_tokens: int) -> int:
    return n_tokens * model.hidden_size * SETTINGS.BYTES_PER_ELEMENT
