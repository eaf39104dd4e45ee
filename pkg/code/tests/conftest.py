import os
import sys
from typing import Sequence

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.hardware_model import HardwareSpec, PowerSpec
from models.layout_model import ExpertLayout
from models.model_spec import ModelSpec, TraceGenConfig
from models.profile_model import ExpertProfile
from models.trace_model import RoutingTrace
from utils.preset_loader import load_hardware_preset, load_model_preset


def make_trace(selections: Sequence, n_experts: int, model: ModelSpec | None = None) -> RoutingTrace:
    """Trace from nested (layers, tokens, k) expert lists with equal gate weights."""
    experts = np.asarray(selections, dtype=np.uint16)
    if experts.ndim == 2:
        experts = experts[None]
    k = experts.shape[2]
    weights = np.full(experts.shape, 1.0 / k, dtype=np.float32)
    return RoutingTrace(n_experts=n_experts, top_k=k, experts=experts, weights=weights, model=model)


def make_profile(c: np.ndarray, v: np.ndarray | None = None, layer: int = 0) -> ExpertProfile:
    c = np.asarray(c, dtype=np.int64)
    n = c.shape[0]
    v = np.full(n, 1.0 / n) if v is None else np.asarray(v, dtype=np.float64)
    peak = c.max()
    p = c / peak if peak else np.zeros((n, n))
    return ExpertProfile(layer=layer, v=v, c=c, p=p)


def two_chiplet_layout(layer: int = 0) -> ExpertLayout:
    return ExpertLayout(layer=layer, clusters=[[0, 1], [2, 3]], chiplet_of_cluster=[0, 1],
                        group_of_chiplet=[0, 1], load_priority=[[0], [1]])


@pytest.fixture
def tiny_model() -> ModelSpec:
    return ModelSpec(name="tiny", n_layers=2, n_routed_experts=16, top_k=4, hidden_size=64,
                     expert_ffn_dim=32, n_heads=4, n_kv_heads=2, head_dim=16)


@pytest.fixture
def tiny_hw() -> HardwareSpec:
    return HardwareSpec(name="tiny", n_moe_chiplets=4, n_groups=2, tiles_per_chiplet=4, pes_per_sa=16,
                        power=PowerSpec(total_kw=1.0))


@pytest.fixture
def tiny_trace(tiny_model) -> RoutingTrace:
    from services.trace_generation_service import generate_trace
    cfg = TraceGenConfig(seed=5, skew=1.0, n_collab_groups=4, collab_strength=0.8, n_tokens=512)
    return generate_trace(tiny_model, cfg)


@pytest.fixture(scope="session")
def olmoe_2layer() -> ModelSpec:
    return load_model_preset("olmoe").model_copy(update={"n_layers": 2})


@pytest.fixture(scope="session")
def olmoe_hw() -> HardwareSpec:
    return load_hardware_preset("olmoe")
