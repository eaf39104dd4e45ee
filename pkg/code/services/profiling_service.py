import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np

from config.settings import SETTINGS
from models.profile_model import ExpertProfile
from models.trace_model import RoutingTrace
from utils.errors import ProfilingError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".services.profiling_service")

# float64 one-hot products stay exact far beyond this many rows
DEFAULT_CHUNK_TOKENS = 16384


class DegenerateCoactivationWarning(UserWarning):
    """Co-activation is all zero (top-1 routing): P is returned as zeros."""


class ProfileAccumulator:
    """
    Integer activation and pair counts for one layer. Chunks may arrive in any
    order and accumulators may be merged; finalize() normalizes once.
    """

    def __init__(self, n_experts: int, top_k: int, layer: int = 0):
        self.n_experts = n_experts
        self.top_k = top_k
        self.layer = layer
        self.n_tokens = 0
        self.counts = np.zeros(n_experts, dtype=np.int64)
        self.pairs = np.zeros((n_experts, n_experts), dtype=np.int64)

    def update(self, selections: np.ndarray) -> "ProfileAccumulator":
        sel = np.asarray(selections, dtype=np.intp)
        if sel.ndim != 2 or sel.shape[1] != self.top_k:
            raise ProfilingError(f"expected (n, {self.top_k}) selections, got {sel.shape}")
        n = sel.shape[0]
        if n == 0:
            return self
        self.counts += np.bincount(sel.ravel(), minlength=self.n_experts)
        onehot = np.zeros((n, self.n_experts), dtype=np.float64)
        onehot[np.arange(n)[:, None], sel] = 1.0
        self.pairs += np.rint(onehot.T @ onehot).astype(np.int64)
        self.n_tokens += n
        return self

    def merge(self, other: "ProfileAccumulator") -> "ProfileAccumulator":
        if (other.n_experts, other.top_k) != (self.n_experts, self.top_k):
            raise ProfilingError("cannot merge profiles of different shapes")
        self.counts += other.counts
        self.pairs += other.pairs
        self.n_tokens += other.n_tokens
        return self

    def coactivation(self) -> np.ndarray:
        c = self.pairs.copy()
        np.fill_diagonal(c, 0)
        return c

    def finalize(self, strict: bool = False) -> ExpertProfile:
        total = int(self.counts.sum())
        if total == 0:
            raise ProfilingError(f"layer {self.layer}: empty trace, workload cannot be normalized")
        v = self.counts / total
        c = self.coactivation()
        p = _normalize_pairs(c, self.layer, self.top_k, strict)
        return ExpertProfile(layer=self.layer, v=v, c=c, p=p, counts=self.counts.copy(), n_tokens=self.n_tokens)


def _normalize_pairs(c: np.ndarray, layer: int, top_k: int, strict: bool) -> np.ndarray:
    peak = int(c.max()) if c.size else 0
    if peak == 0:
        log.warning({"event": "coactivation_all_zero", "layer": layer, "top_k": top_k})
        if strict:
            warnings.warn(f"layer {layer}: no co-activated pairs (top_k={top_k})", DegenerateCoactivationWarning, stacklevel=3)
        return np.zeros(c.shape, dtype=np.float64)
    return c / peak


def _accumulate(trace: RoutingTrace, layer: int, chunk_tokens: Optional[int] = None) -> ProfileAccumulator:
    if not 0 <= layer < trace.n_layers:
        raise ProfilingError(f"layer {layer} outside [0, {trace.n_layers})")
    acc = ProfileAccumulator(trace.n_experts, trace.top_k, layer)
    step = chunk_tokens or DEFAULT_CHUNK_TOKENS
    for lo in range(0, trace.n_tokens, step):
        acc.update(trace.experts[layer, lo:lo + step])
    return acc


def compute_workload(trace: RoutingTrace, layer: int) -> np.ndarray:
    if not 0 <= layer < trace.n_layers:
        raise ProfilingError(f"layer {layer} outside [0, {trace.n_layers})")
    counts = np.bincount(trace.experts[layer].ravel(), minlength=trace.n_experts)
    total = int(counts.sum())
    if total == 0:
        raise ProfilingError(f"layer {layer}: empty trace, workload cannot be normalized")
    return counts / total


def compute_coactivation(trace: RoutingTrace, layer: int, strict: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    acc = _accumulate(trace, layer)
    if acc.n_tokens == 0:
        raise ProfilingError(f"layer {layer}: empty trace")
    c = acc.coactivation()
    return c, _normalize_pairs(c, layer, trace.top_k, strict)


def profile_layer(trace: RoutingTrace, layer: int, chunk_tokens: Optional[int] = None) -> ExpertProfile:
    return _accumulate(trace, layer, chunk_tokens).finalize()


def profile_trace(trace: RoutingTrace, chunk_tokens: Optional[int] = None, jobs: int = 1) -> List[ExpertProfile]:
    """Profile every layer. Layers are independent; numpy releases the GIL in the matmul."""
    if trace.n_tokens == 0:
        raise ProfilingError("empty trace, nothing to profile")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            profiles = list(pool.map(lambda l: profile_layer(trace, l, chunk_tokens), range(trace.n_layers)))
    else:
        profiles = [profile_layer(trace, l, chunk_tokens) for l in range(trace.n_layers)]
    log.info({"event": "trace_profiled", "layers": trace.n_layers, "tokens": trace.n_tokens,
              "max_workload": max(float(p.v.max()) for p in profiles)})
    return profiles
