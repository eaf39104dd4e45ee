import logging
from typing import Any, Dict, Tuple

import numpy as np

from config.settings import SETTINGS
from models.model_spec import ModelSpec, TraceGenConfig
from models.trace_model import RoutingTrace
from utils.errors import TraceGenerationError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".services.trace_generation_service")

# Pushes every community member ahead of any Gumbel-perturbed outsider.
_COMMUNITY_BONUS = 1.0e6
_TOKEN_CHUNK = 8192


def _log_softmax(x: np.ndarray) -> np.ndarray:
    m = x.max()
    return x - (m + np.log(np.exp(x - m).sum()))


def _sample_layer(rng: np.random.Generator, n_experts: int, k: int, cfg: TraceGenConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    # popularity: soft-maxed Gaussian log-weights, concentration grows with skew
    log_pi = _log_softmax(cfg.skew * rng.standard_normal(n_experts))
    # latent communities: a random equal split of a permutation
    labels = np.empty(n_experts, dtype=np.intp)
    for g, members in enumerate(np.array_split(rng.permutation(n_experts), cfg.n_collab_groups)):
        labels[members] = g
    mass = np.bincount(labels, weights=np.exp(log_pi), minlength=cfg.n_collab_groups)
    mass = mass / mass.sum()

    n = cfg.n_tokens
    experts = np.empty((n, k), dtype=np.uint16)
    for lo in range(0, n, _TOKEN_CHUNK):
        hi = min(n, lo + _TOKEN_CHUNK)
        rows = hi - lo
        community = rng.choice(cfg.n_collab_groups, size=rows, p=mass)
        in_community = rng.random(rows) < cfg.collab_strength
        # Gumbel-top-k == sampling k experts without replacement from pi
        score = log_pi[None, :] + rng.gumbel(size=(rows, n_experts))
        score += _COMMUNITY_BONUS * ((labels[None, :] == community[:, None]) & in_community[:, None])
        top = np.argpartition(-score, k - 1, axis=1)[:, :k]
        order = np.argsort(-np.take_along_axis(score, top, axis=1), axis=1, kind="stable")
        experts[lo:hi] = np.take_along_axis(top, order, axis=1)

    raw = rng.uniform(0.05, 1.0, size=(n, k))
    weights = (raw / raw.sum(axis=1, keepdims=True)).astype(np.float32)
    return experts, weights, labels


def generate_trace_with_labels(model: ModelSpec, cfg: TraceGenConfig) -> Tuple[RoutingTrace, np.ndarray]:
    """
    Deterministic synthetic routing trace plus the (n_layers, N_e) community
    label of every expert, which is ground truth for co-activation tests.
    """
    n_experts, k = model.n_routed_experts, model.top_k
    if k > n_experts:
        raise TraceGenerationError(f"top_k={k} exceeds n_routed_experts={n_experts}")
    if cfg.n_tokens == 0:
        raise TraceGenerationError("n_tokens must be positive")
    if cfg.n_collab_groups > n_experts:
        raise TraceGenerationError(f"n_collab_groups={cfg.n_collab_groups} exceeds {n_experts} experts")

    rng = np.random.default_rng(cfg.seed)
    experts = np.empty((model.n_layers, cfg.n_tokens, k), dtype=np.uint16)
    weights = np.empty((model.n_layers, cfg.n_tokens, k), dtype=np.float32)
    labels = np.empty((model.n_layers, n_experts), dtype=np.intp)
    for layer in range(model.n_layers):
        experts[layer], weights[layer], labels[layer] = _sample_layer(rng, n_experts, k, cfg)

    trace = RoutingTrace(n_experts=n_experts, top_k=k, experts=experts, weights=weights, model=model)
    log.info({"event": "trace_generated", "model": model.name, "layers": model.n_layers,
              "tokens": cfg.n_tokens, "seed": cfg.seed, "skew": cfg.skew,
              "n_collab_groups": cfg.n_collab_groups, "collab_strength": cfg.collab_strength})
    return trace, labels


def generate_trace(model: ModelSpec, cfg: TraceGenConfig) -> RoutingTrace:
    return generate_trace_with_labels(model, cfg)[0]


def concat_traces(a: RoutingTrace, b: RoutingTrace) -> RoutingTrace:
    if (a.n_experts, a.top_k, a.n_layers) != (b.n_experts, b.top_k, b.n_layers):
        raise TraceGenerationError("traces differ in experts, top_k or layer count")
    return RoutingTrace(
        n_experts=a.n_experts, top_k=a.top_k,
        experts=np.concatenate([a.experts, b.experts], axis=1),
        weights=np.concatenate([a.weights, b.weights], axis=1),
        model=a.model,
    )


def trace_summary(trace: RoutingTrace) -> Dict[str, Any]:
    layers = []
    for layer in range(trace.n_layers):
        counts = np.bincount(trace.experts[layer].ravel(), minlength=trace.n_experts)
        freq = counts / counts.sum() if counts.sum() else counts.astype(float)
        layers.append({
            "layer": layer,
            "max_popularity": float(freq.max()) if freq.size else 0.0,
            "min_popularity": float(freq.min()) if freq.size else 0.0,
            "distinct_experts": int((counts > 0).sum()),
        })
    return {
        "n_experts": trace.n_experts,
        "top_k": trace.top_k,
        "n_layers": trace.n_layers,
        "n_tokens": trace.n_tokens,
        "model": trace.model.name if trace.model else None,
        "layers": layers,
    }
