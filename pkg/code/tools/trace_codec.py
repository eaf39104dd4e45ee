"""
Binary routing-trace file.

Layout (little-endian):
    magic "MZTR" | u16 version | u32 N_e | u16 k | u16 n_layers | u64 n_tokens
    then per layer, per token, k x (u16 expert_index, f32 gate_weight)
"""
import logging
import struct
from pathlib import Path
from typing import Optional

import numpy as np

from config.settings import SETTINGS
from models.model_spec import ModelSpec
from models.trace_model import WEIGHT_SUM_TOL, RoutingTrace
from utils.errors import (
    DuplicateExpertError, ExpertIndexError, TopKViolationError, TraceFormatError,
    TraceIOError, TraceVersionError, WeightNormalizationError,
)

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".tools.trace_codec")

MAGIC = b"MZTR"
VERSION = 1
HEADER = struct.Struct("<4sHIHHQ")
ENTRY_DTYPE = np.dtype([("expert", "<u2"), ("weight", "<f4")])


def _entry_offset(layer: int, token: int, slot: int, n_tokens: int, k: int) -> int:
    return HEADER.size + ((layer * n_tokens + token) * k + slot) * ENTRY_DTYPE.itemsize


def encode_trace(trace: RoutingTrace) -> bytes:
    header = HEADER.pack(MAGIC, VERSION, trace.n_experts, trace.top_k, trace.n_layers, trace.n_tokens)
    body = np.empty(trace.experts.shape, dtype=ENTRY_DTYPE)
    body["expert"] = trace.experts
    body["weight"] = trace.weights
    return header + body.tobytes()


def write_trace(trace: RoutingTrace, path: Path | str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_trace(trace))
    except OSError as exc:
        raise TraceIOError(f"Cannot write trace to {path}: {exc}", path=str(path)) from exc
    log.info({"event": "trace_written", "path": str(path), "layers": trace.n_layers,
              "tokens": trace.n_tokens, "n_experts": trace.n_experts, "top_k": trace.top_k})
    return path


def decode_trace(data: bytes, model: Optional[ModelSpec] = None, source: str = "<bytes>") -> RoutingTrace:
    if len(data) < HEADER.size:
        raise TraceFormatError(f"Truncated header in {source}", position=len(data), path=source)
    magic, version, n_experts, k, n_layers, n_tokens = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise TraceFormatError(f"Bad magic {magic!r} in {source}", position=0, path=source)
    if version != VERSION:
        raise TraceVersionError(f"Unsupported trace version {version}, expected {VERSION}", position=4, path=source)
    if k < 1 or k > n_experts:
        raise TopKViolationError(f"k={k} outside [1, N_e={n_experts}]", position=10, path=source)
    if model is not None:
        if model.top_k != k:
            raise TopKViolationError(f"Trace k={k} but model {model.name} routes top-{model.top_k}", position=10, path=source)
        if model.n_routed_experts != n_experts:
            raise ExpertIndexError(f"Trace N_e={n_experts} but model {model.name} has {model.n_routed_experts}", position=6, path=source)
        if model.n_layers != n_layers:
            raise TraceFormatError(f"Trace has {n_layers} layers but model {model.name} has {model.n_layers}", position=12, path=source)

    n_entries = n_layers * n_tokens * k
    expected = HEADER.size + n_entries * ENTRY_DTYPE.itemsize
    if len(data) < expected:
        raise TraceFormatError(f"Truncated body in {source}: {len(data)} of {expected} bytes", position=len(data), path=source)
    if len(data) > expected:
        raise TraceFormatError(f"Trailing bytes in {source}", position=expected, path=source)

    body = np.frombuffer(data, dtype=ENTRY_DTYPE, count=n_entries, offset=HEADER.size).reshape(n_layers, n_tokens, k)
    experts = body["expert"].astype(np.uint16)
    weights = body["weight"].astype(np.float32)

    if n_entries:
        bad = experts >= n_experts
        if bad.any():
            l, t, j = (int(i) for i in np.unravel_index(int(np.argmax(bad)), bad.shape))
            raise ExpertIndexError(
                f"Expert index {int(experts[l, t, j])} out of range [0, {n_experts})",
                position=_entry_offset(l, t, j, n_tokens, k), layer=l, token=t, path=source,
            )
        order = np.sort(experts, axis=2)
        dup = (np.diff(order, axis=2) == 0).any(axis=2)
        if dup.any():
            l, t = (int(i) for i in np.unravel_index(int(np.argmax(dup)), dup.shape))
            raise DuplicateExpertError(
                f"Duplicate expert in selection {experts[l, t].tolist()}",
                position=_entry_offset(l, t, 0, n_tokens, k), layer=l, token=t, path=source,
            )
        out_of_unit = (weights < 0) | (weights > 1) | ~np.isfinite(weights)
        sums = weights.astype(np.float64).sum(axis=2)
        bad_sum = (np.abs(sums - 1.0) > WEIGHT_SUM_TOL) | out_of_unit.any(axis=2)
        if bad_sum.any():
            l, t = (int(i) for i in np.unravel_index(int(np.argmax(bad_sum)), bad_sum.shape))
            raise WeightNormalizationError(
                f"Gate weights {weights[l, t].tolist()} sum to {sums[l, t]:.9f}, expected 1",
                position=_entry_offset(l, t, 0, n_tokens, k), layer=l, token=t, path=source,
            )

    return RoutingTrace(n_experts=n_experts, top_k=k, experts=experts, weights=weights, model=model)


def read_trace(path: Path | str, model: Optional[ModelSpec] = None) -> RoutingTrace:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise TraceIOError(f"Cannot read trace file {path}: {exc.strerror or exc}", path=str(path)) from exc
    trace = decode_trace(data, model=model, source=str(path))
    log.info({"event": "trace_read", "path": str(path), "layers": trace.n_layers, "tokens": trace.n_tokens})
    return trace
