import struct

import numpy as np
import pytest

from conftest import make_trace
from models.model_spec import ModelSpec, TraceGenConfig
from services.trace_generation_service import generate_trace
from tools.trace_codec import ENTRY_DTYPE, HEADER, decode_trace, encode_trace, read_trace, write_trace
from utils.errors import (
    DuplicateExpertError, ExpertIndexError, TopKViolationError, TraceFormatError, TraceIOError,
    TraceVersionError, WeightNormalizationError,
)

MODEL = ModelSpec(name="codec", n_layers=2, n_routed_experts=8, top_k=2, hidden_size=32,
                  expert_ffn_dim=16, n_heads=2, n_kv_heads=2, head_dim=16)


@pytest.fixture
def small_trace():
    return generate_trace(MODEL, TraceGenConfig(seed=9, skew=0.5, n_tokens=10))


def _patch_entry(data: bytes, index: int, expert=None, weight=None) -> bytes:
    raw = bytearray(data)
    off = HEADER.size + index * ENTRY_DTYPE.itemsize
    if expert is not None:
        struct.pack_into("<H", raw, off, expert)
    if weight is not None:
        struct.pack_into("<f", raw, off + 2, weight)
    return bytes(raw)


def test_rewrite_is_byte_identical(tmp_path, small_trace):
    first = write_trace(small_trace, tmp_path / "a.bin")
    again = write_trace(read_trace(first, MODEL), tmp_path / "b.bin")
    assert first.read_bytes() == again.read_bytes()
    assert len(first.read_bytes()) == HEADER.size + 2 * 10 * 2 * ENTRY_DTYPE.itemsize


def test_duplicate_expert_names_layer_and_token(small_trace):
    data = encode_trace(small_trace)
    # layer 1, token 3: entries (1*10 + 3)*2 and +1
    first = int(small_trace.experts[1, 3, 0])
    data = _patch_entry(data, (1 * 10 + 3) * 2 + 1, expert=first)
    with pytest.raises(DuplicateExpertError) as err:
        decode_trace(data)
    assert err.value.layer == 1 and err.value.token == 3
    assert "layer 1" in str(err.value) and "token 3" in str(err.value)


def test_weights_summing_to_point_eight_are_rejected():
    trace = make_trace([[[0, 1]]], n_experts=8)
    data = _patch_entry(_patch_entry(encode_trace(trace), 0, weight=0.4), 1, weight=0.4)
    with pytest.raises(WeightNormalizationError) as err:
        decode_trace(data)
    assert err.value.position == HEADER.size


def test_out_of_range_expert(small_trace):
    data = _patch_entry(encode_trace(small_trace), 5, expert=8)
    with pytest.raises(ExpertIndexError) as err:
        decode_trace(data)
    assert err.value.position == HEADER.size + 5 * ENTRY_DTYPE.itemsize


def test_header_errors(small_trace):
    data = encode_trace(small_trace)
    with pytest.raises(TraceFormatError):
        decode_trace(b"XXXX" + data[4:])
    with pytest.raises(TraceVersionError):
        decode_trace(data[:4] + struct.pack("<H", 2) + data[6:])
    with pytest.raises(TraceFormatError):
        decode_trace(data[:-1])
    with pytest.raises(TraceFormatError):
        decode_trace(data + b"\0")
    with pytest.raises(TraceFormatError):
        decode_trace(data[:10])


def test_model_mismatch_is_a_topk_violation(small_trace):
    other = MODEL.model_copy(update={"top_k": 3})
    with pytest.raises(TopKViolationError):
        decode_trace(encode_trace(small_trace), other)


def test_missing_file_names_path(tmp_path):
    missing = tmp_path / "nope.bin"
    with pytest.raises(TraceIOError) as err:
        read_trace(missing)
    assert str(missing) in str(err.value)
    assert err.value.exit_code == 3


def test_zero_token_trace_round_trips():
    empty = make_trace(np.zeros((2, 0, 2)), n_experts=8)
    back = decode_trace(encode_trace(empty))
    assert back.n_tokens == 0 and back.n_layers == 2
