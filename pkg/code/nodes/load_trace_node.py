import logging

from config.settings import SETTINGS
from services.trace_generation_service import generate_trace
from states.pipeline_state import PipelineState
from tools.trace_codec import read_trace

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".nodes.load_trace")


def load_trace_node(state: PipelineState) -> PipelineState:
    cfg = state["config"]
    source = cfg.trace
    if source.file:
        trace = read_trace(source.file, cfg.model)
        origin = source.file
    else:
        trace = generate_trace(cfg.model, source.generate)
        origin = f"generator seed={source.generate.seed}"
    progress = list(state.get("progress_messages", []))
    progress.append(f"Trace ready: {trace.n_layers} layers x {trace.n_tokens} tokens ({origin}).")
    log.info({"event": "trace_loaded", "origin": origin, "layers": trace.n_layers, "tokens": trace.n_tokens})
    return {**state, "trace": trace, "progress_messages": progress}
