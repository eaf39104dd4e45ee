import logging

from config.settings import SETTINGS
from services.experiment_service import run_ladder
from states.pipeline_state import PipelineState

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".nodes.ladder")


def make_ladder_node(jobs: int = 1):
    def node(state: PipelineState) -> PipelineState:
        cfg = state["config"]
        ladder = run_ladder(cfg.model, cfg.hardware, cfg.run, state["trace"], mozart_layouts=state["layouts"],
                            mode=cfg.placement.mode, jobs=jobs)
        progress = list(state.get("progress_messages", []))
        progress.append("Ladder: " + ", ".join(f"{r.method.value}={r.normalized_latency:.3f}" for r in ladder.rows))
        log.info({"event": "ladder_node_done", "methods": len(ladder.rows)})
        return {**state, "ladder": ladder, "progress_messages": progress}
    return node
