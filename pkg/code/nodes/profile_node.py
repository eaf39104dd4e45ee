import logging

from config.settings import SETTINGS
from services.profiling_service import profile_trace
from states.pipeline_state import PipelineState

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".nodes.profile")


def make_profile_node(jobs: int = 1):
    def node(state: PipelineState) -> PipelineState:
        profiles = profile_trace(state["trace"], jobs=jobs)
        progress = list(state.get("progress_messages", []))
        progress.append(f"Profiled {len(profiles)} layers.")
        log.info({"event": "profiles_built", "layers": len(profiles), "jobs": jobs})
        return {**state, "profiles": profiles, "progress_messages": progress}
    return node
