import logging

from config.settings import SETTINGS
from services.placement_service import PlacementService
from states.pipeline_state import PipelineState

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".nodes.place")


def make_place_node(placer: PlacementService):
    def node(state: PipelineState) -> PipelineState:
        profiles = state["profiles"]
        layouts = placer.place(profiles)
        objectives = placer.objectives(layouts, profiles)
        progress = list(state.get("progress_messages", []))
        worst = max((o.group_imbalance for o in objectives), default=0.0)
        progress.append(f"Placed {len(layouts)} layers ({placer.mode}); worst group imbalance {worst:.4f}.")
        log.info({"event": "placement_done", "layers": len(layouts), "mode": placer.mode, "worst_imbalance": worst})
        return {**state, "layouts": layouts, "objectives": objectives, "progress_messages": progress}
    return node
