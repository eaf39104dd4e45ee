import logging

from config.settings import SETTINGS
from reports.report_writer import read_layouts
from services.placement_service import baseline_layout
from services.simulation_service import SimulationService
from states.pipeline_state import PipelineState

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".nodes.simulate")


def make_simulate_node(sim: SimulationService, with_timeline: bool = False):
    def node(state: PipelineState) -> PipelineState:
        run = state["config"].run
        if run.layout_file:
            layouts = read_layouts(run.layout_file, sim.hw.group_of_chiplet)
            origin = run.layout_file
        elif run.flags.specialized_layout:
            layouts = state["layouts"]
            origin = "placement"
        else:
            layouts = [baseline_layout(sim.model, sim.hw, l) for l in range(sim.model.n_layers)]
            origin = "baseline"
        report, timeline = sim.simulate(run, layouts, state["trace"], with_timeline=with_timeline)
        progress = list(state.get("progress_messages", []))
        progress.append(f"{run.method.value} step latency {report.latency_s * 1e3:.2f} ms (layouts: {origin}).")
        log.info({"event": "simulate_node_done", "method": run.method.value, "layouts": origin,
                  "latency_s": report.latency_s})
        return {**state, "layouts": layouts, "step_report": report, "timeline": timeline, "progress_messages": progress}
    return node
