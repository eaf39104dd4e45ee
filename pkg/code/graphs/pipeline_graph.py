"""
LangGraph workflow for the profile -> place -> simulate pipeline:
- load_trace: generate or read the routing trace
- profile: per-layer workload and co-activation
- place: clustering, group allocation and loading priority
- simulate / ladder / sweep: event simulation of training steps
- write_reports: JSON, CSV and markdown artifacts
Conditional edges stop the pipeline as soon as the requested command has what it needs.
"""
from langgraph.graph import StateGraph, END

from models.experiment_model import ExperimentConfig
from nodes.ladder_node import make_ladder_node
from nodes.load_trace_node import load_trace_node
from nodes.place_node import make_place_node
from nodes.profile_node import make_profile_node
from nodes.simulate_node import make_simulate_node
from nodes.sweep_node import make_sweep_node
from nodes.write_reports_node import write_reports_node
from services.placement_service import PlacementService
from services.simulation_service import SimulationService
from states.pipeline_state import PipelineState

NODE_LOAD_TRACE = "load_trace_node"
NODE_PROFILE = "profile_node"
NODE_PLACE = "place_node"
NODE_SIMULATE = "simulate_node"
NODE_LADDER = "ladder_node"
NODE_SWEEP = "sweep_node"
NODE_WRITE = "write_reports_node"

_RUN_NODES = {"simulate": NODE_SIMULATE, "ladder": NODE_LADDER, "sweep": NODE_SWEEP}


def needs_placement(state: PipelineState) -> bool:
    cfg, command = state["config"], state["command"]
    if command == "simulate":
        return cfg.run.layout_file is None and cfg.run.flags.specialized_layout
    if command == "sweep":
        return any(cfg.run.model_copy(update={"method": m}).flags.specialized_layout for m in cfg.sweep.methods)
    return True


def after_trace(state: PipelineState) -> str:
    return NODE_PROFILE if needs_placement(state) else _RUN_NODES[state["command"]]


def after_profile(state: PipelineState) -> str:
    return NODE_WRITE if state["command"] == "profile" else NODE_PLACE


def after_place(state: PipelineState) -> str:
    return _RUN_NODES.get(state["command"], NODE_WRITE)


def build_pipeline_graph(cfg: ExperimentConfig, jobs: int = 1):
    placer = PlacementService(cfg.hardware, cfg.placement.mode, jobs)
    sim = SimulationService(cfg.model, cfg.hardware)

    g = StateGraph(PipelineState)
    g.add_node(NODE_LOAD_TRACE, load_trace_node)
    g.add_node(NODE_PROFILE, make_profile_node(jobs))
    g.add_node(NODE_PLACE, make_place_node(placer))
    g.add_node(NODE_SIMULATE, make_simulate_node(sim, with_timeline=cfg.output.timeline))
    g.add_node(NODE_LADDER, make_ladder_node(jobs))
    g.add_node(NODE_SWEEP, make_sweep_node(jobs))
    g.add_node(NODE_WRITE, write_reports_node)

    g.set_entry_point(NODE_LOAD_TRACE)
    g.add_conditional_edges(
        NODE_LOAD_TRACE, after_trace,
        {NODE_PROFILE: NODE_PROFILE, NODE_SIMULATE: NODE_SIMULATE, NODE_SWEEP: NODE_SWEEP},
    )
    g.add_conditional_edges(NODE_PROFILE, after_profile, {NODE_WRITE: NODE_WRITE, NODE_PLACE: NODE_PLACE})
    g.add_conditional_edges(
        NODE_PLACE, after_place,
        {NODE_SIMULATE: NODE_SIMULATE, NODE_LADDER: NODE_LADDER, NODE_SWEEP: NODE_SWEEP, NODE_WRITE: NODE_WRITE},
    )
    g.add_edge(NODE_SIMULATE, NODE_WRITE)
    g.add_edge(NODE_LADDER, NODE_WRITE)
    g.add_edge(NODE_SWEEP, NODE_WRITE)
    g.add_edge(NODE_WRITE, END)
    return g.compile()
