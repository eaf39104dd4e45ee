from pathlib import Path
from typing import List, Literal, Optional, TypedDict

from models.experiment_model import ExperimentConfig
from models.layout_model import ExpertLayout, PlacementObjective
from models.profile_model import ExpertProfile
from models.run_model import EventTimeline, LadderReport, StepReport, SweepReport
from models.trace_model import RoutingTrace

Command = Literal["profile", "place", "simulate", "ladder", "sweep"]


class PipelineState(TypedDict, total=False):
    # inputs
    command: Command
    config: ExperimentConfig
    out_dir: Path
    formats: List[str]

    # artifacts, filled as the graph advances
    trace: RoutingTrace
    profiles: List[ExpertProfile]
    layouts: Optional[List[ExpertLayout]]
    objectives: List[PlacementObjective]
    step_report: StepReport
    timeline: EventTimeline
    ladder: LadderReport
    sweep: SweepReport

    written: List[Path]
    progress_messages: List[str]
