from .model_spec import ModelSpec, TraceGenConfig
from .trace_model import RoutingTrace
from .profile_model import ExpertProfile
from .layout_model import ClusterAssignment, ExpertLayout, PlacementObjective
from .comm_model import A2AAccount, BoundCertificate, RoutingCounts
from .hardware_model import CostQuote, HardwareSpec
from .run_model import (
    Breakdown, EventTimeline, LadderReport, LadderRow, LayerRow, Method, RunConfig,
    StepReport, SweepReport, TimelineEvent,
)
from .experiment_model import ExperimentConfig, TraceSource

__all__ = [
    "ModelSpec", "TraceGenConfig", "RoutingTrace", "ExpertProfile",
    "ClusterAssignment", "ExpertLayout", "PlacementObjective",
    "A2AAccount", "BoundCertificate", "RoutingCounts",
    "CostQuote", "HardwareSpec",
    "Breakdown", "EventTimeline", "LadderReport", "LadderRow", "LayerRow", "Method", "RunConfig",
    "StepReport", "SweepReport", "TimelineEvent",
    "ExperimentConfig", "TraceSource",
]
