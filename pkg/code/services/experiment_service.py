import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Literal, Optional, Sequence

from config.settings import SETTINGS
from models.hardware_model import DramKind, HardwareSpec
from models.layout_model import ExpertLayout
from models.model_spec import ModelSpec
from models.profile_model import ExpertProfile
from models.run_model import LADDER, LadderReport, LadderRow, Method, RunConfig, StepReport, SweepReport
from models.trace_model import RoutingTrace
from services.placement_service import PlacementService
from services.profiling_service import profile_trace
from services.simulation_service import simulate_step
from utils.errors import SimulationInvariantError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".services.experiment_service")

WORK_REL_TOL = 1e-12


def layouts_for_methods(
    model: ModelSpec,
    hw: HardwareSpec,
    trace: RoutingTrace,
    methods: Sequence[Method],
    profiles: Optional[Sequence[ExpertProfile]] = None,
    mozart_layouts: Optional[Sequence[ExpertLayout]] = None,
    mode: Literal["exact", "greedy"] = "exact",
    jobs: int = 1,
) -> Dict[Method, List[ExpertLayout]]:
    """Baseline layouts for every method without a specialized layout, profiled placement otherwise."""
    placer = PlacementService(hw, mode, jobs)
    baseline = placer.baseline(model)
    out: Dict[Method, List[ExpertLayout]] = {}
    for method in methods:
        if not RunConfig(method=method).flags.specialized_layout:
            out[method] = baseline
            continue
        if mozart_layouts is None:
            mozart_layouts = placer.place(profiles if profiles is not None else profile_trace(trace, jobs=jobs))
        out[method] = list(mozart_layouts)
    return out


def _simulate_cell(args) -> StepReport:
    model, hw, run, layouts, trace = args
    report, _ = simulate_step(model, hw, run, layouts, trace, with_timeline=False)
    return report


def _map(work: list, jobs: int) -> List[StepReport]:
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_simulate_cell, work))
    return [_simulate_cell(w) for w in work]


def check_work_invariance(baseline: StepReport, overlapped: StepReport) -> None:
    """Overlap reorders work, it must not add or drop any."""
    for field in ("total_flops", "total_dram_bytes"):
        a, b = getattr(baseline, field), getattr(overlapped, field)
        if abs(a - b) > WORK_REL_TOL * max(abs(a), 1):
            raise SimulationInvariantError(
                f"{field} differs between {baseline.method.value} ({a}) and {overlapped.method.value} ({b})",
                field=field,
            )


def run_ladder(
    model: ModelSpec,
    hw: HardwareSpec,
    base_run: RunConfig,
    trace: RoutingTrace,
    profiles: Optional[Sequence[ExpertProfile]] = None,
    mozart_layouts: Optional[Sequence[ExpertLayout]] = None,
    mode: Literal["exact", "greedy"] = "exact",
    jobs: int = 1,
) -> LadderReport:
    """Baseline, MozartA, MozartB and MozartC on one configuration; latency normalized to Baseline."""
    layouts = layouts_for_methods(model, hw, trace, LADDER, profiles, mozart_layouts, mode, jobs)
    work = [(model, hw, base_run.model_copy(update={"method": m}), layouts[m], trace) for m in LADDER]
    reports = _map(work, jobs)
    by_method = {r.method: r for r in reports}
    check_work_invariance(by_method[Method.BASELINE], by_method[Method.MOZART_A])

    base_latency = by_method[Method.BASELINE].latency_s
    rows = [
        LadderRow(
            method=r.method,
            latency_s=r.latency_s,
            normalized_latency=r.latency_s / base_latency if base_latency else 1.0,
            c_t=r.c_t_mean,
            energy_j=r.energy_j,
        )
        for r in reports
    ]
    log.info({"event": "ladder_done", "model": model.name, "dram": hw.dram.kind, "seq_len": base_run.seq_len,
              "normalized": {r.method.value: round(r.normalized_latency, 4) for r in rows}})
    return LadderReport(model=model.name, dram_kind=hw.dram.kind, seq_len=base_run.seq_len, rows=rows, reports=reports)


def sweep(
    model: ModelSpec,
    hw_variants: Sequence[HardwareSpec],
    run_variants: Sequence[RunConfig],
    trace: RoutingTrace,
    profiles: Optional[Sequence[ExpertProfile]] = None,
    mozart_layouts: Optional[Sequence[ExpertLayout]] = None,
    mode: Literal["exact", "greedy"] = "exact",
    jobs: int = 1,
) -> SweepReport:
    """
    Every run variant on every hardware variant. Placement depends on the
    topology only, so one set of layouts serves all variants; they must
    therefore share chiplet and group counts.
    """
    if not hw_variants or not run_variants:
        return SweepReport(model=model.name, cells=[])
    methods = sorted({r.method for r in run_variants}, key=LADDER.index)
    layouts = layouts_for_methods(model, hw_variants[0], trace, methods, profiles, mozart_layouts, mode, jobs)
    work = [(model, hw, run, layouts[run.method], trace) for hw, run in itertools.product(hw_variants, run_variants)]
    cells = _map(work, jobs)
    log.info({"event": "sweep_done", "model": model.name, "cells": len(cells),
              "hardware_variants": len(hw_variants), "run_variants": len(run_variants)})
    return SweepReport(model=model.name, cells=cells)


def sweep_grid(
    model: ModelSpec,
    hw: HardwareSpec,
    base_run: RunConfig,
    trace: RoutingTrace,
    seq_lens: Sequence[int],
    dram_kinds: Sequence[DramKind],
    methods: Sequence[Method] = LADDER,
    **kwargs,
) -> SweepReport:
    hw_variants = [hw.with_dram(kind) for kind in dram_kinds]
    run_variants = [base_run.model_copy(update={"seq_len": s, "method": m}) for s in seq_lens for m in methods]
    return sweep(model, hw_variants, run_variants, trace, **kwargs)
