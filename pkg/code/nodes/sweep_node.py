import logging

from config.settings import SETTINGS
from services.experiment_service import sweep_grid
from states.pipeline_state import PipelineState

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".nodes.sweep")


def make_sweep_node(jobs: int = 1):
    def node(state: PipelineState) -> PipelineState:
        cfg = state["config"]
        report = sweep_grid(
            cfg.model, cfg.hardware, cfg.run, state["trace"],
            seq_lens=cfg.sweep.seq_lens, dram_kinds=cfg.sweep.dram_kinds, methods=cfg.sweep.methods,
            mozart_layouts=state.get("layouts"), mode=cfg.placement.mode, jobs=jobs,
        )
        progress = list(state.get("progress_messages", []))
        progress.append(f"Sweep finished: {len(report.cells)} cells.")
        log.info({"event": "sweep_finished", "cells": len(report.cells), "jobs": jobs})
        return {**state, "sweep": report, "progress_messages": progress}
    return node
