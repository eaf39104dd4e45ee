import logging

from config.settings import SETTINGS
from reports import report_writer as rw
from states.pipeline_state import PipelineState

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".nodes.write_reports")


def write_reports_node(state: PipelineState) -> PipelineState:
    cfg = state["config"]
    out_dir, formats = state["out_dir"], state.get("formats") or cfg.output.formats
    command = state["command"]
    written = list(state.get("written", []))

    if command == "profile":
        written += rw.write_profiles(state["profiles"], out_dir)
    elif command == "place":
        written += rw.write_layouts(state["layouts"], state["objectives"], out_dir, formats)
    elif command == "simulate":
        written += rw.write_step_report(state["step_report"], state["timeline"], out_dir, formats,
                                        with_timeline=cfg.output.timeline)
    elif command == "ladder":
        written += rw.write_ladder(state["ladder"], out_dir, formats)
    elif command == "sweep":
        written += rw.write_sweep(state["sweep"], out_dir, formats)

    progress = list(state.get("progress_messages", []))
    progress.append(f"Wrote {len(written)} files to {out_dir}.")
    log.info({"event": "reports_written", "command": command, "files": len(written), "out_dir": str(out_dir)})
    return {**state, "written": written, "progress_messages": progress}
