"""
Artifact and report files.

Everything written here is byte-stable for identical inputs: JSON uses sorted
keys and fixed indentation, CSV goes through pandas with a fixed column order.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence

import pandas as pd

from config.settings import SETTINGS
from models.layout_model import ExpertLayout, PlacementObjective
from models.profile_model import ExpertProfile
from models.run_model import EventTimeline, LadderReport, StepReport, SweepReport
from utils.errors import ConfigError, LayoutError, TraceIOError
from utils.logging_json import log_report

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".reports.report_writer")

PROFILE_DIR = "profiles"
LAYOUT_DIR = "layouts"
TIMELINE_COLUMNS = ["step", "time_s", "resource", "kind", "duration_s", "layer", "micro_batch", "pass", "bytes", "flops"]


def _layer_file(directory: Path, layer: int) -> Path:
    return directory / f"layer_{layer:03d}.json"


def write_json(doc: Any, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        path.write_text(json.dumps(doc, sort_keys=True, indent=2, default=str) + "\n", encoding="utf-8")
    except OSError as exc:
        raise TraceIOError(f"cannot write {path}: {exc}", path=str(path)) from exc
    return path


def read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise TraceIOError(f"file not found: {path}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}", path=str(path)) from exc


def write_frame(df: pd.DataFrame, path: Path, **meta) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        df.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
    except OSError as exc:
        raise TraceIOError(f"cannot write {path}: {exc}", path=str(path)) from exc
    log_report(log, len(df), len(df.columns), path, **meta)
    return path


# ---------- profiles and layouts ----------

def profile_to_json(profile: ExpertProfile) -> Dict[str, Any]:
    return profile.to_json_dict()


def profile_from_json(doc: Dict[str, Any]) -> ExpertProfile:
    return ExpertProfile.from_json_dict(doc)


def layout_to_json(layout: ExpertLayout) -> Dict[str, Any]:
    return layout.to_json_dict()


def layout_from_json(doc: Dict[str, Any], group_of_chiplet: Sequence[int]) -> ExpertLayout:
    return ExpertLayout.from_json_dict(doc, list(group_of_chiplet))


def write_profiles(profiles: Sequence[ExpertProfile], out_dir: Path) -> List[Path]:
    directory = out_dir / PROFILE_DIR
    paths = [write_json(profile_to_json(p), _layer_file(directory, p.layer)) for p in profiles]
    log.info({"event": "profiles_written", "dir": str(directory), "files": len(paths)})
    return paths


def read_profiles(directory: Path) -> List[ExpertProfile]:
    files = sorted(Path(directory).glob("layer_*.json"))
    if not files:
        raise TraceIOError(f"no profile files in {directory}", path=str(directory))
    return [profile_from_json(read_json(f)) for f in files]


def write_layouts(layouts: Sequence[ExpertLayout], objectives: Sequence[PlacementObjective], out_dir: Path,
                  formats: Sequence[str] = ("json", "csv")) -> List[Path]:
    directory = out_dir / LAYOUT_DIR
    paths = [write_json(layout_to_json(l), _layer_file(directory, l.layer)) for l in layouts]
    rows = [o.model_dump() for o in objectives]
    if "json" in formats:
        paths.append(write_json(rows, directory / "placement_objective.json"))
    if "csv" in formats:
        df = pd.DataFrame(rows).drop(columns=["group_loads"], errors="ignore")
        paths.append(write_frame(df, directory / "placement_objective.csv", what="placement_objective"))
    log.info({"event": "layouts_written", "dir": str(directory), "layers": len(layouts)})
    return paths


def read_layouts(path: Path | str, group_of_chiplet: Sequence[int]) -> List[ExpertLayout]:
    """A layouts directory written by `place`, or a single JSON list of per-layer layouts."""
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("layer_*.json"))
        if not files:
            raise TraceIOError(f"no layout files in {path}", path=str(path))
        docs = [read_json(f) for f in files]
    else:
        docs = read_json(path)
        docs = docs if isinstance(docs, list) else [docs]
    try:
        return [layout_from_json(d, group_of_chiplet) for d in docs]
    except (KeyError, TypeError, ValueError) as exc:
        raise LayoutError(f"invalid layout file {path}: {exc}", path=str(path)) from exc


# ---------- simulation reports ----------

def write_step_report(report: StepReport, timeline: EventTimeline, out_dir: Path,
                      formats: Sequence[str], with_timeline: bool = False) -> List[Path]:
    paths: List[Path] = []
    if "json" in formats:
        paths.append(write_json(report.model_dump(mode="json"), out_dir / "step_report.json"))
    if "csv" in formats:
        paths.append(write_frame(pd.DataFrame([report.to_row()]), out_dir / "step_report.csv", what="step_report"))
        per_layer = pd.DataFrame([r.model_dump() for r in report.per_layer])
        paths.append(write_frame(per_layer, out_dir / "per_layer.csv", what="per_layer"))
    if with_timeline:
        paths.append(write_frame(timeline.to_frame()[TIMELINE_COLUMNS], out_dir / "timeline.csv",
                                 what="timeline"))
    return paths


def ladder_frame(ladder: LadderReport) -> pd.DataFrame:
    return pd.DataFrame([
        {"model": ladder.model, "dram_kind": ladder.dram_kind, "seq_len": ladder.seq_len,
         **r.model_dump(mode="json")}
        for r in ladder.rows
    ])


def write_ladder(ladder: LadderReport, out_dir: Path, formats: Sequence[str]) -> List[Path]:
    from reports.report_markdown import generate_ladder_markdown

    paths: List[Path] = []
    if "json" in formats:
        paths.append(write_json(ladder.model_dump(mode="json"), out_dir / "ladder.json"))
    if "csv" in formats:
        paths.append(write_frame(ladder_frame(ladder), out_dir / "ladder.csv", what="ladder"))
    paths.append(generate_ladder_markdown(ladder, out_dir / "ladder.md"))
    return paths


def write_sweep(sweep: SweepReport, out_dir: Path, formats: Sequence[str]) -> List[Path]:
    from reports.report_markdown import generate_sweep_markdown

    paths: List[Path] = []
    if "json" in formats:
        paths.append(write_json(sweep.model_dump(mode="json"), out_dir / "sweep.json"))
    if "csv" in formats:
        paths.append(write_frame(sweep.to_frame(), out_dir / "sweep.csv", what="sweep"))
    paths.append(generate_sweep_markdown(sweep, out_dir / "sweep.md"))
    return paths
