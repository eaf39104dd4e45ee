"""
Command-line front end.

    python code/mozart_cli.py ladder --config config/experiments/qwen3_hbm2_ladder.yaml --out output/qwen3
    python code/mozart_cli.py validate-trace --trace traces/olmoe.bin --model olmoe

Exit status: 0 success, 2 config error, 3 I/O error, 4 simulation invariant violation.
"""
import argparse
import json
import logging
import os
import sys
import uuid
from typing import List, Optional

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from pydantic import ValidationError

from config.settings import SETTINGS
from graphs.pipeline_graph import build_pipeline_graph
from models.experiment_model import ExperimentConfig, TraceSource
from services.trace_generation_service import trace_summary
from tools.trace_codec import read_trace
from utils.errors import ConfigError, MozartError, TraceIOError
from utils.logging_json import (
    clear_experiment_id, install_experiment_id_factory, mirror_json_handlers_to_root, set_experiment_id,
    setup_logging,
)
from utils.preset_loader import load_experiment, load_model_preset

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".cli")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default=SETTINGS.LOG_LEVEL, help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--log-file", action=argparse.BooleanOptionalAction, default=True,
                        help="also write JSON logs under logs/")

    pipeline = argparse.ArgumentParser(add_help=False, parents=[common])
    pipeline.add_argument("--config", default=None, help="experiment YAML file")
    pipeline.add_argument("--out", default=None, help="output directory (beats MOZART_OUTPUT_DIR)")
    pipeline.add_argument("--seed", type=int, default=None, help="override the trace generator seed")
    pipeline.add_argument("--format", choices=["json", "csv"], default=None, help="write only this format")
    pipeline.add_argument("--jobs", type=int, default=None, help="worker processes for layers and cells")

    parser = argparse.ArgumentParser(prog="mozart", description="MoE training simulator and expert placement toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("profile", parents=[pipeline], help="per-layer workload and co-activation profiles")
    sub.add_parser("place", parents=[pipeline], help="expert clustering, group allocation and loading priority")
    sub.add_parser("simulate", parents=[pipeline], help="simulate one training step for the configured method")
    sub.add_parser("ladder", parents=[pipeline], help="Baseline, MozartA, MozartB and MozartC side by side")
    sub.add_parser("sweep", parents=[pipeline], help="sequence length x DRAM kind x method grid")

    check = sub.add_parser("validate-trace", parents=[common], help="read a binary trace and print its summary")
    check.add_argument("--trace", required=True, help="binary routing trace")
    check.add_argument("--model", default=None, help="model preset the trace must match")
    return parser


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_experiment(args.config)
    update = {}
    if args.seed is not None:
        if cfg.trace.generate is None:
            log.warning({"event": "seed_ignored", "reason": "trace is read from a file", "file": cfg.trace.file})
        else:
            update["trace"] = TraceSource(generate=cfg.trace.generate.model_copy(update={"seed": args.seed}))
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
        update["jobs"] = args.jobs
    return cfg.model_copy(update=update) if update else cfg


def run_pipeline(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    set_experiment_id(cfg.name)
    out_dir = SETTINGS.output_dir(args.out, cfg.output.dir)
    app = build_pipeline_graph(cfg, jobs=cfg.jobs)
    state = app.invoke({
        "command": args.command,
        "config": cfg,
        "out_dir": out_dir,
        "formats": [args.format] if args.format else list(cfg.output.formats),
        "progress_messages": [f"Running {args.command} for {cfg.name}..."],
    })
    for msg in state.get("progress_messages", []):
        log.info({"event": "progress", "message": msg})
    log.info({"event": "command_done", "command": args.command, "files": len(state.get("written", []))})
    return 0


def validate_trace(args: argparse.Namespace) -> int:
    model = load_model_preset(args.model) if args.model else None
    trace = read_trace(args.trace, model)
    summary = {"path": args.trace, **trace_summary(trace)}
    print(json.dumps(summary, sort_keys=True, indent=2, default=str))
    log.info({"event": "trace_valid", "path": args.trace, "layers": trace.n_layers, "tokens": trace.n_tokens})
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    run_id = str(uuid.uuid4())
    setup_logging(level=args.log_level, to_console=True, to_file=args.log_file, run_id=run_id)
    if args.log_file:
        # third-party loggers go to the same run file set
        mirror_json_handlers_to_root(run_id, level=args.log_level)
    install_experiment_id_factory()
    try:
        if args.command == "validate-trace":
            return validate_trace(args)
        return run_pipeline(args)
    except MozartError as exc:
        log.error({"event": "command_failed", "command": args.command, "exit_code": exc.exit_code, **exc.to_log()})
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        err = ConfigError(f"invalid configuration: {exc.errors(include_url=False)}")
        log.error({"event": "command_failed", "command": args.command, "exit_code": err.exit_code, **err.to_log()})
        print(f"error: {err.message}", file=sys.stderr)
        return err.exit_code
    except OSError as exc:
        err = TraceIOError(str(exc), path=getattr(exc, "filename", None))
        log.error({"event": "command_failed", "command": args.command, "exit_code": err.exit_code, **err.to_log()})
        print(f"error: {err.message}", file=sys.stderr)
        return err.exit_code
    finally:
        clear_experiment_id()


if __name__ == "__main__":
    sys.exit(main())
