import contextvars
import logging
import json
import uuid
from datetime import datetime, timezone
from typing import Any, Dict, Optional

from config.settings import SETTINGS


class JsonFormatter(logging.Formatter):
    """
    Format log records as structured JSON with a run_id, ISO-8601 UTC timestamp,
    log level, and logger name.

    Features:
      - If record.msg is a dict -> merged as top-level fields.
      - If record.msg is a string that is valid JSON -> parsed and merged (dict) or
        stored as a value (list/str/number).
      - Otherwise -> stored under "message".
      - Merges `extra=...` fields (excluding standard logging attributes).
      - Includes exception info if present.
    """

    STANDARD_KEYS = {
        "name", "msg", "args", "levelname", "levelno", "pathname", "filename",
        "module", "exc_info", "exc_text", "stack_info", "lineno", "funcName",
        "created", "msecs", "relativeCreated", "thread", "threadName",
        "processName", "process", "stacklevel", "taskName",
    }

    def __init__(self, run_id: str):
        super().__init__()
        self.run_id = run_id

    def format(self, record: logging.LogRecord) -> str:
        base: Dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
            "level": record.levelname,
            "run_id": self.run_id,
            "logger": record.name,
        }

        # 1) Dicts logged directly: log.info({"event": "...", ...})
        if isinstance(record.msg, dict):
            base.update(record.msg)
            message_str = None
        else:
            raw = record.getMessage()
            try:
                parsed = json.loads(raw)
                if isinstance(parsed, dict):
                    base.update(parsed)
                    message_str = None
                else:
                    message_str = parsed
            except (json.JSONDecodeError, TypeError):
                message_str = raw

        if message_str is not None:
            base["message"] = message_str

        # 2) extra={...}
        for k, v in record.__dict__.items():
            if k not in self.STANDARD_KEYS and k not in base:
                base[k] = v

        if record.exc_info:
            base["exception"] = self.formatException(record.exc_info)

        # numpy scalars and paths show up in payloads
        return json.dumps(base, ensure_ascii=False, default=str)


def _level(level: int | str) -> int:
    if isinstance(level, str):
        value = getattr(logging, level.upper(), logging.INFO)
        return value if isinstance(value, int) else logging.INFO
    return level


def setup_logging(
    app_name: str = SETTINGS.LOGGING_APP_NAME,
    level: int | str = logging.INFO,
    to_console: bool = True,
    to_file: bool = True,
    run_id: Optional[str] = None,
    one_log_per_run: bool = False,
) -> logging.Logger:
    """
    Setup JSON logging with a unique run_id.
    Logs to stderr and to a timestamped file under ROOT_DIR/logs.

    Returns a configured logger named `app_name`; every `app_name.*` logger
    created with logging.getLogger inherits its handlers.
    """
    run_id = run_id or str(uuid.uuid4())
    level = _level(level)

    log_dir = SETTINGS.LOG_DIR
    if to_file:
        log_dir.mkdir(parents=True, exist_ok=True)
        current_day = datetime.now().strftime("%Y-%m-%d-%H%M%S")
        if one_log_per_run:
            log_file = log_dir / f"{app_name}_{current_day}_{run_id}.log"
        else:
            log_file = log_dir / f"{app_name}_{current_day}.log"

    logger = logging.getLogger(app_name)
    logger.setLevel(level)
    logger.propagate = False

    # Remove existing handlers (repeated CLI invocations inside one test process)
    for h in logger.handlers[:]:
        logger.removeHandler(h)
        h.close()

    formatter = JsonFormatter(run_id)

    if to_file:
        fh = logging.FileHandler(log_file, encoding="utf-8")
        fh.setFormatter(formatter)
        fh.setLevel(level)
        logger.addHandler(fh)

    if to_console:
        sh = logging.StreamHandler()
        sh.setFormatter(formatter)
        sh.setLevel(level)
        logger.addHandler(sh)

    logger.info({"event": "logger_initialized", "run_id": run_id, "app_name": app_name})
    return logger


def log_report(logger: logging.Logger, rows: int, cols: int, path: Optional[Any] = None,
               sample: Optional[Any] = None, **meta: Any) -> None:
    """
    Log a written report's shape as a structured event.
    Example:
        log_report(log, rows=len(df), cols=len(df.columns), path=out, kind="ladder")
    """
    payload: Dict[str, Any] = {"event": "report_written", "rows": rows, "cols": cols}
    if path is not None:
        payload["path"] = str(path)
    if sample is not None:
        payload["sample"] = sample
    payload.update(meta)
    logger.info(payload)


# ---------- experiment_id propagation ----------

_experiment_id_var: contextvars.ContextVar[Optional[str]] = contextvars.ContextVar("experiment_id", default=None)
_factory_installed = False


def set_experiment_id(experiment_id: Optional[str]) -> None:
    """Attach `experiment_id` to every record created after this call in the current context."""
    _experiment_id_var.set(experiment_id)


def clear_experiment_id() -> None:
    _experiment_id_var.set(None)


def install_experiment_id_factory() -> None:
    """
    Install a LogRecordFactory that injects the current experiment_id (if any)
    into every LogRecord. Idempotent.
    """
    global _factory_installed
    if _factory_installed:
        return
    original_factory = logging.getLogRecordFactory()

    def factory(*args, **kwargs):
        record = original_factory(*args, **kwargs)
        eid = _experiment_id_var.get()
        if eid is not None:
            setattr(record, "experiment_id", eid)
        return record

    logging.setLogRecordFactory(factory)
    _factory_installed = True


def mirror_json_handlers_to_root(
    run_id: str,
    level: int | str = logging.INFO,
    to_console: bool = False,
    to_file: bool = True,
    app_name: str = SETTINGS.LOGGING_APP_NAME,
) -> None:
    """
    Configure the root logger with JSON handlers that share `run_id`, so
    third-party loggers (simpy, langgraph) land in the same stream.
    """
    root = logging.getLogger()
    level = _level(level)
    root.setLevel(level)

    for h in root.handlers[:]:
        root.removeHandler(h)
        h.close()

    fmt = JsonFormatter(run_id=run_id)

    if to_file:
        SETTINGS.LOG_DIR.mkdir(parents=True, exist_ok=True)
        current_day = datetime.now().strftime("%Y-%m-%d")
        fh = logging.FileHandler(SETTINGS.LOG_DIR / f"{app_name}_{current_day}_root.log", encoding="utf-8")
        fh.setFormatter(fmt)
        fh.setLevel(level)
        root.addHandler(fh)

    if to_console:
        sh = logging.StreamHandler()
        sh.setFormatter(fmt)
        sh.setLevel(level)
        root.addHandler(sh)
