"""Error hierarchy shared by every layer.

Each class carries the process exit status the CLI maps it to:
0 success, 2 config error, 3 I/O error, 4 simulation invariant violation.
"""
from typing import Any, Dict, Optional


class MozartError(Exception):
    exit_code: int = 1

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = {k: v for k, v in context.items() if v is not None}

    def to_log(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, **self.context}

    def __reduce__(self):
        # subclasses take positional context, so rebuild from state when crossing process pools
        return _restore, (type(self), self.message, self.__dict__)


def _restore(cls, message: str, state: Dict[str, Any]) -> "MozartError":
    err = cls.__new__(cls)
    Exception.__init__(err, message)
    err.__dict__.update(state)
    return err


# ---------- configuration ----------

class ConfigError(MozartError):
    exit_code = 2


class PresetNotFoundError(ConfigError):
    pass


# ---------- trace I/O ----------

class TraceIOError(MozartError):
    exit_code = 3


class TraceFormatError(TraceIOError):
    """Malformed trace file. `position` is the byte offset of the offending field."""

    def __init__(self, message: str, position: Optional[int] = None,
                 layer: Optional[int] = None, token: Optional[int] = None, path: Optional[str] = None):
        where = []
        if layer is not None:
            where.append(f"layer {layer}")
        if token is not None:
            where.append(f"token {token}")
        if position is not None:
            where.append(f"byte {position}")
        full = f"{message} ({', '.join(where)})" if where else message
        super().__init__(full, position=position, layer=layer, token=token, path=path)
        self.position = position
        self.layer = layer
        self.token = token


class TraceVersionError(TraceFormatError):
    pass


class TopKViolationError(TraceFormatError):
    pass


class DuplicateExpertError(TopKViolationError):
    pass


class ExpertIndexError(TraceFormatError):
    pass


class WeightNormalizationError(TraceFormatError):
    pass


# ---------- algorithms ----------

class TraceGenerationError(ConfigError):
    pass


class ProfilingError(MozartError):
    exit_code = 2


class PlacementError(MozartError):
    exit_code = 2


class DivisibilityError(PlacementError):
    pass


class SolverSizeError(PlacementError):
    pass


class LayoutError(PlacementError):
    pass


class CostModelError(MozartError):
    exit_code = 2


# ---------- simulation ----------

class SimulationError(MozartError):
    exit_code = 2


class SramCapacityError(SimulationError):
    def __init__(self, message: str, layer: int, required_bytes: int, capacity_bytes: int, where: str):
        super().__init__(
            f"{message}: layer {layer} needs {required_bytes} bytes on the {where}, capacity {capacity_bytes}",
            layer=layer, required_bytes=required_bytes, capacity_bytes=capacity_bytes, where=where,
        )
        self.layer = layer
        self.required_bytes = required_bytes
        self.capacity_bytes = capacity_bytes


class SimulationInvariantError(SimulationError):
    exit_code = 4
