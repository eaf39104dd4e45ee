import copy
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from config.settings import SETTINGS
from models.experiment_model import ExperimentConfig
from models.hardware_model import DramKind, HardwareSpec
from models.model_spec import ModelSpec
from utils.errors import ConfigError, PresetNotFoundError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".utils.preset_loader")


def load_yaml(path: Path | str) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError as exc:
        raise ConfigError(f"Config file not found: {path}", path=str(path)) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Invalid YAML in {path}: {exc}", path=str(path)) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Top level of {path} must be a mapping", path=str(path))
    return data


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge `overrides` over `base`; mappings merge, everything else replaces."""
    out = copy.deepcopy(base)
    for key, value in (overrides or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def alias_to_canonical(name: str, aliases: Dict[str, Any]) -> Optional[str]:
    wanted = str(name).strip().lower()
    for canonical, names in (aliases or {}).items():
        if wanted == canonical.lower() or wanted in {str(n).lower() for n in names or []}:
            return canonical
    return None


def _preset_block(path: Path, section: str, name: str) -> tuple[str, Dict[str, Any]]:
    cfg = load_yaml(path)
    presets: Dict[str, Any] = cfg.get(section, {}) or {}
    canonical = name if name in presets else alias_to_canonical(name, cfg.get("aliases", {}))
    if canonical is None or canonical not in presets:
        raise PresetNotFoundError(
            f"Preset '{name}' not found in {path} (known: {', '.join(sorted(presets))})",
            preset=name, path=str(path),
        )
    return canonical, copy.deepcopy(presets[canonical])


def _expand(value: Any, path: Path, section: str) -> tuple[Optional[str], Dict[str, Any]]:
    """A preset name, a mapping with `preset:` plus overrides, or an inline mapping."""
    if isinstance(value, str):
        return _preset_block(path, section, value)
    if isinstance(value, dict):
        value = dict(value)
        preset = value.pop("preset", None)
        if preset is None:
            return None, value
        canonical, block = _preset_block(path, section, preset)
        return canonical, deep_merge(block, value)
    raise ConfigError(f"Expected a preset name or mapping for '{section}', got {type(value).__name__}")


def _validate(cls, data: Dict[str, Any], what: str):
    try:
        return cls.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid {what}: {exc.errors(include_url=False)}") from exc


def resolve_model(value: Any, path: Path | None = None) -> ModelSpec:
    canonical, data = _expand(value, path or SETTINGS.MODEL_PRESETS_PATH, "models")
    data.setdefault("name", canonical or "custom")
    return _validate(ModelSpec, data, "model")


def resolve_hardware(value: Any, dram: Optional[DramKind] = None, path: Path | None = None) -> HardwareSpec:
    canonical, data = _expand(value, path or SETTINGS.HARDWARE_PRESETS_PATH, "hardware")
    data.setdefault("name", canonical or "custom")
    hw = _validate(HardwareSpec, data, "hardware")
    return hw.with_dram(dram) if dram else hw


def load_model_preset(name: str) -> ModelSpec:
    return resolve_model(name)


def load_hardware_preset(name: str, dram: Optional[DramKind] = None) -> HardwareSpec:
    return resolve_hardware(name, dram)


def load_experiment(path: Path | str | None = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Build an ExperimentConfig from config.yaml defaults, an experiment file and
    programmatic overrides, resolving model/hardware presets before validation.
    """
    defaults = load_yaml(SETTINGS.CONFIG_YAML_PATH).get("mozart", {}) if SETTINGS.CONFIG_YAML_PATH.exists() else {}
    doc = load_yaml(path) if path else {}
    if "trace" in doc:
        # one trace source only: the experiment's choice replaces the default generator
        defaults = {k: v for k, v in defaults.items() if k != "trace"}
    merged = deep_merge(defaults, doc)
    if overrides and "trace" in overrides:
        merged.pop("trace", None)
    merged = deep_merge(merged, overrides or {})

    if "model" not in merged or "hardware" not in merged:
        raise ConfigError(f"Experiment {path or '<inline>'} must name a model and a hardware preset")
    merged["model"] = resolve_model(merged["model"]).model_dump()
    merged["hardware"] = resolve_hardware(merged["hardware"]).model_dump()
    if path and "name" not in doc:
        merged["name"] = Path(path).stem

    cfg = _validate(ExperimentConfig, merged, f"experiment {path or '<inline>'}")
    log.info({"event": "experiment_loaded", "name": cfg.name, "model": cfg.model.name,
              "hardware": cfg.hardware.name, "dram": cfg.hardware.dram.kind, "method": cfg.run.method.value})
    return cfg
