"""
JSON scenario documents. Every key is optional except ``schema_version``;
missing keys take the defaults of the dataclasses and settings.
"""
from dataclasses import asdict, fields
import json
import logging
from pathlib import Path

from django.conf import settings

from .exceptions import ConfigError
from .models import DriverModel, GeometrySpec, ScenarioConfig

logger = logging.getLogger(__name__)

SECTIONS = {'driver': DriverModel, 'geometry': GeometrySpec}


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known - {'schema_version'} - set(SECTIONS))
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(unknown)}")
    kwargs = {name: value for name, value in data.items() if name in known and name not in SECTIONS}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("config: expected a JSON object")
    version = data.get('schema_version')
    if version != settings.SCENARIO_SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version: expected {settings.SCENARIO_SCHEMA_VERSION}, got {version!r}"
        )
    sections = {name: _build(cls, data.get(name, {}), name) for name, cls in SECTIONS.items()}
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = sorted(set(data) - known - {'schema_version'})
    if unknown:
        raise ConfigError(f"config: unknown field(s) {', '.join(unknown)}")
    kwargs = {name: value for name, value in data.items() if name in known and name not in SECTIONS}
    try:
        return ScenarioConfig(**kwargs, **sections)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from exc


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: no such config file") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path.name} line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    cfg = config_from_dict(data)
    logger.debug("Loaded scenario config from %s", path)
    return cfg


def config_to_dict(cfg):
    data = asdict(cfg)
    data['aggressiveness'] = str(cfg.aggressiveness)
    data['warning_lead'] = str(cfg.warning_lead)
    data['driver']['decision'] = str(cfg.driver.decision)
    return {'schema_version': settings.SCENARIO_SCHEMA_VERSION, **data}


def dump_config(cfg, path):
    path = Path(path)
    path.write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path
