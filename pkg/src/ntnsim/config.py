"""Config files, overrides, and the echo that makes runs reproducible.

A run is configured by an optional YAML file plus dotted ``key=value``
overrides.  The file has one flat ``radio`` section mirroring the shared
parameter table field for field, one section per scenario, and optional
top-level ``trials``/``seed`` defaults.  Every key is checked against the
dataclass it configures; anything unrecognized is rejected by name rather
than silently ignored.

The resolved configuration can be flattened back out, either as metadata
lines for the result CSV or as a mapping that reloads to an identical run.
"""

from __future__ import annotations

import types
import typing
from dataclasses import dataclass, fields
from enum import Enum

import yaml

from .adhoc import AdhocConfig
from .cellfree import CellfreeConfig
from .coverage import CoverageConfig
from .iab import IabConfig
from .radio import RadioTable

SCENARIOS: dict[str, type] = {
    "adhoc": AdhocConfig,
    "cellfree-energy": CellfreeConfig,
    "coverage": CoverageConfig,
    "iab": IabConfig,
}


class ConfigError(Exception):
    """Invalid configuration input; the message names the offending key."""


@dataclass(frozen=True)
class RunSpec:
    """A scenario id plus its fully-resolved configuration and run knobs."""

    scenario: str
    config: object
    trials: int | None
    seed: int


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file does not parse: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config file must be a key-value mapping at the top level")
    return data


def parse_override(text: str) -> tuple[str, object]:
    """Split ``dotted.key=value``; the value is parsed as a YAML scalar."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override must look like key=value, got {text!r}")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigError(f"override value for {key!r} does not parse: {exc}") from exc
    return key.strip(), value


def apply_override(mapping: dict, dotted_key: str, value: object) -> None:
    parts = dotted_key.split(".")
    node = mapping
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"cannot override below non-section key: {part}")
        node = child
    node[parts[-1]] = value


def _coerce(path: str, value: object, tp: type) -> object:
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)

    if origin is typing.Union or origin is types.UnionType:
        non_none = [a for a in args if a is not type(None)]
        if value is None:
            if len(non_none) < len(args):
                return None
            raise ConfigError(f"{path} must not be null")
        if len(non_none) == 1:
            return _coerce(path, value, non_none[0])
        raise ConfigError(f"{path} has an unsupported union type")

    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path} must be a list")
        elem = args[0] if args else float
        return tuple(_coerce(f"{path}[{i}]", v, elem) for i, v in enumerate(value))

    if isinstance(tp, type) and issubclass(tp, Enum):
        if isinstance(value, tp):
            return value
        try:
            return tp(value)
        except ValueError:
            valid = ", ".join(m.value for m in tp)
            raise ConfigError(f"{path} must be one of: {valid}; got {value!r}") from None

    if tp is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{path} must be true or false, got {value!r}")
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path} must be an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path} must be a string, got {value!r}")
        return value
    raise ConfigError(f"{path} has an unsupported type")


def _build_dataclass(cls: type, section: object, prefix: str, **injected):
    if section is None:
        section = {}
    if not isinstance(section, dict):
        raise ConfigError(f"section {prefix} must be a key-value mapping")
    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls)} - set(injected)
    kwargs = dict(injected)
    for key, value in section.items():
        if key not in known:
            raise ConfigError(f"unknown key: {prefix}.{key}")
        kwargs[key] = _coerce(f"{prefix}.{key}", value, hints[key])
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid value in section {prefix}: {exc}") from exc


def build_run(
    scenario: str,
    mapping: dict | None = None,
    *,
    trials: int | None = None,
    seed: int | None = None,
) -> RunSpec:
    """Resolve a scenario run from a config mapping plus explicit knobs.

    Explicit ``trials``/``seed`` win over values in the mapping.  The
    mapping may hold sections for every scenario at once; only ``radio``
    and the section named by ``scenario`` are consumed here.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario: {scenario}")
    mapping = dict(mapping or {})

    named = mapping.pop("scenario", scenario)
    if named != scenario:
        raise ConfigError(f"config file names scenario {named!r} but the run is {scenario!r}")
    allowed = {"radio", "trials", "seed"} | set(SCENARIOS)
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown key: {key}")

    radio = _build_dataclass(RadioTable, mapping.get("radio"), "radio")
    config = _build_dataclass(SCENARIOS[scenario], mapping.get(scenario), scenario, radio=radio)

    if trials is None:
        trials = _coerce("trials", mapping["trials"], int) if "trials" in mapping else None
    if trials is not None and trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    if seed is None:
        seed = _coerce("seed", mapping["seed"], int) if "seed" in mapping else 0
    return RunSpec(scenario=scenario, config=config, trials=trials, seed=seed)


def _plain(value: object) -> object:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def echo_mapping(spec: RunSpec) -> dict:
    """Nested mapping of every resolved value; reloading it reproduces the
    run exactly."""
    radio = {f.name: _plain(getattr(spec.config.radio, f.name)) for f in fields(RadioTable)}
    scenario_section = {
        f.name: _plain(getattr(spec.config, f.name))
        for f in fields(type(spec.config))
        if f.name != "radio"
    }
    out: dict = {"scenario": spec.scenario, "seed": spec.seed}
    if spec.trials is not None:
        out["trials"] = spec.trials
    out["radio"] = radio
    out[spec.scenario] = scenario_section
    return out


def _flat_value(value: object) -> object:
    if isinstance(value, list):
        return "[" + ", ".join(str(_flat_value(v)) for v in value) + "]"
    if value is None:
        return "null"
    return value


def echo_metadata(spec: RunSpec) -> dict[str, object]:
    """Dotted ``config.*`` entries for the CSV metadata block."""
    nested = echo_mapping(spec)
    flat: dict[str, object] = {}
    for key, value in nested.items():
        if isinstance(value, dict):
            for sub, v in value.items():
                flat[f"config.{key}.{sub}"] = _flat_value(v)
        else:
            flat[f"config.{key}"] = _flat_value(value)
    return flat
