"""YAML study configuration.

The file mirrors the dataclasses: ``system``, ``relay``, ``policies`` and
``matrix`` sections, every key optional, unknown keys rejected. Complex
impedances are written ``[r, x]`` (or a plain number for a real value) and a
sequence branch may be ``open``.
"""

from __future__ import annotations

import dataclasses
import enum
import types
import typing
from dataclasses import fields, is_dataclass, replace

import yaml

from .ibr import ConverterPolicy, Role
from .network import OPEN, TestSystemConfig
from .relays import RelaySettings
from .scenarios import ScenarioMatrix, StudyConfig


class ConfigError(ValueError):
    """Invalid configuration; message names the offending key."""


def _line_index(text: str) -> dict:
    """Dotted key path -> 1-based line number, from the YAML node tree."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    out = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = f"{path}.{k.value}" if path else str(k.value)
                out[p] = k.start_mark.line + 1
                walk(v, p)

    walk(root, "")
    return out


class _Loader:
    def __init__(self, lines: dict):
        self.lines = lines

    def fail(self, path: str, msg: str):
        line = self.lines.get(path)
        where = f" (line {line})" if line else ""
        raise ConfigError(f"{path}: {msg}{where}")

    def scalar(self, tp, value, path):
        if tp is bool:
            if not isinstance(value, bool):
                self.fail(path, f"expected true/false, got {value!r}")
            return value
        if tp is float or tp is int:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                self.fail(path, f"expected a number, got {value!r}")
            return float(value)
        if tp is complex:
            if isinstance(value, str) and value.strip().lower() == "open":
                return OPEN
            if isinstance(value, (list, tuple)):
                if len(value) != 2 or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
                ):
                    self.fail(path, f"expected [r, x], got {value!r}")
                return complex(value[0], value[1])
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                return complex(value)
            self.fail(path, f"expected [r, x], a number or 'open', got {value!r}")
        if tp is str:
            if not isinstance(value, str):
                self.fail(path, f"expected a string, got {value!r}")
            return value
        if isinstance(tp, type) and issubclass(tp, enum.Enum):
            try:
                return tp(value)
            except ValueError:
                self.fail(path, f"unknown value {value!r}")
        if tp is tuple:
            if not isinstance(value, list):
                self.fail(path, f"expected a list, got {value!r}")
            return tuple(str(v) for v in value)
        self.fail(path, f"unsupported type {tp}")

    def convert(self, tp, value, path):
        origin = typing.get_origin(tp)
        if origin in (typing.Union, types.UnionType):
            args = typing.get_args(tp)
            if value is None and type(None) in args:
                return None
            inner = [a for a in args if a is not type(None)]
            if len(inner) == 1:
                return self.convert(inner[0], value, path)
            self.fail(path, "ambiguous type")
        if is_dataclass(tp):
            return self.build(tp, value, path)
        return self.scalar(tp, value, path)

    def build(self, cls, data, path, base=None, exclude=()):
        """Instance of ``cls`` with ``data`` applied over ``base``."""
        base = base if base is not None else cls()
        if data is None:
            return base
        if not isinstance(data, dict):
            self.fail(path, f"expected a mapping, got {data!r}")
        hints = typing.get_type_hints(cls)
        names = [f.name for f in fields(cls) if f.name not in exclude and not f.name.startswith("_")]
        kwargs = {}
        for key, value in data.items():
            p = f"{path}.{key}" if path else str(key)
            if key not in names:
                self.fail(p, f"unknown key; expected one of {', '.join(names)}")
            tp = hints[key]
            if is_dataclass(tp):
                kwargs[key] = self.build(tp, value, p, base=getattr(base, key))
            else:
                kwargs[key] = self.convert(tp, value, p)
        try:
            return replace(base, **kwargs)
        except (ValueError, TypeError) as exc:
            self.fail(path or "<root>", str(exc))


_SECTIONS = ("system", "relay", "policies", "matrix")


def study_from_dict(data, text: str = "") -> StudyConfig:
    loader = _Loader(_line_index(text) if text else {})
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>: expected a mapping")
    for key in data:
        if key not in _SECTIONS:
            loader.fail(str(key), f"unknown section; expected one of {', '.join(_SECTIONS)}")
    system = loader.build(TestSystemConfig, data.get("system"), "system")
    relay = loader.build(RelaySettings, data.get("relay"), "relay")

    pol = data.get("policies") or {}
    if not isinstance(pol, dict):
        loader.fail("policies", "expected a mapping")
    for key in pol:
        if key not in ("wind", "ommc"):
            loader.fail(f"policies.{key}", "unknown key; expected one of wind, ommc")
    wind = loader.build(
        ConverterPolicy, pol.get("wind"), "policies.wind",
        base=ConverterPolicy(Role.GRID_FOLLOWING), exclude=("role",),
    )
    ommc_data = dict(pol.get("ommc") or {})
    override = ommc_data.pop("force_neg_seq_mode", None)
    if override is not None and str(override).upper() not in ("C1", "C2", "C1_SUPPRESS", "C2_PRIORITIZE"):
        loader.fail("policies.ommc.force_neg_seq_mode", f"expected C1, C2 or null, got {override!r}")
    ommc = loader.build(
        ConverterPolicy, ommc_data, "policies.ommc",
        base=ConverterPolicy(Role.GRID_FORMING), exclude=("role", "neg_seq_mode"),
    )
    matrix = loader.build(ScenarioMatrix, data.get("matrix"), "matrix")
    return StudyConfig(system, relay, wind, ommc, override, matrix)


def load_study(path) -> StudyConfig:
    """Read and validate a YAML study file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML syntax error: {exc}") from exc
    return study_from_dict(data, text)


def _plain(obj, exclude=()):
    if obj is OPEN:
        return "open"
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, tuple):
        return [_plain(x) for x in obj]
    if dataclasses.is_dataclass(obj):
        return {
            f.name: _plain(getattr(obj, f.name))
            for f in fields(obj)
            if f.name not in exclude and not f.name.startswith("_")
        }
    return obj


def study_to_dict(study: StudyConfig) -> dict:
    ommc = _plain(study.ommc_policy, exclude=("role", "neg_seq_mode"))
    ommc["force_neg_seq_mode"] = study.ommc_mode_override
    return {
        "system": _plain(study.system),
        "relay": _plain(study.relay),
        "policies": {
            "wind": _plain(study.wind_policy, exclude=("role",)),
            "ommc": ommc,
        },
        "matrix": _plain(study.matrix),
    }


_HEADER = """\
# Study configuration with every default written out.
# Impedances are [r, x]. Source and transformer values are p.u. on the
# terminal rating (cluster1_mva, cluster2_mva, ommc_mva); cable values are
# ohm/km. Relay settings are p.u. of the system base current.
# The impedance defaults are engineering choices, not measured data.
"""


def dump_defaults(study: StudyConfig | None = None) -> str:
    study = study or StudyConfig()
    return _HEADER + yaml.safe_dump(study_to_dict(study), sort_keys=False, default_flow_style=None)
