"""Scenario files (JSON) and result emission (JSON or CSV).

A scenario fixes the unit conventions (time in months, money in k$), the
system economics, the current state and optional run settings::

    {
      "units": {"time": "month", "money": "k$"},
      "system": {"cm_downtime": 10, "pm_downtime": 10, "horizon_end": 240,
                 "components": [{"name": "rotor", "cm_cost": 162, "pm_cost": 45,
                                 "value_loss_rate": 0.35, "shape": 3, "scale": 1e-06}]},
      "state": {"ages": [0], "as_of": 0},
      "options": {"max_age": 480, "search_cap": 2000,
                  "sweeps": [{"parameter": "system.components.rotor.value_loss_rate",
                              "grid": [0.3, 0.4, 0.5]}]}
    }
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import jsonschema
import numpy as np

from .lifetime import DiscreteWeibull
from .planner import Horizon, VirtualCostTable
from .renewal import CostConstant
from .system import ComponentSpec, PlanSolution, SystemSpec, SystemState

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARSE = 3

_NUMBER = {"type": "number"}
_NONNEG = {"type": "number", "minimum": 0}

SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "required": ["system"],
    "properties": {
        "units": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"time": {"const": "month"}, "money": {"const": "k$"}},
        },
        "system": {
            "type": "object",
            "additionalProperties": False,
            "required": ["cm_downtime", "pm_downtime", "horizon_end", "components"],
            "properties": {
                "cm_downtime": _NONNEG,
                "pm_downtime": _NONNEG,
                "horizon_end": {"type": "integer", "minimum": 1},
                "components": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["name", "cm_cost", "pm_cost", "value_loss_rate", "shape", "scale"],
                        "properties": {
                            "name": {"type": "string", "minLength": 1},
                            "cm_cost": {"type": "number", "exclusiveMinimum": 0},
                            "pm_cost": _NONNEG,
                            "value_loss_rate": _NONNEG,
                            "shape": {"type": "number", "minimum": 1},
                            "scale": {"type": "number", "exclusiveMinimum": 0},
                        },
                    },
                },
            },
        },
        "state": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ages": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "as_of": {"type": "integer", "minimum": 0},
            },
        },
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_age": {"type": "integer", "minimum": 1},
                "search_cap": {"type": "integer", "minimum": 1},
                "sweeps": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["parameter", "grid"],
                        "properties": {
                            "parameter": {"type": "string"},
                            "grid": {"type": "array", "minItems": 1, "items": _NUMBER},
                        },
                    },
                },
            },
        },
    },
}


class ScenarioError(Exception):
    exit_code = EXIT_VALIDATION


class ScenarioParseError(ScenarioError):
    """Malformed JSON; the message carries line and column."""

    exit_code = EXIT_PARSE


class ScenarioValidationError(ScenarioError):
    """Well-formed JSON that breaks the schema or a model invariant."""

    exit_code = EXIT_VALIDATION

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("invalid scenario:\n" + "\n".join(f"  - {p}" for p in self.problems))


@dataclass(frozen=True)
class ScenarioFile:
    system: SystemSpec
    state: SystemState
    options: dict = field(default_factory=dict)
    document: dict = field(default_factory=dict, repr=False, compare=False)


def _path_str(path: Iterable) -> str:
    return ".".join(str(p) for p in path) or "<root>"


def _semantic_problems(doc: dict) -> list[str]:
    problems = []
    system = doc["system"]
    names = [c["name"] for c in system["components"]]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        problems.append(f"system.components: duplicate names {dupes}")
    state = doc.get("state", {})
    ages = state.get("ages")
    if ages is not None and len(ages) != len(names):
        problems.append(f"state.ages: {len(ages)} ages for {len(names)} components")
    as_of = state.get("as_of", 0)
    if as_of >= system["horizon_end"]:
        problems.append(f"state.as_of: {as_of} must be below horizon_end {system['horizon_end']}")
    for i, sweep in enumerate(doc.get("options", {}).get("sweeps", [])):
        grid = sweep["grid"]
        if not all(math.isfinite(v) for v in grid):
            problems.append(f"options.sweeps.{i}.grid: non-finite value")
        elif any(b <= a for a, b in zip(grid, grid[1:])):
            problems.append(f"options.sweeps.{i}.grid: must be strictly increasing")
        try:
            _resolve(copy.deepcopy(doc), sweep["parameter"])
        except KeyError as exc:
            problems.append(f"options.sweeps.{i}.parameter: {exc.args[0]}")
    return problems


def validate_document(doc: Any) -> None:
    """Raise :class:`ScenarioValidationError` listing every problem found."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    problems = [f"{_path_str(e.absolute_path)}: {e.message}" for e in errors]
    if not problems:
        problems = _semantic_problems(doc)
    if problems:
        raise ScenarioValidationError(problems)


def from_document(doc: dict) -> ScenarioFile:
    """Validate a parsed scenario and build the model objects."""
    validate_document(doc)
    sys_doc = doc["system"]
    comps = tuple(
        ComponentSpec(
            name=c["name"],
            lifetime=DiscreteWeibull(scale=float(c["scale"]), shape=float(c["shape"])),
            cm_cost=float(c["cm_cost"]),
            pm_cost=float(c["pm_cost"]),
            value_loss_rate=float(c["value_loss_rate"]),
        )
        for c in sys_doc["components"]
    )
    spec = SystemSpec(
        cm_downtime=float(sys_doc["cm_downtime"]),
        pm_downtime=float(sys_doc["pm_downtime"]),
        components=comps,
        horizon=Horizon(0, int(sys_doc["horizon_end"])),
    )
    state_doc = doc.get("state", {})
    ages = tuple(state_doc.get("ages", (0,) * len(comps)))
    state = SystemState(ages, int(state_doc.get("as_of", 0)))
    return ScenarioFile(spec, state, dict(doc.get("options", {})), copy.deepcopy(doc))


def parse_scenario(text: str, source: str = "<string>") -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def load_scenario(path: str | Path, overrides: Sequence[str] = ()) -> ScenarioFile:
    """Read, override, validate and build a scenario file.

    Raises
    ------
    ScenarioParseError
        Malformed JSON (exit code 3).
    ScenarioValidationError
        Schema or invariant violations, all listed at once (exit code 2).
    """
    path = Path(path)
    doc = parse_scenario(path.read_text(encoding="utf-8"), str(path))
    return from_document(apply_overrides(doc, overrides))


def bundled_path(name: str = "table1") -> Path:
    return Path(str(resources.files("pmplan") / "data" / f"{name}.json"))


def load_bundled(name: str = "table1", overrides: Sequence[str] = ()) -> ScenarioFile:
    return load_scenario(bundled_path(name), overrides)


def to_document(scenario: ScenarioFile) -> dict:
    """Scenario back to its JSON document form."""
    spec, state = scenario.system, scenario.state
    doc = {
        "units": {"time": "month", "money": "k$"},
        "system": {
            "cm_downtime": spec.cm_downtime,
            "pm_downtime": spec.pm_downtime,
            "horizon_end": spec.horizon.end,
            "components": [
                {
                    "name": c.name,
                    "cm_cost": c.cm_cost,
                    "pm_cost": c.pm_cost,
                    "value_loss_rate": c.value_loss_rate,
                    "shape": c.lifetime.shape,
                    "scale": c.lifetime.scale,
                }
                for c in spec.components
            ],
        },
        "state": {"ages": list(state.ages), "as_of": state.as_of},
        "options": copy.deepcopy(scenario.options),
    }
    return doc


def dump_scenario(scenario: ScenarioFile) -> str:
    return json.dumps(to_document(scenario), indent=2) + "\n"


def _resolve(doc: dict, dotted: str) -> tuple[Any, Any]:
    """Container and key addressed by a dotted path.

    Component entries may be addressed by name or by index, e.g.
    ``system.components.rotor.value_loss_rate``.
    """
    parts = dotted.split(".")
    node: Any = doc
    for i, part in enumerate(parts[:-1]):
        if isinstance(node, list):
            node = node[_list_index(node, part, parts[: i + 1])]
        elif isinstance(node, dict) and part in node:
            node = node[part]
        elif isinstance(node, dict) and part in ("state", "options"):
            node = node.setdefault(part, {})
        else:
            raise KeyError(f"unknown path {dotted!r}")
    last = parts[-1]
    if isinstance(node, list):
        return node, _list_index(node, last, parts)
    if not isinstance(node, dict):
        raise KeyError(f"unknown path {dotted!r}")
    return node, last


def _list_index(items: list, part: str, prefix: list[str]) -> int:
    if part.isdigit() and int(part) < len(items):
        return int(part)
    for i, item in enumerate(items):
        if isinstance(item, dict) and item.get("name") == part:
            return i
    raise KeyError(f"no entry {part!r} under {'.'.join(prefix[:-1])}")


def set_value(doc: dict, dotted: str, value: Any) -> dict:
    """Copy of ``doc`` with one dotted path replaced."""
    out = copy.deepcopy(doc)
    node, key = _resolve(out, dotted)
    if isinstance(node, dict) and key not in node and not _schema_allows(dotted):
        raise KeyError(f"unknown path {dotted!r}")
    node[key] = value
    return out


def _schema_allows(dotted: str) -> bool:
    node = SCHEMA
    for part in dotted.split("."):
        if node.get("type") == "array":
            node = node["items"]
            continue
        props = node.get("properties", {})
        if part not in props:
            return False
        node = props[part]
    return True


def apply_overrides(doc: dict, overrides: Sequence[str]) -> dict:
    """Apply ``key=value`` overrides; values are parsed as JSON when possible."""
    problems = []
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            problems.append(f"override {item!r}: expected key=value")
            continue
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        try:
            doc = set_value(doc, key.strip(), value)
        except KeyError as exc:
            problems.append(f"override {item!r}: {exc.args[0]}")
    if problems:
        raise ScenarioValidationError(problems)
    return doc


def case_study_two(downtime: float, horizon_end: int = 240) -> SystemSpec:
    """Bundled four-component system with age-independent PM costs and ``g0 = h0 = downtime``."""
    base = load_bundled("table1").system
    pm_costs = {"rotor": 36.75, "main_bearing": 23.75, "gearbox": 46.75, "generator": 33.75}
    comps = tuple(
        ComponentSpec(c.name, c.lifetime, c.cm_cost, pm_costs[c.name], 0.0) for c in base.components
    )
    return SystemSpec(downtime, downtime, comps, Horizon(0, horizon_end))


# --------------------------------------------------------------------------- emission


def records(obj: Any, names: Sequence[str] | None = None) -> list[dict]:
    """Flatten a result object into ordered records."""
    if isinstance(obj, PlanSolution):
        return [
            {
                "pm_time": obj.pm_time,
                "replace": obj.replace_names,
                "virtual": [obj.names[j] for j in obj.virtual] if obj.names else list(obj.virtual),
                "expected_cost": obj.expected_cost,
                "monthly_cost": obj.monthly_cost,
                "start": obj.start,
                "end": obj.end,
                "feasible": obj.feasible,
            }
        ]
    if isinstance(obj, VirtualCostTable):
        return [{"age": int(a), "b": float(b), "B": float(B)} for a, b, B in zip(obj.ages, obj.b, obj.B)]
    if isinstance(obj, CostConstant):
        return [{"c": obj.value, "argmin_t": obj.argmin_t, "no_pm": obj.no_pm}]
    if isinstance(obj, Mapping):
        return [dict(obj)]
    if isinstance(obj, (list, tuple)):
        out = []
        for item in obj:
            out.extend(records(item))
        return out
    if hasattr(obj, "__dataclass_fields__"):
        return [
            {k: getattr(obj, k) for k in obj.__dataclass_fields__ if not _is_array(getattr(obj, k))}
        ]
    raise TypeError(f"cannot emit {type(obj).__name__}")


def _is_array(value: Any) -> bool:
    return isinstance(value, np.ndarray)


def _round(value: Any, full: bool) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return value if full or not math.isfinite(value) else float(f"{value:.6g}")
    if isinstance(value, (list, tuple)):
        return [_round(v, full) for v in value]
    return value


def _csv_cell(value: Any, full: bool) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if full else f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return ";".join(_csv_cell(v, full) for v in value)
    return str(value)


def emit_results(obj: Any, fmt: str = "json", full_precision: bool = False) -> bytes:
    """Render a result deterministically.

    ``json`` gives one object for a single record and an array otherwise;
    ``csv`` always has a header row. Floats keep 6 significant digits unless
    ``full_precision`` is set. The no-PM plan shows as ``null`` in JSON and
    ``none`` in CSV.
    """
    rows = [{k: _round(v, full_precision) for k, v in r.items()} for r in records(obj)]
    if fmt == "json":
        payload = rows[0] if len(rows) == 1 else rows
        return (json.dumps(payload, indent=2) + "\n").encode()
    if fmt == "csv":
        if not rows:
            return b""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = list(rows[0])
        writer.writerow(header)
        for r in rows:
            writer.writerow([_csv_cell(r.get(k), full_precision) for k in header])
        return buf.getvalue().encode()
    raise ValueError(f"unknown format {fmt!r}")
