"""Scenario documents: JSON schema, validation and the built-in experiments."""

from __future__ import annotations

import copy
import dataclasses
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .autoscaler import ScalerConfig
from .catalog import TABLE1_UNITS, Catalog, CatalogError, catalog_from_dict
from .cluster import DEFAULT_PROVISION_DELAY, CapacityEvent


class ScenarioError(ValueError):
    """Schema or consistency violation in a scenario document."""


class DemandKind(str, enum.Enum):
    SINE = "Sine"
    TRAPEZOID = "Trapezoid"
    PIECEWISE_TABLE = "PiecewiseTable"


class ControllerMode(str, enum.Enum):
    AUTO = "Auto"
    FORCE_COST = "ForceCost"
    FORCE_CAPACITY = "ForceCapacity"


@dataclass(frozen=True)
class DemandTrace:
    kind: DemandKind
    base_rps: float
    peak_rps: float
    cycle: float
    noise_pct: float = 0.0
    seed: int = 0
    # (offset seconds within the cycle, rps) knots for PiecewiseTable
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if not (0 <= self.base_rps <= self.peak_rps):
            raise ScenarioError("demand: require 0 <= base_rps <= peak_rps")
        if not (self.cycle > 0):
            raise ScenarioError("demand: cycle must be > 0")
        if not (0 <= self.noise_pct <= 0.5):
            raise ScenarioError("demand: noise_pct must be in [0, 0.5]")
        if self.kind is DemandKind.PIECEWISE_TABLE:
            if not self.table:
                raise ScenarioError("demand: PiecewiseTable needs a non-empty table")
            offsets = [o for o, _ in self.table]
            if offsets != sorted(offsets) or offsets[0] < 0 or offsets[-1] >= self.cycle:
                raise ScenarioError("demand: table offsets must be sorted within [0, cycle)")
            if any(r < 0 for _, r in self.table):
                raise ScenarioError("demand: table rates must be >= 0")


@dataclass(frozen=True)
class ControllerConfig:
    control_interval: float = 10.0
    mode: ControllerMode = ControllerMode.AUTO


@dataclass(frozen=True)
class Scenario:
    duration: float
    dt: float
    seed: int
    catalog: Catalog
    demand: DemandTrace
    capacity_events: tuple[CapacityEvent, ...] = ()
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    scaler: ScalerConfig = field(default_factory=ScalerConfig)
    provision_delay: float = DEFAULT_PROVISION_DELAY
    queue_seconds: float = 1.0
    # Pool size per unit at t=0; units not listed get scaler.max_replicas.
    initial_capacity: Mapping[str, int] = field(default_factory=dict)
    latency_kappa: float = 0.5
    # Start with the first control decision already provisioned.
    warm_start: bool = True
    name: str = "scenario"

    def __post_init__(self) -> None:
        if not (self.duration > 0):
            raise ScenarioError("duration must be > 0")
        if not (self.dt > 0):
            raise ScenarioError("dt must be > 0")
        if self.dt > self.controller.control_interval:
            raise ScenarioError("dt must not exceed controller.control_interval")
        if self.provision_delay < 0:
            raise ScenarioError("provision_delay must be >= 0")
        if self.queue_seconds < 0:
            raise ScenarioError("queue_seconds must be >= 0")
        if self.latency_kappa < 0:
            raise ScenarioError("latency_kappa must be >= 0")
        ids = set(self.catalog.ids)
        for du_id, count in self.initial_capacity.items():
            if du_id not in ids:
                raise ScenarioError(f"initial_capacity: unknown unit {du_id!r}")
            if count < 0:
                raise ScenarioError(f"initial_capacity: {du_id} must be >= 0")
        for ev in self.capacity_events:
            if ev.du_id not in ids:
                raise ScenarioError(f"capacity_events: unknown unit {ev.du_id!r}")

    def initial_available(self) -> dict[str, int]:
        return {
            du_id: int(self.initial_capacity.get(du_id, self.scaler.max_replicas))
            for du_id in self.catalog.ids
        }

    def with_seed(self, seed: int) -> "Scenario":
        return dataclasses.replace(
            self, seed=seed, demand=dataclasses.replace(self.demand, seed=seed)
        )


_TOP_KEYS = {
    "name", "duration", "dt", "seed", "catalog", "demand", "capacity_events",
    "controller", "scaler", "provision_delay", "queue_seconds",
    "initial_capacity", "latency_kappa", "warm_start",
}
_REQUIRED_TOP = ("duration", "dt", "catalog", "demand")


def _check_keys(where: str, doc: Any, allowed: set[str], required=()) -> None:
    if not isinstance(doc, Mapping):
        raise ScenarioError(f"{where}: expected an object")
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ScenarioError(f"{where}: unknown field(s) {', '.join(unknown)}")
    missing = [k for k in required if k not in doc]
    if missing:
        raise ScenarioError(f"{where}: missing field(s) {', '.join(missing)}")


def _num(where: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(f"{where} must be a finite number")
    return float(value)


def _int(where: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where} must be an integer")
    return value


def _enum(where: str, enum_cls, value: Any):
    for member in enum_cls:
        if str(value).replace("_", "").lower() == member.value.lower():
            return member
    choices = ", ".join(m.value for m in enum_cls)
    raise ScenarioError(f"{where} must be one of {choices}, got {value!r}")


def scenario_from_dict(doc: Mapping[str, Any]) -> Scenario:
    _check_keys("scenario", doc, _TOP_KEYS, _REQUIRED_TOP)
    seed = _int("seed", doc.get("seed", 0))
    if not (0 <= seed < 2**64):
        raise ScenarioError("seed must be an unsigned 64-bit integer")

    try:
        catalog = catalog_from_dict(doc["catalog"])
    except CatalogError as exc:
        raise ScenarioError(f"catalog: {exc}") from exc

    d = doc["demand"]
    _check_keys("demand", d, {"kind", "base_rps", "peak_rps", "cycle", "noise_pct", "seed", "table"},
                ("kind", "base_rps", "peak_rps", "cycle"))
    table = ()
    if "table" in d:
        if not isinstance(d["table"], list):
            raise ScenarioError("demand.table must be a list of [offset, rps] pairs")
        try:
            table = tuple((_num("demand.table offset", o), _num("demand.table rps", r))
                          for o, r in d["table"])
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError("demand.table must be a list of [offset, rps] pairs") from exc
    demand = DemandTrace(
        kind=_enum("demand.kind", DemandKind, d["kind"]),
        base_rps=_num("demand.base_rps", d["base_rps"]),
        peak_rps=_num("demand.peak_rps", d["peak_rps"]),
        cycle=_num("demand.cycle", d["cycle"]),
        noise_pct=_num("demand.noise_pct", d.get("noise_pct", 0.0)),
        seed=_int("demand.seed", d.get("seed", seed)),
        table=table,
    )

    events_doc = doc.get("capacity_events", [])
    if not isinstance(events_doc, list):
        raise ScenarioError("capacity_events must be a list")
    events = []
    for i, ev in enumerate(events_doc):
        where = f"capacity_events[{i}]"
        _check_keys(where, ev, {"at", "du_id", "new_available"}, ("at", "du_id", "new_available"))
        try:
            events.append(CapacityEvent(
                at=_num(f"{where}.at", ev["at"]),
                du_id=str(ev["du_id"]),
                new_available=_int(f"{where}.new_available", ev["new_available"]),
            ))
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"{where}: {exc}") from exc

    c = doc.get("controller", {})
    _check_keys("controller", c, {"control_interval", "mode"})
    controller = ControllerConfig(
        control_interval=_num("controller.control_interval", c.get("control_interval", 10.0)),
        mode=_enum("controller.mode", ControllerMode, c.get("mode", "Auto")),
    )
    if not (controller.control_interval > 0):
        raise ScenarioError("controller.control_interval must be > 0")

    s = doc.get("scaler", {})
    _check_keys("scaler", s, {"cooldown_up", "cooldown_down", "min_replicas", "max_replicas"})
    try:
        scaler = ScalerConfig(
            cooldown_up=_num("scaler.cooldown_up", s.get("cooldown_up", 30.0)),
            cooldown_down=_num("scaler.cooldown_down", s.get("cooldown_down", 120.0)),
            min_replicas=_int("scaler.min_replicas", s.get("min_replicas", 0)),
            max_replicas=_int("scaler.max_replicas", s.get("max_replicas", 64)),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"scaler: {exc}") from exc

    initial = doc.get("initial_capacity", {})
    if not isinstance(initial, Mapping):
        raise ScenarioError("initial_capacity must be an object")
    initial = {str(k): _int(f"initial_capacity.{k}", v) for k, v in initial.items()}

    warm = doc.get("warm_start", True)
    if not isinstance(warm, bool):
        raise ScenarioError("warm_start must be a boolean")

    return Scenario(
        duration=_num("duration", doc["duration"]),
        dt=_num("dt", doc["dt"]),
        seed=seed,
        catalog=catalog,
        demand=demand,
        capacity_events=tuple(events),
        controller=controller,
        scaler=scaler,
        provision_delay=_num("provision_delay", doc.get("provision_delay", DEFAULT_PROVISION_DELAY)),
        queue_seconds=_num("queue_seconds", doc.get("queue_seconds", 1.0)),
        initial_capacity=initial,
        latency_kappa=_num("latency_kappa", doc.get("latency_kappa", 0.5)),
        warm_start=warm,
        name=str(doc.get("name", "scenario")),
    )


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario parse error: {exc}") from exc
    return scenario_from_dict(doc)


def _table1() -> dict[str, Any]:
    return {"units": [dict(u) for u in TABLE1_UNITS]}


BUILTIN_SCENARIOS: dict[str, dict[str, Any]] = {
    # Cost-optimized weights over all five pools under one demand wave.
    "cost-optimized": {
        "name": "cost-optimized",
        "duration": 2400.0,
        "dt": 1.0,
        "seed": 2024,
        "catalog": _table1(),
        "demand": {"kind": "Sine", "base_rps": 40.0, "peak_rps": 800.0,
                   "cycle": 1200.0, "noise_pct": 0.02},
        "controller": {"control_interval": 10.0, "mode": "ForceCost"},
        "scaler": {"cooldown_up": 30.0, "cooldown_down": 120.0,
                   "min_replicas": 0, "max_replicas": 16},
        "provision_delay": 45.0,
        "queue_seconds": 1.0,
        "initial_capacity": {u["id"]: 16 for u in TABLE1_UNITS},
    },
    # One device per unit, round-robin at the combined breakpoint load.
    "capacity-optimized": {
        "name": "capacity-optimized",
        "duration": 600.0,
        "dt": 1.0,
        "seed": 2024,
        "catalog": _table1(),
        "demand": {"kind": "Sine", "base_rps": 446.0, "peak_rps": 446.0,
                   "cycle": 600.0, "noise_pct": 0.0},
        "controller": {"control_interval": 10.0, "mode": "ForceCapacity"},
        "scaler": {"cooldown_up": 30.0, "cooldown_down": 120.0,
                   "min_replicas": 1, "max_replicas": 1},
        "provision_delay": 90.0,
        "queue_seconds": 1.0,
        "initial_capacity": {u["id"]: 1 for u in TABLE1_UNITS},
    },
    # Cheapest pool loses all capacity at the crest of the first wave and
    # comes back early in the second.
    "failover": {
        "name": "failover",
        "duration": 2600.0,
        "dt": 1.0,
        "seed": 2024,
        "catalog": _table1(),
        "demand": {"kind": "Sine", "base_rps": 20.0, "peak_rps": 1000.0,
                   "cycle": 1200.0, "noise_pct": 0.02},
        "capacity_events": [
            {"at": 600.0, "du_id": "sd21-inf2", "new_available": 0},
            {"at": 1300.0, "du_id": "sd21-inf2", "new_available": 10},
        ],
        "controller": {"control_interval": 10.0, "mode": "Auto"},
        "scaler": {"cooldown_up": 15.0, "cooldown_down": 120.0,
                   "min_replicas": 0, "max_replicas": 10},
        "provision_delay": 30.0,
        "queue_seconds": 1.0,
        "initial_capacity": {u["id"]: 10 for u in TABLE1_UNITS},
    },
}


def builtin_document(name: str) -> dict[str, Any]:
    try:
        return copy.deepcopy(BUILTIN_SCENARIOS[name])
    except KeyError:
        raise ScenarioError(
            f"unknown built-in scenario {name!r} (choose from {', '.join(BUILTIN_SCENARIOS)})"
        ) from None


def builtin(name: str) -> Scenario:
    return scenario_from_dict(builtin_document(name))


def load_scenario(source: str | Path) -> Scenario:
    """Load a scenario from a JSON file path or a built-in scenario name."""
    path = Path(source)
    if path.is_file():
        return loads(path.read_text())
    if str(source) in BUILTIN_SCENARIOS:
        return builtin(str(source))
    raise FileNotFoundError(f"scenario not found: {source}")
