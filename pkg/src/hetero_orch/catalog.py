"""Deployment-unit catalog: static per-unit economics and load-test results."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence, Union


class CatalogError(ValueError):
    """Raised when a catalog document is malformed or violates an invariant."""


class HardwareKind(str, enum.Enum):
    NEURON_INF2 = "NeuronInf2"
    NEURON_TRN1 = "NeuronTrn1"
    NVIDIA_A10G = "NvidiaA10G"
    NVIDIA_L4 = "NvidiaL4"

    @property
    def is_neuron(self) -> bool:
        return self in (HardwareKind.NEURON_INF2, HardwareKind.NEURON_TRN1)

    @property
    def is_nvidia(self) -> bool:
        return self in (HardwareKind.NVIDIA_A10G, HardwareKind.NVIDIA_L4)


class Framework(str, enum.Enum):
    NEURON = "Neuron"
    TRITON = "Triton"
    CUDA = "Cuda"


class ExecutionMode(str, enum.Enum):
    EAGER = "Eager"
    GRAPH = "Graph"


# Unrecognised hardware/framework names are kept verbatim as plain strings
# (the "Other(string)" variant).
Hardware = Union[HardwareKind, str]
FrameworkName = Union[Framework, str]

NEURON_UTILIZATION_TARGET = 0.70
NVIDIA_UTILIZATION_TARGET = 0.90
OTHER_UTILIZATION_TARGET = 0.80
DEFAULT_BREAKPOINT_LATENCY = 0.9
# Units whose base latency already sits above the default threshold get a
# breakpoint relative to their own latency instead.
BREAKPOINT_LATENCY_FACTOR = 1.5


def _parse_enum(enum_cls: type[enum.Enum], value: Any) -> Any:
    if isinstance(value, enum_cls):
        return value
    for member in enum_cls:
        if str(value).lower() == member.value.lower():
            return member
    return str(value)


def default_utilization_target(hardware: Hardware) -> float:
    if isinstance(hardware, HardwareKind):
        if hardware.is_neuron:
            return NEURON_UTILIZATION_TARGET
        return NVIDIA_UTILIZATION_TARGET
    return OTHER_UTILIZATION_TARGET


def default_breakpoint_latency(base_latency: float) -> float:
    if base_latency >= DEFAULT_BREAKPOINT_LATENCY:
        return BREAKPOINT_LATENCY_FACTOR * base_latency
    return DEFAULT_BREAKPOINT_LATENCY


def cost_per_inference(cost_per_hour: float, max_throughput: float) -> float:
    """Hourly price divided by breakpoint throughput.

    This is the per-unit cost figure used for cost-optimized weighting and
    greedy ordering.
    """
    if not (cost_per_hour > 0 and math.isfinite(cost_per_hour)):
        raise ValueError(f"cost_per_hour must be positive, got {cost_per_hour!r}")
    if not (max_throughput > 0 and math.isfinite(max_throughput)):
        raise ValueError(f"max_throughput must be positive, got {max_throughput!r}")
    return cost_per_hour / max_throughput


@dataclass(frozen=True)
class DeploymentUnitSpec:
    id: str
    model_name: str
    hardware_kind: Hardware
    framework: FrameworkName
    execution_mode: ExecutionMode
    cost_per_hour: float
    max_throughput: float
    base_latency: float
    utilization_target: float = field(default=-1.0)
    breakpoint_latency: float = field(default=-1.0)

    def __post_init__(self) -> None:
        # Negative sentinels mean "use the hardware/latency default".
        if self.utilization_target < 0:
            object.__setattr__(
                self, "utilization_target", default_utilization_target(self.hardware_kind)
            )
        if self.breakpoint_latency < 0:
            object.__setattr__(
                self, "breakpoint_latency", default_breakpoint_latency(self.base_latency)
            )
        self.validate()

    def validate(self) -> None:
        if not self.id:
            raise CatalogError("unit id must be a non-empty string")
        for name in ("cost_per_hour", "max_throughput", "base_latency", "breakpoint_latency"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise CatalogError(f"unit {self.id!r}: {name} must be > 0, got {value!r}")
        if not (0 < self.utilization_target <= 1):
            raise CatalogError(
                f"unit {self.id!r}: utilization_target must be in (0, 1], "
                f"got {self.utilization_target!r}"
            )

    @property
    def cost_per_inference(self) -> float:
        return cost_per_inference(self.cost_per_hour, self.max_throughput)

    def to_dict(self) -> dict[str, Any]:
        def name(v: Any) -> str:
            return v.value if isinstance(v, enum.Enum) else str(v)

        return {
            "id": self.id,
            "model_name": self.model_name,
            "hardware_kind": name(self.hardware_kind),
            "framework": name(self.framework),
            "execution_mode": name(self.execution_mode),
            "cost_per_hour": self.cost_per_hour,
            "max_throughput": self.max_throughput,
            "base_latency": self.base_latency,
            "utilization_target": self.utilization_target,
            "breakpoint_latency": self.breakpoint_latency,
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "DeploymentUnitSpec":
        label = doc.get("id", "<missing id>") if isinstance(doc, Mapping) else "<non-object>"
        if not isinstance(doc, Mapping):
            raise CatalogError(f"unit {label}: expected an object")
        required = ("id", "model_name", "hardware_kind", "framework",
                    "cost_per_hour", "max_throughput", "base_latency")
        optional = ("execution_mode", "utilization_target", "breakpoint_latency")
        unknown = sorted(set(doc) - set(required) - set(optional))
        if unknown:
            raise CatalogError(f"unit {label!r}: unknown field(s) {', '.join(unknown)}")
        missing = [k for k in required if k not in doc]
        if missing:
            raise CatalogError(f"unit {label!r}: missing field(s) {', '.join(missing)}")
        numeric = {}
        for key in ("cost_per_hour", "max_throughput", "base_latency",
                    "utilization_target", "breakpoint_latency"):
            if key in doc:
                value = doc[key]
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise CatalogError(f"unit {label!r}: {key} must be a number")
                numeric[key] = float(value)
        mode = _parse_enum(ExecutionMode, doc.get("execution_mode", "Graph"))
        if not isinstance(mode, ExecutionMode):
            raise CatalogError(f"unit {label!r}: execution_mode must be Eager or Graph")
        return cls(
            id=str(doc["id"]),
            model_name=str(doc["model_name"]),
            hardware_kind=_parse_enum(HardwareKind, doc["hardware_kind"]),
            framework=_parse_enum(Framework, doc["framework"]),
            execution_mode=mode,
            **numeric,
        )


@dataclass(frozen=True)
class Catalog:
    """Ordered, non-empty collection of deployment units.

    Order is significant: it is the tie-break priority for weights and
    allocation.
    """

    units: tuple[DeploymentUnitSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "units", tuple(self.units))
        if not self.units:
            raise CatalogError("catalog must be non-empty")
        seen: set[str] = set()
        for unit in self.units:
            if unit.id in seen:
                raise CatalogError(f"duplicate unit id {unit.id!r}")
            seen.add(unit.id)

    def __len__(self) -> int:
        return len(self.units)

    def __iter__(self) -> Iterator[DeploymentUnitSpec]:
        return iter(self.units)

    def __getitem__(self, key: int | str) -> DeploymentUnitSpec:
        if isinstance(key, str):
            for unit in self.units:
                if unit.id == key:
                    return unit
            raise KeyError(key)
        return self.units[key]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(u.id for u in self.units)

    def index(self, du_id: str) -> int:
        for i, unit in enumerate(self.units):
            if unit.id == du_id:
                return i
        raise KeyError(du_id)

    def to_dict(self) -> dict[str, Any]:
        return {"units": [u.to_dict() for u in self.units]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_units(cls, units: Iterable[DeploymentUnitSpec]) -> "Catalog":
        return cls(tuple(units))


def catalog_from_dict(doc: Any) -> Catalog:
    if isinstance(doc, Mapping):
        unknown = sorted(set(doc) - {"units"})
        if unknown:
            raise CatalogError(f"catalog: unknown field(s) {', '.join(unknown)}")
        if "units" not in doc:
            raise CatalogError("catalog: missing field units")
        units_doc = doc["units"]
    else:
        units_doc = doc
    if not isinstance(units_doc, Sequence) or isinstance(units_doc, (str, bytes)):
        raise CatalogError("catalog: units must be a list")
    if not units_doc:
        raise CatalogError("catalog must be non-empty")
    return Catalog(tuple(DeploymentUnitSpec.from_dict(u) for u in units_doc))


def load_catalog(document: str) -> Catalog:
    """Parse a JSON catalog document, preserving unit order."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog parse error: {exc}") from exc
    return catalog_from_dict(doc)


# Load-test results for Stable Diffusion 2.1 on five accelerator/framework
# combinations (on-demand hourly prices, breakpoint RPS, light-load latency).
TABLE1_UNITS: tuple[dict[str, Any], ...] = (
    {"id": "sd21-inf2", "model_name": "sd21", "hardware_kind": "NeuronInf2",
     "framework": "Neuron", "execution_mode": "Graph",
     "cost_per_hour": 0.7582, "max_throughput": 105, "base_latency": 0.67},
    {"id": "sd21-trn1", "model_name": "sd21", "hardware_kind": "NeuronTrn1",
     "framework": "Neuron", "execution_mode": "Graph",
     "cost_per_hour": 1.3438, "max_throughput": 130, "base_latency": 0.51},
    {"id": "sd21-g5-triton", "model_name": "sd21", "hardware_kind": "NvidiaA10G",
     "framework": "Triton", "execution_mode": "Graph",
     "cost_per_hour": 1.0060, "max_throughput": 90, "base_latency": 0.68},
    {"id": "sd21-g6-triton", "model_name": "sd21", "hardware_kind": "NvidiaL4",
     "framework": "Triton", "execution_mode": "Graph",
     "cost_per_hour": 0.8048, "max_throughput": 61, "base_latency": 0.96},
    {"id": "sd21-g5-cuda", "model_name": "sd21", "hardware_kind": "NvidiaA10G",
     "framework": "Cuda", "execution_mode": "Eager",
     "cost_per_hour": 1.0060, "max_throughput": 60, "base_latency": 0.92},
)

# Printed per-inference cost column, kept for comparison only.
TABLE1_PRINTED_COST_PER_INFERENCE: tuple[float, ...] = (
    0.00733, 0.01023, 0.01118, 0.01320, 0.01677,
)


def table1_catalog() -> Catalog:
    return catalog_from_dict({"units": list(TABLE1_UNITS)})
