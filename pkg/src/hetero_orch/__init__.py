"""Cost- and capacity-aware traffic orchestration across heterogeneous
inference accelerators, with a deterministic fluid simulator."""

__version__ = "0.1.0"

from .catalog import Catalog, DeploymentUnitSpec, cost_per_inference, load_catalog, table1_catalog
from .policy import (
    AllocationPlan,
    CapacityObservation,
    Method,
    Mode,
    TrafficWeights,
    adjusted_throughputs,
    avg_latency,
    capacity_weights,
    cost_weights,
    renormalize,
    select_mode,
    solve_allocation,
    supply_throughput,
    target_throughput,
)

__all__ = [
    "AllocationPlan",
    "CapacityObservation",
    "Catalog",
    "DeploymentUnitSpec",
    "Method",
    "Mode",
    "TrafficWeights",
    "adjusted_throughputs",
    "avg_latency",
    "capacity_weights",
    "cost_per_inference",
    "cost_weights",
    "load_catalog",
    "renormalize",
    "select_mode",
    "solve_allocation",
    "supply_throughput",
    "table1_catalog",
    "target_throughput",
]
