"""Pure decision core: traffic weights, mode switching, throughput targets and
the cost-minimizing replica allocation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from . import kernels
from .catalog import Catalog

WEIGHT_SUM_TOL = 1e-9


class PolicyError(ValueError):
    pass


class CapacityExhausted(PolicyError):
    """No deployment unit has any available capacity."""

    def __init__(self, message: str = "total capacity exhausted") -> None:
        super().__init__(message)


class InfeasibleAllocation(PolicyError):
    def __init__(self, demand: float, max_supply: float) -> None:
        self.demand = demand
        self.max_supply = max_supply
        self.shortfall = demand - max_supply
        super().__init__(
            f"infeasible allocation: demand {demand:g} RPS exceeds capacity "
            f"{max_supply:g} RPS (shortfall {self.shortfall:g} RPS)"
        )


class Mode(str, enum.Enum):
    COST_OPTIMIZED = "CostOptimized"
    CAPACITY_OPTIMIZED = "CapacityOptimized"


class Method(str, enum.Enum):
    GREEDY = "Greedy"
    EXACT = "Exact"


@dataclass(frozen=True)
class TrafficWeights:
    ids: tuple[str, ...]
    weights: tuple[float, ...]
    mode: Mode

    def __post_init__(self) -> None:
        if len(self.ids) != len(self.weights):
            raise PolicyError("ids and weights differ in length")
        if any(w < 0 or math.isnan(w) for w in self.weights):
            raise PolicyError("weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > WEIGHT_SUM_TOL:
            raise PolicyError(f"weights must sum to 1, got {sum(self.weights)!r}")

    @property
    def entries(self) -> list[tuple[str, float]]:
        return list(zip(self.ids, self.weights))

    def __getitem__(self, du_id: str) -> float:
        return self.weights[self.ids.index(du_id)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.ids, self.weights))


@dataclass(frozen=True)
class AllocationPlan:
    ids: tuple[str, ...]
    counts: tuple[int, ...]
    total_cost_per_hour: float
    supplied_throughput: float
    optimal: bool

    @property
    def replicas(self) -> list[tuple[str, int]]:
        return list(zip(self.ids, self.counts))

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.ids, self.counts))

    @property
    def total_replicas(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class CapacityObservation:
    requested: tuple[int, ...]
    available: tuple[int, ...]
    demand: float
    supply: float

    def __post_init__(self) -> None:
        if len(self.requested) != len(self.available):
            raise PolicyError("requested and available differ in length")
        if any(c < 0 for c in self.requested) or any(c < 0 for c in self.available):
            raise PolicyError("replica counts must be non-negative")

    @property
    def shortfall(self) -> bool:
        return any(r > a for r, a in zip(self.requested, self.available))


def inverse_cost_weights(ids: Sequence[str], costs: Sequence[float]) -> TrafficWeights:
    """Weights proportional to 1/cost, normalized to one."""
    if not costs:
        raise PolicyError("catalog must be non-empty")
    if any(not (c > 0) for c in costs):
        raise PolicyError("costs must be positive")
    inverse = [1.0 / c for c in costs]
    total = sum(inverse)
    return TrafficWeights(tuple(ids), tuple(v / total for v in inverse), Mode.COST_OPTIMIZED)


def cost_weights(catalog: Catalog) -> TrafficWeights:
    return inverse_cost_weights(catalog.ids, [u.cost_per_inference for u in catalog])


def capacity_weights(ids: Sequence[str], available_mask: Sequence[bool]) -> TrafficWeights:
    """Uniform share over units that have any available capacity."""
    n = sum(1 for m in available_mask if m)
    if n == 0:
        raise CapacityExhausted()
    share = 1.0 / n
    weights = tuple(share if m else 0.0 for m in available_mask)
    return TrafficWeights(tuple(ids), weights, Mode.CAPACITY_OPTIMIZED)


def renormalize(weights: TrafficWeights, active_mask: Sequence[bool]) -> TrafficWeights:
    """Zero the inactive units and rescale the rest to sum to one."""
    if len(active_mask) != len(weights.weights):
        raise PolicyError("mask length does not match weights")
    kept = [w if m else 0.0 for w, m in zip(weights.weights, active_mask)]
    total = sum(kept)
    if not (total > 0):
        raise CapacityExhausted("no active unit carries weight")
    if all(active_mask) and abs(total - 1.0) <= WEIGHT_SUM_TOL:
        return weights
    return TrafficWeights(weights.ids, tuple(w / total for w in kept), weights.mode)


def target_throughput(catalog: Catalog) -> float:
    """Mean breakpoint throughput across the catalog."""
    values = [u.max_throughput for u in catalog]
    if not values:
        raise PolicyError("catalog must be non-empty")
    return sum(values) / len(values)


def adjusted_throughputs(catalog: Catalog) -> list[float]:
    target = target_throughput(catalog)
    return [min(target, float(u.max_throughput)) for u in catalog]


def supply_throughput(
    weights: TrafficWeights, replicas: Sequence[int], catalog: Catalog
) -> float:
    if len(replicas) != len(catalog):
        raise PolicyError("replica vector length does not match catalog")
    return sum(
        w * u.max_throughput * r for w, u, r in zip(weights.weights, catalog, replicas)
    )


def avg_latency(weights: TrafficWeights, catalog: Catalog) -> float:
    """Traffic-weighted mean of per-unit base latencies."""
    return sum(w * u.base_latency for w, u in zip(weights.weights, catalog))


def _count_bound(demand: float, tput: float) -> int:
    """Smallest k with k * tput >= demand."""
    k = max(0, math.ceil(demand / tput))
    while k * tput < demand:
        k += 1
    return k


def _capacities(catalog: Catalog, capacity) -> list[Optional[int]]:
    if capacity is None:
        return [None] * len(catalog)
    if isinstance(capacity, Mapping):
        caps = [capacity.get(du_id) for du_id in catalog.ids]
    else:
        caps = list(capacity)
        if len(caps) != len(catalog):
            raise PolicyError("capacity vector length does not match catalog")
    for c in caps:
        if c is not None and c < 0:
            raise PolicyError("capacities must be non-negative")
    return [None if c is None else int(c) for c in caps]


def _plan(catalog: Catalog, counts: Sequence[int], optimal: bool) -> AllocationPlan:
    cost = sum(k * u.cost_per_hour for k, u in zip(counts, catalog))
    supply = sum(k * u.max_throughput for k, u in zip(counts, catalog))
    return AllocationPlan(catalog.ids, tuple(int(k) for k in counts), cost, supply, optimal)


def solve_allocation(
    demand: float,
    catalog: Catalog,
    capacity=None,
    method: Method | str = Method.EXACT,
) -> AllocationPlan:
    """Integer replica counts covering ``demand`` at minimum hourly cost.

    ``capacity`` is a per-unit maximum count (sequence in catalog order or a
    mapping by id); None, or a None entry, means unlimited. Greedy fills the
    cheapest-per-inference units first; Exact searches every count vector
    with each count bounded by what demand alone could justify.
    """
    method = Method(method)
    if not (demand >= 0):
        raise PolicyError(f"demand must be >= 0, got {demand!r}")
    caps = _capacities(catalog, capacity)
    if demand == 0:
        return _plan(catalog, [0] * len(catalog), True)

    bounds = []
    for u, cap in zip(catalog, caps):
        need = _count_bound(demand, u.max_throughput)
        bounds.append(need if cap is None else min(cap, need))
    max_supply = sum(k * u.max_throughput for k, u in zip(bounds, catalog))
    if max_supply < demand:
        raise InfeasibleAllocation(demand, max_supply)

    if method is Method.GREEDY:
        counts = [0] * len(catalog)
        order = sorted(range(len(catalog)), key=lambda i: catalog[i].cost_per_inference)
        supply = 0.0
        for i in order:
            while supply < demand and counts[i] < bounds[i]:
                counts[i] += 1
                supply = sum(k * u.max_throughput for k, u in zip(counts, catalog))
            if supply >= demand:
                break
        return _plan(catalog, counts, False)

    found = kernels.exact_search(
        [u.cost_per_hour for u in catalog],
        [float(u.max_throughput) for u in catalog],
        bounds,
        float(demand),
    )
    if found is None:  # unreachable given the feasibility check above
        raise InfeasibleAllocation(demand, max_supply)
    return _plan(catalog, found, True)


def select_mode(current: Mode, obs: CapacityObservation, at_cycle_boundary: bool) -> Mode:
    """Binary cost/capacity switch.

    Any unit asked for more replicas than its pool holds forces capacity
    mode at once. Returning to cost mode waits for the next demand trough.
    """
    if obs.shortfall:
        return Mode.CAPACITY_OPTIMIZED
    if current is Mode.COST_OPTIMIZED:
        return Mode.COST_OPTIMIZED
    if at_cycle_boundary:
        return Mode.COST_OPTIMIZED
    return current
