"""Target-tracking replica autoscaler with asymmetric cooldowns."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .catalog import DeploymentUnitSpec


@dataclass(frozen=True)
class ScalerConfig:
    cooldown_up: float = 30.0
    cooldown_down: float = 120.0
    min_replicas: int = 0
    max_replicas: int = 64

    def __post_init__(self) -> None:
        if self.cooldown_up < 0 or self.cooldown_down < 0:
            raise ValueError("cooldowns must be >= 0")
        if self.min_replicas < 0:
            raise ValueError("min_replicas must be >= 0")
        if self.min_replicas > self.max_replicas:
            raise ValueError("min_replicas must not exceed max_replicas")

    def clamp(self, count: int) -> int:
        return max(self.min_replicas, min(self.max_replicas, count))


@dataclass
class UnitScaleState:
    current_replicas: int = 0
    last_scale_up_at: float = -math.inf
    last_scale_down_at: float = -math.inf


@dataclass
class ScalerState:
    units: dict[str, UnitScaleState] = field(default_factory=dict)

    @classmethod
    def initial(cls, ids, config: ScalerConfig) -> "ScalerState":
        return cls({du_id: UnitScaleState(config.min_replicas) for du_id in ids})

    def __getitem__(self, du_id: str) -> UnitScaleState:
        return self.units[du_id]


def target_metric(du: DeploymentUnitSpec) -> float:
    """Per-replica RPS the scaler holds each unit at (below its breakpoint)."""
    return du.utilization_target * du.max_throughput


def desired_replicas(
    du: DeploymentUnitSpec,
    arrival_rps: float,
    current: int = 0,
    config: ScalerConfig | None = None,
) -> int:
    """Smallest replica count whose target load covers ``arrival_rps``.

    ``current`` is accepted for interface symmetry with HPA-style scalers;
    the rule itself is stateless.
    """
    if arrival_rps < 0:
        raise ValueError("arrival_rps must be >= 0")
    config = config or ScalerConfig()
    if arrival_rps == 0:
        return config.min_replicas
    per_replica = target_metric(du)
    n = math.ceil(arrival_rps / per_replica)
    # Guard the division's rounding so n is exact under float products.
    while n * per_replica < arrival_rps:
        n += 1
    while n > 0 and (n - 1) * per_replica >= arrival_rps:
        n -= 1
    return config.clamp(n)


def apply_cooldown(
    state: ScalerState,
    du_id: str,
    proposal: int,
    now: float,
    config: ScalerConfig,
) -> int:
    unit = state[du_id]
    current = unit.current_replicas
    if proposal > current:
        if now - unit.last_scale_up_at >= config.cooldown_up:
            unit.current_replicas = proposal
            unit.last_scale_up_at = now
    elif proposal < current:
        if now - unit.last_scale_down_at >= config.cooldown_down:
            unit.current_replicas = proposal
            unit.last_scale_down_at = now
    return unit.current_replicas
