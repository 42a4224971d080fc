"""Simulated capacity pools with provisioning delay and scripted capacity events."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

DEFAULT_PROVISION_DELAY = 90.0


class UnknownUnit(KeyError):
    def __str__(self) -> str:
        return f"unknown deployment unit {self.args[0]!r}"


@dataclass(frozen=True)
class CapacityEvent:
    at: float
    du_id: str
    new_available: int

    def __post_init__(self) -> None:
        if self.at < 0:
            raise ValueError("capacity event time must be >= 0")
        if self.new_available < 0:
            raise ValueError("new_available must be >= 0")


@dataclass
class UnitPool:
    available: int
    granted: int = 0
    # (ready_at, count), oldest request first
    pending: list[tuple[float, int]] = field(default_factory=list)

    @property
    def pending_count(self) -> int:
        return sum(c for _, c in self.pending)

    @property
    def committed(self) -> int:
        return self.granted + self.pending_count


@dataclass
class PoolState:
    units: dict[str, UnitPool]

    @classmethod
    def create(cls, available: Mapping[str, int]) -> "PoolState":
        return cls({du_id: UnitPool(int(n)) for du_id, n in available.items()})

    def __getitem__(self, du_id: str) -> UnitPool:
        try:
            return self.units[du_id]
        except KeyError:
            raise UnknownUnit(du_id) from None

    def advance(self, now: float) -> None:
        """Promote pending replicas whose ready time has passed."""
        for unit in self.units.values():
            if unit.pending and unit.pending[0][0] <= now:
                still = []
                for ready_at, count in unit.pending:
                    if ready_at <= now:
                        unit.granted += count
                    else:
                        still.append((ready_at, count))
                unit.pending = still

    def check(self) -> None:
        for du_id, unit in self.units.items():
            if unit.granted < 0 or unit.available < 0 or any(c <= 0 for _, c in unit.pending):
                raise AssertionError(f"{du_id}: negative counts in pool")
            if unit.committed > unit.available:
                raise AssertionError(f"{du_id}: committed {unit.committed} > available {unit.available}")


def _shed(unit: UnitPool, excess: int) -> int:
    """Drop ``excess`` replicas: newest pending first, then granted."""
    removed = 0
    while excess > 0 and unit.pending:
        ready_at, count = unit.pending[-1]
        take = min(count, excess)
        if take == count:
            unit.pending.pop()
        else:
            unit.pending[-1] = (ready_at, count - take)
        excess -= take
        removed += take
    take = min(unit.granted, excess)
    unit.granted -= take
    return removed + take


def request_capacity(
    pool: PoolState,
    du_id: str,
    desired: int,
    now: float,
    provision_delay: float = DEFAULT_PROVISION_DELAY,
) -> int:
    """Ask for ``desired`` replicas of a unit.

    Increases are capped by free capacity and become ready after
    ``provision_delay``; decreases apply immediately. Returns the replica
    count that will be ready once pending launches complete.
    """
    if desired < 0:
        raise ValueError("desired must be >= 0")
    unit = pool[du_id]
    committed = unit.committed
    if desired > committed:
        grant = min(desired - committed, unit.available - committed)
        if grant > 0:
            if provision_delay <= 0:
                unit.granted += grant
            else:
                unit.pending.append((now + provision_delay, grant))
    elif desired < committed:
        _shed(unit, committed - desired)
    return unit.committed


def apply_capacity_event(pool: PoolState, event: CapacityEvent) -> int:
    """Set a unit's availability; returns the number of replicas revoked."""
    unit = pool[event.du_id]
    unit.available = event.new_available
    excess = unit.committed - unit.available
    if excess <= 0:
        return 0
    return _shed(unit, excess)


def sorted_events(events: Iterable[CapacityEvent]) -> list[CapacityEvent]:
    # stable: ties keep document order
    return sorted(events, key=lambda e: e.at)
