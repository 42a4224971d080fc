"""Deterministic fixed-step fluid simulation of the orchestration loop.

Each step reads demand, runs the controller on control-interval
boundaries (mode, weights, allocation, autoscaling, provisioning), splits
traffic by weight, serves it against granted capacity with a bounded
backlog, and records one MetricsSample.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import kernels
from .autoscaler import ScalerState, apply_cooldown, desired_replicas
from .catalog import Catalog, DeploymentUnitSpec
from .cluster import PoolState, apply_capacity_event, request_capacity, sorted_events
from .policy import (
    CapacityExhausted,
    CapacityObservation,
    InfeasibleAllocation,
    Mode,
    TrafficWeights,
    capacity_weights,
    cost_weights,
    renormalize,
    select_mode,
    solve_allocation,
)
from .scenario import ControllerMode, DemandKind, DemandTrace, Scenario, ScenarioError

DEFAULT_KAPPA = 0.5
# Demand below base + this fraction of the swing counts as a cycle trough.
TROUGH_FRACTION = 0.05
_TIME_EPS = 1e-9


# ---------------------------------------------------------------- demand

def clean_demand(trace: DemandTrace, t: float) -> float:
    """Noise-free waveform value; every cycle starts and ends at base."""
    base, peak, cycle = trace.base_rps, trace.peak_rps, trace.cycle
    if trace.kind is DemandKind.SINE:
        return base + (peak - base) / 2.0 * (1.0 - math.cos(2.0 * math.pi * t / cycle))
    phase = (t % cycle) / cycle
    if trace.kind is DemandKind.TRAPEZOID:
        # ramp up, hold at peak, ramp down, hold at base: a quarter each
        if phase < 0.25:
            return base + (peak - base) * phase / 0.25
        if phase < 0.5:
            return peak
        if phase < 0.75:
            return peak - (peak - base) * (phase - 0.5) / 0.25
        return base
    # PiecewiseTable: linear interpolation between knots, periodic in cycle.
    offset = t % cycle
    knots = list(trace.table)
    first_o, first_r = knots[0]
    last_o, last_r = knots[-1]
    if offset < first_o or offset >= last_o:
        span = cycle - last_o + first_o
        into = offset - last_o if offset >= last_o else offset + cycle - last_o
        return last_r if span <= 0 else last_r + (first_r - last_r) * into / span
    for (o0, r0), (o1, r1) in zip(knots, knots[1:]):
        if o0 <= offset < o1:
            return r0 + (r1 - r0) * (offset - o0) / (o1 - o0)
    return last_r


def noise_factor(trace: DemandTrace, t: float) -> float:
    if trace.noise_pct == 0:
        return 1.0
    # Keyed on (seed, t) so demand_at stays a pure function of its inputs.
    rng = random.Random(f"{trace.seed}:{t!r}")
    return rng.uniform(1.0 - trace.noise_pct, 1.0 + trace.noise_pct)


def demand_at(trace: DemandTrace, t: float) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    return clean_demand(trace, t) * noise_factor(trace, t)


def in_trough(trace: DemandTrace, t: float) -> bool:
    threshold = trace.base_rps + TROUGH_FRACTION * (trace.peak_rps - trace.base_rps)
    return clean_demand(trace, t) < threshold


# ------------------------------------------------------------ per-unit model

def dispatch(arrival_rps: float, weights: TrafficWeights) -> list[float]:
    return [arrival_rps * w for w in weights.weights]


def observed_latency(
    du: DeploymentUnitSpec, utilization: float, kappa: float = DEFAULT_KAPPA
) -> float:
    """Latency of one unit at a given utilization.

    Flat at base latency up to the unit's knee, a bounded rise between the
    knee and saturation that stays below the breakpoint latency, then a
    sharp blow-up once offered load exceeds capacity. ``kappa`` scales both
    rising parts; kappa = 0 gives constant latency.
    """
    if utilization < 0:
        raise ValueError("utilization must be >= 0")
    base = du.base_latency
    knee = du.utilization_target
    if kappa <= 0 or utilization <= knee:
        return base
    headroom = max(du.breakpoint_latency, base) - base
    soft = kappa / (1.0 + kappa)
    if utilization <= 1.0:
        return base + headroom * soft * (utilization - knee) / (1.0 - knee)
    saturated = base + headroom * soft
    over = utilization - 1.0
    return saturated + du.breakpoint_latency * kappa * over * (1.0 + over)


# ---------------------------------------------------------------- records

@dataclass(frozen=True)
class UnitSample:
    weight: float
    replicas: int
    available: int
    arrival_rps: float
    success_rps: float
    error_rps: float
    latency_s: float
    utilization: float
    # backlog in requests before and after the step (not written to CSV)
    queue_before: float
    queue_after: float


@dataclass(frozen=True)
class MetricsSample:
    t: float
    mode: Mode
    demand_rps: float
    units: tuple[UnitSample, ...]
    total_success_rps: float
    total_error_rps: float
    cost_usd_cumulative: float
    control_tick: bool
    shortfall: bool


@dataclass(frozen=True)
class ModeSwitch:
    t: float
    from_mode: Mode
    to_mode: Mode


@dataclass
class Summary:
    scenario: str
    steps: int
    duration: float
    total_cost_usd: float
    total_arrivals: float
    total_served: float
    total_errors: float
    error_fraction: float
    mean_latency_s: dict[str, float]
    mode_switches: list[ModeSwitch]
    final_mode: Mode

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "steps": self.steps,
            "duration_s": self.duration,
            "total_cost_usd": self.total_cost_usd,
            "total_arrivals": self.total_arrivals,
            "total_served": self.total_served,
            "total_errors": self.total_errors,
            "error_fraction": self.error_fraction,
            "mean_latency_s": self.mean_latency_s,
            "mode_switches": [
                {"t": s.t, "from": s.from_mode.value, "to": s.to_mode.value}
                for s in self.mode_switches
            ],
            "final_mode": self.final_mode.value,
        }


@dataclass
class EngineState:
    clock: float
    mode: Mode
    weights: TrafficWeights
    pool: PoolState
    scaler: ScalerState
    queue: list[float]
    accrued_cost: float = 0.0
    step_index: int = 0
    event_cursor: int = 0
    switches: list[ModeSwitch] = field(default_factory=list)
    shortfall: bool = False


# ---------------------------------------------------------------- simulator

class Simulator:
    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.catalog: Catalog = scenario.catalog
        self.ids = self.catalog.ids
        self.dt = scenario.dt
        self.n_steps = max(1, math.ceil(scenario.duration / scenario.dt - _TIME_EPS))
        self.control_every = max(1, round(scenario.controller.control_interval / scenario.dt))
        self.events = sorted_events(scenario.capacity_events)
        self._cost_weights = cost_weights(self.catalog)
        self._tmax = [float(u.max_throughput) for u in self.catalog]
        self._check_feasible()

        ctrl = scenario.controller.mode
        mode = Mode.CAPACITY_OPTIMIZED if ctrl is ControllerMode.FORCE_CAPACITY else Mode.COST_OPTIMIZED
        self.state = EngineState(
            clock=0.0,
            mode=mode,
            weights=self._cost_weights,
            pool=PoolState.create(scenario.initial_available()),
            scaler=ScalerState.initial(self.ids, scenario.scaler),
            queue=[0.0] * len(self.ids),
        )

    def _check_feasible(self) -> None:
        sc = self.scenario
        if sc.controller.mode is not ControllerMode.FORCE_COST:
            return
        peak = sc.demand.peak_rps * (1.0 + sc.demand.noise_pct)
        if sc.demand.kind is DemandKind.PIECEWISE_TABLE:
            peak = max(r for _, r in sc.demand.table) * (1.0 + sc.demand.noise_pct)
        avail = sc.initial_available()
        supply = sum(avail[u.id] * u.max_throughput for u in self.catalog)
        if peak > supply:
            raise ScenarioError(
                f"infeasible scenario: peak demand {peak:g} RPS exceeds total "
                f"capacity {supply:g} RPS in ForceCost mode"
            )

    # -- control ------------------------------------------------------

    def _cost_request(self, demand: float, available: Sequence[int]) -> list[int]:
        """Replicas cost mode wants: autoscaled weight shares, floored by the
        cost-minimal plan over currently available pools."""
        cfg = self.scenario.scaler
        shares = dispatch(demand, self._cost_weights)
        desired = [desired_replicas(u, s, config=cfg) for u, s in zip(self.catalog, shares)]
        try:
            plan = solve_allocation(demand, self.catalog, capacity=list(available)).counts
        except InfeasibleAllocation:
            plan = tuple(available)
        return [max(d, p) for d, p in zip(desired, plan)]

    def _control(self, t: float, demand: float) -> None:
        st = self.state
        sc = self.scenario
        pool = st.pool
        available = [pool[i].available for i in self.ids]
        granted = [pool[i].granted for i in self.ids]

        cost_request = self._cost_request(demand, available)
        supply = sum(g * tm for g, tm in zip(granted, self._tmax))
        obs = CapacityObservation(tuple(cost_request), tuple(available), demand, supply)
        st.shortfall = obs.shortfall

        ctrl = sc.controller.mode
        if ctrl is ControllerMode.FORCE_COST:
            mode = Mode.COST_OPTIMIZED
        elif ctrl is ControllerMode.FORCE_CAPACITY:
            mode = Mode.CAPACITY_OPTIMIZED
        else:
            mode = select_mode(st.mode, obs, in_trough(sc.demand, t))
        if mode is not st.mode:
            st.switches.append(ModeSwitch(t, st.mode, mode))
            st.mode = mode

        active = [g > 0 or a > 0 for g, a in zip(granted, available)]
        try:
            if mode is Mode.COST_OPTIMIZED:
                st.weights = renormalize(self._cost_weights, active)
            else:
                base = capacity_weights(self.ids, [a > 0 for a in available])
                st.weights = renormalize(base, active)
        except CapacityExhausted:
            pass  # nothing can serve; keep routing as before and let it error

        if mode is Mode.COST_OPTIMIZED:
            requests = cost_request
        else:
            shares = dispatch(demand, st.weights)
            requests = [
                desired_replicas(u, s, config=sc.scaler) if w > 0 else sc.scaler.min_replicas
                for u, s, w in zip(self.catalog, shares, st.weights.weights)
            ]

        delay = 0.0 if (sc.warm_start and st.step_index == 0) else sc.provision_delay
        for du_id, req in zip(self.ids, requests):
            proposal = sc.scaler.clamp(req)
            accepted = apply_cooldown(st.scaler, du_id, proposal, t, sc.scaler)
            request_capacity(pool, du_id, accepted, t, delay)

    # -- stepping -----------------------------------------------------

    def step(self) -> MetricsSample:
        st = self.state
        sc = self.scenario
        dt = self.dt
        t = st.step_index * dt
        st.clock = t

        st.pool.advance(t)
        while st.event_cursor < len(self.events) and self.events[st.event_cursor].at <= t + _TIME_EPS:
            apply_capacity_event(st.pool, self.events[st.event_cursor])
            st.event_cursor += 1

        demand = demand_at(sc.demand, t)
        tick = st.step_index % self.control_every == 0
        if tick:
            self._control(t, demand)

        arrivals = dispatch(demand, st.weights)
        granted = [st.pool[i].granted for i in self.ids]
        capacity = [g * tm for g, tm in zip(granted, self._tmax)]
        queue_before = st.queue
        served, errored, queue_after, util = kernels.fluid_serve(
            arrivals, queue_before, capacity, dt, sc.queue_seconds
        )
        st.queue = list(queue_after)

        step_cost = 0.0
        for g, u in zip(granted, self.catalog):
            step_cost += g * u.cost_per_hour * dt / 3600.0
        st.accrued_cost += step_cost

        units = []
        for i, du in enumerate(self.catalog):
            units.append(UnitSample(
                weight=st.weights.weights[i],
                replicas=granted[i],
                available=st.pool[du.id].available,
                arrival_rps=arrivals[i],
                success_rps=served[i] / dt,
                error_rps=errored[i] / dt,
                latency_s=observed_latency(du, util[i], sc.latency_kappa),
                utilization=util[i],
                queue_before=queue_before[i],
                queue_after=queue_after[i],
            ))
        sample = MetricsSample(
            t=t,
            mode=st.mode,
            demand_rps=demand,
            units=tuple(units),
            total_success_rps=sum(u.success_rps for u in units),
            total_error_rps=sum(u.error_rps for u in units),
            cost_usd_cumulative=st.accrued_cost,
            control_tick=tick,
            shortfall=st.shortfall,
        )
        st.step_index += 1
        return sample

    def summarize(self, samples: Sequence[MetricsSample]) -> Summary:
        dt = self.dt
        arrivals = sum(sum(u.arrival_rps for u in s.units) * dt for s in samples)
        served = sum(s.total_success_rps * dt for s in samples)
        errors = sum(s.total_error_rps * dt for s in samples)
        mean_latency = {}
        for i, du_id in enumerate(self.ids):
            weight = sum(s.units[i].success_rps for s in samples)
            if weight > 0:
                mean_latency[du_id] = (
                    sum(s.units[i].latency_s * s.units[i].success_rps for s in samples) / weight
                )
            else:
                mean_latency[du_id] = None
        return Summary(
            scenario=self.scenario.name,
            steps=len(samples),
            duration=len(samples) * dt,
            total_cost_usd=self.state.accrued_cost,
            total_arrivals=arrivals,
            total_served=served,
            total_errors=errors,
            error_fraction=errors / arrivals if arrivals > 0 else 0.0,
            mean_latency_s=mean_latency,
            mode_switches=list(self.state.switches),
            final_mode=self.state.mode,
        )


def run(scenario: Scenario) -> tuple[list[MetricsSample], Summary]:
    sim = Simulator(scenario)
    samples = [sim.step() for _ in range(sim.n_steps)]
    return samples, sim.summarize(samples)


# ---------------------------------------------------------------- breakpoint

@dataclass(frozen=True)
class SweepPoint:
    offered_rps: float
    served_rps: float
    latency_s: float
    utilization: float


def breakpoint_sweep(
    du: DeploymentUnitSpec,
    increments: int = 60,
    max_factor: float = 1.5,
    kappa: float = DEFAULT_KAPPA,
) -> tuple[list[SweepPoint], Optional[SweepPoint]]:
    """Steady-state load test of a single replica.

    Offered load steps linearly from 0 to ``max_factor`` x breakpoint
    throughput. Returns all points and the first one whose latency exceeds
    the unit's breakpoint latency (None when latency never crosses it).
    """
    if increments < 1:
        raise ValueError("increments must be >= 1")
    tmax = float(du.max_throughput)
    points = []
    for k in range(increments + 1):
        offered = max_factor * tmax * k / increments
        served = offered if offered < tmax else tmax
        rho = offered / tmax
        points.append(SweepPoint(offered, served, observed_latency(du, rho, kappa), rho))
    crossing = next((p for p in points if p.latency_s > du.breakpoint_latency), None)
    return points, crossing
