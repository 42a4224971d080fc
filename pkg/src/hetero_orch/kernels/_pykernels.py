"""Pure-Python reference implementations of the hot kernels.

The compiled module mirrors these line for line; floating-point operations
happen in the same order so both backends produce bit-identical results.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

# Relative slack on pruning bounds so that rounding never discards a
# candidate the exact comparison would have kept.
_PRUNE_SLACK = 1e-9

EPSILON = 1e-9


def exact_search(
    costs: Sequence[float],
    tput: Sequence[float],
    bounds: Sequence[int],
    demand: float,
) -> Optional[tuple[int, ...]]:
    """Minimum-cost integer count vector with sum(count*tput) >= demand.

    Depth-first branch and bound over units in order, counts descending, so
    the first vector found among (cost, total) ties is the one that favours
    earlier units. Returns None when no vector within ``bounds`` is feasible.
    """
    n = len(costs)
    if n == 0:
        return () if demand <= 0 else None

    # suffix_supply[i]: most throughput units i..n-1 can add.
    # suffix_ratio[i]: cheapest cost per unit of throughput among i..n-1.
    suffix_supply = [0.0] * (n + 1)
    suffix_ratio = [math.inf] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_supply[i] = suffix_supply[i + 1] + bounds[i] * tput[i]
        suffix_ratio[i] = min(suffix_ratio[i + 1], costs[i] / tput[i])

    counts = [0] * n
    best_counts: Optional[list[int]] = None
    best_cost = math.inf
    best_total = 0

    def consider(cost: float, total: int) -> None:
        nonlocal best_counts, best_cost, best_total
        if best_counts is None or cost < best_cost or (cost == best_cost and total < best_total):
            best_counts = counts[:]
            best_cost = cost
            best_total = total

    def visit(i: int, cost: float, supply: float, total: int) -> None:
        if supply >= demand:
            # Any further replica only adds cost.
            for j in range(i, n):
                counts[j] = 0
            consider(cost, total)
            return
        if i == n:
            return
        if supply + suffix_supply[i] < demand - _PRUNE_SLACK * (1.0 + demand):
            return
        if best_counts is not None:
            lower = cost + (demand - supply) * suffix_ratio[i] * (1.0 - _PRUNE_SLACK)
            if lower > best_cost:
                return
        k = bounds[i]
        while k >= 0:
            c = cost + k * costs[i]
            if best_counts is None or c <= best_cost:
                counts[i] = k
                visit(i + 1, c, supply + k * tput[i], total + k)
            k -= 1
        counts[i] = 0

    visit(0, 0.0, 0.0, 0)
    return None if best_counts is None else tuple(best_counts)


def fluid_serve(
    arrivals: Sequence[float],
    queue: Sequence[float],
    capacity: Sequence[float],
    dt: float,
    queue_seconds: float,
) -> tuple[list[float], list[float], list[float], list[float]]:
    """One fluid service step per unit.

    ``arrivals`` and ``capacity`` are rates (RPS); ``queue`` is backlog in
    requests. Returns (served, errored, new_queue, utilization), amounts in
    requests over the step.
    """
    n = len(arrivals)
    served = [0.0] * n
    errored = [0.0] * n
    new_queue = [0.0] * n
    utilization = [0.0] * n
    for i in range(n):
        work = arrivals[i] * dt + queue[i]
        serveable = capacity[i] * dt
        done = work if work < serveable else serveable
        rest = work - done
        bound = capacity[i] * queue_seconds
        kept = rest if rest < bound else bound
        served[i] = done
        new_queue[i] = kept
        errored[i] = rest - kept
        utilization[i] = work / (serveable if serveable > EPSILON else EPSILON)
    return served, errored, new_queue, utilization
