# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics and operation order match _pykernels."""

from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY

cdef double _PRUNE_SLACK = 1e-9
cdef double EPSILON = 1e-9


cdef struct Search:
    int n
    double demand
    double *costs
    double *tput
    long *bounds
    double *suffix_supply
    double *suffix_ratio
    long *counts
    long *best_counts
    int found
    double best_cost
    long best_total


cdef void _consider(Search *s, double cost, long total) noexcept nogil:
    cdef int j
    if (not s.found) or cost < s.best_cost or (cost == s.best_cost and total < s.best_total):
        for j in range(s.n):
            s.best_counts[j] = s.counts[j]
        s.found = 1
        s.best_cost = cost
        s.best_total = total


cdef void _visit(Search *s, int i, double cost, double supply, long total) noexcept nogil:
    cdef int j
    cdef long k
    cdef double c, lower
    if supply >= s.demand:
        for j in range(i, s.n):
            s.counts[j] = 0
        _consider(s, cost, total)
        return
    if i == s.n:
        return
    if supply + s.suffix_supply[i] < s.demand - _PRUNE_SLACK * (1.0 + s.demand):
        return
    if s.found:
        lower = cost + (s.demand - supply) * s.suffix_ratio[i] * (1.0 - _PRUNE_SLACK)
        if lower > s.best_cost:
            return
    k = s.bounds[i]
    while k >= 0:
        c = cost + k * s.costs[i]
        if (not s.found) or c <= s.best_cost:
            s.counts[i] = k
            _visit(s, i + 1, c, supply + k * s.tput[i], total + k)
        k -= 1
    s.counts[i] = 0


def exact_search(costs, tput, bounds, double demand):
    cdef int n = len(costs)
    cdef int i
    cdef Search s
    cdef double r
    if n == 0:
        return () if demand <= 0 else None
    s.n = n
    s.demand = demand
    s.costs = <double *> malloc(n * sizeof(double))
    s.tput = <double *> malloc(n * sizeof(double))
    s.bounds = <long *> malloc(n * sizeof(long))
    s.suffix_supply = <double *> malloc((n + 1) * sizeof(double))
    s.suffix_ratio = <double *> malloc((n + 1) * sizeof(double))
    s.counts = <long *> malloc(n * sizeof(long))
    s.best_counts = <long *> malloc(n * sizeof(long))
    if (s.costs == NULL or s.tput == NULL or s.bounds == NULL or s.suffix_supply == NULL
            or s.suffix_ratio == NULL or s.counts == NULL or s.best_counts == NULL):
        _free(&s)
        raise MemoryError()
    try:
        for i in range(n):
            s.costs[i] = costs[i]
            s.tput[i] = tput[i]
            s.bounds[i] = bounds[i]
            s.counts[i] = 0
            s.best_counts[i] = 0
        s.suffix_supply[n] = 0.0
        s.suffix_ratio[n] = INFINITY
        for i in range(n - 1, -1, -1):
            s.suffix_supply[i] = s.suffix_supply[i + 1] + s.bounds[i] * s.tput[i]
            r = s.costs[i] / s.tput[i]
            s.suffix_ratio[i] = r if r < s.suffix_ratio[i + 1] else s.suffix_ratio[i + 1]
        s.found = 0
        s.best_cost = INFINITY
        s.best_total = 0
        with nogil:
            _visit(&s, 0, 0.0, 0.0, 0)
        if not s.found:
            return None
        return tuple([s.best_counts[i] for i in range(n)])
    finally:
        _free(&s)


cdef void _free(Search *s) noexcept:
    free(s.costs)
    free(s.tput)
    free(s.bounds)
    free(s.suffix_supply)
    free(s.suffix_ratio)
    free(s.counts)
    free(s.best_counts)


def fluid_serve(arrivals, queue, capacity, double dt, double queue_seconds):
    cdef Py_ssize_t n = len(arrivals)
    cdef Py_ssize_t i
    cdef double work, serveable, done, rest, bound, kept, cap
    served = [0.0] * n
    errored = [0.0] * n
    new_queue = [0.0] * n
    utilization = [0.0] * n
    for i in range(n):
        cap = capacity[i]
        work = <double> arrivals[i] * dt + <double> queue[i]
        serveable = cap * dt
        done = work if work < serveable else serveable
        rest = work - done
        bound = cap * queue_seconds
        kept = rest if rest < bound else bound
        served[i] = done
        new_queue[i] = kept
        errored[i] = rest - kept
        utilization[i] = work / (serveable if serveable > EPSILON else EPSILON)
    return served, errored, new_queue, utilization
