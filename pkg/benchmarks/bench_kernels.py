"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Times exact_search on random allocation instances, fluid_serve on random
per-unit vectors, and a full run of each built-in scenario, once per
available backend.
"""

import argparse
import random
import timeit

from hetero_orch import kernels
from hetero_orch.engine import run
from hetero_orch.scenario import BUILTIN_SCENARIOS, builtin


def search_cases(n_cases=200, seed=1):
    rng = random.Random(seed)
    cases = []
    for _ in range(n_cases):
        n = rng.randint(3, 6)
        costs = [rng.uniform(0.2, 5.0) for _ in range(n)]
        tput = [float(rng.randint(10, 200)) for _ in range(n)]
        bounds = [rng.randint(2, 12) for _ in range(n)]
        demand = rng.uniform(0.2, 0.9) * sum(b * t for b, t in zip(bounds, tput))
        cases.append((costs, tput, bounds, demand))
    return cases


def serve_cases(n_cases=2000, width=5, seed=2):
    rng = random.Random(seed)
    return [
        (
            [rng.uniform(0, 300) for _ in range(width)],
            [rng.uniform(0, 100) for _ in range(width)],
            [rng.uniform(0, 400) for _ in range(width)],
        )
        for _ in range(n_cases)
    ]


def bench_backend(impl, repeat):
    searches = search_cases()
    serves = serve_cases()

    def do_search():
        for case in searches:
            impl.exact_search(*case)

    def do_serve():
        for arrivals, queue, capacity in serves:
            impl.fluid_serve(arrivals, queue, capacity, 1.0, 1.0)

    def do_engine():
        for name in BUILTIN_SCENARIOS:
            run(builtin(name))

    saved = kernels.exact_search, kernels.fluid_serve
    kernels.exact_search, kernels.fluid_serve = impl.exact_search, impl.fluid_serve
    try:
        return {
            f"exact_search x{len(searches)}": min(timeit.repeat(do_search, number=1, repeat=repeat)),
            f"fluid_serve x{len(serves)}": min(timeit.repeat(do_serve, number=1, repeat=repeat)),
            "engine (all built-ins)": min(timeit.repeat(do_engine, number=1, repeat=repeat)),
        }
    finally:
        kernels.exact_search, kernels.fluid_serve = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = kernels.available_backends()
    results = {name: bench_backend(impl, args.repeat) for name, impl in sorted(backends.items())}
    names = sorted(results)
    print(f"{'benchmark':28s}" + "".join(f"{n:>12s}" for n in names)
          + ("     speedup" if len(names) == 2 else ""))
    for key in results[names[0]]:
        row = f"{key:28s}" + "".join(f"{results[n][key] * 1e3:10.2f}ms" for n in names)
        if "compiled" in results and "python" in results:
            row += f"{results['python'][key] / results['compiled'][key]:11.1f}x"
        print(row)
    if "compiled" not in backends:
        print("compiled backend not built; only the Python fallback was timed")


if __name__ == "__main__":
    main()
