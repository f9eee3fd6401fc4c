"""Two-client server benchmark: synthesize, time the solver, compare with the hand-written server.

    python scripts/run_benchmark.py [--repeat 20] [--horizon 1000000] [--runs 32] [--seed 1]

Prints a JSON summary: MDP sizes, the optimal value (LP and exact), solve
time statistics, the hand-written server's value, and simulation estimates
for both systems.
"""
from __future__ import annotations

import argparse
import json
import statistics
import time

from ratiosynth.analysis import system_value
from ratiosynth.corpus import benchmark
from ratiosynth.lfp import solve_lfp
from ratiosynth.product import build_synthesis_mdp, build_value_chain, extract_system, prune_unsafe
from ratiosynth.sim import SimConfig, simulate_chain


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20, help="timed solver repetitions")
    parser.add_argument("--horizon", type=int, default=10**6)
    parser.add_argument("--runs", type=int, default=32)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args(argv)

    b = benchmark()
    t0 = time.perf_counter()
    full = build_synthesis_mdp(b.qual, b.quant, b.env)
    mdp = prune_unsafe(full)
    build_s = time.perf_counter() - t0

    solve_times = []
    for _ in range(args.repeat):
        t = time.perf_counter()
        result = solve_lfp(mdp)
        solve_times.append(time.perf_counter() - t)
    optimal = extract_system(mdp, result.strategy)

    cfg = SimConfig(args.seed, args.horizon, min(10**3, args.horizon // 2), args.runs)
    systems = {"optimal": optimal, "handwritten": b.server}
    report = {
        "mdp": {"unpruned_states": len(full.states), "unpruned_edges": full.n_edges,
                "states": len(mdp.states), "edges": mdp.n_edges},
        "optimal_value": {"lp": result.value, "exact": str(result.exact_value),
                          "iterations": result.iterations, "history": list(result.history)},
        "timing_ms": {"build": 1e3 * build_s,
                      "solve_median": 1e3 * statistics.median(solve_times),
                      "solve_min": 1e3 * min(solve_times)},
        "systems": {},
    }
    for name, system in systems.items():
        value = system_value(system, b.qual, b.quant, b.env)
        est = simulate_chain(build_value_chain(system, b.quant, b.env), cfg)
        report["systems"][name] = {
            "states": len(system.states), "value": str(value), "value_decimal": float(value),
            "sim_mean": est.mean, "sim_stderr": est.stderr,
            "z": abs(est.mean - float(value)) / est.stderr if est.stderr else None,
        }
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
