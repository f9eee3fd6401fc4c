"""Seeded Monte-Carlo estimates of the ratio payoff.

Each run samples one trajectory and evaluates ``sum c1 / (1 + sum c2)`` over
the steps ``burn_in .. horizon-1``.  Run ``i`` draws from a PCG64 stream
seeded with ``SeedSequence([seed, i])``, so results do not depend on the
number of runs requested or their scheduling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .product import CostMarkovChain, SynthesisMDP, induced_chain


@dataclass(frozen=True)
class SimConfig:
    seed: int
    horizon: int = 10**6
    burn_in: int = 10**3
    runs: int = 32

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= self.burn_in < self.horizon:
            raise ValueError("need 0 <= burn_in < horizon")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    stderr: float
    per_run: tuple
    visit_fractions: dict       # state -> fraction of window steps, averaged over runs


@numba.njit(cache=True)
def _run(indptr, succ, cum, c1, c2, start, uniforms, burn_in, visits):
    s = start
    num = 0.0
    den = 0.0
    for k in range(uniforms.size):
        u = uniforms[k]
        j = indptr[s]
        last = indptr[s + 1] - 1
        while j < last and u >= cum[j]:
            j += 1
        if k >= burn_in:
            visits[s] += 1
            num += c1[j]
            den += c2[j]
        s = succ[j]
    return num / (1.0 + den)


def _compile(chain: CostMarkovChain):
    pos = {s: i for i, s in enumerate(chain.states)}
    indptr, succ, cum, c1, c2 = [0], [], [], [], []
    for s in chain.states:
        acc = 0.0
        for t, p in chain.trans[s].items():
            acc += float(p)
            succ.append(pos[t])
            cum.append(acc)
            if chain.edge_costs is not None:
                e1, e2 = chain.edge_costs[s][t]
            else:
                e1, e2 = chain.cost1[s], chain.cost2[s]
            c1.append(float(e1))
            c2.append(float(e2))
        indptr.append(len(succ))
    return (np.array(indptr, dtype=np.int64), np.array(succ, dtype=np.int64),
            np.array(cum), np.array(c1), np.array(c2), pos[chain.initial])


def simulate_chain(chain: CostMarkovChain, cfg: SimConfig) -> SimEstimate:
    indptr, succ, cum, c1, c2, start = _compile(chain)
    n = len(chain.states)
    values = []
    visits_total = np.zeros(n)
    window = cfg.horizon - cfg.burn_in
    for r in range(cfg.runs):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, r])))
        visits = np.zeros(n, dtype=np.int64)
        values.append(_run(indptr, succ, cum, c1, c2, start, rng.random(cfg.horizon),
                           cfg.burn_in, visits))
        visits_total += visits / window
    values = np.array(values)
    stderr = float(values.std(ddof=1) / np.sqrt(cfg.runs)) if cfg.runs > 1 else 0.0
    fractions = visits_total / cfg.runs
    return SimEstimate(float(values.mean()), stderr, tuple(float(v) for v in values),
                       {s: float(fractions[i]) for i, s in enumerate(chain.states)})


def simulate_mdp(mdp: SynthesisMDP, strat, cfg: SimConfig) -> SimEstimate:
    """Simulation of ``mdp`` under a pure memoryless strategy (via its induced chain)."""
    return simulate_chain(induced_chain(mdp, strat), cfg)
