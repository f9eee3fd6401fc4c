from fractions import Fraction

import numpy as np
import pytest

from ratiosynth.analysis import cesaro_limit
from ratiosynth.errors import ModelError
from ratiosynth.lfp import solve_lfp
from ratiosynth.product import (CostMarkovChain, SynthesisMDP, build_value_chain, extract_system,
                                induced_chain)
from ratiosynth.sim import SimConfig, simulate_chain, simulate_mdp

TWO_CYCLE = {"a": {"b": 1}, "b": {"a": 1}}


def chain(trans, c1, c2):
    states = tuple(trans)
    return CostMarkovChain.from_state_costs(states, states[0], trans, c1, c2)


@pytest.fixture(scope="module")
def optimum(bench_mdp):
    return solve_lfp(bench_mdp).strategy


def test_config_validation():
    SimConfig(seed=0, horizon=10, burn_in=0, runs=1)
    for bad in (dict(burn_in=10), dict(runs=0), dict(seed=-1), dict(seed=2**64), dict(burn_in=-1)):
        with pytest.raises(ValueError):
            SimConfig(**{"seed": 0, "horizon": 10, "burn_in": 0, "runs": 1, **bad})


def test_constant_chain():
    c = chain({"x": {"x": 1}}, {"x": 1}, {"x": 1})
    short = simulate_chain(c, SimConfig(seed=1, horizon=10**3, burn_in=0, runs=2))
    long = simulate_chain(c, SimConfig(seed=1, horizon=10**5, burn_in=0, runs=2))
    assert abs(long.mean - 1) < abs(short.mean - 1) <= 1e-2
    assert long.stderr == 0


def test_two_cycle():
    c = chain(TWO_CYCLE, {"a": 1, "b": 3}, {"a": 1, "b": 1})
    est = simulate_chain(c, SimConfig(seed=7, horizon=10**6, runs=4))
    assert abs(est.mean - 2) <= 1e-2
    assert est.visit_fractions == pytest.approx({"a": 0.5, "b": 0.5}, abs=1e-6)


def test_reproducible():
    c = chain({"s": {"s": Fraction(1, 3), "t": Fraction(2, 3)}, "t": {"s": 1}},
              {"s": 2, "t": 0}, {"s": 1, "t": 1})
    cfg = SimConfig(seed=123, horizon=10**4, burn_in=10, runs=5)
    assert simulate_chain(c, cfg) == simulate_chain(c, cfg)
    other = simulate_chain(c, SimConfig(seed=124, horizon=10**4, burn_in=10, runs=5))
    assert other.per_run != simulate_chain(c, cfg).per_run


def test_visit_fractions_sum_to_one():
    c = chain({"s": {"s": Fraction(1, 4), "t": Fraction(3, 4)}, "t": {"s": 1}},
              {"s": 1, "t": 1}, {"s": 1, "t": 1})
    for runs in (1, 3):
        est = simulate_chain(c, SimConfig(seed=3, horizon=5000, burn_in=17, runs=runs))
        assert abs(sum(est.visit_fractions.values()) - 1) <= 1e-12
        assert len(est.per_run) == runs and est.stderr >= 0


def test_single_action_mdp_matches_chain():
    trans = {(0, 0): {0: Fraction(1, 2), 1: Fraction(1, 2)}, (1, 0): {0: 1}}
    mdp = SynthesisMDP.from_costs((0, 1), 0, 1, trans, {(0, 0): (1, 2), (1, 0): (3, 1)})
    cfg = SimConfig(seed=11, horizon=10**4, runs=3)
    assert simulate_mdp(mdp, {0: 0, 1: 0}, cfg) == simulate_chain(induced_chain(mdp, {0: 0, 1: 0}), cfg)


def test_disabled_action_is_rejected(bench_mdp):
    with pytest.raises(ModelError):
        simulate_mdp(bench_mdp, {s: 3 for s in bench_mdp.states}, SimConfig(seed=0, horizon=10, burn_in=0))


def test_optimal_benchmark_strategy(bench_mdp, optimum):
    est = simulate_mdp(bench_mdp, optimum, SimConfig(seed=1, horizon=10**6, runs=8))
    assert abs(est.mean - 1.2) <= 5e-2
    assert max(est.per_run) - min(est.per_run) <= 1e-1
    p = cesaro_limit(induced_chain(bench_mdp, optimum)).weights
    assert max(abs(est.visit_fractions[s] - float(w)) for s, w in p.items()) <= 5e-3


def test_never_acknowledging_grows_with_horizon(bench_mdp):
    silent = {s: 0 for s in bench_mdp.states}
    means = [simulate_mdp(bench_mdp, silent, SimConfig(seed=2, horizon=h, burn_in=100, runs=2)).mean
             for h in (10**4, 10**5, 10**6)]
    assert means[0] < means[1] < means[2]
    assert means[2] > 100 * means[0] / 10


def test_per_run_values_are_nearly_constant(bench, optimum, bench_mdp):
    cfg = SimConfig(seed=9, horizon=10**6, runs=8)
    for system in (bench.server, extract_system(bench_mdp, optimum)):
        est = simulate_chain(build_value_chain(system, bench.quant, bench.env), cfg)
        assert np.std(est.per_run, ddof=1) <= 2e-2
