import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gen import IN, OUT, random_automaton, random_environment, seeds
from ratiosynth import corpus
from ratiosynth.errors import ModelError
from ratiosynth.model import (INFINITY, Alphabet, CostAutomaton, FiniteStateSystem, LabeledMDP,
                              finite_ratio, format_value, is_infinite, normalize_automaton,
                              run_system, system_step, validate)


def test_bit_alphabet_names_and_order():
    alpha = Alphabet.from_bits(["r1", "r2"])
    assert alpha.letters == ("r1=0,r2=0", "r1=0,r2=1", "r1=1,r2=0", "r1=1,r2=1")
    assert alpha.index("r1=1,r2=0") == 2
    assert alpha.bits(2) == (1, 0)
    assert alpha.project(2, Alphabet.from_bits(["r1"])) == 1
    with pytest.raises(ModelError):
        alpha.index(4)


def test_infinity_orders_above_everything():
    assert INFINITY > 10**100
    assert INFINITY > Fraction(7, 2)
    assert not INFINITY < 3
    assert max(1.5, INFINITY) is INFINITY
    assert is_infinite(INFINITY) and not is_infinite(float("inf"))
    assert format_value(INFINITY) == "infinity"
    with pytest.raises(TypeError):
        INFINITY + 1


# -- normalization ----------------------------------------------------------

def _two_state(back_to_safe: bool) -> CostAutomaton:
    delta = {"g": ("g", "b", "g", "g"), "b": ("g" if back_to_safe else "b",) + ("b",) * 3}
    costs = {"g": (0, 0, 0, 0), "b": (2, 0, 0, 0)}
    return CostAutomaton(IN, OUT, ("g", "b"), "g", delta, frozenset({"g"}), costs, costs)


def test_normalize_closed_automaton_is_unchanged():
    aut = _two_state(back_to_safe=False)
    assert normalize_automaton(aut) is aut


def test_normalize_redirects_unsafe_to_safe_into_sink():
    norm = normalize_automaton(_two_state(back_to_safe=True))
    assert len(norm.states) == 3
    sink = norm.states[-1]
    assert norm.delta["b"][0] == sink
    assert norm.cost1["b"][0] == 2          # redirected transition keeps its costs
    assert norm.delta[sink] == (sink,) * 4
    assert norm.cost1[sink] == norm.cost2[sink] == (0,) * 4
    assert norm.unsafe_closed()


def test_mutex_automaton_already_normalized():
    mutex = corpus.load("mutex.aut")
    assert normalize_automaton(mutex) is mutex


def _ever_left(aut, word):
    q, flags = aut.initial, []
    left = q not in aut.safe
    for l, a in word:
        q = aut.step(q, l, a)
        left = left or q not in aut.safe
        flags.append(left)
    return flags


@given(seeds)
def test_normalize_is_idempotent_and_language_preserving(seed):
    rnd = random.Random(seed)
    aut = random_automaton(rnd, n_max=4, p_unsafe=0.4)
    norm = normalize_automaton(aut)
    assert normalize_automaton(norm) is norm
    word = [(rnd.randrange(2), rnd.randrange(2)) for _ in range(1000)]
    assert _ever_left(aut, word) == _ever_left(norm, word)


# -- validation ---------------------------------------------------------------

def test_bundled_models_validate():
    for name in corpus.FILES:
        assert validate(corpus.load(name)) == [], name


def _one_state_mdp(dist, labels=None):
    states = tuple(dist) if labels is None else tuple(labels)
    labels = labels or {s: 0 for s in states}
    trans = {(s, a): dict(dist) for s in states for a in range(2)}
    return LabeledMDP(IN, OUT, states, states[0], trans, labels)


def test_validate_reports_mass_defect():
    mdp = _one_state_mdp({"m": Fraction(9, 10)})
    problems = validate(mdp)
    assert {v.invariant for v in problems} == {"distribution mass ≠ 1"}


def test_validate_reports_label_determinism():
    mdp = _one_state_mdp({"m": Fraction(1, 2), "n": Fraction(1, 2)}, labels={"m": 1, "n": 1})
    kinds = [v.invariant for v in validate(mdp)]
    assert set(kinds) == {"label-determinism"}


def test_validate_reports_disabled_environment_action():
    mdp = LabeledMDP(IN, OUT, ("m",), "m", {("m", 0): {"m": Fraction(1)}}, {"m": 0})
    assert [v.invariant for v in validate(mdp)] == ["environment action not enabled"]


def test_validate_automaton_costs_and_totality():
    aut = _two_state(back_to_safe=False)
    bad = CostAutomaton(aut.inputs, aut.outputs, aut.states, "g",
                        {**aut.delta, "g": aut.delta["g"][:3]}, aut.safe,
                        {**aut.cost1, "b": (-1, 0, 0, 0)}, aut.cost2)
    kinds = {v.invariant for v in validate(bad)}
    assert kinds == {"delta not total", "cost1 not a nonnegative integer"}


@given(seeds)
def test_successor_count_equals_distinct_labels(seed):
    env = random_environment(random.Random(seed))
    assert validate(env) == []
    for (s, a), dist in env.trans.items():
        positive = [t for t, p in dist.items() if p > 0]
        assert len(positive) == len({env.label[t] for t in positive})


# -- systems -----------------------------------------------------------------

def test_server_steps():
    server = corpus.load("server.sys")
    assert system_step(server, "m0", "r1=0,r2=1") == ("m1", server.outputs.index("a1=0,a2=1"))
    assert system_step(server, "m0", "r1=1,r2=0") == ("m0", server.outputs.index("a1=1,a2=0"))
    with pytest.raises(ModelError):
        system_step(server, "m9", 0)


def test_one_state_system_is_constant():
    sys = FiniteStateSystem(IN, OUT, ("s",), "s", {"s": ("s", "s")}, {"s": 1})
    assert all(system_step(sys, "s", l) == ("s", 1) for l in range(2))


def test_run_system_emits_initial_output_first():
    server = corpus.load("server.sys")
    word = [1, 1, 0, 2]        # !r1 r2, !r1 r2, !r1 !r2, r1 !r2
    outs = [a for _, a in run_system(server, word)]
    a1, a2 = server.outputs.index("a1=1,a2=0"), server.outputs.index("a1=0,a2=1")
    assert outs == [a1, a2, a2, a1]


# -- finite_ratio ------------------------------------------------------------

def test_finite_ratio_examples():
    assert finite_ratio([1, 1, 1], [0, 0, 0], 0, 2) == 3
    assert finite_ratio([0, 0, 0], [5, 0, 2], 0, 2) == 0
    assert finite_ratio([1, 0, 1], [1, 1, 0], 1, 2) == Fraction(1, 2)


costs = st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=30)


@given(costs, st.integers(0, 10), st.data())
def test_finite_ratio_ignores_zero_prefix(seq, k, data):
    c1 = [a for a, _ in seq]
    c2 = [b for _, b in seq]
    m = data.draw(st.integers(0, len(seq) - 1))
    l = data.draw(st.integers(m, len(seq) - 1))
    padded1, padded2 = [0] * k + c1, [0] * k + c2
    assert finite_ratio(padded1, padded2, m + k, l + k) == finite_ratio(c1, c2, m, l)
    assert finite_ratio(padded1, padded2, 0, l + k) == finite_ratio(c1, c2, 0, l)
