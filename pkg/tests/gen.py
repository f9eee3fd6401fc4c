"""Random model generators shared by the property and acceptance tests.

Every generator takes a ``random.Random``.  Property tests draw an integer
seed from hypothesis (``seeds``) and acceptance tests use seeded loops.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from hypothesis import strategies as st

from ratiosynth.analysis import classify
from ratiosynth.model import Alphabet, CostAutomaton, FiniteStateSystem, LabeledMDP
from ratiosynth.product import CostMarkovChain, SynthesisMDP, induced_chain

seeds = st.integers(0, 2**32 - 1)


def split_quarters(rng: random.Random, targets):
    """Distribution over ``targets`` with probabilities that are multiples of 1/4."""
    k = rng.randint(1, min(4, len(targets)))
    chosen = rng.sample(list(targets), k)
    cuts = sorted(rng.sample(range(1, 4), k - 1))
    parts = [b - a for a, b in zip([0, *cuts], [*cuts, 4])]
    return {t: Fraction(p, 4) for t, p in zip(chosen, parts)}


def interleave(u, v, pattern):
    """Merge two sequences, taking from ``u`` where ``pattern`` is true while both last."""
    out, i, j = [], 0, 0
    for take_u in pattern:
        if take_u and i < len(u):
            out.append(u[i])
            i += 1
        elif j < len(v):
            out.append(v[j])
            j += 1
    return out + u[i:] + v[j:]


def random_chain(rng: random.Random, n_max=5, cost_max=3) -> CostMarkovChain:
    n = rng.randint(1, n_max)
    states = tuple(f"c{i}" for i in range(n))
    trans = {s: split_quarters(rng, states) for s in states}
    c1 = {s: rng.randint(0, cost_max) for s in states}
    c2 = {s: rng.randint(0, cost_max) for s in states}
    return CostMarkovChain.from_state_costs(states, states[0], trans, c1, c2)


def random_unichain(rng: random.Random, n_max=5, cost_max=3) -> CostMarkovChain:
    while True:
        chain = random_chain(rng, n_max, cost_max)
        if classify(chain).unichain:
            return chain


def random_mdp(rng: random.Random, n_max=3, a_max=2, cost_max=2) -> SynthesisMDP:
    n = rng.randint(1, n_max)
    states = tuple(range(n))
    trans, costs = {}, {}
    for s in states:
        for a in rng.sample(range(a_max), rng.randint(1, a_max)):
            trans[(s, a)] = split_quarters(rng, states)
            costs[(s, a)] = (rng.randint(0, cost_max), rng.randint(0, cost_max))
    return SynthesisMDP.from_costs(states, 0, a_max, trans, costs)


def strategies(mdp: SynthesisMDP):
    """Every pure memoryless strategy of ``mdp``."""
    for choice in itertools.product(*(mdp.enabled[s] for s in mdp.states)):
        yield dict(zip(mdp.states, choice))


def all_unichain(mdp: SynthesisMDP) -> bool:
    return all(classify(induced_chain(mdp, st)).unichain for st in strategies(mdp))


def random_unichain_mdp(rng: random.Random, **kw) -> SynthesisMDP:
    while True:
        mdp = random_mdp(rng, **kw)
        if all_unichain(mdp):
            return mdp


# -- automata, environments and systems over one input bit and one output bit --

IN = Alphabet.from_bits(["r"])
OUT = Alphabet.from_bits(["a"])


def constant_automaton(inputs, outputs, c1, c2, safe=True):
    n = len(inputs) * len(outputs)
    return CostAutomaton(inputs, outputs, ("k",), "k", {"k": ("k",) * n},
                         frozenset({"k"}) if safe else frozenset(),
                         {"k": (c1,) * n}, {"k": (c2,) * n})


def constant_system(inputs, outputs, letter):
    return FiniteStateSystem(inputs, outputs, ("s",), "s", {"s": ("s",) * len(inputs)},
                             {"s": outputs.index(letter)})


def random_automaton(rng: random.Random, n_max=3, cost_max=2, p_unsafe=0.3,
                     inputs=IN, outputs=OUT) -> CostAutomaton:
    n = rng.randint(1, n_max)
    states = tuple(f"q{i}" for i in range(n))
    k = len(inputs) * len(outputs)
    delta = {q: tuple(rng.choice(states) for _ in range(k)) for q in states}
    safe = frozenset(q for q in states if rng.random() >= p_unsafe)
    c1 = {q: tuple(rng.randint(0, cost_max) for _ in range(k)) for q in states}
    c2 = {q: tuple(rng.randint(0, cost_max) for _ in range(k)) for q in states}
    return CostAutomaton(inputs, outputs, states, states[0], delta, safe, c1, c2, name="rand")


def random_environment(rng: random.Random, n_max=4, inputs=IN, outputs=OUT) -> LabeledMDP:
    n = rng.randint(1, n_max)
    states = tuple(f"m{i}" for i in range(n))
    label = {s: rng.randrange(len(inputs)) for s in states}
    by_label = {}
    for s in states:
        by_label.setdefault(label[s], []).append(s)
    trans = {}
    for s in states:
        for a in range(len(outputs)):
            # at most one successor per label keeps the model label-deterministic
            pool = [rng.choice(group) for group in by_label.values()]
            trans[(s, a)] = split_quarters(rng, pool)
    return LabeledMDP(inputs, outputs, states, states[0], trans, label, name="rand")


def random_system(rng: random.Random, n_max=3, inputs=IN, outputs=OUT) -> FiniteStateSystem:
    n = rng.randint(1, n_max)
    states = tuple(f"s{i}" for i in range(n))
    delta = {s: tuple(rng.choice(states) for _ in range(len(inputs))) for s in states}
    output = {s: rng.randrange(len(outputs)) for s in states}
    return FiniteStateSystem(inputs, outputs, states, states[0], delta, output, name="rand")
