"""Product constructions: system x automaton x environment chains, the
synthesis MDP, almost-sure safety pruning and strategy-to-system extraction.

Timing follows the transducer semantics: in product state ``(s, q, m)`` the
system emits ``a = tau(s)``, the environment answers with ``m'`` drawn from
``p(m, a)`` and the automaton reads the joint letter ``(label(m'), a)``.
Because that letter depends on the successor, costs live on edges; the
per-state (per state-action) costs are their probability-weighted means.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import AlphabetMismatch, ModelError, Unrealizable
from .model import (Alphabet, CostAutomaton, FiniteStateSystem, LabeledMDP,
                    normalize_automaton)


def _expected(dist, edge_costs):
    c1 = sum((p * edge_costs[t][0] for t, p in dist.items()), Fraction(0))
    c2 = sum((p * edge_costs[t][1] for t, p in dist.items()), Fraction(0))
    return c1, c2


@dataclass(frozen=True)
class CostMarkovChain:
    states: tuple
    initial: object
    trans: Mapping[object, Mapping[object, Fraction]]
    cost1: Mapping[object, Fraction]
    cost2: Mapping[object, Fraction]
    # integer cost pair per (state, successor); None when costs are per state only
    edge_costs: Mapping[object, Mapping[object, tuple]] | None = field(default=None, compare=False)

    @classmethod
    def from_edges(cls, states, initial, trans, edge_costs):
        cost1, cost2 = {}, {}
        for s in states:
            cost1[s], cost2[s] = _expected(trans[s], edge_costs[s])
        return cls(tuple(states), initial, trans, cost1, cost2, edge_costs)

    @classmethod
    def from_state_costs(cls, states, initial, trans, cost1, cost2):
        """Chain whose every step out of ``s`` costs ``(cost1[s], cost2[s])``."""
        trans = {s: {t: Fraction(p) for t, p in trans[s].items() if p} for s in states}
        cost1 = {s: Fraction(cost1[s]) for s in states}
        cost2 = {s: Fraction(cost2[s]) for s in states}
        edges = None
        if all(c.denominator == 1 for c in (*cost1.values(), *cost2.values())):
            edges = {s: {t: (int(cost1[s]), int(cost2[s])) for t in trans[s]} for s in states}
        return cls(tuple(states), initial, trans, cost1, cost2, edges)


@dataclass(frozen=True)
class SynthesisMDP:
    """MDP over product states with edge costs from the quantitative automaton.

    ``label[s]`` is the input letter carried by the environment component of
    ``s``; extraction of a system needs it.  Hand-built MDPs may leave it
    empty.
    """

    actions: Alphabet
    states: tuple
    initial: object
    enabled: Mapping[object, tuple]
    trans: Mapping[tuple, Mapping[object, Fraction]]
    edge_costs: Mapping[tuple, Mapping[object, tuple]]
    unsafe: frozenset = frozenset()
    label: Mapping[object, int] = field(default_factory=dict)
    inputs: Alphabet | None = None
    cost1: Mapping[tuple, Fraction] = field(init=False, compare=False, repr=False)
    cost2: Mapping[tuple, Fraction] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        c1, c2 = {}, {}
        for key, dist in self.trans.items():
            c1[key], c2[key] = _expected(dist, self.edge_costs[key])
        object.__setattr__(self, "cost1", c1)
        object.__setattr__(self, "cost2", c2)

    @classmethod
    def from_costs(cls, states, initial, n_actions, trans, costs, enabled=None):
        """MDP with a fixed integer cost pair per state-action.

        ``trans[(s, a)]`` is a distribution, ``costs[(s, a)]`` a pair; actions
        are enabled wherever a distribution is given unless ``enabled`` says
        otherwise.
        """
        states = tuple(states)
        if enabled is None:
            enabled = {s: tuple(a for a in range(n_actions) if (s, a) in trans) for s in states}
        trans = {k: {t: Fraction(p) for t, p in d.items() if p} for k, d in trans.items()}
        edge_costs = {k: {t: tuple(costs[k]) for t in d} for k, d in trans.items()}
        actions = Alphabet.from_letters([f"a{i}" for i in range(n_actions)])
        return cls(actions, states, initial, dict(enabled), trans, edge_costs)

    @property
    def n_edges(self) -> int:
        """Number of (state, enabled action, positive-probability successor) triples."""
        return sum(len(self.trans[(s, a)]) for s in self.states for a in self.enabled[s])

    def successors(self, s):
        return {t for a in self.enabled[s] for t in self.trans[(s, a)]}


def _check_alphabets(env: LabeledMDP, *, sys=None, automata=()):
    if sys is not None and (sys.inputs != env.inputs or sys.outputs != env.outputs):
        raise AlphabetMismatch("system alphabets differ from the environment's labels/actions")
    for aut in automata:
        if aut.inputs != env.inputs or aut.outputs != env.outputs:
            raise AlphabetMismatch(
                f"automaton {aut.name or '?'} is not over the environment's input x action alphabet")


def _system_chain(sys, aut, env, edge_cost):
    _check_alphabets(env, sys=sys, automata=(aut,))
    init = (sys.initial, aut.initial, env.initial)
    order = [init]
    seen = {init}
    trans, edges = {}, {}
    i = 0
    while i < len(order):
        s, q, m = state = order[i]
        i += 1
        a = sys.output[s]
        dist, costs = {}, {}
        for m2, p in env.trans[(m, a)].items():
            if p == 0:
                continue
            l = env.label[m2]
            t = (sys.delta[s][l], aut.step(q, l, a), m2)
            dist[t] = p
            costs[t] = edge_cost(q, l, a)
            if t not in seen:
                seen.add(t)
                order.append(t)
        trans[state], edges[state] = dist, costs
    return CostMarkovChain.from_edges(order, init, trans, edges)


def build_satisfaction_chain(sys: FiniteStateSystem, qual: CostAutomaton,
                             env: LabeledMDP) -> CostMarkovChain:
    """Chain whose ratio value is 0 iff ``sys`` satisfies ``qual`` almost surely.

    Steps out of a product state with a safe automaton component cost
    ``(0, 1)``, steps out of an unsafe one ``(1, 0)``.  The automaton is
    normalized first so unsafe states are absorbing as a set.
    """
    qual = normalize_automaton(qual)

    def cost(q, l, a):
        return (0, 1) if q in qual.safe else (1, 0)

    return _system_chain(sys, qual, env, cost)


def build_value_chain(sys: FiniteStateSystem, quant: CostAutomaton,
                      env: LabeledMDP) -> CostMarkovChain:
    """Chain whose expected ratio is the system's value for ``quant``; edge costs are copied."""
    return _system_chain(sys, quant, env, quant.costs)


def build_synthesis_mdp(qual: CostAutomaton, quant: CostAutomaton,
                        env: LabeledMDP) -> SynthesisMDP:
    """MDP over reachable ``(q_qual, q_quant, m)`` with every output letter as an action."""
    _check_alphabets(env, automata=(qual, quant))
    qual = normalize_automaton(qual)
    init = (qual.initial, quant.initial, env.initial)
    order = [init]
    seen = {init}
    trans, edges = {}, {}
    n_actions = len(env.outputs)
    i = 0
    while i < len(order):
        qq, qn, m = state = order[i]
        i += 1
        for a in range(n_actions):
            dist, costs = {}, {}
            for m2, p in env.trans[(m, a)].items():
                if p == 0:
                    continue
                l = env.label[m2]
                t = (qual.step(qq, l, a), quant.step(qn, l, a), m2)
                dist[t] = p
                costs[t] = quant.costs(qn, l, a)
                if t not in seen:
                    seen.add(t)
                    order.append(t)
            trans[(state, a)], edges[(state, a)] = dist, costs
    states = tuple(order)
    return SynthesisMDP(
        env.outputs, states, init,
        {s: tuple(range(n_actions)) for s in states}, trans, edges,
        unsafe=frozenset(s for s in states if s[0] not in qual.safe),
        label={s: env.label[s[2]] for s in states}, inputs=env.inputs,
    )


def _restrict(mdp: SynthesisMDP, enabled) -> SynthesisMDP:
    """Keep the states reachable from the initial state under ``enabled``."""
    seen = {mdp.initial}
    queue = deque([mdp.initial])
    while queue:
        s = queue.popleft()
        for a in enabled[s]:
            for t in mdp.trans[(s, a)]:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
    states = tuple(s for s in mdp.states if s in seen)
    keys = [(s, a) for s in states for a in enabled[s]]
    return SynthesisMDP(
        mdp.actions, states, mdp.initial,
        {s: tuple(enabled[s]) for s in states},
        {k: mdp.trans[k] for k in keys}, {k: mdp.edge_costs[k] for k in keys},
        unsafe=mdp.unsafe & frozenset(states),
        label={s: mdp.label[s] for s in states if s in mdp.label}, inputs=mdp.inputs,
    )


def restrict_reachable(mdp: SynthesisMDP) -> SynthesisMDP:
    return _restrict(mdp, mdp.enabled)


def prune_unsafe(mdp: SynthesisMDP) -> SynthesisMDP:
    """Restrict to the largest set of safe states the system can stay in surely.

    Greatest fixpoint: an action survives iff all its positive-probability
    successors survive, a state survives iff it is safe and keeps an action.
    Raises :class:`Unrealizable` when the initial state is lost.
    """
    alive = {s for s in mdp.states if s not in mdp.unsafe}
    enabled = {s: list(mdp.enabled[s]) for s in alive}
    changed = True
    while changed:
        changed = False
        for s in list(alive):
            keep = [a for a in enabled[s] if all(t in alive for t in mdp.trans[(s, a)])]
            if len(keep) != len(enabled[s]):
                enabled[s] = keep
                changed = True
            if not keep:
                alive.discard(s)
                changed = True
    if mdp.initial not in alive:
        raise Unrealizable("the initial state cannot avoid unsafe states almost surely")
    return _restrict(mdp, enabled)


def induced_chain(mdp: SynthesisMDP, strat) -> CostMarkovChain:
    """Markov chain of ``mdp`` under a pure memoryless strategy, from the initial state."""
    seen = {mdp.initial}
    queue = deque([mdp.initial])
    while queue:
        s = queue.popleft()
        a = strat[s]
        if a not in mdp.enabled[s]:
            raise ModelError(f"strategy picks disabled action {a!r} in {s!r}")
        for t in mdp.trans[(s, a)]:
            if t not in seen:
                seen.add(t)
                queue.append(t)
    states = [s for s in mdp.states if s in seen]
    return CostMarkovChain.from_edges(
        states, mdp.initial,
        {s: mdp.trans[(s, strat[s])] for s in states},
        {s: mdp.edge_costs[(s, strat[s])] for s in states},
    )


def extract_system(mdp: SynthesisMDP, strat) -> FiniteStateSystem:
    """Moore machine that plays ``strat`` on ``mdp``.

    States are the MDP states reachable under the strategy, each emitting its
    chosen action.  On input ``l`` the system moves to the unique successor
    labeled ``l``.  Inputs the environment cannot produce there become
    self-loops, and each such fallback is listed in ``notes``.
    """
    if mdp.inputs is None:
        raise ModelError("MDP carries no input labels; cannot extract a system")
    chain = induced_chain(mdp, strat)
    delta, notes = {}, []
    for s in chain.states:
        by_label = {mdp.label[t]: t for t in chain.trans[s]}
        row = []
        for l in range(len(mdp.inputs)):
            if l in by_label:
                row.append(by_label[l])
            else:
                row.append(s)
                notes.append(f"input {mdp.inputs.letters[l]} impossible in {s!r}; self-loop")
        delta[s] = tuple(row)
    return FiniteStateSystem(
        mdp.inputs, mdp.actions, chain.states, mdp.initial, delta,
        {s: strat[s] for s in chain.states}, name="synthesized", notes=tuple(notes),
    )
