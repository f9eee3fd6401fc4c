"""Long-run analysis of cost Markov chains.

The stationary distribution of a recurrent class is computed with the
Grassmann-Taksar-Heyman elimination, which needs no subtraction and so runs
unchanged on exact fractions or on floats.
"""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InternalConsistencyError, MultichainError
from .model import INFINITY, normalize_automaton
from .product import CostMarkovChain, build_satisfaction_chain, build_value_chain

DEFAULT_EXACT_THRESHOLD = 2000
EXACT_THRESHOLD_ENV = "RATIOSYNTH_EXACT_THRESHOLD"


def exact_threshold() -> int:
    raw = os.environ.get(EXACT_THRESHOLD_ENV)
    return int(raw) if raw else DEFAULT_EXACT_THRESHOLD


@dataclass(frozen=True)
class ChainStructure:
    recurrent_classes: tuple[frozenset, ...]
    transient: frozenset

    @property
    def unichain(self) -> bool:
        return len(self.recurrent_classes) == 1


@dataclass(frozen=True)
class CesaroDistribution:
    weights: dict
    exact: bool


def strongly_connected_components(nodes, succ):
    """Tarjan's algorithm without recursion; components in reverse topological order."""
    index, low = {}, {}
    on_stack = set()
    stack, comps = [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    low[work[-1][0]] = min(low[work[-1][0]], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(frozenset(comp))
    return comps


def bottom_components(nodes, succ):
    comps = strongly_connected_components(nodes, succ)
    return [c for c in comps if all(t in c for s in c for t in succ(s))]


def classify(chain: CostMarkovChain) -> ChainStructure:
    def succ(s):
        return [t for t, p in chain.trans[s].items() if p > 0]

    order = {s: i for i, s in enumerate(chain.states)}
    bottoms = bottom_components(chain.states, succ)
    bottoms.sort(key=lambda c: min(order[s] for s in c))
    recurrent = frozenset().union(*bottoms) if bottoms else frozenset()
    return ChainStructure(tuple(bottoms), frozenset(chain.states) - recurrent)


def _gth(P):
    """Stationary vector of an irreducible row-stochastic matrix (list of lists or ndarray)."""
    n = len(P)
    if isinstance(P, np.ndarray):
        P = P.astype(float)
        for k in range(n - 1, 0, -1):
            s = P[k, :k].sum()
            P[:k, k] /= s
            P[:k, :k] += np.outer(P[:k, k], P[k, :k])
        pi = np.zeros(n)
        pi[0] = 1.0
        for k in range(1, n):
            pi[k] = pi[:k] @ P[:k, k]
        return pi / pi.sum()
    P = [row[:] for row in P]
    for k in range(n - 1, 0, -1):
        s = sum(P[k][:k])
        for i in range(k):
            P[i][k] /= s
        for i in range(k):
            f = P[i][k]
            if f:
                row_i, row_k = P[i], P[k]
                for j in range(k):
                    if row_k[j]:
                        row_i[j] += f * row_k[j]
    pi = [Fraction(1)] + [Fraction(0)] * (n - 1)
    for k in range(1, n):
        pi[k] = sum(pi[i] * P[i][k] for i in range(k))
    total = sum(pi)
    return [p / total for p in pi]


def _class_distribution(chain, cls, exact):
    members = [s for s in chain.states if s in cls]
    pos = {s: i for i, s in enumerate(members)}
    n = len(members)
    if exact:
        P = [[Fraction(0)] * n for _ in range(n)]
        for s in members:
            for t, p in chain.trans[s].items():
                P[pos[s]][pos[t]] += Fraction(p)
    else:
        P = np.zeros((n, n))
        for s in members:
            for t, p in chain.trans[s].items():
                P[pos[s], pos[t]] += float(p)
    pi = _gth(P)
    return {s: pi[pos[s]] for s in members}


def cesaro_limit(chain: CostMarkovChain, threshold: int | None = None) -> CesaroDistribution:
    """Long-run state occupation of a unichain chain (zero on transient states).

    Exact rational arithmetic is used up to ``threshold`` recurrent states,
    floats beyond.
    """
    structure = classify(chain)
    if not structure.unichain:
        raise MultichainError(
            f"chain has {len(structure.recurrent_classes)} recurrent classes", structure)
    if threshold is None:
        threshold = exact_threshold()
    cls = structure.recurrent_classes[0]
    exact = len(cls) <= threshold
    pi = _class_distribution(chain, cls, exact)
    zero = Fraction(0) if exact else 0.0
    return CesaroDistribution({s: pi.get(s, zero) for s in chain.states}, exact)


def _ratio_on_class(chain, cls, weights):
    # zero numerator dominates; zero denominator with positive numerator diverges
    if all(chain.cost1[s] == 0 for s in cls):
        return Fraction(0)
    if all(chain.cost2[s] == 0 for s in cls):
        return INFINITY
    num = sum(weights[s] * chain.cost1[s] for s in cls)
    den = sum(weights[s] * chain.cost2[s] for s in cls)
    return num / den


def expected_ratio(chain: CostMarkovChain, threshold: int | None = None):
    """Expected long-run ratio payoff of a unichain chain.

    Fraction in exact mode, float otherwise, or INFINITY.
    """
    dist = cesaro_limit(chain, threshold)
    cls = classify(chain).recurrent_classes[0]
    if not dist.exact:
        chain = CostMarkovChain(chain.states, chain.initial, chain.trans,
                                {s: float(c) for s, c in chain.cost1.items()},
                                {s: float(c) for s, c in chain.cost2.items()})
    return _ratio_on_class(chain, cls, dist.weights)


def class_values(chain: CostMarkovChain, threshold: int | None = None):
    """Ratio value of each recurrent class, as ``[(class, value), ...]``.

    Every recurrent class of a chain built from reachable states is entered
    with positive probability, so the chain's expected value is 0 iff every
    class value is 0, unichain or not.
    """
    if threshold is None:
        threshold = exact_threshold()
    out = []
    for cls in classify(chain).recurrent_classes:
        exact = len(cls) <= threshold
        weights = _class_distribution(chain, cls, exact)
        out.append((cls, _ratio_on_class(chain, cls, weights)))
    return out


def reaches_unsafe(chain: CostMarkovChain, qual) -> bool:
    """Plain graph search for a reachable product state with an unsafe automaton state."""
    qual = normalize_automaton(qual)
    seen = {chain.initial}
    queue = deque([chain.initial])
    while queue:
        s = queue.popleft()
        if s[1] not in qual.safe:
            return True
        for t, p in chain.trans[s].items():
            if p > 0 and t not in seen:
                seen.add(t)
                queue.append(t)
    return False


def check_satisfaction(sys, qual, env) -> bool:
    """True iff ``sys`` satisfies ``qual`` with probability 1 under ``env``.

    Decided by the ratio value of the satisfaction chain being 0 and
    cross-checked against plain reachability of unsafe product states.
    """
    chain = build_satisfaction_chain(sys, qual, env)
    by_value = all(v == 0 for _, v in class_values(chain))
    by_reach = not reaches_unsafe(chain, qual)
    if by_value != by_reach:
        raise InternalConsistencyError(
            f"ratio-zero test says {by_value}, unsafe reachability says {by_reach}")
    return by_value


def system_value(sys, qual, quant, env, threshold: int | None = None):
    """Value of ``sys``: INFINITY unless it satisfies ``qual`` almost surely."""
    if not check_satisfaction(sys, qual, env):
        return INFINITY
    return expected_ratio(build_value_chain(sys, quant, env), threshold)
