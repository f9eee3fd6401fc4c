"""Synchronous composition of per-component specifications and environments.

Components are defined over subsets of named bit variables.  The composite
alphabet is the union of the variables in order of first appearance; each
component reads the projection of a composite letter onto its variables.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from .errors import AlphabetMismatch
from .model import Alphabet, CostAutomaton, LabeledMDP


def _merge(alphas):
    names = []
    for alpha in alphas:
        if not alpha.is_bits:
            raise AlphabetMismatch("composition needs bit alphabets")
        names.extend(v for v in alpha.variables if v not in names)
    return Alphabet.from_bits(names)


def _name(parts):
    return ".".join(str(p) for p in parts)


def compose_automata(*automata: CostAutomaton, name: str = "") -> CostAutomaton:
    """Synchronous product; costs add up componentwise, safe iff all components are safe."""
    if not automata:
        raise ValueError("nothing to compose")
    if len(automata) == 1:
        return automata[0]
    inputs = _merge(a.inputs for a in automata)
    outputs = _merge(a.outputs for a in automata)
    n_out = len(outputs)
    n = len(inputs) * n_out
    proj = []
    for j in range(n):
        l, a = divmod(j, n_out)
        proj.append(tuple((inputs.project(l, aut.inputs), outputs.project(a, aut.outputs))
                          for aut in automata))

    init = tuple(a.initial for a in automata)
    order = [init]
    seen = {init}
    delta, cost1, cost2 = {}, {}, {}
    i = 0
    while i < len(order):
        qs = order[i]
        i += 1
        row, r1, r2 = [], [], []
        for j in range(n):
            nxt = []
            c1 = c2 = 0
            for aut, q, (l, a) in zip(automata, qs, proj[j]):
                nxt.append(aut.step(q, l, a))
                d1, d2 = aut.costs(q, l, a)
                c1 += d1
                c2 += d2
            nxt = tuple(nxt)
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
            row.append(nxt)
            r1.append(c1)
            r2.append(c2)
        delta[qs], cost1[qs], cost2[qs] = tuple(row), tuple(r1), tuple(r2)

    key = {qs: _name(qs) for qs in order}
    safe = frozenset(key[qs] for qs in order if all(q in a.safe for a, q in zip(automata, qs)))
    return CostAutomaton(
        inputs, outputs, tuple(key[qs] for qs in order), key[init],
        {key[qs]: tuple(key[t] for t in delta[qs]) for qs in order}, safe,
        {key[qs]: cost1[qs] for qs in order}, {key[qs]: cost2[qs] for qs in order},
        name=name or "x".join(a.name for a in automata),
    )


def compose_environments(*mdps: LabeledMDP, name: str = "") -> LabeledMDP:
    """Independent product of environment MDPs.

    Each component reacts to its projection of the joint action; the joint
    label is the combination of component labels and probabilities multiply.
    """
    if not mdps:
        raise ValueError("nothing to compose")
    if len(mdps) == 1:
        return mdps[0]
    inputs = _merge(m.inputs for m in mdps)
    outputs = _merge(m.outputs for m in mdps)
    init = tuple(m.initial for m in mdps)
    order = [init]
    seen = {init}
    trans = {}
    i = 0
    while i < len(order):
        ms = order[i]
        i += 1
        for a in range(len(outputs)):
            parts = [m.trans[(s, outputs.project(a, m.outputs))].items() for m, s in zip(mdps, ms)]
            dist = {}
            for combo in itertools.product(*parts):
                t = tuple(c[0] for c in combo)
                p = Fraction(1)
                for c in combo:
                    p *= c[1]
                if p == 0:
                    continue
                dist[t] = dist.get(t, Fraction(0)) + p
                if t not in seen:
                    seen.add(t)
                    order.append(t)
            trans[(ms, a)] = dist

    def joint_label(ms):
        assignment = {}
        for m, s in zip(mdps, ms):
            assignment.update(m.inputs.assignment(m.label[s]))
        return inputs.from_assignment(assignment)

    key = {ms: _name(ms) for ms in order}
    return LabeledMDP(
        inputs, outputs, tuple(key[ms] for ms in order), key[init],
        {(key[s], a): {key[t]: p for t, p in d.items()} for (s, a), d in trans.items()},
        {key[ms]: joint_label(ms) for ms in order},
        name=name or "x".join(m.name for m in mdps),
    )
