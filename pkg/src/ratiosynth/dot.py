"""Graphviz renderings of models and synthesis MDPs.

Nodes are numbered in model state order so output is stable.  Parallel
transitions between the same pair of nodes share one edge whose label lists
every letter on it.
"""
from __future__ import annotations

from .io import letter_pattern, state_token
from .model import CostAutomaton, FiniteStateSystem, LabeledMDP
from .product import SynthesisMDP


def _quote(text) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _letter(alpha, i):
    return letter_pattern(alpha, i) or "*"


def _graph(name, nodes, edges):
    """``nodes``: [(state, label, shape)]; ``edges``: {(src, dst): [labels]} in insertion order."""
    ids = {s: f"n{i}" for i, (s, _, _) in enumerate(nodes)}
    out = [f"digraph {_quote(name or 'model')} {{", "  rankdir=LR;"]
    for s, label, shape in nodes:
        out.append(f"  {ids[s]} [label={_quote(label)}, shape={shape}];")
    for (s, t), labels in edges.items():
        out.append(f"  {ids[s]} -> {ids[t]} [label={_quote(chr(10).join(labels))}];")
    out.append("}")
    return "\n".join(out) + "\n"


def _initial_marker(nodes, initial):
    return [(s, ("-> " if s == initial else "") + label, shape) for s, label, shape in nodes]


def to_dot(model) -> str:
    edges = {}
    if isinstance(model, CostAutomaton):
        nodes = [(q, state_token(q), "doublecircle" if q in model.safe else "circle")
                 for q in model.states]
        n_out = len(model.outputs)
        for q in model.states:
            for j, t in enumerate(model.delta[q]):
                l, a = divmod(j, n_out)
                label = f"{_letter(model.inputs, l)} {_letter(model.outputs, a)}".strip()
                edges.setdefault((q, t), []).append(
                    f"{label}/{model.cost1[q][j]},{model.cost2[q][j]}")
    elif isinstance(model, LabeledMDP):
        nodes = [(s, f"{state_token(s)}\n{_letter(model.inputs, model.label[s])}", "box")
                 for s in model.states]
        for s in model.states:
            for a in model.enabled(s):
                for t, p in model.trans[(s, a)].items():
                    edges.setdefault((s, t), []).append(f"{_letter(model.outputs, a)}: {p}")
    elif isinstance(model, FiniteStateSystem):
        nodes = [(s, f"{state_token(s)}\n{_letter(model.outputs, model.output[s])}", "box")
                 for s in model.states]
        for s in model.states:
            for l, t in enumerate(model.delta[s]):
                edges.setdefault((s, t), []).append(_letter(model.inputs, l))
    elif isinstance(model, SynthesisMDP):
        nodes = [(s, state_token(s), "box" if s not in model.unsafe else "octagon")
                 for s in model.states]
        for s in model.states:
            for a in model.enabled[s]:
                for t, p in model.trans[(s, a)].items():
                    c1, c2 = model.edge_costs[(s, a)][t]
                    edges.setdefault((s, t), []).append(
                        f"{_letter(model.actions, a)}: {p} [{c1},{c2}]")
        return _graph("synthesis", _initial_marker(nodes, model.initial), edges)
    else:
        raise TypeError(f"cannot render {type(model).__name__}")
    return _graph(model.name, _initial_marker(nodes, model.initial), edges)
