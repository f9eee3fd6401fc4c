"""Synthesis-MDP size of the bundled benchmark under two product encodings.

``successor``: the package's construction.  The automata read the label of
the environment state reached after the action (Moore timing).

``same-step``: the automata read the label of the current environment state
together with the action, and actions that would leave the safe region of
the qualitative automaton are removed instead of leading to unsafe states.
This is the encoding behind the 24-state / 288-edge reference size.

In the same-step encoding the system answers a request in the step it is
issued (Mealy timing), so its optimum 51/44 is slightly below the 6/5 of the
successor encoding, where an acknowledgment can only follow a request.

    python scripts/size_audit.py
"""
from __future__ import annotations

import argparse
import json

from ratiosynth.corpus import benchmark
from ratiosynth.lfp import solve_lfp
from ratiosynth.model import normalize_automaton
from ratiosynth.product import SynthesisMDP, build_synthesis_mdp, prune_unsafe


def same_step_mdp(qual, quant, env) -> SynthesisMDP:
    qual = normalize_automaton(qual)
    init = (qual.initial, quant.initial, env.initial)
    order, seen = [init], {init}
    enabled, trans, edges = {}, {}, {}
    i = 0
    while i < len(order):
        qq, qn, m = state = order[i]
        i += 1
        l = env.label[m]
        acts = []
        for a in range(len(env.outputs)):
            q2 = qual.step(qq, l, a)
            if q2 not in qual.safe:
                continue
            acts.append(a)
            cost = quant.costs(qn, l, a)
            dist = {}
            for m2, p in env.trans[(m, a)].items():
                t = (q2, quant.step(qn, l, a), m2)
                dist[t] = p
                if t not in seen:
                    seen.add(t)
                    order.append(t)
            trans[(state, a)] = dist
            edges[(state, a)] = {t: cost for t in dist}
        enabled[state] = tuple(acts)
    return SynthesisMDP(env.outputs, tuple(order), init, enabled, trans, edges)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.parse_args(argv)
    b = benchmark()
    full = build_synthesis_mdp(b.qual, b.quant, b.env)
    pruned = prune_unsafe(full)
    same = same_step_mdp(b.qual, b.quant, b.env)
    rows = {
        "successor_unpruned": (len(full.states), full.n_edges, None),
        "successor_pruned": (len(pruned.states), pruned.n_edges, solve_lfp(pruned).exact_value),
        "same_step": (len(same.states), same.n_edges, solve_lfp(same).value),
    }
    out = {k: {"states": s, "edges": e, "value": None if v is None else float(v)}
           for k, (s, e, v) in rows.items()}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
