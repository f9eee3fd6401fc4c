"""Optimal ratio strategies through the occupation-measure fractional program.

Variables are ``x(s, a)`` for every state and enabled action.  The feasible
region is ``sum x = 1`` plus flow balance at each state; the objective is
``sum x*c1 / sum x*c2``.  It is minimized by the Isbell-Marlow (Dinkelbach)
iteration over the parametric LPs ``min sum x*(c1 - g*c2)``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .analysis import bottom_components, cesaro_limit, classify, expected_ratio
from .errors import (InternalConsistencyError, LpNumericalError, MultichainError,
                     MultichainSuspect, NonConvergence)
from .lp import LinearProgram, solve_lp
from .model import INFINITY, is_infinite
from .product import SynthesisMDP, induced_chain, restrict_reachable

TAU_ZERO = 1e-9
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class FractionalProgram:
    variables: tuple            # (state, action) pairs, row-major over states
    num: np.ndarray
    den: np.ndarray
    num_exact: tuple
    den_exact: tuple
    A: np.ndarray               # row 0: normalization, row 1+i: balance of state i
    b: np.ndarray

    @property
    def index(self):
        return {v: i for i, v in enumerate(self.variables)}


@dataclass(frozen=True)
class OccupationMeasure:
    x: dict
    source: str = "lp"

    def vector(self, lfp: FractionalProgram) -> np.ndarray:
        return np.array([float(self.x.get(v, 0.0)) for v in lfp.variables])

    def residual(self, lfp: FractionalProgram) -> float:
        return float(np.abs(lfp.A @ self.vector(lfp) - lfp.b).max())


@dataclass(frozen=True)
class LfpResult:
    value: object               # float, or INFINITY
    exact_value: object         # analytic value of the extracted strategy's chain
    measure: OccupationMeasure
    strategy: dict
    iterations: int = 0
    history: tuple = ()
    lp_optima: tuple = ()
    warnings: tuple = ()
    start_path: str = ""


def build_lfp(mdp: SynthesisMDP) -> FractionalProgram:
    variables = tuple((s, a) for s in mdp.states for a in mdp.enabled[s])
    row = {s: i + 1 for i, s in enumerate(mdp.states)}
    A = np.zeros((1 + len(mdp.states), len(variables)))
    A[0, :] = 1.0
    for j, (s, a) in enumerate(variables):
        A[row[s], j] += 1.0
        for t, p in mdp.trans[(s, a)].items():
            A[row[t], j] -= float(p)
    b = np.zeros(1 + len(mdp.states))
    b[0] = 1.0
    num_exact = tuple(mdp.cost1[v] for v in variables)
    den_exact = tuple(mdp.cost2[v] for v in variables)
    return FractionalProgram(
        variables, np.array([float(c) for c in num_exact]), np.array([float(c) for c in den_exact]),
        num_exact, den_exact, A, b,
    )


def ratio(lfp: FractionalProgram, x: np.ndarray):
    """Objective value at ``x``: 0 if the numerator vanishes, INFINITY if only the denominator does."""
    n = float(lfp.num @ x)
    d = float(lfp.den @ x)
    if n <= ZERO_TOL:
        return 0.0
    if d <= ZERO_TOL:
        return INFINITY
    return n / d


def lowest_index_strategy(mdp: SynthesisMDP) -> dict:
    return {s: min(mdp.enabled[s]) for s in mdp.states}


def _measure_of_chain(mdp, strat, chain):
    dist = cesaro_limit(chain)
    return {(s, strat[s]): w for s, w in dist.weights.items() if w}


def initial_feasible(mdp: SynthesisMDP, lfp: FractionalProgram | None = None,
                     lp_solver=solve_lp) -> OccupationMeasure:
    """A feasible point: the occupation measure of the lowest-index strategy.

    Falls back to a feasibility LP when that strategy's chain is multichain;
    ``source`` records which path produced the point.
    """
    lfp = lfp or build_lfp(mdp)
    strat = lowest_index_strategy(mdp)
    try:
        x = _measure_of_chain(mdp, strat, induced_chain(mdp, strat))
        measure = OccupationMeasure(x, source="lowest-index strategy")
    except MultichainError:
        sol = lp_solver(LinearProgram(np.zeros(len(lfp.variables)), lfp.A, lfp.b))
        if not sol.optimal:
            raise LpNumericalError(f"feasibility LP returned {sol.status.value}", float("nan"))
        measure = OccupationMeasure(dict(zip(lfp.variables, sol.x)), source="feasibility LP")
    res = measure.residual(lfp)
    if res > 1e-8:
        raise InternalConsistencyError(f"initial point violates constraints (residual {res:.3g})")
    return measure


def extract_strategy(measure: OccupationMeasure, mdp: SynthesisMDP, strict: bool = True) -> dict:
    """Pure strategy from an occupation measure.

    Max-``x`` action where the measure is positive, lowest-index safe action
    elsewhere.  If that choice does not lead the run into the support (the
    chain is multichain, or the initial state never reaches the support),
    zero-measure states instead take the lowest-index safe action that moves
    closer to the support.  With ``strict`` a state carrying two positive actions is an
    error.
    """
    strat = {}
    for s in mdp.states:
        acts = mdp.enabled[s]
        xs = [float(measure.x.get((s, a), 0.0)) for a in acts]
        positive = [a for a, v in zip(acts, xs) if v > TAU_ZERO]
        if len(positive) > 1 and strict:
            raise InternalConsistencyError(
                f"measure is not pure at {s!r}: actions {positive} all positive")
        if positive:
            best = max(xs)
            strat[s] = next(a for a, v in zip(acts, xs) if v == best)
    support = set(strat)

    def safe_actions(s):
        acts = [a for a in mdp.enabled[s]
                if all(t not in mdp.unsafe and t in mdp.enabled for t in mdp.trans[(s, a)])]
        return acts or list(mdp.enabled[s])

    plain = dict(strat)
    for s in mdp.states:
        plain.setdefault(s, safe_actions(s)[0])
    if not support:
        return plain
    structure = classify(induced_chain(mdp, plain))
    if structure.unichain and structure.recurrent_classes[0] <= support:
        return plain

    dist = _distance_to(mdp, support, safe_actions)
    for s in mdp.states:
        if s in strat:
            continue
        acts = safe_actions(s)
        if s in dist:
            strat[s] = next(a for a in acts
                            if any(dist.get(t, dist[s]) < dist[s] for t in mdp.trans[(s, a)]))
        else:
            strat[s] = acts[0]
    return strat


def _distance_to(mdp, target, actions) -> dict:
    """Backward BFS distance to ``target`` using ``actions(s)``."""
    preds = {}
    for s in mdp.states:
        for a in actions(s):
            for t in mdp.trans[(s, a)]:
                preds.setdefault(t, set()).add(s)
    dist = {s: 0 for s in target}
    frontier = deque(s for s in mdp.states if s in target)
    while frontier:
        t = frontier.popleft()
        for s in preds.get(t, ()):
            if s not in dist:
                dist[s] = dist[t] + 1
                frontier.append(s)
    return dist


# -- graph analyses ----------------------------------------------------------

def closed_end_set(mdp: SynthesisMDP, keep) -> dict:
    """Largest state set closed under some choice of actions satisfying ``keep(s, a)``.

    Returns ``{state: [actions staying inside]}``; empty when no such set exists.
    """
    acts = {s: [a for a in mdp.enabled[s] if keep(s, a)] for s in mdp.states}
    alive = {s for s, a in acts.items() if a}
    changed = True
    while changed:
        changed = False
        for s in list(alive):
            stay = [a for a in acts[s] if all(t in alive for t in mdp.trans[(s, a)])]
            if len(stay) != len(acts[s]):
                acts[s] = stay
                changed = True
            if not stay:
                alive.discard(s)
    return {s: acts[s] for s in mdp.states if s in alive}


def almost_sure_reach(mdp: SynthesisMDP, target: dict) -> dict | None:
    """Strategy reaching ``target`` with probability 1 and staying there, or None.

    ``target`` maps each target state to its staying actions.
    """
    region = set(mdp.states)
    acts = {s: list(mdp.enabled[s]) for s in mdp.states}
    while True:
        dist = {s: 0 for s in target}
        frontier = deque(target)
        preds = {}
        for s in region:
            for a in acts[s]:
                for t in mdp.trans[(s, a)]:
                    preds.setdefault(t, set()).add(s)
        while frontier:
            t = frontier.popleft()
            for s in preds.get(t, ()):
                if s not in dist:
                    dist[s] = dist[t] + 1
                    frontier.append(s)
        if set(dist) >= region:
            break
        region = set(dist) & region
        # drop actions that can leave the region until stable
        changed = True
        while changed:
            changed = False
            for s in list(region):
                keep = [a for a in acts[s] if all(t in region for t in mdp.trans[(s, a)])]
                if len(keep) != len(acts[s]):
                    acts[s] = keep
                    changed = True
                if not keep:
                    region.discard(s)
                    changed = True
    if mdp.initial not in region:
        return None
    strat = {}
    for s in mdp.states:
        if s in target:
            strat[s] = target[s][0]
        elif s in region:
            strat[s] = next(a for a in acts[s]
                            if any(dist.get(t, 1 << 60) < dist[s] for t in mdp.trans[(s, a)]))
        else:
            strat[s] = min(mdp.enabled[s])
    return strat


def unichain_precheck(mdp: SynthesisMDP):
    """Bottom SCCs of the all-actions graph reachable from the initial state."""
    seen = {mdp.initial}
    queue = deque([mdp.initial])
    while queue:
        s = queue.popleft()
        for t in mdp.successors(s):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    nodes = [s for s in mdp.states if s in seen]
    return bottom_components(nodes, lambda s: sorted(mdp.successors(s), key=nodes.index))


# -- solver ------------------------------------------------------------------

def _measure_or_classes(mdp, strat):
    chain = induced_chain(mdp, strat)
    try:
        return OccupationMeasure(_measure_of_chain(mdp, strat, chain), source="strategy")
    except MultichainError:
        return OccupationMeasure({}, source="strategy (multichain, no single occupation)")


def _finish(mdp, lfp, measure, strat, value, **kw):
    chain = induced_chain(mdp, strat)
    structure = classify(chain)
    if not structure.unichain:
        raise MultichainError(
            f"optimal strategy induces {len(structure.recurrent_classes)} recurrent classes",
            structure)
    exact = expected_ratio(chain)
    if is_infinite(value) or is_infinite(exact):
        if is_infinite(value) != is_infinite(exact):
            raise InternalConsistencyError(f"LP value {value} but strategy value {exact}")
    else:
        if abs(float(exact) - value) > 1e-6 * max(1.0, abs(value)):
            raise InternalConsistencyError(
                f"LP value {value!r} disagrees with strategy value {float(exact)!r}")
    return LfpResult(value, exact, measure, strat, **kw)


def solve_lfp(mdp: SynthesisMDP, eps: float = 1e-9, max_iter: int = 100,
              allow_multichain: bool = False, lp_solver=solve_lp) -> LfpResult:
    """Minimal expected ratio over pure memoryless strategies of ``mdp``.

    ``mdp`` is expected to be pruned.  Raises :class:`MultichainSuspect` if
    the all-actions graph has several reachable bottom SCCs (unless
    ``allow_multichain``), :class:`NonConvergence` at the iteration cap.
    """
    mdp = restrict_reachable(mdp)
    if not allow_multichain:
        bottoms = unichain_precheck(mdp)
        if len(bottoms) > 1:
            raise MultichainSuspect(
                f"MDP graph has {len(bottoms)} bottom components reachable from the initial state",
                bottoms)
    lfp = build_lfp(mdp)
    warnings = []

    # value 0: a c1-free end set reachable almost surely
    zero_set = closed_end_set(mdp, lambda s, a: mdp.cost1[(s, a)] == 0)
    if zero_set:
        strat = almost_sure_reach(mdp, zero_set)
        if strat is not None:
            measure = _measure_or_classes(mdp, strat)
            return _finish(mdp, lfp, measure, strat, 0.0, history=(0.0,),
                           start_path="zero-cost end set")

    if closed_end_set(mdp, lambda s, a: mdp.cost2[(s, a)] == 0):
        warnings.append("some strategies confine the run to zero second-cost states; "
                        "they have infinite value and are avoided")

    best_den = lp_solver(LinearProgram(-lfp.den, lfp.A, lfp.b))
    if not best_den.optimal:
        raise LpNumericalError(f"max-denominator LP returned {best_den.status.value}", float("nan"))
    if -best_den.objective <= ZERO_TOL:
        strat = lowest_index_strategy(mdp)
        measure = _measure_or_classes(mdp, strat)
        warnings.append("every strategy has zero second cost in the long run")
        return _finish(mdp, lfp, measure, strat, INFINITY, warnings=tuple(warnings),
                       start_path="max-denominator LP")

    start = initial_feasible(mdp, lfp, lp_solver)
    x = start.vector(lfp)
    start_path = start.source
    g = ratio(lfp, x)
    if is_infinite(g):
        x = best_den.x
        g = ratio(lfp, x)
        start_path = "max-denominator LP"
        measure = OccupationMeasure(dict(zip(lfp.variables, x)), source=start_path)
    else:
        measure = start
    history, optima = [g], []
    for it in range(1, max_iter + 1):
        sol = lp_solver(LinearProgram(lfp.num - g * lfp.den, lfp.A, lfp.b))
        if not sol.optimal:
            raise LpNumericalError(f"parametric LP returned {sol.status.value}", float("nan"))
        optima.append(sol.objective)
        g_new = ratio(lfp, sol.x)
        improved = g_new <= g
        if improved:
            x = sol.x
            measure = OccupationMeasure(dict(zip(lfp.variables, x)))
        g_next = g_new if improved else g
        history.append(g_next)
        if abs(g - g_next) <= eps * (1 + abs(g_next)) or sol.objective >= -eps * (1 + abs(g)):
            g = g_next
            break
        g = g_next
    else:
        raise NonConvergence(f"no convergence within {max_iter} iterations (g = {g!r})")

    strat = extract_strategy(measure, mdp)
    return _finish(mdp, lfp, measure, strat, g, iterations=it, history=tuple(history),
                   lp_optima=tuple(optima), warnings=tuple(warnings), start_path=start_path)
