"""Core domain types: alphabets, cost automata, labeled MDPs and Moore systems.

Letters are small integers indexing into an :class:`Alphabet`.  A joint letter
over ``L x A`` is encoded row-major as ``l * len(A) + a``.  Probabilities are
exact :class:`fractions.Fraction` values throughout the data model.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .errors import ModelError

State = Hashable


@functools.total_ordering
class _Infinity:
    """The distinguished value of the extended non-negative reals.

    Compares greater than every finite number.  No arithmetic is defined on
    purpose: callers have to branch on it explicitly.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __str__(self):
        return "infinity"

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash("ratiosynth.INFINITY")

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def is_infinite(value) -> bool:
    return value is INFINITY


def format_value(value) -> str:
    if value is INFINITY:
        return "infinity"
    return repr(float(value))


@dataclass(frozen=True)
class Alphabet:
    """Enumerated alphabet with a symbolic name per letter.

    Bit alphabets are built from boolean variables; letter ``i`` assigns the
    bits of ``i`` to the variables, first variable most significant, and is
    named like ``"r1=1,r2=0"``.
    """

    letters: tuple[str, ...]
    variables: tuple[str, ...] | None = None

    @classmethod
    def from_bits(cls, variables: Sequence[str]) -> "Alphabet":
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ModelError(f"duplicate variable in {variables}")
        names = tuple(
            ",".join(f"{v}={b}" for v, b in zip(variables, bits))
            for bits in itertools.product((0, 1), repeat=len(variables))
        )
        return cls(names, variables)

    @classmethod
    def from_letters(cls, letters: Sequence[str]) -> "Alphabet":
        letters = tuple(letters)
        if not letters:
            raise ModelError("letter alphabet must not be empty")
        if len(set(letters)) != len(letters):
            raise ModelError(f"duplicate letter in {letters}")
        return cls(letters, None)

    @property
    def is_bits(self) -> bool:
        return self.variables is not None

    def __len__(self):
        return len(self.letters)

    def index(self, letter) -> int:
        if isinstance(letter, int):
            if not 0 <= letter < len(self.letters):
                raise ModelError(f"letter index {letter} out of range")
            return letter
        try:
            return self.letters.index(letter)
        except ValueError:
            raise ModelError(f"unknown letter {letter!r}") from None

    def bits(self, i: int) -> tuple[int, ...]:
        n = len(self.variables)
        return tuple((i >> (n - 1 - k)) & 1 for k in range(n))

    def assignment(self, i: int) -> dict[str, int]:
        return dict(zip(self.variables, self.bits(i)))

    def from_assignment(self, assignment: Mapping[str, int]) -> int:
        i = 0
        for v in self.variables:
            i = (i << 1) | (1 if assignment[v] else 0)
        return i

    def project(self, i: int, sub: "Alphabet") -> int:
        """Index in ``sub`` of letter ``i`` restricted to ``sub``'s variables."""
        return sub.from_assignment(self.assignment(i))


def joint_index(l: int, a: int, n_outputs: int) -> int:
    return l * n_outputs + a


def joint_name(inputs: Alphabet, outputs: Alphabet, j: int) -> str:
    l, a = divmod(j, len(outputs))
    return f"{inputs.letters[l]}|{outputs.letters[a]}"


@dataclass(frozen=True)
class CostAutomaton:
    """Deterministic safety automaton over ``inputs x outputs`` with two costs.

    ``delta[q]``, ``cost1[q]`` and ``cost2[q]`` are tuples indexed by joint
    letter.
    """

    inputs: Alphabet
    outputs: Alphabet
    states: tuple
    initial: State
    delta: Mapping[State, tuple]
    safe: frozenset
    cost1: Mapping[State, tuple]
    cost2: Mapping[State, tuple]
    name: str = field(default="", compare=False)

    @property
    def n_letters(self) -> int:
        return len(self.inputs) * len(self.outputs)

    def step(self, q, l: int, a: int):
        return self.delta[q][joint_index(l, a, len(self.outputs))]

    def costs(self, q, l: int, a: int) -> tuple[int, int]:
        j = joint_index(l, a, len(self.outputs))
        return self.cost1[q][j], self.cost2[q][j]

    def unsafe_closed(self) -> bool:
        return all(
            t not in self.safe
            for q in self.states
            if q not in self.safe
            for t in self.delta[q]
        )


@dataclass(frozen=True)
class LabeledMDP:
    """Environment model: MDP whose states carry letters of ``inputs``.

    Actions are the letters of ``outputs``.  ``trans[(s, a)]`` maps successors
    to exact probabilities; a missing key means action ``a`` is not enabled.
    """

    inputs: Alphabet
    outputs: Alphabet
    states: tuple
    initial: State
    trans: Mapping[tuple, Mapping[State, Fraction]]
    label: Mapping[State, int]
    name: str = field(default="", compare=False)

    def enabled(self, s) -> tuple[int, ...]:
        return tuple(a for a in range(len(self.outputs)) if (s, a) in self.trans)


@dataclass(frozen=True)
class FiniteStateSystem:
    """Moore machine reading ``inputs`` and emitting ``outputs``.

    ``delta[s]`` is a tuple of successors indexed by input letter and
    ``output[s]`` is the output letter index of ``s``.
    """

    inputs: Alphabet
    outputs: Alphabet
    states: tuple
    initial: State
    delta: Mapping[State, tuple]
    output: Mapping[State, int]
    name: str = field(default="", compare=False)
    notes: tuple[str, ...] = field(default=(), compare=False)

    def step(self, s, letter):
        return system_step(self, s, letter)


# A pure memoryless strategy maps each state to an action index.
Strategy = Mapping


@dataclass(frozen=True)
class Violation:
    invariant: str
    element: str

    def __str__(self):
        return f"{self.invariant}: {self.element}"


def system_step(sys: FiniteStateSystem, state, letter) -> tuple:
    """Read one input letter; return the next state and its output letter."""
    if state not in sys.delta:
        raise ModelError(f"unknown system state {state!r}")
    l = sys.inputs.index(letter)
    nxt = sys.delta[state][l]
    return nxt, sys.output[nxt]


def run_system(sys: FiniteStateSystem, word: Sequence) -> list[tuple[int, int]]:
    """Joint input/output word produced by ``sys`` on a finite input word.

    Output ``a_i`` is emitted by the state reached after ``w_0 .. w_{i-1}``,
    so ``a_0`` is the output of the initial state.
    """
    s = sys.initial
    out = []
    for letter in word:
        l = sys.inputs.index(letter)
        out.append((l, sys.output[s]))
        s = sys.delta[s][l]
    return out


def finite_ratio(costs1: Sequence, costs2: Sequence, m: int, l: int) -> Fraction:
    """``sum(c1[m..l]) / (1 + sum(c2[m..l]))`` as an exact rational."""
    if not 0 <= m <= l + 1:
        raise ValueError(f"bad window [{m}, {l}]")
    num = sum((Fraction(c) for c in costs1[m:l + 1]), Fraction(0))
    den = 1 + sum((Fraction(c) for c in costs2[m:l + 1]), Fraction(0))
    return num / den


def normalize_automaton(aut: CostAutomaton, sink="q_bot") -> CostAutomaton:
    """Make the unsafe states closed under the transition function.

    Transitions from an unsafe state back into a safe state are redirected to
    a fresh unsafe sink with zero-cost self-loops; their costs are kept.
    Accepted language is unchanged.  Returns ``aut`` itself when it is
    already closed.
    """
    if aut.unsafe_closed():
        return aut
    while sink in aut.states:
        sink = sink + "'"
    delta = dict(aut.delta)
    for q in aut.states:
        if q in aut.safe:
            continue
        delta[q] = tuple(sink if t in aut.safe else t for t in aut.delta[q])
    n = aut.n_letters
    delta[sink] = (sink,) * n
    cost1 = dict(aut.cost1)
    cost2 = dict(aut.cost2)
    cost1[sink] = (0,) * n
    cost2[sink] = (0,) * n
    return CostAutomaton(
        aut.inputs, aut.outputs, aut.states + (sink,), aut.initial,
        delta, aut.safe, cost1, cost2, name=aut.name,
    )


def validate(model) -> list[Violation]:
    """Check the type invariants of an automaton, MDP or system.

    Violations are returned as data; an empty list means the model is valid.
    """
    if isinstance(model, CostAutomaton):
        return _validate_automaton(model)
    if isinstance(model, LabeledMDP):
        return _validate_mdp(model)
    if isinstance(model, FiniteStateSystem):
        return _validate_system(model)
    raise TypeError(f"cannot validate {type(model).__name__}")


def _check_states(model, out):
    if len(set(model.states)) != len(model.states):
        out.append(Violation("duplicate state", repr(model.states)))
    if model.initial not in model.states:
        out.append(Violation("initial state not declared", repr(model.initial)))


def _validate_automaton(aut: CostAutomaton) -> list[Violation]:
    out = []
    _check_states(aut, out)
    states = set(aut.states)
    for q in aut.safe - states:
        out.append(Violation("safe state not declared", repr(q)))
    n = aut.n_letters
    for q in aut.states:
        row = aut.delta.get(q)
        if row is None or len(row) != n or any(t is None for t in row):
            missing = [joint_name(aut.inputs, aut.outputs, j) for j in range(n)
                       if row is None or j >= len(row) or row[j] is None]
            out.append(Violation("delta not total", f"{q!r} on {', '.join(missing)}"))
            continue
        for j, t in enumerate(row):
            if t not in states:
                out.append(Violation("unknown target state",
                                     f"{q!r} --{joint_name(aut.inputs, aut.outputs, j)}--> {t!r}"))
        for which, table in (("cost1", aut.cost1), ("cost2", aut.cost2)):
            costs = table.get(q)
            if costs is None or len(costs) != n:
                out.append(Violation(f"{which} not total", repr(q)))
                continue
            for j, c in enumerate(costs):
                if not isinstance(c, int) or isinstance(c, bool) or c < 0:
                    out.append(Violation(f"{which} not a nonnegative integer",
                                         f"{q!r} on {joint_name(aut.inputs, aut.outputs, j)}: {c!r}"))
    return out


def _validate_mdp(mdp: LabeledMDP) -> list[Violation]:
    out = []
    _check_states(mdp, out)
    states = set(mdp.states)
    n_actions = len(mdp.outputs)
    for (s, a) in mdp.trans:
        if s not in states:
            out.append(Violation("transition from unknown state", repr(s)))
        if not 0 <= a < n_actions:
            out.append(Violation("unknown action", f"{s!r}, {a!r}"))
    for s in mdp.states:
        lab = mdp.label.get(s)
        if lab is None or not 0 <= lab < len(mdp.inputs):
            out.append(Violation("label missing", repr(s)))
        enabled = mdp.enabled(s)
        if not enabled:
            out.append(Violation("no enabled action", repr(s)))
        elif len(enabled) != n_actions:
            missing = [mdp.outputs.letters[a] for a in range(n_actions) if a not in enabled]
            out.append(Violation("environment action not enabled", f"{s!r}: {', '.join(missing)}"))
        for a in enabled:
            where = f"{s!r} --{mdp.outputs.letters[a]}-->"
            dist = mdp.trans[(s, a)]
            if any(not isinstance(p, Fraction) and not isinstance(p, int) for p in dist.values()):
                out.append(Violation("probability not rational", where))
                continue
            if any(p < 0 for p in dist.values()):
                out.append(Violation("negative probability", where))
            if sum(dist.values(), Fraction(0)) != 1:
                out.append(Violation("distribution mass ≠ 1",
                                     f"{where} sums to {sum(dist.values(), Fraction(0))}"))
            for t in dist:
                if t not in states:
                    out.append(Violation("unknown target state", f"{where} {t!r}"))
            seen = {}
            for t, p in dist.items():
                if p > 0 and t in mdp.label:
                    if mdp.label[t] in seen:
                        out.append(Violation("label-determinism",
                                             f"{where} {seen[mdp.label[t]]!r} and {t!r} share a label"))
                    seen[mdp.label[t]] = t
    return out


def _validate_system(sys: FiniteStateSystem) -> list[Violation]:
    out = []
    _check_states(sys, out)
    states = set(sys.states)
    n = len(sys.inputs)
    for s in sys.states:
        row = sys.delta.get(s)
        if row is None or len(row) != n or any(t is None for t in row):
            out.append(Violation("delta not total", repr(s)))
        else:
            for l, t in enumerate(row):
                if t not in states:
                    out.append(Violation("unknown target state",
                                         f"{s!r} --{sys.inputs.letters[l]}--> {t!r}"))
        a = sys.output.get(s)
        if a is None or not 0 <= a < len(sys.outputs):
            out.append(Violation("output not defined", repr(s)))
    return out
