"""Line-oriented text format for automata, environment MDPs and systems.

A file starts with ``model automaton|mdp|system [name]`` followed by header
lines and blocks::

    model automaton mutex
    input bits r1 r2            # or: input letters idle busy
    output bits a1 a2
    states q0 q1
    initial q0
    safe q0                     # automata only; omitted means all safe
    transitions
      q0 --!a1--> q0            # automaton: q --pattern[/c1,c2]--> q'
      q0 --a1 a2/0,0--> q1
      q1 --*--> q1

MDP files add a ``labels`` block (``s: pattern``) and use
``s --action-pattern--> {t: 1/2, u: 1/2}`` transitions.  System files add an
``outputs`` block (``m: pattern``) and use ``m --input-pattern--> m'``.

A pattern is a conjunction of literals separated by blanks, commas or ``&``:
``x``/``x=1`` and ``!x``/``~x``/``x=0`` for bit variables, a letter name for
enumerated alphabets, and ``*`` for "anything".  Patterns may overlap only if
they agree on the result.
"""
from __future__ import annotations

import os
import re
import tempfile
from fractions import Fraction

from .errors import ModelParseError
from .model import Alphabet, CostAutomaton, FiniteStateSystem, LabeledMDP

KINDS = ("automaton", "mdp", "system")
_HEADERS = ("model", "input", "output", "states", "initial", "safe")
_BLOCKS = ("labels", "outputs", "transitions")
_TRANSITION = re.compile(r"^(?P<src>\S+)\s*--(?P<pat>.*?)-->\s*(?P<rest>.*)$")
_BAD_TOKEN = re.compile(r"[\s:{},]|--")


class _Line:
    def __init__(self, text, number, source):
        self.text = text
        self.number = number
        self.source = source

    def error(self, message, token=None):
        col = None
        if token:
            idx = self.text.find(token)
            col = idx + 1 if idx >= 0 else None
        return ModelParseError(message, self.number, col, self.source)


def _strip(raw):
    i = raw.find("#")
    return (raw if i < 0 else raw[:i]).rstrip()


def loads(text: str, source: str | None = None):
    """Parse a model file's text into a CostAutomaton, LabeledMDP or FiniteStateSystem."""
    headers = {}
    blocks = {b: [] for b in _BLOCKS}
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        body = _strip(raw)
        if not body.strip():
            continue
        line = _Line(body, number, source)
        words = body.split()
        key = words[0]
        if key in _BLOCKS and len(words) == 1:
            current = key
            continue
        if key in _HEADERS and "-->" not in body and ":" not in body:
            if key in headers:
                raise line.error(f"duplicate '{key}' line", key)
            headers[key] = (line, words[1:])
            current = None
            continue
        if current is None:
            raise line.error(f"unexpected line outside a block: {body.strip()!r}", key)
        blocks[current].append(line)

    if "model" not in headers:
        raise ModelParseError("missing 'model' line", source=source)
    mline, margs = headers["model"]
    if not margs or margs[0] not in KINDS:
        raise mline.error(f"model kind must be one of {', '.join(KINDS)}", margs[0] if margs else None)
    kind = margs[0]
    name = margs[1] if len(margs) > 1 else ""
    for required in ("input", "output", "states", "initial"):
        if required not in headers:
            raise ModelParseError(f"missing '{required}' line", source=source)
    inputs = _alphabet(*headers["input"])
    outputs = _alphabet(*headers["output"])
    overlap = set(_symbols(inputs)) & set(_symbols(outputs))
    if overlap:
        raise headers["output"][0].error(f"names used on both sides: {sorted(overlap)}")
    sline, states = headers["states"]
    if not states:
        raise sline.error("no states declared")
    for s in states:
        if _BAD_TOKEN.search(s):
            raise sline.error(f"bad state name {s!r}", s)
    if len(set(states)) != len(states):
        raise sline.error("duplicate state name")
    iline, iargs = headers["initial"]
    if len(iargs) != 1 or iargs[0] not in states:
        raise iline.error("initial must name exactly one declared state", iargs[0] if iargs else None)
    ctx = _Context(inputs, outputs, tuple(states))

    if kind == "automaton":
        for b in ("labels", "outputs"):
            if blocks[b]:
                raise blocks[b][0].error(f"'{b}' block not allowed in an automaton")
        return _parse_automaton(ctx, iargs[0], headers.get("safe"), blocks["transitions"], name)
    if "safe" in headers:
        raise headers["safe"][0].error(f"'safe' not allowed in a {kind}")
    if kind == "mdp":
        if blocks["outputs"]:
            raise blocks["outputs"][0].error("'outputs' block not allowed in an mdp")
        return _parse_mdp(ctx, iargs[0], blocks["labels"], blocks["transitions"], name)
    if blocks["labels"]:
        raise blocks["labels"][0].error("'labels' block not allowed in a system")
    return _parse_system(ctx, iargs[0], blocks["outputs"], blocks["transitions"], name)


def load(path):
    with open(path, encoding="utf-8") as f:
        return loads(f.read(), source=str(path))


def _alphabet(line, args):
    if not args or args[0] not in ("bits", "letters"):
        raise line.error("alphabet must be declared as 'bits ...' or 'letters ...'")
    names = args[1:]
    for n in names:
        if _BAD_TOKEN.search(n) or n in ("*", "true", "1") or n[0] in "!~" or "=" in n:
            raise line.error(f"bad alphabet name {n!r}", n)
    try:
        if args[0] == "bits":
            return Alphabet.from_bits(names)
        return Alphabet.from_letters(names)
    except ValueError as e:
        raise line.error(str(e)) from None


def _symbols(alpha: Alphabet):
    return alpha.variables if alpha.is_bits else alpha.letters


class _Context:
    def __init__(self, inputs, outputs, states):
        self.inputs = inputs
        self.outputs = outputs
        self.states = states

    def state(self, line, token):
        if token not in self.states:
            raise line.error(f"unknown state {token!r}", token)
        return token

    def pattern(self, line, text, sides=("input", "output")):
        """Return (input letters, output letters) matched by a pattern."""
        allowed = {"input": set(range(len(self.inputs))), "output": set(range(len(self.outputs)))}
        tokens = [t for t in re.split(r"[\s,&]+", text.strip()) if t]
        if not tokens:
            raise line.error("empty pattern")
        for tok in tokens:
            if tok in ("*", "true", "1"):
                continue
            side, match = self._literal(line, tok)
            if side not in sides:
                raise line.error(f"{side} literal {tok!r} not allowed here", tok)
            allowed[side] &= match
        if not allowed["input"] or not allowed["output"]:
            raise line.error(f"pattern {text.strip()!r} matches no letter")
        return sorted(allowed["input"]), sorted(allowed["output"])

    def _literal(self, line, tok):
        value = 1
        name = tok
        if tok[0] in "!~":
            value, name = 0, tok[1:]
        elif tok.endswith("=0") or tok.endswith("=1"):
            value, name = int(tok[-1]), tok[:-2]
        for side, alpha in (("input", self.inputs), ("output", self.outputs)):
            if alpha.is_bits and name in alpha.variables:
                k = alpha.variables.index(name)
                return side, {i for i in range(len(alpha)) if alpha.bits(i)[k] == value}
            if not alpha.is_bits and name in alpha.letters:
                if value != 1:
                    raise line.error(f"cannot negate letter {name!r}", tok)
                return side, {alpha.letters.index(name)}
        raise line.error(f"unknown literal {tok!r}", tok)


def _parse_automaton(ctx, initial, safe_header, lines, name):
    n_out = len(ctx.outputs)
    n = len(ctx.inputs) * n_out
    table = {q: [None] * n for q in ctx.states}
    for line in lines:
        m = _TRANSITION.match(line.text.strip())
        if not m:
            raise line.error("expected 'q --pattern[/c1,c2]--> q2'")
        src = ctx.state(line, m["src"])
        dst = ctx.state(line, m["rest"].strip())
        pat, costs = m["pat"], (0, 0)
        if "/" in pat:
            pat, ctext = pat.rsplit("/", 1)
            parts = ctext.split(",")
            try:
                costs = tuple(int(p) for p in parts)
            except ValueError:
                raise line.error(f"bad cost pair {ctext!r}", ctext) from None
            if len(costs) != 2 or min(costs) < 0:
                raise line.error(f"cost pair must be two nonnegative integers: {ctext!r}", ctext)
        ls, as_ = ctx.pattern(line, pat)
        for l in ls:
            for a in as_:
                j = l * n_out + a
                entry = (dst, costs[0], costs[1])
                if table[src][j] is not None and table[src][j] != entry:
                    raise line.error(
                        f"pattern conflict: {src} on {ctx.inputs.letters[l]}|{ctx.outputs.letters[a]} "
                        f"already maps to {table[src][j]}", m["pat"].strip())
                table[src][j] = entry
    if safe_header is None:
        safe = frozenset(ctx.states)
    else:
        sline, sargs = safe_header
        safe = frozenset(ctx.state(sline, s) for s in sargs)
    delta = {q: tuple(e[0] if e else None for e in row) for q, row in table.items()}
    cost1 = {q: tuple(e[1] if e else 0 for e in row) for q, row in table.items()}
    cost2 = {q: tuple(e[2] if e else 0 for e in row) for q, row in table.items()}
    return CostAutomaton(ctx.inputs, ctx.outputs, ctx.states, initial, delta, safe, cost1, cost2, name=name)


def _parse_label_block(ctx, lines, side):
    result = {}
    alpha = ctx.inputs if side == "input" else ctx.outputs
    for line in lines:
        left, sep, right = line.text.strip().partition(":")
        if not sep:
            raise line.error("expected 'state: pattern'")
        s = ctx.state(line, left.strip())
        if s in result:
            raise line.error(f"duplicate entry for {s!r}", s)
        ls, as_ = ctx.pattern(line, right, sides=(side,))
        match = ls if side == "input" else as_
        if len(match) != 1:
            raise line.error(f"pattern must identify exactly one {side} letter, "
                             f"matches {len(match)} of {len(alpha)}", right.strip())
        result[s] = match[0]
    return result


def _parse_distribution(line, ctx, text):
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise line.error("expected a distribution '{state: prob, ...}'", text[:1] or None)
    dist = {}
    inner = text[1:-1].strip()
    if not inner:
        raise line.error("empty distribution")
    for item in inner.split(","):
        t, sep, p = item.partition(":")
        if not sep:
            raise line.error(f"bad distribution entry {item.strip()!r}", item.strip())
        t = ctx.state(line, t.strip())
        if t in dist:
            raise line.error(f"duplicate successor {t!r}", t)
        try:
            dist[t] = Fraction(p.strip())
        except (ValueError, ZeroDivisionError):
            raise line.error(f"bad probability {p.strip()!r}", p.strip()) from None
    return dist


def _parse_mdp(ctx, initial, label_lines, lines, name):
    label = _parse_label_block(ctx, label_lines, "input")
    trans = {}
    for line in lines:
        m = _TRANSITION.match(line.text.strip())
        if not m:
            raise line.error("expected 's --action-pattern--> {t: p, ...}'")
        src = ctx.state(line, m["src"])
        dist = _parse_distribution(line, ctx, m["rest"])
        _, actions = ctx.pattern(line, m["pat"], sides=("output",))
        for a in actions:
            if (src, a) in trans and trans[(src, a)] != dist:
                raise line.error(f"pattern conflict: {src} --{ctx.outputs.letters[a]}--> "
                                 f"already has a different distribution", m["pat"].strip())
            trans[(src, a)] = dist
    trans = {k: trans[k] for k in sorted(trans, key=lambda k: (ctx.states.index(k[0]), k[1]))}
    return LabeledMDP(ctx.inputs, ctx.outputs, ctx.states, initial, trans, label, name=name)


def _parse_system(ctx, initial, output_lines, lines, name):
    output = _parse_label_block(ctx, output_lines, "output")
    table = {s: [None] * len(ctx.inputs) for s in ctx.states}
    for line in lines:
        m = _TRANSITION.match(line.text.strip())
        if not m:
            raise line.error("expected 'm --input-pattern--> m2'")
        src = ctx.state(line, m["src"])
        dst = ctx.state(line, m["rest"].strip())
        ls, _ = ctx.pattern(line, m["pat"], sides=("input",))
        for l in ls:
            if table[src][l] is not None and table[src][l] != dst:
                raise line.error(f"pattern conflict: {src} on {ctx.inputs.letters[l]} "
                                 f"already goes to {table[src][l]}", m["pat"].strip())
            table[src][l] = dst
    delta = {s: tuple(row) for s, row in table.items()}
    return FiniteStateSystem(ctx.inputs, ctx.outputs, ctx.states, initial, delta, output, name=name)


# -- printing ---------------------------------------------------------------

def state_token(s) -> str:
    """Render a (possibly nested tuple) state id as a single file token."""
    if isinstance(s, tuple):
        return "|".join(state_token(x) for x in s)
    tok = str(s)
    if not tok or _BAD_TOKEN.search(tok):
        raise ValueError(f"state {s!r} has no valid token form")
    return tok


def _alpha_line(key, alpha):
    if alpha.is_bits:
        return " ".join([key, "bits", *alpha.variables])
    return " ".join([key, "letters", *alpha.letters])


def letter_pattern(alpha: Alphabet, i: int) -> str:
    if not alpha.is_bits:
        return alpha.letters[i]
    return " ".join(v if b else f"!{v}" for v, b in zip(alpha.variables, alpha.bits(i)))


def _joint_pattern(inputs, outputs, l, a):
    parts = [p for p in (letter_pattern(inputs, l), letter_pattern(outputs, a)) if p]
    return " ".join(parts) or "*"


def _header(kind, model):
    lines = [f"model {kind} {model.name}".rstrip(),
             _alpha_line("input", model.inputs),
             _alpha_line("output", model.outputs),
             "states " + " ".join(state_token(s) for s in model.states),
             "initial " + state_token(model.initial)]
    return lines


def dumps(model) -> str:
    """Canonical text form; ``loads(dumps(m)) == m`` for models with string state ids."""
    tok = state_token
    if isinstance(model, CostAutomaton):
        lines = _header("automaton", model)
        lines.append("safe " + " ".join(tok(q) for q in model.states if q in model.safe))
        lines.append("transitions")
        n_out = len(model.outputs)
        for q in model.states:
            for j, t in enumerate(model.delta[q]):
                l, a = divmod(j, n_out)
                pat = _joint_pattern(model.inputs, model.outputs, l, a)
                lines.append(f"  {tok(q)} --{pat}/{model.cost1[q][j]},{model.cost2[q][j]}--> {tok(t)}")
    elif isinstance(model, LabeledMDP):
        lines = _header("mdp", model)
        lines.append("labels")
        for s in model.states:
            lines.append(f"  {tok(s)}: {letter_pattern(model.inputs, model.label[s]) or '*'}")
        lines.append("transitions")
        for s in model.states:
            for a in model.enabled(s):
                dist = ", ".join(f"{tok(t)}: {p}" for t, p in model.trans[(s, a)].items())
                lines.append(f"  {tok(s)} --{letter_pattern(model.outputs, a) or '*'}--> {{{dist}}}")
    elif isinstance(model, FiniteStateSystem):
        lines = _header("system", model)
        for note in model.notes:
            lines.insert(1, f"# note: {note}")
        lines.append("outputs")
        for s in model.states:
            lines.append(f"  {tok(s)}: {letter_pattern(model.outputs, model.output[s]) or '*'}")
        lines.append("transitions")
        for s in model.states:
            for l, t in enumerate(model.delta[s]):
                lines.append(f"  {tok(s)} --{letter_pattern(model.inputs, l) or '*'}--> {tok(t)}")
    else:
        raise TypeError(f"cannot print {type(model).__name__}")
    return "\n".join(lines) + "\n"


def atomic_write(path, text: str):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump(model, path):
    atomic_write(path, dumps(model))
