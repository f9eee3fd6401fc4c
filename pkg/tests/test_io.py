import random

import pytest
from hypothesis import given

from gen import random_automaton, random_environment, random_system, seeds
from ratiosynth import corpus, io
from ratiosynth.errors import ModelParseError
from ratiosynth.model import CostAutomaton, LabeledMDP, validate

MUTEX_LIKE = """\
model automaton demo
input bits r
output bits a b
states q0 q1
initial q0
safe q0
transitions
  q0 --!a--> q0
  q0 --a & !b/1,0--> q0
  q0 --a b--> q1
  q1 --*--> q1
"""


def test_patterns_expand_to_explicit_letters():
    aut = io.loads(MUTEX_LIKE)
    assert isinstance(aut, CostAutomaton)
    # joint letter index = l * 4 + a, outputs ordered (a, b) most significant first
    assert aut.delta["q0"] == ("q0", "q0", "q0", "q1") * 2
    assert aut.cost1["q0"] == (0, 0, 1, 0) * 2
    assert aut.safe == frozenset({"q0"})


def test_safe_defaults_to_all_states():
    aut = io.loads(MUTEX_LIKE.replace("safe q0\n", ""))
    assert aut.safe == frozenset({"q0", "q1"})


def test_conflicting_overlap_is_rejected_with_location():
    text = MUTEX_LIKE.replace("  q0 --a b--> q1\n", "  q0 --a b--> q1\n  q0 --b--> q0\n")
    with pytest.raises(ModelParseError, match="pattern conflict") as info:
        io.loads(text, source="demo.aut")
    assert info.value.line == 11
    assert str(info.value).startswith("demo.aut:11:")


def test_agreeing_overlap_is_accepted():
    text = MUTEX_LIKE + "  q0 --!a !b--> q0\n"
    assert io.loads(text) == io.loads(MUTEX_LIKE)


@pytest.mark.parametrize("bad, needle", [
    ("initial q7", "initial must name"),
    ("states q0 q0", "duplicate state"),
    ("model gizmo", "model kind"),
    ("input nibbles r", "alphabet must be declared"),
])
def test_header_errors(bad, needle):
    key = bad.split()[0]
    lines = [bad if line.split()[:1] == [key] else line for line in MUTEX_LIKE.splitlines()]
    with pytest.raises(ModelParseError, match=needle):
        io.loads("\n".join(lines))


def test_unknown_literal_reports_column():
    text = MUTEX_LIKE.replace("q0 --!a--> q0", "q0 --!zz--> q0")
    with pytest.raises(ModelParseError, match="unknown literal") as info:
        io.loads(text)
    assert info.value.line == 8 and info.value.column is not None


def test_probability_above_one_parses_but_fails_validation():
    text = """\
model mdp m
input bits r
output bits a
states s t
initial s
labels
  s: !r
  t: r
transitions
  s --*--> {s: 9/8}
  t --*--> {s: 1/2, t: 1/2}
"""
    mdp = io.loads(text)
    assert isinstance(mdp, LabeledMDP)
    assert {v.invariant for v in validate(mdp)} == {"distribution mass ≠ 1"}


@pytest.mark.parametrize("name", corpus.FILES)
def test_corpus_round_trip(name):
    model = corpus.load(name)
    again = io.loads(io.dumps(model))
    assert again == model
    assert io.dumps(again) == io.dumps(model)


@given(seeds)
def test_random_models_round_trip(seed):
    rnd = random.Random(seed)
    for model in (random_automaton(rnd), random_environment(rnd), random_system(rnd)):
        assert io.loads(io.dumps(model)) == model


def test_letter_alphabets_round_trip():
    text = """\
model system beeper
input letters quiet loud
output letters off on
states s
initial s
outputs
  s: on
transitions
  s --*--> s
"""
    sys = io.loads(text)
    assert sys.outputs.letters == ("off", "on") and sys.output["s"] == 1
    assert io.loads(io.dumps(sys)) == sys


def test_tuple_states_flatten_to_tokens():
    assert io.state_token(("q0", ("a", "b"))) == "q0|a|b"
    with pytest.raises(ValueError):
        io.state_token("has space")


def test_atomic_write_replaces_whole_file(tmp_path):
    target = tmp_path / "out.sys"
    target.write_text("old contents that are longer than the new ones\n")
    io.dump(corpus.load("server.sys"), target)
    assert io.load(target) == corpus.load("server.sys")
    assert [p.name for p in tmp_path.iterdir()] == ["out.sys"]
