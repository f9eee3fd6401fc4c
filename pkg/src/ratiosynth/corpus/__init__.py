"""Bundled two-client server benchmark.

``mutex.aut`` is the qualitative specification, ``client{1,2}_cost.aut`` the
per-client ratio automata and ``client{1,2}.mdp`` the per-client environment
models; ``server.sys`` is a hand-written mutual-exclusion server.
"""
from dataclasses import dataclass
from importlib import resources

from .. import io
from ..compose import compose_automata, compose_environments

FILES = ("mutex.aut", "client1_cost.aut", "client2_cost.aut",
         "client1.mdp", "client2.mdp", "server.sys")


def path(name: str):
    return resources.files(__name__).joinpath(name)


def load(name: str):
    return io.loads(path(name).read_text(encoding="utf-8"), source=name)


@dataclass(frozen=True)
class Benchmark:
    qual: object
    quant: object
    env: object
    server: object


def benchmark() -> Benchmark:
    """Composed two-client instance (quantitative automaton and environment)."""
    quant = compose_automata(load("client1_cost.aut"), load("client2_cost.aut"), name="cost")
    env = compose_environments(load("client1.mdp"), load("client2.mdp"), name="clients")
    return Benchmark(load("mutex.aut"), quant, env, load("server.sys"))
