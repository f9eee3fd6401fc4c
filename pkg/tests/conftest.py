import pytest
from hypothesis import HealthCheck, settings

from ratiosynth.corpus import benchmark as _benchmark
from ratiosynth.product import build_synthesis_mdp, prune_unsafe

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=100,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def bench():
    return _benchmark()


@pytest.fixture(scope="session")
def bench_mdp(bench):
    return prune_unsafe(build_synthesis_mdp(bench.qual, bench.quant, bench.env))
