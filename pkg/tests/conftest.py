import pytest

from hilsim.bench import Bench, BenchConfig


@pytest.fixture
def bench():
    return Bench(BenchConfig(seed=7))


def make_bench(**kwargs) -> Bench:
    return Bench(BenchConfig(**kwargs))
