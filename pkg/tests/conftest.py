import pytest

from gminimax import builtin_family


@pytest.fixture(scope="session")
def normal():
    return builtin_family("normal_mean_unitvar")


@pytest.fixture(scope="session")
def exponential():
    return builtin_family("exponential_rate")


@pytest.fixture(scope="session")
def binomial5():
    return builtin_family("binomial_logit(5)")


@pytest.fixture(scope="session")
def poisson():
    return builtin_family("poisson_neglograte")


def rel_err(got: float, want: float) -> float:
    return abs(got - want) / max(1.0, abs(want))
