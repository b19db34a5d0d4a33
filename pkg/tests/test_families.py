"""Mean function, Fisher information, inversion, and self-validation."""

import dataclasses
import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import assume, given, settings

from gminimax import (
    DomainError,
    SpecificationError,
    builtin_family,
    fisher_info,
    jeffreys_shift_residual,
    mean_inverse,
    support_grid,
    validate_family,
)
from gminimax.families import require_in_support


class TestBuiltinLookup:
    def test_aliases(self):
        assert builtin_family("normal").name == "normal_mean_unitvar"
        assert builtin_family("exponential").name == "exponential_rate"
        assert builtin_family("poisson").name == "poisson_neglograte"
        assert builtin_family("binomial(7)").name == "binomial_logit(7)"
        assert builtin_family("Binomial_Logit( n = 3 )").name == "binomial_logit(3)"

    def test_binomial_needs_trial_count(self):
        with pytest.raises(SpecificationError, match="trial count"):
            builtin_family("binomial")

    def test_unknown_name(self):
        with pytest.raises(SpecificationError, match="unknown family"):
            builtin_family("cauchy")

    def test_binomial_records_n(self, binomial5):
        assert binomial5.meta["n"] == 5
        assert binomial5.obs_units == 5.0


class TestMeanFunction:
    def test_normal_values(self, normal):
        assert float(normal.mean(2.0)) == -2.0
        assert mean_inverse(normal, -2.0) == 2.0
        assert mean_inverse(normal, -3.7) == 3.7

    def test_exponential_inverse(self, exponential):
        assert mean_inverse(exponential, 0.5) == pytest.approx(2.0, rel=1e-14)

    def test_binomial_inverse_analytic(self, binomial5):
        # n/(1 + e^theta) = 2.5 at theta = 0
        assert mean_inverse(binomial5, 2.5) == pytest.approx(0.0, abs=1e-12)

    def test_binomial_inverse_bisection(self, binomial5):
        # Strip the analytic inverse so the bracketing bisection path is
        # what actually solves it.
        numeric = dataclasses.replace(binomial5, mean_inv=None)
        assert mean_inverse(numeric, 2.5) == pytest.approx(0.0, abs=1e-10)
        for t in (0.3, 1.9, 4.4):
            got = mean_inverse(numeric, t)
            assert float(binomial5.mean(got)) == pytest.approx(t, rel=1e-10)

    def test_inverse_rejects_out_of_range(self, binomial5):
        with pytest.raises(DomainError):
            mean_inverse(binomial5, 5.0)  # open upper endpoint
        with pytest.raises(DomainError):
            mean_inverse(binomial5, -0.2)

    def test_exponential_inverse_rejects_nonpositive(self, exponential):
        with pytest.raises(DomainError):
            mean_inverse(exponential, 0.0)

    @given(st.floats(-30.0, 30.0))
    @settings(max_examples=200, deadline=None)
    def test_normal_roundtrip(self, theta):
        fam = builtin_family("normal")
        assert mean_inverse(fam, float(fam.mean(theta))) == pytest.approx(
            theta, abs=1e-12
        )

    @given(st.floats(1e-3, 1e3))
    @settings(max_examples=200, deadline=None)
    def test_exponential_roundtrip(self, theta):
        fam = builtin_family("exponential")
        got = mean_inverse(fam, float(fam.mean(theta)))
        assert got == pytest.approx(theta, rel=1e-11)

    @given(st.floats(-20.0, 20.0), st.floats(-20.0, 20.0))
    @settings(max_examples=200, deadline=None)
    def test_mean_strictly_decreasing(self, a, b):
        fam = builtin_family("binomial_logit(5)")
        assume(abs(a - b) > 1e-6)
        lo, hi = min(a, b), max(a, b)
        assert float(fam.mean(lo)) > float(fam.mean(hi))


class TestFisherInformation:
    def test_normal_constant(self, normal):
        assert fisher_info(normal, 1.3) == 1.0

    def test_exponential_value_and_fd(self, exponential):
        assert fisher_info(exponential, 2.0) == pytest.approx(0.25, rel=1e-14)
        h = 1e-5
        fd = (float(exponential.mean(2.0 - h)) - float(exponential.mean(2.0 + h))) / (2 * h)
        assert fisher_info(exponential, 2.0) == pytest.approx(fd, rel=1e-8)

    def test_positive_everywhere(self, poisson):
        for th in support_grid(poisson, n=41):
            assert fisher_info(poisson, float(th)) > 0.0


class TestValidation:
    @pytest.mark.parametrize("name", [
        "normal", "exponential", "binomial_logit(1)", "binomial_logit(5)",
        "binomial_logit(20)", "poisson",
    ])
    def test_builtins_validate_clean(self, name):
        assert validate_family(builtin_family(name)) == []

    def test_shift_residual_small(self):
        for name in ("normal", "exponential", "binomial_logit(5)", "poisson"):
            fam = builtin_family(name)
            assert jeffreys_shift_residual(fam) <= 1e-8

    def test_wrong_shift_is_detected(self, exponential):
        broken = dataclasses.replace(exponential, jeffreys_shift=(-1.0, 0.25))
        problems = validate_family(broken)
        assert any("shift" in p for p in problems)

    def test_inconsistent_mean_is_detected(self, exponential):
        broken = dataclasses.replace(exponential, mean=lambda th: 1.0 / np.asarray(th) + 0.05)
        assert validate_family(broken) != []


def test_support_grid_stays_interior(exponential, normal):
    g = support_grid(exponential, n=101)
    assert g.shape == (101,)
    assert np.all(g > 0.0)
    g2 = support_grid(normal, n=51, cap=8.0)
    assert g2.min() >= -8.0 and g2.max() <= 8.0


def test_require_in_support(exponential):
    require_in_support(exponential, 1.0)
    with pytest.raises(DomainError):
        require_in_support(exponential, -1.0)
    with pytest.raises(DomainError):
        require_in_support(exponential, float("nan"))
