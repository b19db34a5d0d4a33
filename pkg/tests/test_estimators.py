"""Bayes actions, worst-case-regret minimizers, and transports."""

import math
import warnings

import numpy as np
import pytest

from gminimax import (
    DomainError,
    FamilySpec,
    SpecificationError,
    bayes_estimate,
    builtin_family,
    conjugate_prior,
    eta_scale_prgm,
    iprgm_jcp_box,
    make_transform,
    posterior_regret,
    prgm_conjugate_box,
    prgm_from_bounds,
    prior_box,
    transport,
    validate_transform,
)


class TestBayesAction:
    def test_exponential(self, exponential):
        rep = bayes_estimate(exponential, conjugate_prior(exponential, 1.0, 2.0), 2.0)
        assert rep.estimate == pytest.approx(0.5, rel=1e-15)
        assert rep.method == "bayes"
        assert rep.delta_lo == rep.delta_hi == rep.estimate
        assert rep.equalized_regret == 0.0

    def test_normal_flat(self, normal):
        rep = bayes_estimate(normal, conjugate_prior(normal, 0.0, 0.0), 1.7)
        assert rep.estimate == 1.7

    def test_report_serializes(self, exponential):
        rep = bayes_estimate(exponential, conjugate_prior(exponential, 1.0, 2.0), 2.0)
        d = rep.to_json_dict()
        assert set(d) == {"estimate", "delta_lo", "delta_hi",
                          "equalized_regret", "method", "diagnostics"}


class TestWorstCaseBetweenBounds:
    def test_normal_midpoint(self, normal):
        rep = prgm_from_bounds(normal, 0.2, 0.8)
        assert rep.estimate == pytest.approx(0.5, abs=1e-15)
        assert rep.method == "prgm_closed_form"

    def test_exponential_value(self, exponential):
        rep = prgm_from_bounds(exponential, 1.0, 2.0)
        assert rep.estimate == pytest.approx(1.3862943611198906, rel=1e-14)
        # closer to the lower bound than the geometric midpoint: the loss
        # penalizes overestimating the rate less than underestimating it
        assert 1.0 < rep.estimate < 2.0

    def test_binomial_value(self, binomial5):
        rep = prgm_from_bounds(binomial5, -0.5, 0.7)
        assert rep.estimate == pytest.approx(0.0942473188062853, rel=1e-13)
        assert -0.5 < rep.estimate < 0.7

    @pytest.mark.parametrize("name,lo,hi", [
        ("normal", -1.3, 0.4),
        ("exponential", 0.25, 7.0),
        ("binomial_logit(5)", -2.0, 1.5),
        ("poisson", -1.0, 2.0),
    ])
    def test_equalizes_the_two_extreme_regrets(self, name, lo, hi):
        fam = builtin_family(name)
        rep = prgm_from_bounds(fam, lo, hi)
        r_lo = float(posterior_regret(fam, lo, rep.estimate))
        r_hi = float(posterior_regret(fam, hi, rep.estimate))
        assert abs(r_lo - r_hi) <= 1e-10 * max(1.0, rep.equalized_regret)
        assert rep.equalized_regret == pytest.approx(max(r_lo, r_hi), rel=1e-9)

    def test_degenerate_bounds(self, exponential):
        rep = prgm_from_bounds(exponential, 1.5, 1.5)
        assert rep.estimate == 1.5
        assert rep.equalized_regret == 0.0
        assert rep.diagnostics["degenerate"] is True

    def test_out_of_support_bounds(self, exponential):
        with pytest.raises(DomainError):
            prgm_from_bounds(exponential, -1.0, 2.0)

    def test_inverted_bounds(self, exponential):
        with pytest.raises(DomainError):
            prgm_from_bounds(exponential, 2.0, 1.0)

    def test_near_flat_mean_falls_back_to_root_finding(self):
        # A family whose mean barely moves makes the closed form a 0/0;
        # the bisection on the regret gap must take over.
        eps = 1e-15
        flat = FamilySpec(
            name="near_flat",
            support=(-math.inf, math.inf),
            log_norm=lambda th: np.asarray(th, dtype=float)
            - 0.5 * eps * np.square(th),
            mean=lambda th: 1.0 - eps * np.asarray(th, dtype=float),
            mean_deriv=lambda th: np.full_like(np.asarray(th, dtype=float), -eps),
            stat=lambda x: np.asarray(x, dtype=float),
        )
        rep = prgm_from_bounds(flat, 0.0, 1.0)
        assert rep.method == "prgm_root_find"
        assert 0.0 <= rep.estimate <= 1.0


class TestBoxMinimax:
    def test_exponential_box_value(self, exponential):
        box = prior_box(exponential, 1.0, 3.0, 1.0, 2.0)
        rep = prgm_conjugate_box(exponential, box, 2.0)
        assert rep.estimate == pytest.approx(0.7846634024093809, rel=1e-13)
        assert rep.delta_lo == pytest.approx(0.5, rel=1e-15)
        assert rep.delta_hi == pytest.approx(4.0 / 3.0, rel=1e-15)
        assert rep.diagnostics["corner_estimates"] == sorted(
            rep.diagnostics["corner_estimates"]
        )

    def test_normal_sign_flip_box(self, normal):
        """The worst corners depend on the sign of lambda + stat(x); for
        the normal family stat(x) = -x flips which alpha corner wins, so
        all four corners must be inspected, not two."""
        box = prior_box(normal, 1.0, 3.0, -0.5, 0.5)
        for x in (-3.0, -0.1, 0.1, 3.0):
            rep = prgm_conjugate_box(normal, box, x)
            ests = [bayes_estimate(normal, conjugate_prior(normal, a, l), x).estimate
                    for a, l in box.corners()]
            assert rep.delta_lo == pytest.approx(min(ests), rel=1e-14)
            assert rep.delta_hi == pytest.approx(max(ests), rel=1e-14)

    def test_rejects_jcp_box(self, exponential):
        box = prior_box(exponential, 1.0, 3.0, 1.0, 2.0, "jcp")
        with pytest.raises(SpecificationError, match="iprgm"):
            prgm_conjugate_box(exponential, box, 2.0)

    def test_point_box_is_bayes(self, exponential):
        box = prior_box(exponential, 2.0, 2.0, 1.0, 1.0)
        rep = prgm_conjugate_box(exponential, box, 2.0)
        bay = bayes_estimate(exponential, conjugate_prior(exponential, 2.0, 1.0), 2.0)
        assert rep.estimate == pytest.approx(bay.estimate, rel=1e-14)


class TestInvariantBoxMinimax:
    def test_exponential_alpha_box(self, exponential):
        box = prior_box(exponential, 1.0, 3.0, 1.0, 1.0, "jcp")
        rep = iprgm_jcp_box(exponential, box, 2.0)
        # shifted standard box alpha in [0,2]: extremes 1/3 and 1
        assert rep.estimate == pytest.approx(0.5 * math.log(3.0), rel=1e-13)
        assert rep.method == "iprgm"
        assert tuple(rep.diagnostics["jeffreys_shift"]) == (-1.0, 0.0)

    def test_requires_jcp_flavor(self, exponential):
        box = prior_box(exponential, 1.0, 3.0, 1.0, 1.0, "standard")
        with pytest.raises(SpecificationError):
            iprgm_jcp_box(exponential, box, 2.0)


class TestTransformCatalog:
    @pytest.mark.parametrize("spec", [
        "reciprocal", "log", "neg_log_over_a(2)", "neg_log_over_a(-0.5)",
        "affine(2, -1)",
    ])
    def test_monotone_and_invertible_on_positive_support(self, exponential, spec):
        tr = make_transform(spec, exponential)
        validate_transform(tr, exponential)

    def test_logit_to_p(self, binomial5):
        tr = make_transform("logit_to_p", binomial5)
        validate_transform(tr, binomial5)
        assert float(tr.forward(0.0)) == pytest.approx(0.5, rel=1e-15)

    def test_positive_support_required(self, normal):
        with pytest.raises(SpecificationError):
            make_transform("reciprocal", normal)

    def test_unknown_name(self, exponential):
        with pytest.raises(SpecificationError):
            make_transform("sqrt", exponential)

    def test_malformed_arguments(self, exponential):
        with pytest.raises(SpecificationError):
            make_transform("neg_log_over_a()", exponential)
        with pytest.raises(SpecificationError):
            make_transform("affine(0, 1)", exponential)  # not monotone

    def test_transport_warns_off_the_invariant_path(self, exponential):
        box = prior_box(exponential, 1.0, 3.0, 1.0, 2.0)
        rep = prgm_conjugate_box(exponential, box, 2.0)
        tr = make_transform("reciprocal", exponential)
        with pytest.warns(UserWarning, match="invariance"):
            transport(rep, tr)

    def test_transport_silent_for_invariant_estimates(self, exponential):
        box = prior_box(exponential, 1.0, 3.0, 1.0, 1.0, "jcp")
        rep = iprgm_jcp_box(exponential, box, 2.0)
        tr = make_transform("reciprocal", exponential)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            val = transport(rep, tr)
        assert val == pytest.approx(1.0 / rep.estimate, rel=1e-15)


class TestTransformedScaleSolve:
    def test_jcp_route_matches_transport(self, exponential):
        box = prior_box(exponential, 0.5, 2.5, 1.0, 2.0, "jcp")
        tr = make_transform("reciprocal", exponential)
        rep_theta = iprgm_jcp_box(exponential, box, 1.5)
        rep_eta = eta_scale_prgm(exponential, box, 1.5, tr)
        assert rep_eta.estimate == pytest.approx(
            transport(rep_theta, tr), rel=1e-11
        )
        assert rep_eta.diagnostics["scale"] == "eta"

    def test_affine_map_commutes_even_for_standard_boxes(self, normal):
        # Affine maps preserve the conjugate class itself, so even the
        # plain flavor must commute through them.
        box = prior_box(normal, 1.0, 3.0, -0.5, 0.5)
        tr = make_transform("affine(2, -1)", normal)
        rep_theta = prgm_conjugate_box(normal, box, 1.2)
        rep_eta = eta_scale_prgm(normal, box, 1.2, tr)
        assert rep_eta.estimate == pytest.approx(
            2.0 * rep_theta.estimate - 1.0, rel=1e-9
        )

    def test_non_jcp_class_is_not_invariant(self, exponential):
        """Re-eliciting the plain conjugate class on the reciprocal scale
        weights the prior by the Jacobian, which moves the answer by a
        visible amount.  This is the control for the invariance claim."""
        box = prior_box(exponential, 1.5, 3.0, 1.0, 2.0)
        tr = make_transform("reciprocal", exponential)
        rep_theta = prgm_conjugate_box(exponential, box, 2.0)
        rep_eta = eta_scale_prgm(exponential, box, 2.0, tr)
        assert abs(rep_eta.estimate - 1.0 / rep_theta.estimate) > 1e-3
