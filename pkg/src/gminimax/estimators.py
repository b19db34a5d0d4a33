"""Bayes, posterior-regret box-minimax, and invariant estimators.

The central fact used everywhere: for a conjugate prior box the Bayes
estimates sweep a delta-interval whose endpoints sit at box corners, the
worst-case posterior regret of any action is attained against one of the
two extreme Bayes estimates, and the minimax action equalizes the regret
against those extremes.  With bounds ``d_lo <= d_hi`` the equalizer is

    ( d_hi*mean(d_hi) - d_lo*mean(d_lo)
      - (log_norm(d_hi) - log_norm(d_lo)) ) / (mean(d_hi) - mean(d_lo)),

an interior point of ``[d_lo, d_hi]``.  When the mean values are too
close for that quotient to be trustworthy, a sign-change bisection on
the regret difference replaces it; when the bounds themselves collapse,
the midpoint is the answer by continuity.

The ``jcp`` prior flavor earns its keep here: the class of
sqrt-Fisher-corrected conjugate priors is the same set of measures in
every smooth one-to-one reparameterization, so the box-minimax estimate
of ``h(theta)`` is ``h`` of the box-minimax estimate of ``theta``.
Plain conjugate boxes re-elicited on a transformed scale are a different
class of measures, and their minimax estimate genuinely moves.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError, SpecificationError
from .families import FamilySpec, mean_inverse, require_in_support, support_grid
from .losses import posterior_regret
from .priors import (
    ConjugatePrior,
    PriorBox,
    posterior_predictive_mean,
    predictive_mean_quadrature,
    to_standard,
)

__all__ = [
    "EstimateReport",
    "Reparameterization",
    "bayes_estimate",
    "prgm_from_bounds",
    "prgm_conjugate_box",
    "iprgm_jcp_box",
    "transport",
    "eta_scale_prgm",
    "make_transform",
    "validate_transform",
]

METHOD_BAYES = "bayes"
METHOD_CLOSED = "prgm_closed_form"
METHOD_ROOT = "prgm_root_find"
METHOD_IPRGM = "iprgm"

DEGENERATE_REL_WIDTH = 1e-10
ILL_CONDITIONED_REL = 1e-13
EQUALIZE_TOL = 1e-10


@dataclass(frozen=True)
class EstimateReport:
    """Result of one estimation call.

    ``delta_lo``/``delta_hi`` bracket the Bayes estimates that generated
    the answer (they equal the estimate itself for plain Bayes);
    ``equalized_regret`` is the common worst-case posterior regret at
    the reported estimate (zero for Bayes).
    """

    estimate: float
    delta_lo: float
    delta_hi: float
    equalized_regret: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.delta_lo <= self.delta_hi:
            raise SpecificationError("report needs delta_lo <= delta_hi")

    def to_json_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "delta_lo": self.delta_lo,
            "delta_hi": self.delta_hi,
            "equalized_regret": self.equalized_regret,
            "method": self.method,
            "diagnostics": self.diagnostics,
        }


def bayes_estimate(fam: FamilySpec, prior: ConjugatePrior, x: float) -> EstimateReport:
    """Bayes action under intrinsic loss: invert the mean function at the
    posterior predictive mean."""
    pm = posterior_predictive_mean(fam, prior, x)
    est = mean_inverse(fam, pm)
    return EstimateReport(
        estimate=est,
        delta_lo=est,
        delta_hi=est,
        equalized_regret=0.0,
        method=METHOD_BAYES,
        diagnostics={"flavor": prior.flavor, "posterior_mean": pm},
    )


def _equalizer_root(fam: FamilySpec, d_lo: float, d_hi: float) -> tuple[float, int]:
    """Bisection on regret(hi corner) - regret(lo corner), strictly
    decreasing in delta with a sign change across (d_lo, d_hi)."""

    def gap(d: float) -> float:
        return posterior_regret(fam, d_hi, d) - posterior_regret(fam, d_lo, d)

    a, b = d_lo, d_hi
    ga, gb = gap(a), gap(b)
    if ga < 0 or gb > 0:
        raise ConvergenceError(
            f"regret gap lost its sign change on [{d_lo}, {d_hi}] for "
            f"{fam.name}; the mean function may not be strictly decreasing"
        )
    tol = 1e-15 * max(1.0, abs(d_lo), abs(d_hi))
    it = 0
    while b - a > tol and it < 200:
        mid = 0.5 * (a + b)
        if gap(mid) > 0:
            a = mid
        else:
            b = mid
        it += 1
    return 0.5 * (a + b), it


def prgm_from_bounds(fam: FamilySpec, d_lo: float, d_hi: float) -> EstimateReport:
    """Minimax action against the two extreme Bayes estimates.

    ``d_lo`` and ``d_hi`` must lie inside the support with
    ``d_lo <= d_hi``.  Collapsed bounds return the midpoint; an
    ill-conditioned mean-value difference falls back to bisection.
    """
    d_lo, d_hi = float(d_lo), float(d_hi)
    require_in_support(fam, d_lo, what="delta_lo")
    require_in_support(fam, d_hi, what="delta_hi")
    if d_lo > d_hi:
        raise DomainError(f"need delta_lo <= delta_hi, got {d_lo} > {d_hi}")

    scale = max(1.0, abs(d_lo), abs(d_hi))
    if d_hi - d_lo < DEGENERATE_REL_WIDTH * scale:
        est = 0.5 * (d_lo + d_hi)
        return EstimateReport(
            estimate=est,
            delta_lo=d_lo,
            delta_hi=d_hi,
            equalized_regret=0.0,
            method=METHOD_CLOSED,
            diagnostics={"degenerate": True, "residual": 0.0, "iterations": 0},
        )

    mu_lo = float(fam.mean(d_lo))
    mu_hi = float(fam.mean(d_hi))
    den = mu_hi - mu_lo
    method = METHOD_CLOSED
    iterations = 0
    if abs(den) < ILL_CONDITIONED_REL * max(abs(mu_lo), abs(mu_hi), 1e-300):
        est, iterations = _equalizer_root(fam, d_lo, d_hi)
        method = METHOD_ROOT
    else:
        num = (
            d_hi * mu_hi
            - d_lo * mu_lo
            - (float(fam.log_norm(d_hi)) - float(fam.log_norm(d_lo)))
        )
        est = num / den
        if not d_lo <= est <= d_hi:
            # The exact equalizer is interior; any excursion is round-off.
            est = min(max(est, d_lo), d_hi)

    r_lo = posterior_regret(fam, d_lo, est)
    r_hi = posterior_regret(fam, d_hi, est)
    residual = abs(r_lo - r_hi)
    tol = EQUALIZE_TOL * max(1.0, r_lo, r_hi)
    if residual > tol and method == METHOD_CLOSED:
        est, iterations = _equalizer_root(fam, d_lo, d_hi)
        method = METHOD_ROOT
        r_lo = posterior_regret(fam, d_lo, est)
        r_hi = posterior_regret(fam, d_hi, est)
        residual = abs(r_lo - r_hi)
        tol = EQUALIZE_TOL * max(1.0, r_lo, r_hi)
    if residual > tol:
        raise ConvergenceError(
            f"could not equalize the corner regrets on [{d_lo}, {d_hi}] for "
            f"{fam.name}: residual {residual:.3e}"
        )
    return EstimateReport(
        estimate=est,
        delta_lo=d_lo,
        delta_hi=d_hi,
        equalized_regret=0.5 * (r_lo + r_hi),
        method=method,
        diagnostics={"degenerate": False, "residual": residual,
                     "iterations": iterations},
    )


def _corner_bayes(fam: FamilySpec, box: PriorBox, x: float) -> list[float]:
    """Bayes estimates at the four hyper-parameter corners.

    The posterior predictive mean is monotone in lambda for fixed alpha
    and monotone in alpha for fixed lambda, so its extremes over the box
    (hence the extreme Bayes estimates) land on corners.  Which corner
    wins depends on the sign of lambda + stat(x); taking the min and max
    over all four sidesteps that case split.
    """
    ests = []
    for a, l in box.corners():
        prior = ConjugatePrior(fam, a, l, box.flavor)
        pm = posterior_predictive_mean(fam, prior, x)
        ests.append(mean_inverse(fam, pm))
    return ests


def prgm_conjugate_box(fam: FamilySpec, box: PriorBox, x: float) -> EstimateReport:
    """Posterior-regret box-minimax estimate for a standard conjugate box."""
    if box.flavor != "standard":
        raise SpecificationError(
            "prgm_conjugate_box handles standard boxes; route jcp boxes "
            "through iprgm_jcp_box"
        )
    ests = _corner_bayes(fam, box, x)
    report = prgm_from_bounds(fam, min(ests), max(ests))
    diag = dict(report.diagnostics)
    diag["corner_estimates"] = sorted(ests)
    return EstimateReport(
        estimate=report.estimate,
        delta_lo=report.delta_lo,
        delta_hi=report.delta_hi,
        equalized_regret=report.equalized_regret,
        method=report.method,
        diagnostics=diag,
    )


def iprgm_jcp_box(fam: FamilySpec, box: PriorBox, x: float) -> EstimateReport:
    """Box-minimax estimate within the sqrt-Fisher-corrected class.

    Shifts the box to its standard-flavor equivalent and reuses the
    conjugate machinery; the result is the one whose transported value
    stays minimax on any smooth one-to-one scale.
    """
    if box.flavor != "jcp":
        raise SpecificationError("iprgm_jcp_box needs a jcp-flavor box")
    shift = fam.jeffreys_shift
    if shift is None:
        raise SpecificationError(
            f"family {fam.name} declares no Jeffreys shift; the jcp class "
            "has no conjugate representation to optimize over"
        )
    a, b = shift
    shifted = PriorBox(
        fam,
        box.alpha_lo + a,
        box.alpha_hi + a,
        box.lam_lo + b,
        box.lam_hi + b,
        "standard",
    )
    report = prgm_conjugate_box(fam, shifted, x)
    diag = dict(report.diagnostics)
    diag["jeffreys_shift"] = [a, b]
    return EstimateReport(
        estimate=report.estimate,
        delta_lo=report.delta_lo,
        delta_hi=report.delta_hi,
        equalized_regret=report.equalized_regret,
        method=METHOD_IPRGM,
        diagnostics=diag,
    )


# ---------------------------------------------------------------------------
# Reparameterizations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Reparameterization:
    """Smooth one-to-one map of the natural parameter.

    ``log_abs_deriv`` (log |d forward / d theta|) is only needed when a
    plain conjugate class is re-elicited on the transformed scale, where
    it enters as a Jacobian weight on the prior density.
    """

    label: str
    forward: Callable
    inverse: Callable
    log_abs_deriv: Callable | None = None


def _require_positive_support(fam: FamilySpec, label: str) -> None:
    if fam.support[0] < 0.0:
        raise SpecificationError(
            f"transform {label} needs a positive natural parameter; "
            f"family {fam.name} has support {fam.support}"
        )


def make_transform(spec: str, fam: FamilySpec | None = None) -> Reparameterization:
    """Build a catalog transform from its textual form.

    Catalog: ``reciprocal``, ``log``, ``neg_log_over_a(a)``,
    ``affine(a,b)``, ``logit_to_p``.  When a family is supplied, maps
    that need a positive parameter are rejected for families whose
    support is not contained in (0, inf).
    """
    s = spec.strip().lower().replace(" ", "")
    if s == "reciprocal":
        if fam is not None:
            _require_positive_support(fam, s)
        return Reparameterization(
            "reciprocal",
            forward=lambda th: 1.0 / th,
            inverse=lambda e: 1.0 / e,
            log_abs_deriv=lambda th: -2.0 * np.log(th),
        )
    if s == "log":
        if fam is not None:
            _require_positive_support(fam, s)
        return Reparameterization(
            "log",
            forward=np.log,
            inverse=np.exp,
            log_abs_deriv=lambda th: -np.log(th),
        )
    m = _match_call(s, "neg_log_over_a", 1)
    if m is not None:
        (a,) = m
        if a == 0:
            raise SpecificationError("neg_log_over_a needs a != 0")
        if fam is not None:
            _require_positive_support(fam, s)
        return Reparameterization(
            f"neg_log_over_a({a:g})",
            forward=lambda th: -np.log(th) / a,
            inverse=lambda e: np.exp(-a * e),
            log_abs_deriv=lambda th: -math.log(abs(a)) - np.log(th),
        )
    m = _match_call(s, "affine", 2)
    if m is not None:
        a, b = m
        if a == 0:
            raise SpecificationError("affine needs a != 0")
        return Reparameterization(
            f"affine({a:g},{b:g})",
            forward=lambda th: a * th + b,
            inverse=lambda e: (e - b) / a,
            log_abs_deriv=lambda th: math.log(abs(a)) + 0.0 * np.asarray(th),
        )
    if s == "logit_to_p":
        return Reparameterization(
            "logit_to_p",
            forward=lambda th: 1.0 / (1.0 + np.exp(th)),
            inverse=lambda p: np.log((1.0 - p) / p),
            log_abs_deriv=lambda th: -np.logaddexp(0.0, th) - np.logaddexp(0.0, -th),
        )
    raise SpecificationError(
        f"unknown transform {spec!r}; catalog: reciprocal, log, "
        "neg_log_over_a(a), affine(a,b), logit_to_p"
    )


def _match_call(s: str, name: str, n_args: int):
    if not (s.startswith(name + "(") and s.endswith(")")):
        return None
    inner = s[len(name) + 1:-1]
    parts = inner.split(",")
    if len(parts) != n_args:
        raise SpecificationError(
            f"transform {name} takes {n_args} argument(s), got {inner!r}"
        )
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise SpecificationError(f"bad numeric argument in {s!r}") from exc


def validate_transform(tr: Reparameterization, fam: FamilySpec,
                       grid: np.ndarray | None = None) -> list[str]:
    """Round-trip and strict monotonicity checks on a working grid."""
    if grid is None:
        grid = support_grid(fam, n=201)
    problems = []
    fwd = np.asarray(tr.forward(grid), dtype=float)
    if not (np.all(np.diff(fwd) > 0) or np.all(np.diff(fwd) < 0)):
        problems.append(f"{tr.label} is not strictly monotone on the grid")
    back = np.asarray(tr.inverse(fwd), dtype=float)
    if not np.allclose(back, grid, rtol=1e-10, atol=1e-10):
        problems.append(f"{tr.label} round-trip exceeds 1e-10 on the grid")
    return problems


def transport(report: EstimateReport, tr: Reparameterization) -> float:
    """Push an estimate through a reparameterization.

    Only estimates produced inside the sqrt-Fisher-corrected class carry
    the guarantee that the pushed value is itself the minimax (or Bayes)
    answer on the new scale; anything else gets a warning and the plain
    function value.
    """
    guaranteed = report.method == METHOD_IPRGM or (
        report.method == METHOD_BAYES
        and report.diagnostics.get("flavor") == "jcp"
    )
    if not guaranteed:
        warnings.warn(
            f"transporting a {report.method} estimate (flavor "
            f"{report.diagnostics.get('flavor', 'n/a')}) has no invariance "
            "guarantee; the value is h(estimate) only",
            stacklevel=2,
        )
    return float(tr.forward(report.estimate))


# ---------------------------------------------------------------------------
# Direct transformed-scale computation (the independent invariance path)
# ---------------------------------------------------------------------------


def eta_scale_prgm(fam: FamilySpec, box: PriorBox, x: float,
                   tr: Reparameterization) -> EstimateReport:
    """Box-minimax estimate computed natively on the transformed scale.

    The intrinsic loss between transformed values is the theta-scale
    loss of the pulled-back points, so once the extreme Bayes estimates
    on the new scale are known the equalizer is found by bisection there,
    never reusing the theta-scale closed form.

    For a ``jcp`` box the prior class is the same set of measures on
    either scale, so the extreme Bayes estimates are the transported
    corner estimates.  For a ``standard`` box the class re-elicited on
    the new scale carries the Jacobian of the map as an extra density
    factor, and the corner posterior means are integrated numerically.
    """
    if box.flavor == "jcp":
        shift = fam.jeffreys_shift
        if shift is None:
            raise SpecificationError(
                f"family {fam.name} declares no Jeffreys shift"
            )
        shifted = PriorBox(
            fam,
            box.alpha_lo + shift[0],
            box.alpha_hi + shift[0],
            box.lam_lo + shift[1],
            box.lam_hi + shift[1],
            "standard",
        )
        theta_corners = _corner_bayes(fam, shifted, x)
    else:
        if tr.log_abs_deriv is None:
            raise SpecificationError(
                f"transform {tr.label} carries no Jacobian; cannot re-elicit "
                "a standard class on the transformed scale"
            )
        theta_corners = []
        for a, l in box.corners():
            prior = ConjugatePrior(fam, a, l, "standard")
            pm = predictive_mean_quadrature(
                fam, prior, x, extra_log_weight=tr.log_abs_deriv
            )
            theta_corners.append(mean_inverse(fam, pm))

    etas = sorted(float(tr.forward(d)) for d in (min(theta_corners),
                                                 max(theta_corners)))
    e_lo, e_hi = etas

    def regret_eta(m: float, d: float) -> float:
        return posterior_regret(fam, float(tr.inverse(m)), float(tr.inverse(d)))

    scale = max(1.0, abs(e_lo), abs(e_hi))
    if e_hi - e_lo < DEGENERATE_REL_WIDTH * scale:
        est = 0.5 * (e_lo + e_hi)
        return EstimateReport(est, e_lo, e_hi, 0.0, METHOD_ROOT,
                              {"scale": "eta", "transform": tr.label,
                               "degenerate": True})

    def gap(d: float) -> float:
        return regret_eta(e_hi, d) - regret_eta(e_lo, d)

    a, b = e_lo, e_hi
    ga, gb = gap(a), gap(b)
    if ga * gb > 0:
        raise ConvergenceError(
            f"no sign change for the transformed-scale regret gap on "
            f"[{e_lo}, {e_hi}] under {tr.label}"
        )
    # Orient so the positive end is at `a`; the gap is strictly monotone.
    if ga < 0:
        a, b = b, a
    for _ in range(200):
        mid = 0.5 * (a + b)
        if gap(mid) > 0:
            a = mid
        else:
            b = mid
        if abs(b - a) <= 1e-15 * scale:
            break
    est = 0.5 * (a + b)
    r_lo = regret_eta(e_lo, est)
    r_hi = regret_eta(e_hi, est)
    return EstimateReport(
        estimate=est,
        delta_lo=e_lo,
        delta_hi=e_hi,
        equalized_regret=0.5 * (r_lo + r_hi),
        method=METHOD_ROOT,
        diagnostics={"scale": "eta", "transform": tr.label,
                     "residual": abs(r_lo - r_hi), "degenerate": False},
    )
