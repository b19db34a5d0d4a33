"""Certificates that a box-minimax action is Bayes for some prior.

Three witness constructions, in increasing strength:

* mixture: between two proper priors whose Bayes actions straddle the
  target, some two-point mixture reproduces it, because the mixture
  posterior mean of the mean function is continuous in the weight.
* path: along the straight hyper-parameter segment joining the two
  extreme corners of a box, some intermediate prior reproduces it (the
  conjugate family is a connected class and the Bayes action moves
  continuously along any hyper-parameter path).
* data_independent: for boxes where only alpha varies, the path witness
  lands at the same alpha for every observation, i.e. one single prior
  is simultaneously Bayes for the whole estimator, not just pointwise.
  The spread over an observation grid is reported, not assumed zero:
  for some families it genuinely is not constant.

Each certificate records the witness, the reproduction residual on the
estimate scale, and (when applicable) the constancy spread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, SpecificationError
from .estimators import bayes_estimate, iprgm_jcp_box, prgm_conjugate_box
from .families import FamilySpec, mean_inverse, require_in_support
from .priors import (
    ConjugatePrior,
    MixturePath,
    PriorBox,
    _log_prior_normalizer,
    _log_posterior_integrand,
    _peak,
    _quad_split,
    _weighted_integrand,
    mixture_components,
)

__all__ = [
    "BayesianityCertificate",
    "mixture_witness",
    "connected_path_witness",
    "data_independent_alpha",
    "data_independent_alpha_normal",
    "data_independent_alpha_exponential",
    "data_independent_alpha_exponential_jcp",
    "perturbation_bound_check",
]

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class BayesianityCertificate:
    kind: str  # mixture | path | data_independent | boundary
    witness: dict
    residual: float
    constancy_spread: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "witness": self.witness,
            "residual": self.residual,
            "constancy_spread": self.constancy_spread,
        }


def mixture_witness(fam: FamilySpec, path: MixturePath, x: float,
                    target_estimate: float) -> BayesianityCertificate:
    """Mixture weight whose posterior reproduces the target action.

    Requires the two component Bayes actions to straddle the target.
    The mixture posterior mean of the mean function is a ratio of
    affine functions of the weight, so after the four component
    integrals are known the bisection costs nothing.
    """
    require_in_support(fam, target_estimate, what="target_estimate")
    target_mean = float(fam.mean(target_estimate))
    a0, b0, a1, b1 = mixture_components(fam, path, x)

    def psi(t: float) -> float:
        return (t * a0 + (1.0 - t) * a1) / (t * b0 + (1.0 - t) * b1)

    scale = max(1.0, abs(target_mean))
    g0, g1 = psi(0.0) - target_mean, psi(1.0) - target_mean
    if abs(g0) <= BOUNDARY_TOL * scale or abs(g1) <= BOUNDARY_TOL * scale:
        t_star = 0.0 if abs(g0) <= abs(g1) else 1.0
        kind = "boundary"
    elif g0 * g1 > 0:
        raise DomainError(
            "component Bayes actions do not straddle the target estimate; "
            f"psi endpoints {psi(0.0):.6g}, {psi(1.0):.6g} vs target mean "
            f"{target_mean:.6g}"
        )
    else:
        lo, hi = 0.0, 1.0
        g_lo = g0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gm = psi(mid) - target_mean
            if gm == 0.0:
                lo = hi = mid
                break
            if (gm > 0) == (g_lo > 0):
                lo = mid
                g_lo = gm
            else:
                hi = mid
        t_star = 0.5 * (lo + hi)
        kind = "mixture"

    reproduced = mean_inverse(fam, psi(t_star))
    return BayesianityCertificate(
        kind=kind,
        witness={"t": t_star},
        residual=abs(reproduced - target_estimate),
    )


def _corner_estimate(fam: FamilySpec, alpha: float, lam: float, flavor: str,
                     x: float) -> float:
    prior = ConjugatePrior(fam, alpha, lam, flavor)
    return bayes_estimate(fam, prior, x).estimate


def connected_path_witness(fam: FamilySpec, box: PriorBox, x: float,
                           target_estimate: float) -> BayesianityCertificate:
    """Hyper-parameter point on a straight corner-to-corner segment whose
    Bayes action reproduces the target.

    The segment joins the corners attaining the smallest and largest
    Bayes actions, so any target in between is crossed by continuity.
    Targets that coincide with an extreme get a boundary certificate.
    """
    require_in_support(fam, target_estimate, what="target_estimate")
    corners = box.corners()
    ests = [_corner_estimate(fam, a, l, box.flavor, x) for a, l in corners]
    i_min = int(np.argmin(ests))
    i_max = int(np.argmax(ests))
    e_min, e_max = ests[i_min], ests[i_max]
    scale = max(1.0, abs(target_estimate))

    if abs(target_estimate - e_min) <= BOUNDARY_TOL * scale or \
            abs(target_estimate - e_max) <= BOUNDARY_TOL * scale:
        pick = i_min if abs(target_estimate - e_min) <= \
            abs(target_estimate - e_max) else i_max
        a, l = corners[pick]
        return BayesianityCertificate(
            kind="boundary",
            witness={"alpha": a, "lam": l},
            residual=abs(ests[pick] - target_estimate),
        )
    if not e_min < target_estimate < e_max:
        raise DomainError(
            f"target estimate {target_estimate} lies outside the Bayes range "
            f"[{e_min}, {e_max}] of the box"
        )

    (a0, l0), (a1, l1) = corners[i_min], corners[i_max]

    def est_at(s: float) -> float:
        a = (1.0 - s) * a0 + s * a1
        l = (1.0 - s) * l0 + s * l1
        return _corner_estimate(fam, a, l, box.flavor, x)

    lo, hi = 0.0, 1.0  # est_at(0) < target < est_at(1)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if est_at(mid) < target_estimate:
            lo = mid
        else:
            hi = mid
    s_star = 0.5 * (lo + hi)
    a_star = (1.0 - s_star) * a0 + s_star * a1
    l_star = (1.0 - s_star) * l0 + s_star * l1
    return BayesianityCertificate(
        kind="path",
        witness={"alpha": a_star, "lam": l_star},
        residual=abs(est_at(s_star) - target_estimate),
    )


def data_independent_alpha(fam: FamilySpec, box: PriorBox,
                           x_grid) -> BayesianityCertificate:
    """Per-observation path witnesses for an alpha-only box, with spread.

    The box must have a degenerate lambda edge.  For every observation
    the box-minimax action is computed and its witness alpha found; the
    certificate reports the mean witness alpha, the worst reproduction
    residual, and the spread max(alpha) - min(alpha) over the grid.  A
    tiny spread means one single prior is Bayes for the whole estimator.
    """
    if box.lam_lo != box.lam_hi:
        raise SpecificationError(
            "data_independent_alpha needs a box whose lambda edge is "
            "degenerate (only alpha varies)"
        )
    alphas, residuals = [], []
    for x in x_grid:
        x = float(x)
        ests = [_corner_estimate(fam, a, l, box.flavor, x)
                for a, l in box.corners()]
        spread = max(ests) - min(ests)
        if spread <= 1e-11 * max(1.0, abs(max(ests, key=abs))):
            # Every prior in the box gives the same action at this x, so
            # any alpha is a witness; such observations carry no
            # constancy information and would poison the statistic.
            continue
        if box.flavor == "jcp":
            report = iprgm_jcp_box(fam, box, x)
        else:
            report = prgm_conjugate_box(fam, box, x)
        cert = connected_path_witness(fam, box, x, report.estimate)
        alphas.append(cert.witness["alpha"])
        residuals.append(cert.residual)
    if not alphas:
        raise DomainError(
            "every observation in the grid collapses the box to a single "
            "Bayes action; the witness alpha is undetermined"
        )
    alphas = np.asarray(alphas)
    return BayesianityCertificate(
        kind="data_independent",
        witness={"alpha": float(np.mean(alphas)), "lam": box.lam_lo},
        residual=float(np.max(residuals)),
        constancy_spread=float(np.max(alphas) - np.min(alphas)),
    )


# Closed forms for the alpha-only witnesses that happen to be exactly
# data-independent.  Both arguments are the alpha edge of the box.

def data_independent_alpha_normal(a1: float, a2: float) -> float:
    """Normal location: the witness solves a harmonic-mean equation."""
    return (a1 + a2 + 2.0 * a1 * a2) / (a1 + a2 + 2.0)


def data_independent_alpha_exponential(a1: float, a2: float) -> float:
    """Exponential rate, plain conjugate class."""
    if a1 == a2:
        return a1
    return ((a1 + 1.0) * (a2 + 1.0) / (a1 - a2)) * math.log(
        (a1 + 1.0) / (a2 + 1.0)
    ) - 1.0


def data_independent_alpha_exponential_jcp(a1: float, a2: float) -> float:
    """Exponential rate, sqrt-Fisher-corrected class.

    The reciprocal of the witness is the logarithmic mean of the
    reciprocals of the edge alphas.
    """
    if a1 == a2:
        return a1
    return (a1 * a2 / (a1 - a2)) * math.log(a1 / a2)


# ---------------------------------------------------------------------------
# Sup-norm continuity of the posterior functional
# ---------------------------------------------------------------------------


def perturbation_bound_check(fam: FamilySpec, prior: ConjugatePrior, x: float,
                             eps: float, center: float, width: float):
    """Perturb a proper prior density by a bounded bump and compare the
    observed change in the posterior mean functional with its bound.

    With likelihood shape f(theta) (carrier dropped, it cancels), write
    r = ∫ mean*f*pi and m = ∫ f*pi.  A density perturbation bounded by
    eps in sup norm moves r by at most eps*K1 with K1 = ∫|mean|*f and m
    by at most eps*K2 with K2 = ∫ f, hence

        |Δ(r/m)| <= (eps*K1 + |r/m|*eps*K2) / (m - eps*K2).

    Returns ``(observed, bound)`` using the bump
    eps * sin(3u) * exp(-u^2), u = (theta - center)/width, whose sup
    norm is below eps.
    """
    if eps <= 0 or width <= 0:
        raise SpecificationError("eps and width must be positive")
    log_z = _log_prior_normalizer(fam, prior)
    logf = _log_posterior_integrand(fam, prior, x)
    mode, m_shift = _peak(fam, logf)
    lo, hi = fam.support

    m_base = _quad_split(_weighted_integrand(logf, m_shift), lo, hi,
                         mode) * math.exp(m_shift - log_z)
    r_base = _quad_split(_weighted_integrand(logf, m_shift, fam.mean), lo, hi,
                         mode) * math.exp(m_shift - log_z)
    psi = r_base / m_base

    # Likelihood-only integrals for the bound constants.
    r_stat = float(fam.stat(x))

    def log_lik(th):
        return np.asarray(fam.log_norm(th)) - np.asarray(th) * r_stat

    lik = _weighted_integrand(log_lik, 0.0)
    lik_mode = mean_inverse(fam, r_stat) if (
        fam.mean_range is None or
        fam.mean_range[0] < r_stat < fam.mean_range[1]
    ) else mode
    k1 = _quad_split(
        _weighted_integrand(log_lik, 0.0, lambda th: abs(float(fam.mean(th)))),
        lo, hi, lik_mode)
    k2 = _quad_split(lik, lo, hi, lik_mode)

    def bump(th: float) -> float:
        u = (th - center) / width
        return math.sin(3.0 * u) * math.exp(-u * u)

    a, b = center - 8.0 * width, center + 8.0 * width
    a = max(a, lo) if math.isfinite(lo) else a
    b = min(b, hi) if math.isfinite(hi) else b
    with np.errstate(over="ignore"):
        d_r, _ = integrate.quad(
            lambda th: float(fam.mean(th)) * lik(th) * bump(th), a, b,
            epsabs=1e-13, epsrel=1e-11, limit=200,
        )
        d_m, _ = integrate.quad(
            lambda th: lik(th) * bump(th), a, b,
            epsabs=1e-13, epsrel=1e-11, limit=200,
        )
    psi_pert = (r_base + eps * d_r) / (m_base + eps * d_m)
    observed = abs(psi_pert - psi)
    denom = m_base - eps * k2
    if denom <= 0:
        raise DomainError(
            "perturbation too large: the bound denominator is not positive"
        )
    bound = (eps * k1 + abs(psi) * eps * k2) / denom
    return observed, bound
