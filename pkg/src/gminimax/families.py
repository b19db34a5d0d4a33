"""One-parameter exponential families in natural form.

Every family here has a sampling density (or mass function) of the shape

    f(x | theta) = norm(theta) * carrier(x) * exp(-theta * stat(x)),

where ``theta`` ranges over an open interval and ``norm`` is the
normalizing factor.  Two functions drive all downstream computation:

* ``log_norm(theta)``  -- the log of the normalizing factor.  Only the
  log is ever evaluated; the factor itself may under/overflow.
* ``mean(theta)``      -- the derivative of ``log_norm``, which equals
  the expectation of ``stat(X)`` under ``theta``.  It is strictly
  decreasing, so it has a well-defined inverse, and its negated
  derivative is the Fisher information.

The conjugate prior family attached to each of these models has the
shape ``prior_base(theta)^alpha * exp(-lambda * theta)``.  For most
families the prior base coincides with ``norm``; the binomial uses the
per-trial base (the ``n``-th root of ``norm``) so that one observation
contributes ``n`` units to the ``alpha`` exponent.  ``obs_units``
records that weight.

``jeffreys_shift = (a, b)`` means the square root of the Fisher
information is proportional to ``prior_base(theta)^a * exp(-b*theta)``,
so multiplying a conjugate prior by it lands back in the conjugate
family with ``(alpha + a, lambda + b)``.

Support endpoints are always open.  Evaluating any mapping at or beyond
an endpoint raises :class:`~gminimax.errors.DomainError`; internally
generated points are kept at least a relative margin of 1e-12 inside.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import ConvergenceError, DomainError, ProprietyError, SpecificationError

INTERIOR_MARGIN = 1e-12

# Numeric inversion of the mean function.
INVERT_RTOL = 1e-12
INVERT_ATOL = 1e-14
BRACKET_MAX_STEPS = 200
BISECT_MAX_STEPS = 200


@dataclass(frozen=True)
class FamilySpec:
    """Bundle of mappings defining one exponential family.

    Fields
    ------
    name:            identifier, e.g. ``"binomial_logit(5)"``.
    support:         open interval of admissible natural parameters.
    log_norm:        log of the normalizing factor, vectorized in theta.
    mean:            derivative of ``log_norm``; strictly decreasing.
    mean_deriv:      derivative of ``mean``; strictly negative.
    stat:            sufficient statistic as a function of the data.
    mean_inv:        analytic inverse of ``mean`` when one is known.
    mean_range:      closure of the image of ``mean`` (for diagnostics).
    jeffreys_shift:  ``(a, b)`` with sqrt(Fisher) ∝ base^a * exp(-b*theta),
                     or ``None`` when no such pair exists / is known.
    obs_units:       prior-base units one observation adds to ``alpha``.
    prior_ok:        predicate on ``(alpha, lam)`` for usable priors.
    prior_rule:      human-readable statement of that predicate.
    posterior_ok:    predicate on ``(alpha, lam, x)`` for a proper
                     posterior with a finite posterior mean of ``mean``.
    meta:            family-specific extras (e.g. ``{"n": 5}``).
    """

    name: str
    support: tuple[float, float]
    log_norm: Callable
    mean: Callable
    mean_deriv: Callable
    stat: Callable
    mean_inv: Callable | None = None
    mean_range: tuple[float, float] | None = None
    jeffreys_shift: tuple[float, float] | None = None
    obs_units: float = 1.0
    prior_ok: Callable[[float, float], bool] | None = None
    prior_rule: str = ""
    posterior_ok: Callable[[float, float, float], bool] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.support
        if not lo < hi:
            raise SpecificationError(
                f"support must be an interval with lo < hi, got {self.support}"
            )
        if self.obs_units <= 0:
            raise SpecificationError("obs_units must be positive")

    # Prior-base helpers: identical to log_norm/mean except for the
    # binomial, where one observation carries obs_units = n base units.
    def log_prior_base(self, theta):
        return self.log_norm(theta) / self.obs_units

    def prior_base_mean(self, theta):
        return self.mean(theta) / self.obs_units


def require_in_support(fam: FamilySpec, theta: float, what: str = "theta") -> None:
    """Raise DomainError unless theta lies strictly inside the support."""
    lo, hi = fam.support
    th = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(th)) or np.any(th <= lo) or np.any(th >= hi):
        raise DomainError(
            f"{what}={theta!r} is outside the open support ({lo}, {hi}) "
            f"of family {fam.name}"
        )


def interior_clamp(fam: FamilySpec, theta: float) -> float:
    """Pull theta inside the support by a relative margin of 1e-12."""
    lo, hi = fam.support
    t = float(theta)
    if math.isfinite(lo):
        edge = lo + INTERIOR_MARGIN * max(1.0, abs(lo))
        t = max(t, edge)
    if math.isfinite(hi):
        edge = hi - INTERIOR_MARGIN * max(1.0, abs(hi))
        t = min(t, edge)
    return t


def support_grid(fam: FamilySpec, n: int = 201, cap: float = 12.0) -> np.ndarray:
    """Evenly spaced interior points covering a working window of the support.

    Infinite endpoints are truncated at +-cap; finite endpoints are inset
    by the interior margin.  The window is where family invariants get
    spot-checked, not a claim about where the family is defined.
    """
    lo, hi = fam.support
    a = lo if math.isfinite(lo) else -cap
    b = hi if math.isfinite(hi) else cap
    if a >= b:
        raise SpecificationError(f"empty working window for support ({lo}, {hi})")
    pad = INTERIOR_MARGIN * max(1.0, abs(a), abs(b))
    if math.isfinite(lo):
        a += max(pad, 1e-9 * (b - a))
    if math.isfinite(hi):
        b -= max(pad, 1e-9 * (b - a))
    return np.linspace(a, b, n)


def fisher_info(fam: FamilySpec, theta):
    """Fisher information: the negated derivative of the mean function."""
    require_in_support(fam, theta)
    info = -np.asarray(fam.mean_deriv(theta), dtype=float)
    if np.any(info <= 0.0) or np.any(~np.isfinite(info)):
        raise SpecificationError(
            f"family {fam.name} reports non-positive Fisher information at "
            f"theta={theta!r}; its mean function is not strictly decreasing there"
        )
    if np.ndim(theta) == 0:
        return float(info)
    return info


def _mean_range(fam: FamilySpec) -> tuple[float, float]:
    if fam.mean_range is not None:
        return fam.mean_range
    # Estimate from wide interior evaluations; only used in error text
    # and for bracketing sanity, never as a hard truth.
    grid = support_grid(fam, n=9, cap=40.0)
    vals = np.asarray(fam.mean(grid), dtype=float)
    return float(np.min(vals)), float(np.max(vals))


def _initial_point(fam: FamilySpec) -> float:
    lo, hi = fam.support
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    if math.isfinite(lo):
        return interior_clamp(fam, lo + 1.0)
    if math.isfinite(hi):
        return interior_clamp(fam, hi - 1.0)
    return 0.0


def _expand_bracket(fam: FamilySpec, target: float) -> tuple[float, float]:
    """Find a <= b with mean(a) >= target >= mean(b).

    The mean function decreases, so we walk left to raise it and right to
    lower it, doubling the step (or halving the gap to a finite endpoint)
    each time.
    """
    lo, hi = fam.support
    a = b = _initial_point(fam)
    step = max(1.0, 0.5 * abs(a))

    s = step
    for _ in range(BRACKET_MAX_STEPS):
        if float(fam.mean(a)) >= target:
            break
        a = 0.5 * (a + lo) if math.isfinite(lo) else a - s
        s *= 2.0
        a = interior_clamp(fam, a)
    else:
        raise ConvergenceError(
            f"could not bracket mean value {target} from the left in "
            f"{BRACKET_MAX_STEPS} expansions for family {fam.name}"
        )

    s = step
    for _ in range(BRACKET_MAX_STEPS):
        if float(fam.mean(b)) <= target:
            break
        b = 0.5 * (b + hi) if math.isfinite(hi) else b + s
        s *= 2.0
        b = interior_clamp(fam, b)
    else:
        raise ConvergenceError(
            f"could not bracket mean value {target} from the right in "
            f"{BRACKET_MAX_STEPS} expansions for family {fam.name}"
        )
    return a, b


def mean_inverse(fam: FamilySpec, t: float, rtol: float = INVERT_RTOL,
                 atol: float = INVERT_ATOL) -> float:
    """Solve mean(theta) = t for theta.

    Uses the family's analytic inverse when present, otherwise bisection
    after a geometric bracket expansion.  Bisection converges on any
    strictly monotone continuous mean function; no derivative is trusted.
    """
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"mean value {t!r} is not finite")
    m_lo, m_hi = _mean_range(fam)
    if fam.mean_range is not None and not (m_lo < t < m_hi):
        raise DomainError(
            f"mean value {t} is outside the open range ({m_lo}, {m_hi}) "
            f"attained by family {fam.name}"
        )
    if fam.mean_inv is not None:
        theta = float(fam.mean_inv(t))
        require_in_support(fam, theta, what="inverted theta")
        return theta

    a, b = _expand_bracket(fam, t)
    tol = rtol * abs(t) + atol
    best, best_res = a, abs(float(fam.mean(a)) - t)
    for _ in range(BISECT_MAX_STEPS):
        mid = 0.5 * (a + b)
        val = float(fam.mean(mid))
        res = abs(val - t)
        if res < best_res:
            best, best_res = mid, res
        if res <= tol:
            return mid
        if val > t:
            a = mid
        else:
            b = mid
        if b - a <= 1e-16 * max(1.0, abs(a), abs(b)):
            break
    if best_res <= 100.0 * tol:
        # Width exhausted float resolution; accept the best point seen.
        return best
    raise ConvergenceError(
        f"bisection stalled inverting the mean function of {fam.name} at "
        f"target {t}: best residual {best_res:.3e} exceeds tolerance {tol:.3e}"
    )


def jeffreys_shift_residual(fam: FamilySpec, n: int = 101) -> float:
    """Spread of the quantity that must be constant for the declared shift.

    If sqrt(Fisher) ∝ base^a * exp(-b*theta) then
    0.5*log(Fisher) - a*log_prior_base + b*theta is constant in theta.
    Returns its standard deviation over a working grid (0 means exact).
    """
    if fam.jeffreys_shift is None:
        raise SpecificationError(f"family {fam.name} declares no Jeffreys shift")
    a, b = fam.jeffreys_shift
    grid = support_grid(fam, n=n)
    info = -np.asarray(fam.mean_deriv(grid), dtype=float)
    if np.any(info <= 0):
        raise SpecificationError(
            f"non-positive Fisher information inside the working window of {fam.name}"
        )
    g = 0.5 * np.log(info) - a * np.asarray(fam.log_prior_base(grid)) + b * grid
    return float(np.std(g))


def validate_family(fam: FamilySpec, n: int = 201) -> list[str]:
    """Spot-check the structural requirements on a working grid.

    Returns a list of human-readable violations (empty when everything
    holds).  Checks: mean strictly decreasing, mean_deriv negative and
    consistent with a finite difference of mean, mean consistent with a
    finite difference of log_norm, inverse round-trip, and the declared
    Jeffreys shift.
    """
    problems: list[str] = []
    grid = support_grid(fam, n=n)
    mean_vals = np.asarray(fam.mean(grid), dtype=float)
    if not np.all(np.diff(mean_vals) < 0):
        problems.append("mean function is not strictly decreasing on the working grid")

    deriv = np.asarray(fam.mean_deriv(grid), dtype=float)
    if not np.all(deriv < 0):
        problems.append("mean_deriv is not strictly negative on the working grid")

    h = 1e-6 * np.maximum(1.0, np.abs(grid))
    inner = (grid - h > fam.support[0]) & (grid + h < fam.support[1])
    g, hh = grid[inner], h[inner]
    fd = (np.asarray(fam.mean(g + hh)) - np.asarray(fam.mean(g - hh))) / (2 * hh)
    scale = np.maximum(1.0, np.abs(deriv[inner]))
    if not np.all(np.abs(fd - deriv[inner]) <= 1e-4 * scale):
        problems.append("mean_deriv disagrees with a finite difference of mean")

    fd_mean = (np.asarray(fam.log_norm(g + hh)) - np.asarray(fam.log_norm(g - hh))) / (2 * hh)
    scale = np.maximum(1.0, np.abs(mean_vals[inner]))
    if not np.all(np.abs(fd_mean - mean_vals[inner]) <= 1e-4 * scale):
        problems.append("mean disagrees with a finite difference of log_norm")

    if fam.mean_inv is not None:
        back = np.array([float(fam.mean_inv(v)) for v in mean_vals])
        if not np.allclose(back, grid, rtol=1e-9, atol=1e-9):
            problems.append("mean_inv does not invert mean on the working grid")

    if fam.jeffreys_shift is not None:
        try:
            sd = jeffreys_shift_residual(fam, n=n)
        except SpecificationError as exc:
            problems.append(str(exc))
        else:
            if sd > 1e-8:
                problems.append(
                    f"declared Jeffreys shift is not constant (sd={sd:.3e})"
                )
    return problems


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------

def _normal_family() -> FamilySpec:
    """Normal with unit variance; theta is the mean, stat(x) = -x."""
    return FamilySpec(
        name="normal_mean_unitvar",
        support=(-math.inf, math.inf),
        log_norm=lambda th: -0.5 * np.square(th),
        mean=lambda th: -np.asarray(th, dtype=float),
        mean_deriv=lambda th: np.full_like(np.asarray(th, dtype=float), -1.0),
        stat=lambda x: -np.asarray(x, dtype=float),
        mean_inv=lambda t: -t,
        mean_range=(-math.inf, math.inf),
        jeffreys_shift=(0.0, 0.0),
        prior_ok=lambda a, lam: a > -1.0,
        prior_rule="alpha > -1 (posterior is then a proper normal for any x)",
        posterior_ok=lambda a, lam, x: True,
    )


def _exponential_family() -> FamilySpec:
    """Exponential observations; theta is the rate, stat(x) = x."""

    def _mean_inv(t):
        if t <= 0:
            raise DomainError(
                "mean value must be positive for exponential_rate; the mean "
                "function maps (0, inf) onto (0, inf)"
            )
        return 1.0 / t

    return FamilySpec(
        name="exponential_rate",
        support=(0.0, math.inf),
        log_norm=lambda th: np.log(th),
        mean=lambda th: 1.0 / np.asarray(th, dtype=float),
        mean_deriv=lambda th: -1.0 / np.square(np.asarray(th, dtype=float)),
        stat=lambda x: np.asarray(x, dtype=float),
        mean_inv=_mean_inv,
        mean_range=(0.0, math.inf),
        jeffreys_shift=(-1.0, 0.0),
        prior_ok=lambda a, lam: a > -1.0 and lam >= 0.0,
        prior_rule="alpha > -1 and lambda >= 0 (proper posterior for x > 0)",
        posterior_ok=lambda a, lam, x: a > -1.0 and lam + x > 0.0,
    )


def _binomial_family(n: int) -> FamilySpec:
    """Binomial with n trials; theta is the negated log-odds of success.

    Success probability p = 1/(1+exp(theta)), stat(x) = x = number of
    successes.  The conjugate prior uses the per-trial base, so a single
    n-trial observation adds n units to the alpha exponent; in the
    success-probability parameterization the prior is Beta(lambda,
    alpha - lambda).
    """
    if n < 1:
        raise SpecificationError(f"binomial trial count must be >= 1, got {n}")
    nf = float(n)

    def _mean_inv(t):
        if not 0.0 < t < nf:
            raise DomainError(
                f"mean value must lie in (0, {n}) for binomial_logit({n}); "
                "the mean function maps the real line onto that interval"
            )
        return math.log(nf / t - 1.0)

    return FamilySpec(
        name=f"binomial_logit({n})",
        support=(-math.inf, math.inf),
        log_norm=lambda th: -nf * np.logaddexp(0.0, -np.asarray(th, dtype=float)),
        mean=lambda th: nf * expit(-np.asarray(th, dtype=float)),
        mean_deriv=lambda th: -nf * expit(th) * expit(-np.asarray(th, dtype=float)),
        stat=lambda x: np.asarray(x, dtype=float),
        mean_inv=_mean_inv,
        mean_range=(0.0, nf),
        jeffreys_shift=(1.0, 0.5),
        obs_units=nf,
        prior_ok=lambda a, lam: lam >= 0.0 and a >= lam,
        prior_rule=(
            "0 <= lambda <= alpha (Beta(lambda, alpha - lambda) on the "
            "success probability; strict propriety is checked per observation)"
        ),
        posterior_ok=lambda a, lam, x: lam + x > 0.0 and a + nf - lam - x > 0.0,
        meta={"n": n},
    )


def _poisson_family() -> FamilySpec:
    """Poisson counts; theta is the negated log of the rate, stat(x) = x.

    Extra built-in beyond the three canonical families above; its
    formulas are derived from first principles here and are exercised
    only by this package's own oracles, not by any external closed-form
    catalogue.  The rate is exp(-theta), and the conjugate prior is
    Gamma(lambda, rate=alpha) on the rate scale.
    """

    def _mean_inv(t):
        if t <= 0:
            raise DomainError(
                "mean value must be positive for poisson_neglograte; the mean "
                "function maps the real line onto (0, inf)"
            )
        return -math.log(t)

    return FamilySpec(
        name="poisson_neglograte",
        support=(-math.inf, math.inf),
        log_norm=lambda th: -np.exp(-np.asarray(th, dtype=float)),
        mean=lambda th: np.exp(-np.asarray(th, dtype=float)),
        mean_deriv=lambda th: -np.exp(-np.asarray(th, dtype=float)),
        stat=lambda x: np.asarray(x, dtype=float),
        mean_inv=_mean_inv,
        mean_range=(0.0, math.inf),
        jeffreys_shift=(0.0, 0.5),
        prior_ok=lambda a, lam: a > -1.0 and lam >= 0.0,
        prior_rule="alpha > -1 and lambda >= 0 (proper posterior for x >= 1, "
                   "or x = 0 with lambda > 0)",
        posterior_ok=lambda a, lam, x: lam + x > 0.0,
    )


_BINOMIAL_RE = re.compile(r"^(?:binomial_logit|binomial)\(\s*(?:n\s*=\s*)?(\d+)\s*\)$")

_ALIASES = {
    "normal": "normal_mean_unitvar",
    "normal_mean_unitvar": "normal_mean_unitvar",
    "exponential": "exponential_rate",
    "exponential_rate": "exponential_rate",
    "poisson": "poisson_neglograte",
    "poisson_neglograte": "poisson_neglograte",
}

FAMILIES: dict[str, Callable[[], FamilySpec]] = {
    "normal_mean_unitvar": _normal_family,
    "exponential_rate": _exponential_family,
    "poisson_neglograte": _poisson_family,
}


def builtin_family(name: str) -> FamilySpec:
    """Construct a built-in family from its name.

    Accepts canonical names (``normal_mean_unitvar``, ``exponential_rate``,
    ``binomial_logit(n)``, ``poisson_neglograte``) and the obvious short
    aliases (``normal``, ``exponential``, ``binomial(n)``, ``poisson``).
    """
    key = name.strip().lower()
    m = _BINOMIAL_RE.match(key)
    if m:
        return _binomial_family(int(m.group(1)))
    if key in ("binomial", "binomial_logit"):
        raise SpecificationError(
            "binomial family needs a trial count, e.g. binomial_logit(5)"
        )
    canon = _ALIASES.get(key)
    if canon is None:
        raise SpecificationError(
            f"unknown family {name!r}; built-ins are normal_mean_unitvar, "
            "exponential_rate, binomial_logit(n), poisson_neglograte"
        )
    return FAMILIES[canon]()


def check_prior_ok(fam: FamilySpec, alpha: float, lam: float) -> None:
    """Raise ProprietyError if (alpha, lam) violates the family predicate.

    Families without a predicate (user-defined ones) are accepted with a
    warning: propriety is then the caller's responsibility.
    """
    if fam.prior_ok is None:
        warnings.warn(
            f"family {fam.name} has no propriety predicate; accepting "
            f"(alpha={alpha}, lambda={lam}) unchecked",
            stacklevel=2,
        )
        return
    if not fam.prior_ok(alpha, lam):
        raise ProprietyError(
            f"(alpha={alpha}, lambda={lam}) violates the propriety rule for "
            f"{fam.name}: {fam.prior_rule}"
        )


def check_posterior_ok(fam: FamilySpec, alpha: float, lam: float, x: float) -> None:
    """Raise ProprietyError if the posterior at x would be improper."""
    if fam.posterior_ok is None:
        return
    if not fam.posterior_ok(alpha, lam, x):
        raise ProprietyError(
            f"observation x={x} with (alpha={alpha}, lambda={lam}) gives an "
            f"improper posterior (or infinite posterior mean) for {fam.name}"
        )
