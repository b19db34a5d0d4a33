r"""Intrinsic (Kullback-Leibler) loss and its posterior quantities.

For the families in :mod:`gminimax.families` the KL divergence between
the models labelled ``theta`` and ``delta`` collapses to

    L(theta, delta) = log_norm(theta) - log_norm(delta)
                      + (delta - theta) * mean(theta),

which needs only the log normalizer and the mean function.  The same
arithmetic evaluated at a Bayes estimate in the first slot gives the
posterior regret of an arbitrary action, because the linear-in-delta
terms of the posterior risk cancel in the difference.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .families import FamilySpec, require_in_support

__all__ = ["intrinsic_loss", "posterior_risk", "posterior_regret"]


def intrinsic_loss(fam: FamilySpec, theta, delta):
    """KL divergence from the model at ``theta`` to the model at ``delta``.

    Vectorized in both arguments.  Nonnegative, zero exactly on the
    diagonal, and strictly convex in ``delta`` for fixed ``theta``.
    """
    require_in_support(fam, theta)
    require_in_support(fam, delta, what="delta")
    th = np.asarray(theta, dtype=float)
    de = np.asarray(delta, dtype=float)
    val = (
        np.asarray(fam.log_norm(th))
        - np.asarray(fam.log_norm(de))
        + (de - th) * np.asarray(fam.mean(th))
    )
    # Guard against tiny negative round-off on the diagonal.
    val = np.where((val < 0) & (val > -1e-12), 0.0, val)
    if np.any(val < 0):
        raise DomainError(
            f"negative intrinsic loss for {fam.name}; the supplied mean "
            "function is inconsistent with log_norm"
        )
    if np.ndim(val) == 0:
        return float(val)
    return val


def posterior_risk(fam: FamilySpec, delta, e_log_norm: float, e_mean: float,
                   e_theta_mean: float):
    """Expected intrinsic loss of action ``delta`` under a posterior.

    The caller supplies the three posterior expectations it depends on:
    ``E[log_norm(theta)]``, ``E[mean(theta)]`` and ``E[theta*mean(theta)]``.
    Risk is then an affine function of ``(log_norm(delta), delta)``:

        r(delta) = E[log_norm] - log_norm(delta) + delta*E[mean]
                   - E[theta*mean].
    """
    require_in_support(fam, delta, what="delta")
    de = np.asarray(delta, dtype=float)
    val = e_log_norm - np.asarray(fam.log_norm(de)) + de * e_mean - e_theta_mean
    if np.ndim(val) == 0:
        return float(val)
    return val


def posterior_regret(fam: FamilySpec, bayes_delta, delta):
    """Extra posterior risk of ``delta`` over the Bayes action.

    Subtracting the risks kills every expectation except those pinned at
    the Bayes action, leaving intrinsic_loss with the Bayes estimate in
    the theta slot:

        regret(b, d) = log_norm(b) - log_norm(d) + (d - b) * mean(b).

    Nonnegative for any delta, zero iff delta equals the Bayes action.
    """
    return intrinsic_loss(fam, bayes_delta, delta)
