"""Closed-form lower/upper bounds on the global compromise probability.

These need far less information than the exact computations: only marginal
distributions and either the node degree (regular graphs) or the average
degree (arbitrary graphs).  The upper bounds capture a worst case and are
the decision-making quantity when the full model is unobservable.

Note on the exponential lower bound: the source derivation yields
alpha/(alpha+beta+eta) (the plain no-neighbor renewal ratio), but the
stated result prints alpha/(alpha+beta+gamma).  We implement the derived
form, and the report's ``notes``/``printed_lower`` fields carry the other
value so the discrepancy stays visible instead of silently corrected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import dist
from .errors import InvalidParameterError

__all__ = [
    "BoundsReport",
    "bounds_general_regular",
    "bounds_exp_regular",
    "bounds_lomax_regular",
    "bounds_exp_arbitrary",
    "bounds_lomax_arbitrary",
]


@dataclass(frozen=True)
class BoundsReport:
    lower: float
    upper: float
    theorem: str
    inputs: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    printed_lower: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise InvalidParameterError(
                f"need 0 <= lower <= upper <= 1, got [{self.lower}, {self.upper}]")

    def contains(self, q: float) -> bool:
        return self.lower <= q <= self.upper


def _validate_exp(alpha, beta, eta, gamma, mu):
    for name, v in (("alpha", alpha), ("beta", beta), ("eta", eta)):
        if not (v > 0):
            raise InvalidParameterError(f"{name} must be > 0, got {v}")
    if gamma < 0:
        raise InvalidParameterError(f"gamma must be >= 0, got {gamma}")
    if mu < 0:
        raise InvalidParameterError(f"mu must be >= 0, got {mu}")


def _validate_lomax(lam, alpha1, alpha2, gam, beta1, beta2, mu):
    for name, v in (("lam", lam), ("gam", gam)):
        if not (v > 0):
            raise InvalidParameterError(f"{name} must be > 0, got {v}")
    for name, v in (("alpha1", alpha1), ("alpha2", alpha2),
                    ("beta1", beta1), ("beta2", beta2)):
        if not (v > 1):
            raise InvalidParameterError(
                f"{name} must be > 1 for a finite mean, got {v}")
    if mu < 0:
        raise InvalidParameterError(f"mu must be >= 0, got {mu}")


_ERRATUM_NOTE = ("lower bound implemented as alpha/(alpha+beta+eta) per the "
                 "derivation; the printed statement has alpha/(alpha+beta+gamma) "
                 "(reported in printed_lower)")


def bounds_general_regular(model: dist.AttackDefenseModel,
                           k_mean: float) -> BoundsReport:
    """Distribution-free bounds for a regular graph from the marginal
    survival functions and the expected number k_mean of compromised
    neighbors (supplied by the caller, e.g. from data or q*mu).

    lower = I_D / (int F1bar + I_D),
    upper = I_D / (int F1bar * F2bar^k_mean + I_D),
    all integrals over [0, inf) by adaptive quadrature.
    """
    if k_mean < 0:
        raise InvalidParameterError(f"k_mean must be >= 0, got {k_mean}")
    i_d = dist.defense_diag_integral(model)
    int_f1 = dist.integrate_survival(lambda x: dist.survival(model, dist.X1, x))
    if k_mean == 0.0:
        int_upper = int_f1
    else:
        int_upper = dist.integrate_survival(
            lambda x: dist.survival(model, dist.X1, x)
            * dist.survival(model, dist.X2, x) ** k_mean)
    return BoundsReport(
        lower=i_d / (int_f1 + i_d),
        upper=i_d / (int_upper + i_d),
        theorem="general-regular",
        inputs={"regime": model.regime, "k_mean": k_mean},
    )


def bounds_exp_regular(alpha: float, beta: float, eta: float, gamma: float,
                       mu: float) -> BoundsReport:
    """Exponential-regime bounds for a mu-regular graph.  The upper bound
    is the root of the self-consistent quadratic; at mu*gamma = 0 it
    degenerates to the lower bound (the analytic limit, not 0/0)."""
    _validate_exp(alpha, beta, eta, gamma, mu)
    lower = alpha / (alpha + beta + eta)
    mg = mu * gamma
    if mg == 0.0:
        upper = lower
    else:
        b = beta + eta + alpha - mg
        upper = (-b + math.sqrt(b * b + 4.0 * mg * alpha)) / (2.0 * mg)
    return BoundsReport(
        lower=lower, upper=min(upper, 1.0), theorem="exp-regular",
        inputs={"alpha": alpha, "beta": beta, "eta": eta,
                "gamma": gamma, "mu": mu},
        notes=(_ERRATUM_NOTE,),
        printed_lower=alpha / (alpha + beta + gamma),
    )


def bounds_lomax_regular(lam: float, alpha1: float, alpha2: float, gam: float,
                         beta1: float, beta2: float, mu: float) -> BoundsReport:
    """Heavy-tailed (Lomax) bounds for a mu-regular graph."""
    _validate_lomax(lam, alpha1, alpha2, gam, beta1, beta2, mu)
    lower = gam * (alpha1 - 1.0) / (lam * (beta1 + beta2 - 1.0)
                                    + gam * (alpha1 - 1.0))
    if mu == 0.0:
        upper = lower
    else:
        b = lam * (beta1 + beta2 - 1.0) + gam * (alpha1 - 1.0) - gam * alpha2 * mu
        upper = (-b + math.sqrt(b * b + 4.0 * gam * gam * alpha2
                                * (alpha1 - 1.0) * mu)) / (2.0 * alpha2 * gam * mu)
    return BoundsReport(
        lower=lower, upper=min(upper, 1.0), theorem="lomax-regular",
        inputs={"lam": lam, "alpha1": alpha1, "alpha2": alpha2,
                "gam": gam, "beta1": beta1, "beta2": beta2, "mu": mu},
    )


def bounds_exp_arbitrary(alpha: float, beta: float, eta: float, gamma: float,
                         mu: float) -> BoundsReport:
    """Exponential-regime bounds for an arbitrary graph of average degree mu."""
    _validate_exp(alpha, beta, eta, gamma, mu)
    lower = alpha / (alpha + beta + eta)
    upper = (alpha + gamma * mu) / (alpha + beta + eta + gamma * mu)
    return BoundsReport(
        lower=lower, upper=upper, theorem="exp-arbitrary",
        inputs={"alpha": alpha, "beta": beta, "eta": eta,
                "gamma": gamma, "mu": mu},
        notes=(_ERRATUM_NOTE,),
        printed_lower=alpha / (alpha + beta + gamma),
    )


def bounds_lomax_arbitrary(lam: float, alpha1: float, alpha2: float, gam: float,
                           beta1: float, beta2: float, mu: float) -> BoundsReport:
    """Lomax bounds for an arbitrary graph of average degree mu."""
    _validate_lomax(lam, alpha1, alpha2, gam, beta1, beta2, mu)
    denom_l = lam * (beta1 + beta2 - 1.0) + gam * (alpha1 - 1.0)
    lower = gam * (alpha1 - 1.0) / denom_l
    num_u = gam * (alpha1 + alpha2 * mu - 1.0)
    upper = num_u / (lam * (beta1 + beta2 - 1.0) + num_u)
    return BoundsReport(
        lower=lower, upper=upper, theorem="lomax-arbitrary",
        inputs={"lam": lam, "alpha1": alpha1, "alpha2": alpha2,
                "gam": gam, "beta1": beta1, "beta2": beta2, "mu": mu},
    )
