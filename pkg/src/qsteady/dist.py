"""Attack and defense random variables under each distributional regime.

A model bundles the law of the external-attack time X1, the per-neighbor
attack times X2 (one per compromised neighbor), and the reactive/proactive
recovery times Y1, Y2.  Four parametric regimes have closed-form diagonal
survival integrals; a fifth ("tabulated") accepts sampled survival curves
and integrates them numerically.

Parameter layout (attack tuple / defense tuple):

  exponential     (alpha, gamma)            (beta, eta)          all rates
  weibull         (lambda1, lambda2, a)     (gamma1, gamma2, b)  scales+shape
  lomax           (lam, alpha1, alpha2)     (gam, beta1, beta2)  scale+shapes
  marshall_olkin  (lam, shock_ind, shock_all) (gamma1, gamma2, gamma12)

The Marshall-Olkin attack dependence is the exchangeable two-level family:
each compromised neighbor carries an individual shock at rate shock_ind and
one shared shock at rate shock_all kills every component at once.  The
fully general shock model has a parameter per neighbor subset, which no
practical interface can accept; the two-level family keeps the positive
dependence and reduces to independence at shock_all=0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.integrate import quad

from .errors import InvalidParameterError, NumericError, UnsupportedOperationError

__all__ = [
    "EXPONENTIAL",
    "WEIBULL",
    "LOMAX",
    "MARSHALL_OLKIN",
    "TABULATED",
    "TabulatedCurve",
    "AttackDefenseModel",
    "survival",
    "sample",
    "sample_attack_vector",
    "sample_compromised_duration",
    "attack_diag_integral",
    "defense_diag_integral",
    "mo_phi",
    "integrate_survival",
]

EXPONENTIAL = "exponential"
WEIBULL = "weibull"
LOMAX = "lomax"
MARSHALL_OLKIN = "marshall_olkin"
TABULATED = "tabulated"

REGIMES = (EXPONENTIAL, WEIBULL, LOMAX, MARSHALL_OLKIN, TABULATED)

X1, X2, Y1, Y2 = "X1", "X2", "Y1", "Y2"

# Tail height above which a tabulated curve may not simply be cut off.
_TAIL_EPS = 1e-9


def _require_positive(name, value):
    if not (value > 0) or not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite and > 0, got {value}")


def _require_nonneg(name, value):
    if not (value >= 0) or not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class TabulatedCurve:
    """A survival function sampled at increasing x, linearly interpolated.

    The first sample must sit at x=0 with value 1.  Beyond the last sample
    the curve is treated as zero, which is only legitimate when the last
    sampled value is already below 1e-9; otherwise integrating it would
    silently bias the result, so the integral raises instead.
    """

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self):
        xs, ys = self.xs, self.ys
        if len(xs) != len(ys) or len(xs) < 2:
            raise InvalidParameterError("curve needs >= 2 (x, survival) samples")
        if xs[0] != 0.0 or abs(ys[0] - 1.0) > 1e-9:
            raise InvalidParameterError("curve must start at (0, 1)")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidParameterError("curve x values must be strictly increasing")
        if any(y < -1e-12 or y > 1.0 + 1e-12 for y in ys):
            raise InvalidParameterError("curve values must lie in [0, 1]")
        if any(b > a + 1e-9 for a, b in zip(ys, ys[1:])):
            raise InvalidParameterError("curve must be non-increasing")

    @classmethod
    def from_points(cls, xs, ys) -> "TabulatedCurve":
        return cls(tuple(float(x) for x in xs), tuple(float(y) for y in ys))

    @classmethod
    def from_csv(cls, path) -> "TabulatedCurve":
        data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
        if data.shape[1] != 2:
            raise InvalidParameterError(f"{path}: expected two columns x,survival")
        return cls.from_points(data[:, 0], data[:, 1])

    def value(self, x: float) -> float:
        if x <= 0.0:
            return 1.0
        if x >= self.xs[-1]:
            return float(self.ys[-1]) if x == self.xs[-1] else 0.0
        return float(np.interp(x, self.xs, self.ys))

    def integral(self) -> float:
        if self.ys[-1] >= _TAIL_EPS:
            raise NumericError(
                "tabulated curve tail not negligible: last value "
                f"{self.ys[-1]:.3g} >= {_TAIL_EPS:g}; extend the sampled range",
                residual=float(self.ys[-1]),
            )
        # Exact integral of the linear interpolant.
        return float(np.trapezoid(np.asarray(self.ys), np.asarray(self.xs)))


@dataclass(frozen=True)
class AttackDefenseModel:
    """Distributions and dependence of (X1, X2's, Y1, Y2) under one regime."""

    regime: str
    attack: tuple[float, ...] = ()
    defense: tuple[float, ...] = ()
    attack_curves: Mapping[int, TabulatedCurve] | None = field(default=None)
    defense_curve: TabulatedCurve | None = field(default=None)

    @classmethod
    def exponential(cls, alpha: float, gamma: float, beta: float, eta: float):
        _require_positive("alpha", alpha)
        _require_nonneg("gamma", gamma)
        _require_positive("beta", beta)
        _require_positive("eta", eta)
        return cls(EXPONENTIAL, (float(alpha), float(gamma)), (float(beta), float(eta)))

    @classmethod
    def weibull(cls, lambda1: float, lambda2: float, attack_shape: float,
                gamma1: float, gamma2: float, defense_shape: float):
        _require_positive("lambda1", lambda1)
        _require_nonneg("lambda2", lambda2)
        _require_positive("attack_shape", attack_shape)
        _require_positive("gamma1", gamma1)
        _require_positive("gamma2", gamma2)
        _require_positive("defense_shape", defense_shape)
        return cls(
            WEIBULL,
            (float(lambda1), float(lambda2), float(attack_shape)),
            (float(gamma1), float(gamma2), float(defense_shape)),
        )

    @classmethod
    def lomax(cls, attack_scale: float, alpha1: float, alpha2: float,
              defense_scale: float, beta1: float, beta2: float):
        _require_positive("attack_scale", attack_scale)
        _require_positive("defense_scale", defense_scale)
        for name, shape in (("alpha1", alpha1), ("alpha2", alpha2),
                            ("beta1", beta1), ("beta2", beta2)):
            if not (shape > 1) or not math.isfinite(shape):
                raise InvalidParameterError(
                    f"{name} must be > 1 for a finite mean, got {shape}")
        return cls(
            LOMAX,
            (float(attack_scale), float(alpha1), float(alpha2)),
            (float(defense_scale), float(beta1), float(beta2)),
        )

    @classmethod
    def marshall_olkin(cls, x1_rate: float, shock_individual: float,
                       shock_global: float, gamma1: float, gamma2: float,
                       gamma12: float):
        _require_positive("x1_rate", x1_rate)
        _require_nonneg("shock_individual", shock_individual)
        _require_nonneg("shock_global", shock_global)
        _require_nonneg("gamma1", gamma1)
        _require_nonneg("gamma2", gamma2)
        _require_nonneg("gamma12", gamma12)
        if gamma1 + gamma2 + gamma12 <= 0:
            raise InvalidParameterError("gamma1 + gamma2 + gamma12 must be > 0")
        return cls(
            MARSHALL_OLKIN,
            (float(x1_rate), float(shock_individual), float(shock_global)),
            (float(gamma1), float(gamma2), float(gamma12)),
        )

    @classmethod
    def tabulated(cls, attack_curves: Mapping[int, TabulatedCurve],
                  defense_curve: TabulatedCurve):
        curves = dict(attack_curves)
        if not curves:
            raise InvalidParameterError("need at least one attack diagonal curve")
        for k in curves:
            if not isinstance(k, int) or k < 0:
                raise InvalidParameterError(f"curve key {k!r} must be a count >= 0")
        return cls(TABULATED, (), (), attack_curves=curves,
                   defense_curve=defense_curve)

    @property
    def samplable(self) -> bool:
        return self.regime != TABULATED


def _marginal_rate(model: AttackDefenseModel, which: str) -> float:
    """Exponential rate of the requested marginal for rate-based regimes."""
    if model.regime == EXPONENTIAL:
        alpha, gamma = model.attack
        beta, eta = model.defense
        return {X1: alpha, X2: gamma, Y1: beta, Y2: eta}[which]
    lam, ind, glob = model.attack
    g1, g2, g12 = model.defense
    return {X1: lam, X2: ind + glob, Y1: g1 + g12, Y2: g2 + g12}[which]


def survival(model: AttackDefenseModel, which: str, x: float) -> float:
    """Marginal survival probability P(T > x) of one of X1, X2, Y1, Y2."""
    if which not in (X1, X2, Y1, Y2):
        raise InvalidParameterError(f"unknown variable {which!r}")
    if x < 0:
        raise InvalidParameterError(f"x must be >= 0, got {x}")
    if model.regime == TABULATED:
        raise UnsupportedOperationError(
            "tabulated models carry only joint diagonals; marginals are undefined")
    if model.regime in (EXPONENTIAL, MARSHALL_OLKIN):
        return math.exp(-_marginal_rate(model, which) * x)
    if model.regime == WEIBULL:
        l1, l2, a = model.attack
        g1, g2, b = model.defense
        scale, shape = {X1: (l1, a), X2: (l2, a), Y1: (g1, b), Y2: (g2, b)}[which]
        return math.exp(-((scale * x) ** shape))
    # lomax
    lam, a1, a2 = model.attack
    gam, b1, b2 = model.defense
    scale, shape = {X1: (lam, a1), X2: (lam, a2), Y1: (gam, b1), Y2: (gam, b2)}[which]
    return (1.0 + x / scale) ** (-shape)


def sample(model: AttackDefenseModel, which: str, rng: np.random.Generator) -> float:
    """One marginal draw.  A zero-rate marginal (e.g. gamma=0) never fires
    and returns +inf."""
    if which not in (X1, X2, Y1, Y2):
        raise InvalidParameterError(f"unknown variable {which!r}")
    if model.regime == TABULATED:
        raise UnsupportedOperationError("tabulated models cannot be sampled")
    if model.regime in (EXPONENTIAL, MARSHALL_OLKIN):
        rate = _marginal_rate(model, which)
        return float(rng.exponential(1.0 / rate)) if rate > 0 else math.inf
    if model.regime == WEIBULL:
        l1, l2, a = model.attack
        g1, g2, b = model.defense
        scale, shape = {X1: (l1, a), X2: (l2, a), Y1: (g1, b), Y2: (g2, b)}[which]
        if scale <= 0:
            return math.inf
        return float(rng.weibull(shape) / scale)
    lam, a1, a2 = model.attack
    gam, b1, b2 = model.defense
    scale, shape = {X1: (lam, a1), X2: (lam, a2), Y1: (gam, b1), Y2: (gam, b2)}[which]
    return float(scale * rng.pareto(shape))


def sample_attack_vector(model: AttackDefenseModel, k: int,
                         rng: np.random.Generator) -> tuple[float, list[float]]:
    """Joint draw of (X1, X2_1..X2_k) honoring the regime's dependence.

    Independent product for exponential/weibull/lomax; for marshall_olkin
    each X2_i is the minimum of its own shock and one shared global shock.
    """
    if k < 0:
        raise InvalidParameterError(f"k must be >= 0, got {k}")
    if model.regime == TABULATED:
        raise UnsupportedOperationError("tabulated models cannot be sampled")
    x1 = sample(model, X1, rng)
    if model.regime != MARSHALL_OLKIN:
        return x1, [sample(model, X2, rng) for _ in range(k)]
    _, ind, glob = model.attack
    shared = float(rng.exponential(1.0 / glob)) if glob > 0 else math.inf
    x2 = []
    for _ in range(k):
        own = float(rng.exponential(1.0 / ind)) if ind > 0 else math.inf
        x2.append(min(own, shared))
    return x1, x2


def sample_compromised_duration(model: AttackDefenseModel,
                                rng: np.random.Generator) -> float:
    """Draw C = min(Y1, Y2) jointly, using the closed-form law of the
    minimum for each regime."""
    if model.regime == TABULATED:
        raise UnsupportedOperationError("tabulated models cannot be sampled")
    if model.regime == EXPONENTIAL:
        beta, eta = model.defense
        return float(rng.exponential(1.0 / (beta + eta)))
    if model.regime == WEIBULL:
        g1, g2, b = model.defense
        scale = (g1 ** b + g2 ** b) ** (1.0 / b)
        return float(rng.weibull(b) / scale)
    if model.regime == LOMAX:
        gam, b1, b2 = model.defense
        return float(gam * rng.pareto(b1 + b2))
    g1, g2, g12 = model.defense
    return float(rng.exponential(1.0 / (g1 + g2 + g12)))


def mo_phi(model: AttackDefenseModel, k: int) -> float:
    """Cumulative shock rate hitting at least one of k components in the
    two-level Marshall-Olkin family: k*shock_ind + shock_all for k >= 1."""
    if model.regime != MARSHALL_OLKIN:
        raise UnsupportedOperationError(f"mo_phi undefined for regime {model.regime}")
    if k < 0 or k != int(k):
        raise InvalidParameterError(f"k must be a nonnegative integer, got {k}")
    k = int(k)
    if k == 0:
        return 0.0
    _, ind, glob = model.attack
    return k * ind + glob


def attack_diag_integral(model: AttackDefenseModel, k) -> float:
    """Expected secure duration given k compromised neighbors:
    the integral over [0, inf) of the joint attack survival evaluated on
    the diagonal, P(X1 > x, X2_1 > x, ..., X2_k > x).

    Non-integer k is accepted only for the exponential and weibull closed
    forms (the normal-approximation path integrates over real k).
    """
    if k < 0 or not math.isfinite(k):
        raise InvalidParameterError(f"k must be finite and >= 0, got {k}")
    integral = k != int(k)
    if model.regime == EXPONENTIAL:
        alpha, gamma = model.attack
        return 1.0 / (alpha + gamma * k)
    if model.regime == WEIBULL:
        l1, l2, a = model.attack
        return math.gamma(1.0 + 1.0 / a) / (l1 ** a + k * l2 ** a) ** (1.0 / a)
    if integral:
        raise UnsupportedOperationError(
            f"non-integer k={k} only supported for exponential/weibull regimes")
    k = int(k)
    if model.regime == LOMAX:
        lam, a1, a2 = model.attack
        return lam / (a1 + k * a2 - 1.0)
    if model.regime == MARSHALL_OLKIN:
        lam = model.attack[0]
        return 1.0 / (lam + mo_phi(model, k))
    curve = model.attack_curves.get(k)
    if curve is None:
        raise UnsupportedOperationError(
            f"tabulated model has no attack diagonal curve for k={k}")
    return curve.integral()


def defense_diag_integral(model: AttackDefenseModel) -> float:
    """Expected compromised duration E[min(Y1, Y2)], via the defense joint
    survival on the diagonal."""
    if model.regime == EXPONENTIAL:
        beta, eta = model.defense
        return 1.0 / (beta + eta)
    if model.regime == WEIBULL:
        g1, g2, b = model.defense
        return math.gamma(1.0 + 1.0 / b) / (g1 ** b + g2 ** b) ** (1.0 / b)
    if model.regime == LOMAX:
        gam, b1, b2 = model.defense
        return gam / (b1 + b2 - 1.0)
    if model.regime == MARSHALL_OLKIN:
        g1, g2, g12 = model.defense
        return 1.0 / (g1 + g2 + g12)
    if model.defense_curve is None:
        raise UnsupportedOperationError("tabulated model has no defense curve")
    return model.defense_curve.integral()


def integrate_survival(fn, rel_tol: float = 1e-8, abs_tol: float = 1e-12) -> float:
    """Adaptive quadrature of a non-increasing integrable fn over [0, inf),
    via the substitution x = t/(1-t) onto [0, 1)."""

    def transformed(t):
        u = 1.0 - t
        return fn(t / u) / (u * u)

    out = quad(transformed, 0.0, 1.0, epsabs=abs_tol, epsrel=rel_tol,
               limit=500, full_output=1)
    value, abserr = out[0], out[1]
    if len(out) > 3:  # quad appends an explanation message on failure
        raise NumericError(f"survival quadrature did not converge: {out[3]}",
                           residual=abserr)
    if abserr > 100.0 * max(abs_tol, rel_tol * abs(value)):
        raise NumericError(
            f"survival quadrature error estimate {abserr:.3g} exceeds tolerance",
            residual=abserr)
    return float(value)
