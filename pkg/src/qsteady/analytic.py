"""Steady-state compromise probability from the renewal-ratio identity.

The central quantity is m, the ratio of expected secure duration to
expected compromised duration; a node's compromise probability is then
q(v) = 1/(1+m).  This module computes m exactly from a distribution of
the compromised-neighbor count K, solves the regular-graph self-consistent
equation, and evaluates the normal/Poisson approximations used when the
degree is too large for the exact binomial sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

from . import dist
from .errors import (
    DataError,
    InvalidParameterError,
    NumericError,
    UnsupportedOperationError,
)

__all__ = [
    "KDistribution",
    "QReport",
    "FixedPointSolution",
    "binomial_pmf",
    "q_of_v",
    "m_general",
    "solve_regular_fixed_point",
    "solve_regular_fixed_point_full",
    "m_normal_approx",
    "normal_truncation_mass",
    "m_poisson_approx",
    "k_pmf_empirical",
    "q_global",
    "q_global_weighted",
]

_PMF_TOL = 1e-9


def binomial_pmf(mu: int, q: float) -> np.ndarray:
    """Binomial(mu, q) pmf over 0..mu.  Exact integer coefficients up to
    mu=50, log-space beyond to avoid overflow."""
    if mu < 0:
        raise InvalidParameterError("mu must be >= 0")
    if not (0.0 <= q <= 1.0):
        raise InvalidParameterError(f"q must be in [0,1], got {q}")
    k = np.arange(mu + 1)
    if q == 0.0 or q == 1.0:
        pmf = np.zeros(mu + 1)
        pmf[mu if q == 1.0 else 0] = 1.0
        return pmf
    if mu <= 50:
        return np.array([math.comb(mu, i) * q**i * (1 - q) ** (mu - i)
                         for i in range(mu + 1)])
    logc = (math.lgamma(mu + 1)
            - np.array([math.lgamma(i + 1) + math.lgamma(mu - i + 1) for i in k]))
    return np.exp(logc + k * math.log(q) + (mu - k) * math.log1p(-q))


@dataclass(frozen=True)
class KDistribution:
    """Distribution of the number of compromised neighbors K(v).

    kind is one of "binomial", "empirical", "degenerate", "moments".
    The first three carry an explicit pmf over 0..deg and feed the exact
    expectation; "moments" carries only (mean, variance) and is reserved
    for the normal approximation.
    """

    kind: str
    deg: int
    pmf: tuple[float, ...] | None = None
    mean: float | None = None
    variance: float | None = None

    @classmethod
    def binomial(cls, mu: int, q: float) -> "KDistribution":
        return cls("binomial", mu, tuple(binomial_pmf(mu, q)))

    @classmethod
    def empirical(cls, pmf, deg: int) -> "KDistribution":
        probs = np.zeros(deg + 1)
        if isinstance(pmf, dict):
            for k, p in pmf.items():
                if not (0 <= int(k) <= deg):
                    raise InvalidParameterError(f"pmf key {k} outside 0..{deg}")
                probs[int(k)] = p
        else:
            probs[: len(pmf)] = pmf
        if (probs < -_PMF_TOL).any():
            raise InvalidParameterError("pmf entries must be nonnegative")
        if abs(probs.sum() - 1.0) > _PMF_TOL:
            raise InvalidParameterError(
                f"pmf must sum to 1 within {_PMF_TOL}, got {probs.sum()}")
        return cls("empirical", deg, tuple(probs))

    @classmethod
    def degenerate(cls, k: int) -> "KDistribution":
        if k < 0:
            raise InvalidParameterError("k must be >= 0")
        probs = [0.0] * (k + 1)
        probs[k] = 1.0
        return cls("degenerate", k, tuple(probs))

    @classmethod
    def moments(cls, mean: float, variance: float, deg: int) -> "KDistribution":
        if not (0.0 <= mean <= deg):
            raise InvalidParameterError(f"mean {mean} outside [0, {deg}]")
        if variance < 0:
            raise InvalidParameterError("variance must be >= 0")
        return cls("moments", deg, None, mean, variance)


@dataclass(frozen=True)
class QReport:
    """Per-node and global compromise probabilities plus provenance."""

    method: str
    global_q: float
    per_node: dict = field(default_factory=dict)
    m: float | None = None
    bounds: tuple[float, float] | None = None
    weighted: float | None = None
    diagnostics: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        for v, qv in self.per_node.items():
            if not (0.0 <= qv <= 1.0):
                raise InvalidParameterError(f"q({v})={qv} outside [0,1]")
        if self.per_node:
            mean = sum(self.per_node.values()) / len(self.per_node)
            if abs(mean - self.global_q) > 1e-12:
                raise InvalidParameterError(
                    "global q must be the mean of the per-node values")


def q_of_v(m: float) -> float:
    """Compromise probability from the secure/compromised duration ratio."""
    if m < 0 or not math.isfinite(m):
        raise InvalidParameterError(f"m must be finite and >= 0, got {m}")
    return 1.0 / (1.0 + m)


def m_general(kdist: KDistribution, model: dist.AttackDefenseModel) -> float:
    """Exact m = E[I_A(K)] / I_D for a K distribution with explicit pmf."""
    if kdist.kind == "moments":
        raise UnsupportedOperationError(
            "moments-only K routes to m_normal_approx, not the exact sum")
    i_d = dist.defense_diag_integral(model)
    total = 0.0
    for k, p in enumerate(kdist.pmf):
        if p > 0.0:
            total += p * dist.attack_diag_integral(model, k)
    return total / i_d


@dataclass(frozen=True)
class FixedPointSolution:
    q: float
    residual: float
    iterations: int
    multiple_roots: bool
    brackets: tuple[tuple[float, float], ...]


def _fixed_point_residual(mu, model, i_d):
    i_a = [dist.attack_diag_integral(model, k) for k in range(mu + 1)]

    def residual(q):
        pmf = binomial_pmf(mu, q)
        s = 0.0
        for k in range(mu + 1):
            s += pmf[k] * i_a[k]
        return q + q * s / i_d - 1.0

    return residual


def solve_regular_fixed_point_full(mu: int, model: dist.AttackDefenseModel,
                                   tol: float = 1e-10,
                                   max_iter: int = 200) -> FixedPointSolution:
    """Solve the regular-graph self-consistency equation for q.

    The residual q*(1 + E[I_A(Binomial(mu, q))]/I_D) - 1 is -1 at q=0 and
    positive at q=1, so a root always exists.  A 1024-point pre-scan finds
    every sign-change bracket (multiple roots are flagged, and the smallest
    root is returned for reproducibility); bisection on the first bracket
    is followed by a Newton polish with a numerical derivative.
    """
    if mu < 0 or mu != int(mu):
        raise InvalidParameterError(f"mu must be a nonnegative integer, got {mu}")
    mu = int(mu)
    i_d = dist.defense_diag_integral(model)
    residual = _fixed_point_residual(mu, model, i_d)

    grid = np.linspace(0.0, 1.0, 1025)
    vals = np.array([residual(g) for g in grid])
    brackets = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            brackets.append((grid[i], grid[i]))
        elif vals[i] < 0.0 < vals[i + 1] or vals[i] > 0.0 > vals[i + 1]:
            brackets.append((grid[i], grid[i + 1]))
    if vals[-1] == 0.0:
        brackets.append((1.0, 1.0))
    if not brackets:
        raise NumericError("no sign change found on [0,1]",
                           residual=float(np.min(np.abs(vals))))

    lo, hi = brackets[0]
    iterations = 0
    if lo == hi:
        root = lo
    else:
        flo = residual(lo)
        for _ in range(max_iter):
            iterations += 1
            mid = 0.5 * (lo + hi)
            fmid = residual(mid)
            if abs(fmid) <= tol or (hi - lo) < 1e-15:
                break
            if (flo < 0) == (fmid < 0):
                lo, flo = mid, fmid
            else:
                hi = mid
        root = 0.5 * (lo + hi)

    # Newton polish; keep the bisection answer if a step leaves [lo, hi]
    # or fails to improve the residual.
    h = 1e-7
    best, best_f = root, abs(residual(root))
    x = root
    for _ in range(8):
        fx = residual(x)
        d = (residual(min(x + h, 1.0)) - residual(max(x - h, 0.0))) / (
            min(x + h, 1.0) - max(x - h, 0.0))
        if d == 0.0:
            break
        x_new = x - fx / d
        if not (brackets[0][0] - 1e-9 <= x_new <= brackets[0][1] + 1e-9):
            break
        iterations += 1
        f_new = abs(residual(x_new))
        if f_new < best_f:
            best, best_f = x_new, f_new
        if f_new <= tol * 1e-2:
            break
        x = x_new

    if best_f > tol:
        raise NumericError(
            f"fixed point residual {best_f:.3g} above tolerance {tol:g} "
            f"(last bracket [{lo}, {hi}])", residual=best_f)
    return FixedPointSolution(q=float(best), residual=float(best_f),
                              iterations=iterations,
                              multiple_roots=len(brackets) > 1,
                              brackets=tuple(brackets))


def solve_regular_fixed_point(mu: int, model: dist.AttackDefenseModel,
                              tol: float = 1e-10) -> float:
    return solve_regular_fixed_point_full(mu, model, tol=tol).q


def m_normal_approx(deg: float, k_mean: float, k_var: float,
                    model: dist.AttackDefenseModel) -> float:
    """m with K replaced by an (untruncated, unrenormalized) normal density
    integrated over [0, deg].  Exponential and weibull regimes only, since
    the integrand needs the closed form at real k."""
    if k_var <= 0:
        raise InvalidParameterError(f"variance must be > 0, got {k_var}")
    if deg < 1:
        raise InvalidParameterError(f"deg must be >= 1, got {deg}")
    if model.regime not in (dist.EXPONENTIAL, dist.WEIBULL):
        raise UnsupportedOperationError(
            f"normal approximation needs real-k closed forms; regime "
            f"{model.regime} has none")
    sigma = math.sqrt(k_var)
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * sigma)

    def integrand(k):
        z = (k - k_mean) / sigma
        return norm * math.exp(-0.5 * z * z) * dist.attack_diag_integral(model, k)

    value, abserr = quad(integrand, 0.0, deg, epsabs=1e-12, epsrel=1e-8,
                         limit=500)[:2]
    if abserr > 100.0 * max(1e-12, 1e-8 * abs(value)):
        raise NumericError("normal-approximation quadrature did not converge",
                           residual=abserr)
    return value / dist.defense_diag_integral(model)


def normal_truncation_mass(deg: float, k_mean: float, k_var: float) -> float:
    """Normal mass the [0, deg] window actually captures; 1 minus this is
    the bias the unrenormalized approximation silently drops."""
    sigma = math.sqrt(k_var)
    return float(ndtr((deg - k_mean) / sigma) - ndtr((0.0 - k_mean) / sigma))


def m_poisson_approx(deg: int, k_mean: float, model: dist.AttackDefenseModel) -> float:
    """m with K replaced by a Poisson(k_mean) pmf truncated at deg, terms
    accumulated in increasing k with log-space weights."""
    if k_mean < 0:
        raise InvalidParameterError(f"k_mean must be >= 0, got {k_mean}")
    if deg < 0 or deg != int(deg):
        raise InvalidParameterError(f"deg must be a nonnegative integer, got {deg}")
    deg = int(deg)
    i_d = dist.defense_diag_integral(model)
    if k_mean == 0.0:
        return dist.attack_diag_integral(model, 0) / i_d
    log_mean = math.log(k_mean)
    total = 0.0
    for i in range(deg + 1):
        logw = -k_mean + i * log_mean - math.lgamma(i + 1)
        if logw < -745.0:  # below exp underflow; later terms only when rising
            if i > k_mean:
                break
            continue
        total += math.exp(logw) * dist.attack_diag_integral(model, i)
    return total / i_d


def k_pmf_empirical(observations, deg: int) -> KDistribution:
    """Empirical pmf of K over 0..deg from observed neighbor counts."""
    obs = list(observations)
    if not obs:
        raise InvalidParameterError("need at least one observation")
    counts = np.zeros(deg + 1)
    for i, k in enumerate(obs):
        if k != int(k) or k < 0:
            raise DataError(f"observation #{i} = {k} is not a count")
        if k > deg:
            raise DataError(f"observation #{i} = {k} exceeds degree {deg}")
        counts[int(k)] += 1
    return KDistribution("empirical", deg, tuple(counts / len(obs)))


def q_global(per_node) -> float:
    """Global measure: plain average of the per-node probabilities."""
    if not per_node:
        raise InvalidParameterError("per-node map must be nonempty")
    vals = list(per_node.values())
    for v, qv in per_node.items():
        if not (0.0 <= qv <= 1.0):
            raise InvalidParameterError(f"q({v})={qv} outside [0,1]")
    return sum(vals) / len(vals)


def q_global_weighted(per_node, assets) -> float:
    """Asset-weighted global measure: sum of q(v)*asset(v) over n."""
    if set(per_node) != set(assets):
        raise InvalidParameterError("per-node and asset key sets must match")
    if not per_node:
        raise InvalidParameterError("per-node map must be nonempty")
    total = 0.0
    for v, qv in per_node.items():
        a = assets[v]
        if a < 0:
            raise InvalidParameterError(f"asset({v})={a} must be >= 0")
        total += qv * a
    return total / len(per_node)
