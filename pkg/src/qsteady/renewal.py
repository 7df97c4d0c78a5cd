"""Estimating q(v) from observed secure/compromised cycles alone.

When the low-level attack-defense process is not observable, a node's
alternation between secure intervals S_j and compromised intervals C_j
still identifies q(v) as the long-run ratio sum(C)/(sum(S)+sum(C)).
That ratio is only trustworthy when the cycle sequences behave: the
estimation procedure therefore checks steadiness of the running estimate,
serial independence of each duration sequence, cross-independence of the
(S, C) pairs, and finiteness of variances (heavy tails), and aborts a
node on any failed check.

The abort semantics need concrete tests; the choices here (rank-based
serial/cross correlation with a normal approximation, Hill tail-index
estimate on the top order statistics) are fixed by ``DiagnosticsConfig``
so every threshold can be audited and varied in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from .errors import DataError, InsufficientDataError, InvalidParameterError, \
    ProcedureAbortError

__all__ = [
    "CyclesTrace",
    "DiagnosticsConfig",
    "NodeEstimate",
    "RenewalEstimate",
    "estimate_node",
    "test_independence",
    "test_finite_variance",
    "estimate_procedure",
]

CSV_HEADER = "node_id,cycle_index,secure_duration,compromised_duration"

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
FINITE, HEAVY_TAIL = "finite", "heavy_tail"


@dataclass(frozen=True)
class CyclesTrace:
    """Per-node ordered (S_j, C_j) duration pairs, all strictly positive.

    ``cycles`` maps node id -> float array of shape (b, 2); column 0 holds
    secure durations, column 1 compromised durations.
    """

    cycles: dict

    def __post_init__(self):
        for v, arr in self.cycles.items():
            a = np.asarray(arr, dtype=np.float64)
            if a.size == 0:
                a = a.reshape(0, 2)
            if a.ndim != 2 or a.shape[1] != 2:
                raise DataError(f"node {v}: cycles must be (b, 2) pairs")
            if a.size and (not np.isfinite(a).all() or (a <= 0).any()):
                raise DataError(f"node {v}: durations must be positive and finite")
            self.cycles[v] = a

    @property
    def nodes(self):
        return sorted(self.cycles)

    def subset(self, nodes) -> "CyclesTrace":
        return CyclesTrace({v: self.cycles[v] for v in nodes})

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for v in self.nodes:
                for j, (s, c) in enumerate(self.cycles[v]):
                    fh.write("%d,%d,%.17g,%.17g\n" % (v, j, s, c))

    @classmethod
    def read_csv(cls, path) -> "CyclesTrace":
        per_node: dict[int, list] = {}
        with open(path) as fh:
            header = fh.readline().rstrip("\n")
            if header != CSV_HEADER:
                raise DataError(
                    f"{path}:1: expected header {CSV_HEADER!r}, got {header!r}")
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != 4:
                    raise DataError(f"{path}:{lineno}: expected 4 columns, "
                                    f"got {len(parts)}")
                try:
                    v = int(parts[0])
                    s = float(parts[2])
                    c = float(parts[3])
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: unparseable row "
                                    f"{line!r}") from exc
                if s <= 0 or c <= 0:
                    raise DataError(f"{path}:{lineno}: durations must be > 0")
                per_node.setdefault(v, []).append((s, c))
        return cls({v: np.array(rows) for v, rows in per_node.items()})

    @classmethod
    def merge(cls, traces) -> "CyclesTrace":
        merged: dict[int, list] = {}
        for tr in traces:
            for v, arr in tr.cycles.items():
                merged.setdefault(v, []).append(arr)
        return cls({v: np.vstack(chunks) for v, chunks in merged.items()})


@dataclass(frozen=True)
class DiagnosticsConfig:
    """Every tunable of the estimation procedure, in one auditable block."""

    significance: float = 0.05
    independence_min_len: int = 10
    variance_min_len: int = 50
    hill_fraction: float = 0.10
    tail_cutoff: float = 2.5
    heavy_point_cutoff: float = 2.0
    steady_window: int = 20
    steady_tol: float = 0.02
    run_steadiness: bool = True
    run_independence: bool = True
    run_variance: bool = True

    def with_all_tests_off(self) -> "DiagnosticsConfig":
        return replace(self, run_steadiness=False, run_independence=False,
                       run_variance=False)


def estimate_node(cycles) -> float:
    """Ratio estimate sum(C) / (sum(S) + sum(C)) from one node's cycles."""
    arr = np.asarray(cycles, dtype=np.float64)
    if arr.size == 0:
        raise InsufficientDataError("need at least one complete cycle")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DataError("cycles must be (S, C) pairs")
    w = float(arr[:, 0].sum())
    d = float(arr[:, 1].sum())
    return d / (w + d)


def _serial_rank_test(x: np.ndarray, significance: float,
                      min_len: int) -> tuple[str, float]:
    """Rank von Neumann test of serial independence (lag-1 rank
    autocorrelation in disguise), normal approximation."""
    n = len(x)
    if n < min_len:
        return INCONCLUSIVE, math.nan
    r = rankdata(x)
    denom = float(np.sum((r - r.mean()) ** 2))
    if denom == 0.0:
        return INCONCLUSIVE, math.nan
    rvn = float(np.sum(np.diff(r) ** 2)) / denom
    mean = 2.0 * (n - 1.0) / n
    var = 4.0 * (n - 2.0) * (5.0 * n * n - 2.0 * n - 9.0) / (
        5.0 * n * (n + 1.0) * (n - 1.0) ** 2)
    z = (rvn - mean) / math.sqrt(var)
    crit = float(ndtri(1.0 - significance / 2.0))
    return (FAIL if abs(z) > crit else PASS), z


def _cross_rank_test(x: np.ndarray, y: np.ndarray, significance: float,
                     min_len: int) -> tuple[str, float]:
    """Spearman correlation between paired sequences, normal approximation
    z = rho * sqrt(n - 1)."""
    n = len(x)
    if n < min_len:
        return INCONCLUSIVE, math.nan
    rx = rankdata(x) - (n + 1) / 2.0
    ry = rankdata(y) - (n + 1) / 2.0
    sx = float(np.sum(rx * rx))
    sy = float(np.sum(ry * ry))
    if sx == 0.0 or sy == 0.0:
        return INCONCLUSIVE, math.nan
    rho = float(np.sum(rx * ry)) / math.sqrt(sx * sy)
    z = rho * math.sqrt(n - 1.0)
    crit = float(ndtri(1.0 - significance / 2.0))
    return (FAIL if abs(z) > crit else PASS), z


def test_independence(seq, significance: float = 0.05,
                      min_len: int = 10) -> str:
    """Independence verdict for a duration sequence, or for paired (S, C)
    rows when given a 2-column input.

    Sequences use lag-1 rank autocorrelation (rank von Neumann), pairs use
    Spearman correlation; both with large-sample normal approximations.
    Shorter than min_len, or rank-degenerate (constant), is inconclusive.
    """
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 2:
        verdict, _ = _cross_rank_test(arr[:, 0], arr[:, 1], significance, min_len)
        return verdict
    if arr.ndim != 1:
        raise InvalidParameterError("expected a 1-d sequence or (b, 2) pairs")
    verdict, _ = _serial_rank_test(arr, significance, min_len)
    return verdict


def _hill_test(x: np.ndarray, fraction: float, cutoff: float,
               point_cutoff: float, min_len: int) -> tuple[str, float, float, float]:
    n = len(x)
    if n < min_len:
        return INCONCLUSIVE, math.nan, math.nan, math.nan
    xs = np.sort(np.asarray(x, dtype=np.float64))[::-1]
    k = max(2, int(math.ceil(fraction * n)))
    threshold = xs[k]
    if threshold <= 0.0 or xs[0] == threshold:
        return INCONCLUSIVE, math.nan, math.nan, math.nan
    hill = float(np.mean(np.log(xs[:k]) - math.log(threshold)))
    if hill <= 0.0:
        return INCONCLUSIVE, math.nan, math.nan, math.nan
    alpha_hat = 1.0 / hill
    half = 1.96 * alpha_hat / math.sqrt(k)
    lo, hi = alpha_hat - half, alpha_hat + half
    if alpha_hat <= point_cutoff and hi < cutoff:
        return HEAVY_TAIL, alpha_hat, lo, hi
    if lo > cutoff:
        return FINITE, alpha_hat, lo, hi
    return INCONCLUSIVE, alpha_hat, lo, hi


def test_finite_variance(seq, fraction: float = 0.10, cutoff: float = 2.5,
                         point_cutoff: float = 2.0, min_len: int = 50) -> str:
    """Heavy-tail screen via the Hill tail-index estimate on the top
    ``fraction`` order statistics.

    heavy_tail when the point estimate is <= ``point_cutoff`` and the
    asymptotic 95% interval sits entirely below ``cutoff``; finite when
    the interval sits entirely above ``cutoff``; inconclusive otherwise
    (including anything shorter than ``min_len``).
    """
    verdict, _, _, _ = _hill_test(np.asarray(seq, dtype=np.float64), fraction,
                                  cutoff, point_cutoff, min_len)
    return verdict


@dataclass(frozen=True)
class NodeEstimate:
    q_hat: float | None
    cycle_count: int
    secure_total: float
    compromised_total: float
    verdicts: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()
    aborted: bool = False
    abort_reason: str | None = None


@dataclass(frozen=True)
class RenewalEstimate:
    per_node: dict
    q_bar: float
    survivors: int
    abort_log: dict
    config: DiagnosticsConfig


def _estimate_one(v, arr: np.ndarray, cfg: DiagnosticsConfig):
    s, c = arr[:, 0], arr[:, 1]
    b = len(arr)
    w_tot, d_tot = float(s.sum()), float(c.sum())
    q_hat = d_tot / (w_tot + d_tot)
    verdicts: dict = {}
    warnings: list[str] = []

    def result(aborted=False, reason=None):
        return NodeEstimate(q_hat=q_hat, cycle_count=b, secure_total=w_tot,
                            compromised_total=d_tot, verdicts=verdicts,
                            warnings=tuple(warnings), aborted=aborted,
                            abort_reason=reason)

    if cfg.run_steadiness:
        from .sim import detect_steady  # deferred: sim also consumes CyclesTrace

        if b < 2 * cfg.steady_window:
            verdicts["steadiness"] = INCONCLUSIVE
            warnings.append("too few cycles for the steadiness check")
        else:
            durations = s + c
            times = np.cumsum(durations)
            prefix_q = np.cumsum(c) / np.cumsum(durations)
            verdict = detect_steady(list(zip(times, prefix_q)),
                                    cfg.steady_window, cfg.steady_tol)
            verdicts["steadiness"] = PASS if verdict.steady else FAIL
            if not verdict.steady:
                return result(aborted=True,
                              reason="running estimate never settled")

    if cfg.run_independence:
        for name, seq in (("independence_S", s), ("independence_C", c)):
            verdict, _ = _serial_rank_test(seq, cfg.significance,
                                           cfg.independence_min_len)
            verdicts[name] = verdict
            if verdict == FAIL:
                return result(aborted=True, reason=f"{name} rejected")
            if verdict == INCONCLUSIVE:
                warnings.append(f"{name} inconclusive")
        verdict, _ = _cross_rank_test(s, c, cfg.significance,
                                      cfg.independence_min_len)
        verdicts["independence_SC"] = verdict
        if verdict == FAIL:
            return result(aborted=True, reason="S and C pairs correlated")
        if verdict == INCONCLUSIVE:
            warnings.append("independence_SC inconclusive")

    if cfg.run_variance:
        for name, seq in (("variance_S", s), ("variance_C", c)):
            verdict = test_finite_variance(seq, cfg.hill_fraction,
                                           cfg.tail_cutoff,
                                           cfg.heavy_point_cutoff,
                                           cfg.variance_min_len)
            verdicts[name] = verdict
            if verdict == HEAVY_TAIL:
                return result(aborted=True, reason=f"{name} heavy-tailed")
            if verdict == INCONCLUSIVE:
                warnings.append(f"{name} inconclusive")

    return result()


def estimate_procedure(traces: CyclesTrace,
                       options: DiagnosticsConfig | None = None) -> RenewalEstimate:
    """Run the full per-node estimation procedure over sampled nodes.

    A node aborts on a failed steadiness / independence / finite-variance
    check (inconclusive checks proceed with a warning: underpowered data
    should not make the procedure unusable).  Surviving nodes contribute
    sum(C)/(sum(S)+sum(C)); the aggregate is their plain mean.  If every
    node aborts, the whole procedure aborts.
    """
    cfg = options or DiagnosticsConfig()
    if not traces.cycles:
        raise InsufficientDataError("trace contains no nodes")
    per_node: dict = {}
    abort_log: dict = {}
    for v in traces.nodes:
        arr = traces.cycles[v]
        if len(arr) < 1:
            est = NodeEstimate(q_hat=None, cycle_count=0, secure_total=0.0,
                               compromised_total=0.0, aborted=True,
                               abort_reason="no complete cycles")
        else:
            est = _estimate_one(v, arr, cfg)
        per_node[v] = est
        if est.aborted:
            abort_log[v] = est.abort_reason
    survivors = [v for v, est in per_node.items() if not est.aborted]
    if not survivors:
        raise ProcedureAbortError(
            f"all {len(per_node)} nodes aborted", abort_log=abort_log)
    q_bar = sum(per_node[v].q_hat for v in survivors) / len(survivors)
    return RenewalEstimate(per_node=per_node, q_bar=q_bar,
                           survivors=len(survivors), abort_log=abort_log,
                           config=cfg)
