"""Continuous-time simulation of the attack-defense process on a graph.

Semantics (the steady-state theory leaves the transient dynamics open, so
this realization is spelled out): every node starts secure unless an
initial compromised fraction is configured.  A secure node holds an
external-attack clock plus one attack clock per currently-compromised
neighbor and flips at the earliest one; a fresh neighbor clock appears
when a neighbor is compromised and is cancelled when that neighbor
recovers.  On compromise the node draws its recovery time jointly per the
model regime; on its own recovery all of its attack clocks are redrawn.
Partially elapsed non-exponential clocks are never residual-resampled:
they fire or they are cancelled.

Occupancies are accumulated after burn-in; cycle traces are recorded from
time zero (a cycle is one secure stretch plus the following compromised
stretch; trailing incomplete cycles are dropped).  With multiple
replications the cycle trace, steadiness series and snapshot states come
from replication 0; occupancies and the neighbor-count distribution are
averaged/pooled across replications.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _engine, dist
from .errors import InvalidParameterError, UnsupportedOperationError
from .graph import Graph
from .renewal import CyclesTrace

__all__ = [
    "ScenarioConfig",
    "SimResult",
    "SteadyVerdict",
    "run",
    "detect_steady",
    "export_cycles",
    "replication_seed",
]

_REGIME_CODES = {
    dist.EXPONENTIAL: _engine.R_EXP,
    dist.WEIBULL: _engine.R_WEIBULL,
    dist.LOMAX: _engine.R_LOMAX,
    dist.MARSHALL_OLKIN: _engine.R_MO,
}

_N_BATCHES = 10


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one simulation run depends on.

    burn_in is absolute simulated time; burn_in_fraction is the
    alternative spelling (fraction of the horizon).  When neither is
    given, 20% of the horizon is discarded.
    """

    graph: Graph
    model: dist.AttackDefenseModel
    horizon: float
    burn_in: float | None = None
    burn_in_fraction: float | None = None
    replications: int = 1
    seed: int = 0
    snapshot_interval: float | None = None
    initial_compromised: float = 0.0
    collect_cycles: bool = True
    cycle_nodes: tuple[int, ...] | None = None
    record_states: bool = False
    jobs: int = 1

    def resolved_burn_in(self) -> float:
        if self.burn_in is not None and self.burn_in_fraction is not None:
            raise InvalidParameterError(
                "give burn_in or burn_in_fraction, not both")
        if self.burn_in is not None:
            return float(self.burn_in)
        frac = 0.2 if self.burn_in_fraction is None else self.burn_in_fraction
        if not (0.0 <= frac < 1.0):
            raise InvalidParameterError(
                f"burn_in_fraction must be in [0, 1), got {frac}")
        return frac * self.horizon

    def resolved_snapshot_interval(self) -> float:
        if self.snapshot_interval is None:
            return self.horizon / 1000.0
        return float(self.snapshot_interval)

    def validate(self) -> None:
        if self.horizon <= 0:
            raise InvalidParameterError("horizon must be > 0")
        b = self.resolved_burn_in()
        if not (0.0 <= b < self.horizon):
            raise InvalidParameterError(
                f"need horizon > burn_in >= 0, got burn_in={b}")
        if self.replications < 1:
            raise InvalidParameterError("replications must be >= 1")
        if self.resolved_snapshot_interval() <= 0:
            raise InvalidParameterError("snapshot interval must be > 0")
        if not (0.0 <= self.initial_compromised <= 1.0):
            raise InvalidParameterError(
                "initial_compromised must be a fraction in [0, 1]")
        if self.jobs < 1:
            raise InvalidParameterError("jobs must be >= 1")
        if not self.model.samplable:
            raise UnsupportedOperationError(
                "tabulated models carry no sampling law; simulation needs one "
                "of the parametric regimes")


@dataclass(frozen=True)
class SimResult:
    global_q: float
    per_rep_q: tuple[float, ...]
    per_node_q: np.ndarray
    standard_error: float
    k_pmf: np.ndarray
    cycles: CyclesTrace
    steady_series: tuple[tuple[float, float], ...]
    snapshot_times: np.ndarray
    snapshot_states: np.ndarray | None
    batch_q: tuple[float, ...]
    seed_ledger: dict
    config: ScenarioConfig


def replication_seed(master_seed: int, rep: int) -> int:
    """Documented splitting rule: replication substreams come from
    SeedSequence(master).spawn, so adding replications never perturbs the
    streams of earlier ones."""
    child = np.random.SeedSequence(master_seed).spawn(rep + 1)[rep]
    return int(child.generate_state(1, dtype=np.uint32)[0])


def _attack_unreachable(model: dist.AttackDefenseModel) -> bool:
    """True when the external attack can never fire, so an all-secure start
    stays all-secure forever."""
    if model.regime in (dist.EXPONENTIAL, dist.MARSHALL_OLKIN, dist.WEIBULL):
        return model.attack[0] <= 0.0
    return False  # lomax X1 always fires (validated shape/scale)


def _run_one_replication(args):
    (indptr, indices, n, horizon, burn_in, regime_code, ap, dp, seed,
     init_frac, snap_interval, n_snaps, collect_mask, record_states,
     max_deg) = args
    return _engine.run_replication(
        indptr, indices, n, horizon, burn_in, regime_code,
        ap[0], ap[1], ap[2], dp[0], dp[1], dp[2],
        seed, init_frac, snap_interval, n_snaps, collect_mask,
        record_states, max_deg, _N_BATCHES)


def run(config: ScenarioConfig) -> SimResult:
    """Simulate the scenario and aggregate occupancies across replications."""
    config.validate()
    g, model = config.graph, config.model
    n = g.n
    horizon = float(config.horizon)
    burn_in = config.resolved_burn_in()
    snap_interval = config.resolved_snapshot_interval()
    n_snaps = int(np.floor(horizon / snap_interval + 1e-9))
    indptr, indices = g.to_csr()
    max_deg = int(max(g.degrees)) if n else 0

    if config.initial_compromised == 0.0 and _attack_unreachable(model):
        warnings.warn(
            "degenerate scenario: the external attack can never fire and no "
            "node starts compromised; q is identically 0", RuntimeWarning)

    regime_code = _REGIME_CODES[model.regime]
    ap = np.zeros(3)
    dp = np.zeros(3)
    ap[: len(model.attack)] = model.attack
    dp[: len(model.defense)] = model.defense

    collect_mask = np.zeros(n, np.uint8)
    if config.collect_cycles:
        if config.cycle_nodes is None:
            collect_mask[:] = 1
        else:
            collect_mask[list(config.cycle_nodes)] = 1

    rep_seeds = [replication_seed(config.seed, r)
                 for r in range(config.replications)]
    arg_list = []
    for r, seed in enumerate(rep_seeds):
        # only replication 0 contributes cycles / state snapshots
        arg_list.append((indptr, indices, n, horizon, burn_in, regime_code,
                         ap, dp, seed, float(config.initial_compromised),
                         snap_interval, n_snaps,
                         collect_mask if r == 0 else np.zeros(n, np.uint8),
                         config.record_states and r == 0, max_deg))

    if config.jobs > 1 and config.replications > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outputs = list(pool.map(_run_one_replication, arg_list))
    else:
        outputs = [_run_one_replication(a) for a in arg_list]

    window = horizon - burn_in
    per_node_sum = np.zeros(n)
    per_rep_q = []
    k_counts = np.zeros((n, max_deg + 1), np.int64)
    cycles_trace = CyclesTrace({})
    steady_series: tuple = ()
    states = None
    batch_q: tuple = ()
    for r, out in enumerate(outputs):
        (comp_time, secure_time, kcounts, series_q, st, batch_acc,
         cyc_node, cyc_s, cyc_c) = out
        # state-machine audit: per node, observed time must be conserved
        total = comp_time + secure_time
        assert np.allclose(total, window, rtol=1e-9, atol=1e-9), \
            "occupancy accounting lost time"
        occ = comp_time / window
        per_node_sum += occ
        per_rep_q.append(float(occ.mean()))
        k_counts += kcounts
        if r == 0:
            if len(cyc_node):
                order = np.argsort(cyc_node, kind="stable")
                nodes_sorted = cyc_node[order]
                pairs = np.column_stack([cyc_s[order], cyc_c[order]])
                splits = np.flatnonzero(np.diff(nodes_sorted)) + 1
                per_node_cycles = {}
                for node_chunk, pair_chunk in zip(
                        np.split(nodes_sorted, splits), np.split(pairs, splits)):
                    per_node_cycles[int(node_chunk[0])] = pair_chunk
                for v in np.flatnonzero(collect_mask):
                    per_node_cycles.setdefault(int(v), np.empty((0, 2)))
                cycles_trace = CyclesTrace(per_node_cycles)
            elif config.collect_cycles:
                cycles_trace = CyclesTrace(
                    {int(v): np.empty((0, 2)) for v in np.flatnonzero(collect_mask)})
            snap_times = snap_interval * np.arange(1, n_snaps + 1)
            steady_series = tuple(zip(snap_times.tolist(), series_q.tolist()))
            states = st if config.record_states else None
            batch_len = window / _N_BATCHES
            batch_q = tuple((batch_acc / (n * batch_len)).tolist())

    per_node_q = per_node_sum / config.replications
    per_rep = tuple(per_rep_q)
    global_q = float(np.mean(per_rep))
    if config.replications >= 2:
        se = float(np.std(per_rep, ddof=1) / np.sqrt(config.replications))
    else:
        se = float(np.std(batch_q, ddof=1) / np.sqrt(_N_BATCHES))

    row_tot = k_counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        k_pmf = np.where(row_tot > 0, k_counts / row_tot, 0.0)

    snap_times = snap_interval * np.arange(1, n_snaps + 1)
    return SimResult(
        global_q=global_q,
        per_rep_q=per_rep,
        per_node_q=per_node_q,
        standard_error=se,
        k_pmf=k_pmf,
        cycles=cycles_trace,
        steady_series=steady_series,
        snapshot_times=snap_times,
        snapshot_states=states,
        batch_q=batch_q,
        seed_ledger={"master_seed": config.seed,
                     "replication_seeds": rep_seeds,
                     "splitting_rule": "SeedSequence(master).spawn(rep)"},
        config=config,
    )


@dataclass(frozen=True)
class SteadyVerdict:
    steady: bool
    time: float | None = None
    index: int | None = None


def detect_steady(series, window: int, tol: float) -> SteadyVerdict:
    """Earliest time from which the series stays flat.

    The series is (time, value) pairs.  A start index z qualifies when
    every ``window``-point running mean over the suffix deviates from the
    suffix mean by at most ``tol`` relatively; the verdict reports the
    earliest qualifying z (with at least 2*window points after it), or
    not-steady when none exists.
    """
    if window < 1:
        raise InvalidParameterError("window must be >= 1")
    times = np.asarray([p[0] for p in series], dtype=np.float64)
    values = np.asarray([p[1] for p in series], dtype=np.float64)
    m = len(values)
    if m < 2 * window:
        raise InvalidParameterError(
            f"need at least 2*window={2 * window} points, got {m}")
    csum = np.concatenate([[0.0], np.cumsum(values)])
    # running window means w[i] over values[i : i+window]
    w = (csum[window:] - csum[:-window]) / window
    # suffix extrema of the window means
    suf_max = np.maximum.accumulate(w[::-1])[::-1]
    suf_min = np.minimum.accumulate(w[::-1])[::-1]
    total = csum[-1]
    for z in range(0, m - 2 * window + 1):
        mean_z = (total - csum[z]) / (m - z)
        allowance = tol * abs(mean_z)
        if suf_max[z] - mean_z <= allowance and mean_z - suf_min[z] <= allowance:
            return SteadyVerdict(steady=True, time=float(times[z]), index=z)
    return SteadyVerdict(steady=False)


def export_cycles(result: SimResult) -> CyclesTrace:
    """The per-node cycle trace accumulated during simulation (trailing
    incomplete cycles already dropped)."""
    return result.cycles
