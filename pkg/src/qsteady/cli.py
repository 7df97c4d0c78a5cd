"""Command-line front door: solve, bounds, simulate, estimate, validate.

Scenario files are flat sectioned key-value text (INI sections: graph,
model, sim, solve, estimate, report) or a JSON object with the same
two-level shape.  Every subcommand validates its configuration before
computing anything, writes a JSON report plus a run manifest into the
output directory, and returns a structured exit code:

    0 success, 2 configuration error, 3 data error, 4 numeric failure,
    5 estimation-procedure abort.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, analytic, bounds, dist, graph, renewal, sim
from .errors import (
    ConfigError,
    DataError,
    InvalidParameterError,
    NumericError,
    ProcedureAbortError,
    UnsupportedOperationError,
)

REPORT_SCHEMA = "qsteady.report/1"
MANIFEST_SCHEMA = "qsteady.manifest/1"


# ---------------------------------------------------------------------------
# configuration loading

def load_config(path) -> dict:
    """Read an INI-style or JSON scenario file into {section: {key: value}}."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict) or not all(
                isinstance(v, dict) for v in raw.values()):
            raise ConfigError(f"{path}: JSON config must map sections to "
                              "flat key-value objects")
        return {str(s).lower(): {str(k).lower(): v for k, v in kv.items()}
                for s, kv in raw.items()}
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return {s.lower(): {k.lower(): v for k, v in parser[s].items()}
            for s in parser.sections()}


_KNOWN_SECTIONS = ("graph", "model", "sim", "solve", "estimate", "report")


def _section(cfg: dict, name: str) -> dict:
    for s in cfg:
        if s not in _KNOWN_SECTIONS:
            raise ConfigError(f"unknown config section [{s}]")
    return cfg.get(name, {})


def _get(sec: dict, field: str, key: str, default=None, required=False):
    if key not in sec:
        if required:
            raise ConfigError(f"missing required key {field}.{key}")
        return default
    return sec[key]


def _fget(sec, field, key, default=None, required=False):
    v = _get(sec, field, key, default, required)
    if v is None:
        return None
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{field}.{key} must be a number, got {v!r}")


def _iget(sec, field, key, default=None, required=False):
    v = _get(sec, field, key, default, required)
    if v is None:
        return None
    try:
        f = float(v)
        if f != int(f):
            raise ValueError
        return int(f)
    except (TypeError, ValueError):
        raise ConfigError(f"{field}.{key} must be an integer, got {v!r}")


def _bget(sec, field, key, default=False):
    v = _get(sec, field, key, None)
    if v is None:
        return default
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{field}.{key} must be a boolean, got {v!r}")


def build_model(cfg: dict) -> dist.AttackDefenseModel:
    sec = _section(cfg, "model")
    regime = str(_get(sec, "model", "regime", required=True)).lower()
    try:
        if regime == dist.EXPONENTIAL:
            return dist.AttackDefenseModel.exponential(
                _fget(sec, "model", "alpha", required=True),
                _fget(sec, "model", "gamma", required=True),
                _fget(sec, "model", "beta", required=True),
                _fget(sec, "model", "eta", required=True))
        if regime == dist.WEIBULL:
            return dist.AttackDefenseModel.weibull(
                _fget(sec, "model", "lambda1", required=True),
                _fget(sec, "model", "lambda2", required=True),
                _fget(sec, "model", "attack_shape", required=True),
                _fget(sec, "model", "gamma1", required=True),
                _fget(sec, "model", "gamma2", required=True),
                _fget(sec, "model", "defense_shape", required=True))
        if regime == dist.LOMAX:
            return dist.AttackDefenseModel.lomax(
                _fget(sec, "model", "attack_scale", required=True),
                _fget(sec, "model", "alpha1", required=True),
                _fget(sec, "model", "alpha2", required=True),
                _fget(sec, "model", "defense_scale", required=True),
                _fget(sec, "model", "beta1", required=True),
                _fget(sec, "model", "beta2", required=True))
        if regime == dist.MARSHALL_OLKIN:
            return dist.AttackDefenseModel.marshall_olkin(
                _fget(sec, "model", "x1_rate", required=True),
                _fget(sec, "model", "shock_individual", required=True),
                _fget(sec, "model", "shock_global", required=True),
                _fget(sec, "model", "gamma1", required=True),
                _fget(sec, "model", "gamma2", required=True),
                _fget(sec, "model", "gamma12", required=True))
        if regime == dist.TABULATED:
            defense_path = _get(sec, "model", "defense_curve", required=True)
            curves = {}
            for key, value in sec.items():
                if key.startswith("attack_curve_"):
                    try:
                        k = int(key[len("attack_curve_"):])
                    except ValueError:
                        raise ConfigError(f"model.{key}: suffix must be the "
                                          "neighbor count")
                    curves[k] = dist.TabulatedCurve.from_csv(value)
            if not curves:
                raise ConfigError("tabulated model needs at least one "
                                  "model.attack_curve_<k> entry")
            return dist.AttackDefenseModel.tabulated(
                curves, dist.TabulatedCurve.from_csv(defense_path))
    except InvalidParameterError as exc:
        raise ConfigError(f"model: {exc}") from exc
    raise ConfigError(f"model.regime must be one of {dist.REGIMES}, "
                      f"got {regime!r}")


def build_graph(cfg: dict, graph_file=None) -> graph.Graph:
    if graph_file is not None:
        return graph.read_edge_list(graph_file)
    sec = _section(cfg, "graph")
    kind = str(_get(sec, "graph", "kind", required=True)).lower()
    seed = _iget(sec, "graph", "seed", 0)
    try:
        if kind == "file":
            return graph.read_edge_list(_get(sec, "graph", "file", required=True))
        n = _iget(sec, "graph", "n", required=True)
        if kind == "ring":
            return graph.make_regular(n, 2, seed)
        if kind == "regular":
            return graph.make_regular(
                n, _iget(sec, "graph", "mu", required=True), seed)
        if kind == "erdos_renyi":
            return graph.make_random(kind, n, seed,
                                     p=_fget(sec, "graph", "p", required=True))
        if kind == "power_law":
            return graph.make_random(
                kind, n, seed, tau=_fget(sec, "graph", "tau", required=True),
                min_degree=_iget(sec, "graph", "min_degree", 1))
    except InvalidParameterError as exc:
        raise ConfigError(f"graph: {exc}") from exc
    raise ConfigError(f"graph.kind must be one of ring/regular/erdos_renyi/"
                      f"power_law/file, got {kind!r}")


def build_scenario(cfg: dict, g: graph.Graph, model: dist.AttackDefenseModel,
                   seed_override=None, jobs=None) -> sim.ScenarioConfig:
    sec = _section(cfg, "sim")
    seed = seed_override if seed_override is not None else _iget(
        sec, "sim", "seed", 0)
    scenario = sim.ScenarioConfig(
        graph=g,
        model=model,
        horizon=_fget(sec, "sim", "horizon", required=True),
        burn_in=_fget(sec, "sim", "burn_in"),
        burn_in_fraction=_fget(sec, "sim", "burn_in_fraction"),
        replications=_iget(sec, "sim", "replications", 1),
        seed=seed,
        snapshot_interval=_fget(sec, "sim", "snapshot_interval"),
        initial_compromised=_fget(sec, "sim", "initial_compromised", 0.0),
        collect_cycles=_bget(sec, "sim", "collect_cycles", True),
        record_states=_bget(sec, "sim", "record_states", False),
        jobs=jobs if jobs is not None else _iget(sec, "sim", "jobs", 1),
    )
    try:
        scenario.validate()
    except (InvalidParameterError, UnsupportedOperationError) as exc:
        raise ConfigError(f"sim: {exc}") from exc
    return scenario


def build_diagnostics(cfg: dict) -> renewal.DiagnosticsConfig:
    sec = _section(cfg, "estimate")
    dc = renewal.DiagnosticsConfig(
        significance=_fget(sec, "estimate", "significance", 0.05),
        independence_min_len=_iget(sec, "estimate", "independence_min_len", 10),
        variance_min_len=_iget(sec, "estimate", "variance_min_len", 50),
        hill_fraction=_fget(sec, "estimate", "hill_fraction", 0.10),
        tail_cutoff=_fget(sec, "estimate", "tail_cutoff", 2.5),
        heavy_point_cutoff=_fget(sec, "estimate", "heavy_point_cutoff", 2.0),
        steady_window=_iget(sec, "estimate", "steady_window", 20),
        steady_tol=_fget(sec, "estimate", "steady_tol", 0.02),
    )
    if _bget(sec, "estimate", "skip_tests", False):
        dc = dc.with_all_tests_off()
    return dc


def _parse_pmf(text) -> dict:
    pmf = {}
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ConfigError(f"solve.k_pmf entries must be k:prob, got {part!r}")
        k, p = part.split(":", 1)
        try:
            pmf[int(k)] = float(p)
        except ValueError:
            raise ConfigError(f"solve.k_pmf entry {part!r} is not k:prob")
    if not pmf:
        raise ConfigError("solve.k_pmf is empty")
    return pmf


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# report plumbing

def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    return obj


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(_to_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


class _Manifest:
    def __init__(self, command: str, cfg: dict, out_dir: Path):
        self.command = command
        self.cfg = cfg
        self.out_dir = out_dir
        self.artifacts: list[str] = []
        self.seed_ledger: dict = {}
        self.t0 = time.time()

    def add(self, name: str, payload=None) -> Path:
        path = self.out_dir / name
        self.artifacts.append(name)
        if payload is not None:
            write_json(path, payload)
        return path

    def finish(self) -> None:
        write_json(self.out_dir / "manifest.json", {
            "schema": MANIFEST_SCHEMA,
            "command": self.command,
            "config": self.cfg,
            "config_digest": config_digest(self.cfg),
            "seed_ledger": self.seed_ledger,
            "artifacts": self.artifacts,
            "version": __version__,
            "duration_seconds": time.time() - self.t0,
        })


# ---------------------------------------------------------------------------
# subcommands

_SOLVE_METHODS = ("theorem3_exact", "fixed_point", "normal_approx",
                  "poisson_approx", "empirical_k")


def _context_bounds(model, mu, regular: bool):
    """Matching closed-form bounds when the regime has a bound theorem."""
    if model.regime == dist.EXPONENTIAL:
        alpha, gamma = model.attack
        beta, eta = model.defense
        fn = bounds.bounds_exp_regular if regular else bounds.bounds_exp_arbitrary
        return fn(alpha, beta, eta, gamma, mu)
    if model.regime == dist.LOMAX:
        lam, a1, a2 = model.attack
        gam, b1, b2 = model.defense
        fn = (bounds.bounds_lomax_regular if regular
              else bounds.bounds_lomax_arbitrary)
        return fn(lam, a1, a2, gam, b1, b2, mu)
    return None


def cmd_solve(cfg: dict, manifest: _Manifest, seed_override=None) -> dict:
    sec = _section(cfg, "solve")
    method = str(_get(sec, "solve", "method", required=True)).lower()
    if method not in _SOLVE_METHODS:
        raise ConfigError(f"solve.method must be one of {_SOLVE_METHODS}, "
                          f"got {method!r}")
    model = build_model(cfg)
    diagnostics: dict = {}
    iterations = None
    mu_ctx = None
    regular_ctx = False

    if method == "fixed_point":
        mu = _iget(sec, "solve", "mu")
        if mu is None:
            gsec = _section(cfg, "graph")
            if str(gsec.get("kind", "")).lower() == "ring":
                mu = 2
            elif str(gsec.get("kind", "")).lower() == "regular":
                mu = _iget(gsec, "graph", "mu", required=True)
            else:
                raise ConfigError("fixed_point needs solve.mu or a "
                                  "regular/ring graph section")
        sol = analytic.solve_regular_fixed_point_full(mu, model)
        q = sol.q
        m_val = 1.0 / q - 1.0
        iterations = sol.iterations
        diagnostics["multiple_roots"] = sol.multiple_roots
        mu_ctx, regular_ctx = mu, True
    elif method in ("theorem3_exact", "empirical_k"):
        obs = _get(sec, "solve", "k_observations")
        if method == "empirical_k" and obs is not None:
            counts = [int(x) for x in str(obs).split(",") if x.strip()]
            deg = _iget(sec, "solve", "deg", max(counts) if counts else 0)
            kdist = analytic.k_pmf_empirical(counts, deg)
        else:
            pmf = _parse_pmf(_get(sec, "solve", "k_pmf", required=True))
            deg = _iget(sec, "solve", "deg", max(pmf))
            try:
                kdist = analytic.KDistribution.empirical(pmf, deg)
            except InvalidParameterError as exc:
                raise ConfigError(f"solve.k_pmf: {exc}") from exc
        try:
            m_val = analytic.m_general(kdist, model)
        except UnsupportedOperationError as exc:
            raise ConfigError(f"solve: {exc}") from exc
        q = analytic.q_of_v(m_val)
        mu_ctx = kdist.deg
    elif method == "normal_approx":
        if model.regime not in (dist.EXPONENTIAL, dist.WEIBULL):
            raise ConfigError(
                "solve.method=normal_approx needs the exponential or weibull "
                f"regime (real-k closed forms); got {model.regime}")
        deg = _fget(sec, "solve", "deg", required=True)
        k_mean = _fget(sec, "solve", "k_mean", required=True)
        k_var = _fget(sec, "solve", "k_var", required=True)
        m_val = analytic.m_normal_approx(deg, k_mean, k_var, model)
        q = analytic.q_of_v(m_val)
        diagnostics["normal_mass_in_window"] = analytic.normal_truncation_mass(
            deg, k_mean, k_var)
        mu_ctx = deg
    else:  # poisson_approx
        deg = _iget(sec, "solve", "deg", required=True)
        k_mean = _fget(sec, "solve", "k_mean", required=True)
        try:
            m_val = analytic.m_poisson_approx(deg, k_mean, model)
        except UnsupportedOperationError as exc:
            raise ConfigError(f"solve: {exc}") from exc
        q = analytic.q_of_v(m_val)
        mu_ctx = deg

    ctx = _context_bounds(model, mu_ctx, regular_ctx) if mu_ctx is not None else None
    report = {
        "schema": REPORT_SCHEMA,
        "kind": "solve",
        "method": method,
        "regime": model.regime,
        "m": m_val,
        "q": q,
        "bounds": None if ctx is None else {
            "lower": ctx.lower, "upper": ctx.upper, "theorem": ctx.theorem},
        "diagnostics": diagnostics,
        "provenance": {"config_digest": config_digest(cfg),
                       "solver_iterations": iterations},
    }
    manifest.add("report.json", report)
    print(f"method={method} m={m_val:.12g} q={q:.12g}")
    return report


def cmd_bounds(cfg: dict, manifest: _Manifest) -> dict:
    sec = _section(cfg, "solve")
    graph_class = str(_get(sec, "solve", "graph_class", "regular")).lower()
    if graph_class not in ("regular", "arbitrary"):
        raise ConfigError(f"solve.graph_class must be regular or arbitrary, "
                          f"got {graph_class!r}")
    model = build_model(cfg)
    mu = _fget(sec, "solve", "mu")
    if mu is None:
        gsec = _section(cfg, "graph")
        if gsec:
            g = build_graph(cfg)
            mu = graph.degree_stats(g)[0]
        else:
            raise ConfigError("bounds needs solve.mu or a graph section")

    if model.regime == dist.WEIBULL:
        raise ConfigError("no bound theorem exists for the weibull regime")
    kbar = _fget(sec, "solve", "kbar")
    if kbar is not None:
        if graph_class != "regular":
            raise ConfigError("general bounds (solve.kbar) apply to regular "
                              "graphs only")
        try:
            rep = bounds.bounds_general_regular(model, kbar)
        except UnsupportedOperationError as exc:
            raise ConfigError(f"bounds: {exc}") from exc
    else:
        rep = _context_bounds(model, mu, graph_class == "regular")
        if rep is None:
            raise ConfigError(
                f"regime {model.regime} has closed-form bounds only via "
                "solve.kbar (general bounds)")
    report = {
        "schema": REPORT_SCHEMA,
        "kind": "bounds",
        "theorem": rep.theorem,
        "lower": rep.lower,
        "upper": rep.upper,
        "printed_lower": rep.printed_lower,
        "notes": list(rep.notes),
        "inputs": rep.inputs,
        "provenance": {"config_digest": config_digest(cfg)},
    }
    manifest.add("report.json", report)
    print(f"bounds[{rep.theorem}] = [{rep.lower:.12g}, {rep.upper:.12g}]")
    return report


def _write_cycles_csv(path, trace: renewal.CyclesTrace) -> None:
    trace.write_csv(path)


def _write_snapshot_csv(path, result: sim.SimResult) -> None:
    states = result.snapshot_states
    if states is None:
        raise ConfigError("snapshot CSV requested but sim.record_states is off")
    with open(path, "w") as fh:
        fh.write("time,node_id,state\n")
        for i, t in enumerate(result.snapshot_times):
            row = states[i]
            for v in range(len(row)):
                fh.write("%.17g,%d,%d\n" % (t, v, row[v]))


def cmd_simulate(cfg: dict, manifest: _Manifest, seed_override=None,
                 jobs=None, graph_file=None) -> dict:
    g = build_graph(cfg, graph_file)
    model = build_model(cfg)
    scenario = build_scenario(cfg, g, model, seed_override, jobs)
    rsec = _section(cfg, "report")
    write_cycles = _bget(rsec, "report", "write_cycles", True)
    write_snapshots = _bget(rsec, "report", "write_snapshots", False)
    if write_snapshots and not scenario.record_states:
        scenario = replace(scenario, record_states=True)

    result = sim.run(scenario)
    manifest.seed_ledger = result.seed_ledger

    esec = _section(cfg, "estimate")
    window = _iget(esec, "estimate", "steady_window", 20)
    tol = _fget(esec, "estimate", "steady_tol", 0.02)
    steady = None
    if len(result.steady_series) >= 2 * window:
        verdict = sim.detect_steady(result.steady_series, window, tol)
        steady = {"steady": verdict.steady, "time": verdict.time}

    mu = graph.degree_stats(g)[0]
    summary = {
        "schema": REPORT_SCHEMA,
        "kind": "simulate",
        "global_q": result.global_q,
        "standard_error": result.standard_error,
        "per_replication_q": list(result.per_rep_q),
        "batch_q_first_replication": list(result.batch_q),
        "per_node_q": {str(v): result.per_node_q[v] for v in range(g.n)},
        "steadiness": steady,
        "graph": {"n": g.n, "average_degree": mu},
        "regime": model.regime,
        "seed_ledger": result.seed_ledger,
        "provenance": {"config_digest": config_digest(cfg)},
    }
    manifest.add("summary.json", summary)
    if write_cycles and scenario.collect_cycles:
        path = manifest.add("cycles.csv")
        _write_cycles_csv(path, result.cycles)
    if write_snapshots:
        path = manifest.add("snapshots.csv")
        _write_snapshot_csv(path, result)
    print(f"q = {result.global_q:.6f} +/- {result.standard_error:.6f} "
          f"({scenario.replications} replications)")
    return summary


def cmd_estimate(trace_paths, cfg: dict, manifest: _Manifest,
                 seed_override=None) -> dict:
    diagnostics = build_diagnostics(cfg)
    traces = renewal.CyclesTrace.merge(
        [renewal.CyclesTrace.read_csv(p) for p in trace_paths])
    sec = _section(cfg, "estimate")
    sample = _get(sec, "estimate", "nodes", "all")
    if str(sample).lower() != "all":
        m = _iget(sec, "estimate", "nodes", required=True)
        if m < 1:
            raise ConfigError("estimate.nodes must be >= 1 or 'all'")
        rng = np.random.default_rng(
            seed_override if seed_override is not None
            else _iget(sec, "estimate", "sample_seed", 0))
        nodes = sorted(rng.choice(traces.nodes, size=min(m, len(traces.nodes)),
                                  replace=False).tolist())
        traces = traces.subset(nodes)

    try:
        est = renewal.estimate_procedure(traces, diagnostics)
    except ProcedureAbortError as exc:
        manifest.add("estimate.json", {
            "schema": REPORT_SCHEMA,
            "kind": "estimate",
            "aborted": True,
            "abort_log": {str(k): v for k, v in exc.abort_log.items()},
            "provenance": {"config_digest": config_digest(cfg)},
        })
        manifest.finish()
        raise

    report = {
        "schema": REPORT_SCHEMA,
        "kind": "estimate",
        "aborted": False,
        "q_bar": est.q_bar,
        "survivors": est.survivors,
        "nodes": len(est.per_node),
        "abort_log": {str(k): v for k, v in est.abort_log.items()},
        "per_node": {
            str(v): {
                "q_hat": e.q_hat,
                "cycles": e.cycle_count,
                "secure_total": e.secure_total,
                "compromised_total": e.compromised_total,
                "verdicts": e.verdicts,
                "warnings": list(e.warnings),
                "aborted": e.aborted,
                "abort_reason": e.abort_reason,
            }
            for v, e in est.per_node.items()
        },
        "thresholds": est.config.__dict__,
        "provenance": {"config_digest": config_digest(cfg)},
    }
    manifest.add("estimate.json", report)
    print(f"q_bar = {est.q_bar:.6f} over {est.survivors}/{len(est.per_node)} "
          f"nodes ({len(est.abort_log)} aborted)")
    return report


def cmd_validate(cfg: dict, manifest: _Manifest, seed_override=None,
                 jobs=None, fault_bounds_shift: float = 0.0) -> dict:
    """Cross-check battery: closed forms vs bounds vs simulation vs the
    renewal estimator.  fault_bounds_shift is a test hook that corrupts
    the bound interval to demonstrate the battery catches violations."""
    model = build_model(cfg)
    if model.regime not in (dist.EXPONENTIAL, dist.WEIBULL):
        raise ConfigError("validate needs the exponential or weibull regime "
                          f"(closed forms); got {model.regime}")
    g = build_graph(cfg)
    mu_avg, degs = graph.degree_stats(g)
    regular = len(set(degs)) == 1
    mu = int(degs[0]) if regular else int(round(mu_avg))

    checks = []

    def check(name, passed, deviation, detail=""):
        checks.append({"name": name, "pass": bool(passed),
                       "deviation": deviation, "detail": detail})

    # reduction identities at this parameter point
    kd = analytic.KDistribution.binomial(max(mu, 1), 0.35)
    if model.regime == dist.EXPONENTIAL:
        alpha, gamma = model.attack
        beta, eta = model.defense
    else:
        l1, l2, _ = model.attack
        g1, g2, _ = model.defense
        alpha, gamma, beta, eta = l1, l2, g1, g2
    exp_model = dist.AttackDefenseModel.exponential(alpha, gamma, beta, eta)
    weib_model = dist.AttackDefenseModel.weibull(alpha, gamma, 1.0, beta, eta, 1.0)
    dev = abs(analytic.m_general(kd, exp_model) - analytic.m_general(kd, weib_model))
    check("weibull_shape1_reduction_m", dev <= 1e-9, dev)
    dev = abs(analytic.solve_regular_fixed_point(mu, exp_model)
              - analytic.solve_regular_fixed_point(mu, weib_model))
    check("weibull_shape1_reduction_fixed_point", dev <= 1e-9, dev)
    mo_model = dist.AttackDefenseModel.marshall_olkin(alpha, gamma, 0.0,
                                                      beta, eta, 0.0)
    dev = abs(analytic.m_general(kd, exp_model) - analytic.m_general(kd, mo_model))
    check("marshall_olkin_no_shared_shock_reduction", dev <= 1e-9, dev)

    # fixed point inside the closed-form bounds (exponential only)
    q_fp = analytic.solve_regular_fixed_point(mu, model)
    b6 = b8 = None
    if model.regime == dist.EXPONENTIAL:
        b6 = bounds.bounds_exp_regular(alpha, beta, eta, gamma, mu)
        b8 = bounds.bounds_exp_arbitrary(alpha, beta, eta, gamma, mu)
        lo6 = b6.lower + fault_bounds_shift
        hi6 = b6.upper + fault_bounds_shift
        dev = max(lo6 - q_fp, q_fp - hi6)
        check("fixed_point_in_regular_bounds", lo6 <= q_fp <= hi6, dev,
              f"q={q_fp:.6g} in [{lo6:.6g}, {hi6:.6g}]")
        dev = max(b8.lower - q_fp, q_fp - b8.upper)
        check("fixed_point_in_arbitrary_bounds",
              b8.contains(q_fp), dev,
              f"q={q_fp:.6g} in [{b8.lower:.6g}, {b8.upper:.6g}]")
        check("regular_upper_not_above_arbitrary_upper",
              b6.upper <= b8.upper + 1e-12, b6.upper - b8.upper)

    # simulation against the fixed point (and bounds when available)
    scenario = build_scenario(cfg, g, model, seed_override, jobs)
    result = sim.run(scenario)
    manifest.seed_ledger = result.seed_ledger
    slack = 3.0 * (result.standard_error + 0.01)  # mean-field closure slack
    dev = abs(result.global_q - q_fp)
    check("simulation_near_fixed_point", dev <= slack, dev,
          f"sim={result.global_q:.6g} fp={q_fp:.6g} tol={slack:.3g}")
    if b6 is not None:
        lo = b6.lower + fault_bounds_shift - 3 * result.standard_error
        hi = b6.upper + fault_bounds_shift + 3 * result.standard_error
        dev = max(lo - result.global_q, result.global_q - hi)
        check("simulation_in_regular_bounds", lo <= result.global_q <= hi, dev)

    # renewal estimator recovers the simulated occupancy (value check, so
    # the per-node diagnostics are switched off here)
    trace = sim.export_cycles(result)
    est = renewal.estimate_procedure(
        trace, renewal.DiagnosticsConfig().with_all_tests_off())
    dev = abs(est.q_bar - result.global_q)
    tol = 0.02 + 3 * result.standard_error
    check("estimator_recovers_simulation", dev <= tol, dev,
          f"q_bar={est.q_bar:.6g} sim={result.global_q:.6g} tol={tol:.3g}")

    report = {
        "schema": REPORT_SCHEMA,
        "kind": "validate",
        "all_pass": all(c["pass"] for c in checks),
        "checks": checks,
        "provenance": {"config_digest": config_digest(cfg),
                       "seed_ledger": result.seed_ledger},
    }
    manifest.add("validation.json", report)
    for c in checks:
        print(f"[{'PASS' if c['pass'] else 'FAIL'}] {c['name']} "
              f"(deviation {c['deviation']:.3g})")
    return report


# ---------------------------------------------------------------------------
# entry point

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsteady",
        description="Steady-state compromise probability of networked "
                    "systems: closed forms, bounds, simulation, estimation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="scenario file (INI sections or JSON)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the master seed")
        p.add_argument("--jobs", type=int, default=None,
                       help="parallel replications (simulate/validate)")
        p.add_argument("--graph-file", default=None,
                       help="edge-list file overriding the [graph] section")

    common(sub.add_parser("solve", help="closed-form / approximate q"))
    common(sub.add_parser("bounds", help="lower/upper bounds on q"))
    common(sub.add_parser("simulate", help="event-driven simulation"))
    p_est = sub.add_parser("estimate", help="renewal estimation from traces")
    p_est.add_argument("traces", nargs="+", help="cycle-trace CSV files")
    common(p_est, config_required=False)
    common(sub.add_parser("validate", help="internal cross-check battery"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = _Manifest(args.command, cfg, out_dir)
        if args.command == "solve":
            cmd_solve(cfg, manifest, args.seed)
        elif args.command == "bounds":
            cmd_bounds(cfg, manifest)
        elif args.command == "simulate":
            cmd_simulate(cfg, manifest, args.seed, args.jobs, args.graph_file)
        elif args.command == "estimate":
            cmd_estimate(args.traces, cfg, manifest, args.seed)
        elif args.command == "validate":
            cmd_validate(cfg, manifest, args.seed, args.jobs)
        manifest.finish()
        return 0
    except (ConfigError, InvalidParameterError, UnsupportedOperationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except ProcedureAbortError as exc:
        print(f"estimation aborted: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
