"""Steady-state compromise probability of networked systems.

Computes, bounds, simulates and statistically estimates the probability
q(v) that a node of a network is compromised in the steady state of a
stochastic attack-defense process, and the global average q.
"""

from .analytic import (
    KDistribution,
    QReport,
    k_pmf_empirical,
    m_general,
    m_normal_approx,
    m_poisson_approx,
    q_global,
    q_global_weighted,
    q_of_v,
    solve_regular_fixed_point,
)
from .bounds import (
    BoundsReport,
    bounds_exp_arbitrary,
    bounds_exp_regular,
    bounds_general_regular,
    bounds_lomax_arbitrary,
    bounds_lomax_regular,
)
from .dist import (
    AttackDefenseModel,
    TabulatedCurve,
    attack_diag_integral,
    defense_diag_integral,
    mo_phi,
    sample,
    sample_attack_vector,
    survival,
)
from .errors import (
    ConfigError,
    DataError,
    InsufficientDataError,
    InvalidParameterError,
    NumericError,
    ProcedureAbortError,
    QSteadyError,
    UnsupportedOperationError,
)
from .graph import Graph, degree_stats, make_random, make_regular
from .renewal import (
    CyclesTrace,
    DiagnosticsConfig,
    RenewalEstimate,
    estimate_node,
    estimate_procedure,
    test_finite_variance,
    test_independence,
)
from .sim import ScenarioConfig, SimResult, detect_steady, export_cycles, run

__version__ = "0.1.0"
