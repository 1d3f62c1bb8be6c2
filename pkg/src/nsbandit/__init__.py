"""Non-stationary bandit algorithms, detectors, and a seeded experiment harness.

Piecewise-stationary Bernoulli environments (uniform and adversarial
worst-case mean dynamics, geometric or deterministic change-points), the
multi-scale scheduling algorithm with its two restart tests, restarting
wrappers (random restarts, fixed-probability restarts, change-detection
restarts with and without forced exploration), a Bernoulli GLR change
detector, closed-form feasibility analysis of the restart tests, and a
deterministic parallel experiment harness with CSV/PNG reporting.
"""

from .config import ALGOS, ConfigError, default_config, load_config, validate_config
from .envs import (ChangeSchedule, EnvState, Realization, build_realization,
                   deterministic_changepoints, init_means,
                   sample_geometric_changepoints)
from .glr import GlrDetector, beta_threshold, first_detection, glr_statistic
from .harness import (AggregateResult, TrialResult, detector_benchmark,
                      run_experiment, run_trial, write_outputs)
from .master import (MasterConfig, MasterRun, RhoConfig, rho, run_master,
                     schedule_block, test1_threshold, test2_threshold)
from .policies import (ArmHistory, PolicyConfig, kl_bernoulli, klucb_index,
                       select_arm, ucb1_index)
from .restarts import (GlrKlucbAgent, QcdPlusAgent, RRAgent, RRPAgent, WrapperRun,
                       auto_alpha, auto_eta_r, run_glrklucb, run_qcd, run_rr,
                       run_rr_p)
from .seeds import alg_stream, env_stream
from .theory import (FeasibilityReport, bd_bound, bd_crossover, delta_lower_bound,
                     min_feasible_horizon, min_test_thresholds, theory_summary)

__version__ = "0.1.0"

__all__ = [
    "ALGOS", "AggregateResult", "ArmHistory", "ChangeSchedule", "ConfigError",
    "EnvState", "FeasibilityReport", "GlrDetector", "GlrKlucbAgent",
    "MasterConfig", "MasterRun", "PolicyConfig", "QcdPlusAgent", "RRAgent",
    "RRPAgent", "Realization", "RhoConfig", "TrialResult", "WrapperRun",
    "alg_stream", "auto_alpha", "auto_eta_r", "bd_bound", "bd_crossover",
    "beta_threshold", "build_realization", "default_config",
    "delta_lower_bound", "detector_benchmark", "deterministic_changepoints",
    "env_stream", "first_detection", "glr_statistic", "init_means",
    "kl_bernoulli", "klucb_index", "load_config", "min_feasible_horizon",
    "min_test_thresholds", "rho", "run_experiment", "run_glrklucb",
    "run_master", "run_qcd", "run_rr", "run_rr_p", "run_trial",
    "sample_geometric_changepoints", "schedule_block", "select_arm",
    "test1_threshold", "test2_threshold", "theory_summary", "ucb1_index",
    "validate_config", "write_outputs",
]
