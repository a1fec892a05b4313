"""Sequential structural-break monitoring for ARMA time series."""
from .arma import ArmaModel, psi_expansion, pi_expansion, residuals, simulate_path, validate_model
from .delay import (
    BreakSpec, Case, CaseTag, DelayAsymptotics, classify_case, delay_asymptotics, drift_mean,
    drift_scale, lambda_mu_oracle, psi_limit_cdf, solve_a_m, solve_b_m, solve_d1,
    standardized_delay_cdf,
)
from .detectors import (
    DetectionReport, DetectorState, MonitorConfig, Scheme, Status, Target, init_detector,
    run_monitor, step, weight,
)
from .estimation import FittedModel, fit, select_order
from .exceptions import *  # noqa: F401,F403
from .harness import ExperimentSpec, delay_law_check, null_frr, run_experiment
from .limits import CriticalValueTable, MCConfig, critical_value

__version__ = "0.1.0"
