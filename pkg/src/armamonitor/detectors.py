"""CUSUM and Page-CUSUM detectors on (squared) ARMA residuals.

For monitoring lag ``k`` the centred detector is

    D(m, k) = sum_{m < t <= m+k} r_t - (k / m) sum_{t <= m} r_t,

with ``r_t`` the residual (``Target.MEAN``) or squared residual
(``Target.GENERAL``). The CUSUM statistic is ``|D(m, k)|``; Page's statistic
is ``max_{0 <= k' <= k} |D(m, k) - D(m, k')|`` with ``D(m, 0) = 0``. A rule
stops at the first ``k >= 1`` with

    statistic >= c * scale * sqrt(m) (1 + k/m) (k / (m + k))**gamma.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .arma import ResidualFilter
from .estimation import FittedModel


class Scheme(str, enum.Enum):
    CUSUM = "cusum"
    PAGE = "page"


class Target(str, enum.Enum):
    MEAN = "mean"
    GENERAL = "general"


class Status(str, enum.Enum):
    DETECTED = "detected"
    HORIZON = "no detection within horizon"
    STREAM_END = "stream ended before horizon"


@dataclass(frozen=True)
class MonitorConfig:
    gamma: float
    alpha: float
    scheme: Scheme
    target: Target
    m: int
    threshold_c: float
    horizon: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "target", Target(self.target))
        if not 0.0 <= self.gamma < 0.5:
            raise ValueError("gamma must lie in [0, 1/2)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.m < 1:
            raise ValueError("m must be positive")
        if not self.threshold_c > 0:
            raise ValueError("threshold_c must be positive")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("horizon must be positive")

    @property
    def effective_horizon(self) -> int:
        return 10 * self.m if self.horizon is None else self.horizon

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "alpha": self.alpha, "scheme": self.scheme.value,
                "target": self.target.value, "m": self.m,
                "threshold_c": self.threshold_c, "horizon": self.horizon}


def weight(m: int, k, gamma: float):
    """Boundary shape ``sqrt(m) (1 + k/m) (k/(m+k))**gamma``; vectorised in ``k``."""
    k = np.asarray(k, dtype=float)
    out = math.sqrt(m) * (1.0 + k / m) * (k / (m + k)) ** gamma
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DetectorState:
    k: int
    training_sum: float
    running_sum: float
    running_min: float
    running_max: float
    scale_hat: float
    m: int


def init_detector(residual_training, target: Target | str, scale_hat: float) -> DetectorState:
    r = np.asarray(residual_training, dtype=float)
    if r.size == 0:
        raise ValueError("training residuals are empty")
    if not scale_hat > 0:
        raise ValueError("scale_hat must be positive")
    target = Target(target)
    total = float(np.sum(r if target is Target.MEAN else r * r))
    return DetectorState(0, total, 0.0, 0.0, 0.0, float(scale_hat), r.size)


@dataclass(frozen=True)
class StepResult:
    state: DetectorState
    detector: float
    cusum_value: float
    page_value: float
    boundary: float
    crossed: bool


def step(state: DetectorState, new_value: float, config: MonitorConfig) -> StepResult:
    """Advance the detector by one lag.

    ``new_value`` is the residual for ``Target.MEAN`` or its square for
    ``Target.GENERAL``; the caller applies the transform.
    """
    k = state.k + 1
    running = state.running_sum + new_value
    d = running - (k / state.m) * state.training_sum
    cusum = abs(d)
    page = max(d - state.running_min, state.running_max - d)
    boundary = config.threshold_c * state.scale_hat * weight(state.m, k, config.gamma)
    stat = page if config.scheme is Scheme.PAGE else cusum
    new_state = replace(state, k=k, running_sum=running,
                        running_min=min(state.running_min, d),
                        running_max=max(state.running_max, d))
    return StepResult(new_state, d, cusum, page, boundary, stat >= boundary)


# -- batch evaluation -----------------------------------------------------

def detector_path(values: np.ndarray, training_sum: float, m: int) -> np.ndarray:
    """``D(m, k)`` for ``k = 1..len(values)``."""
    k = np.arange(1, values.size + 1)
    return np.cumsum(values) - (k / m) * training_sum


def page_path(d: np.ndarray) -> np.ndarray:
    lo = np.minimum(np.minimum.accumulate(d), 0.0)
    hi = np.maximum(np.maximum.accumulate(d), 0.0)
    return np.maximum(d - lo, hi - d)


def first_crossing(stat: np.ndarray, boundary: np.ndarray) -> int | None:
    """1-based index of the first ``stat >= boundary``, or ``None``."""
    hit = stat >= boundary
    if not hit.any():
        return None
    return int(np.argmax(hit)) + 1


def monitor_batch(monitor_values: np.ndarray, training_sum: float, scale_hat: float, m: int,
                  threshold_c: float, gamma: float, scheme: Scheme | str) -> int | None:
    """Vectorised stopping index over a finite monitoring window."""
    d = detector_path(np.asarray(monitor_values, dtype=float), training_sum, m)
    stat = page_path(d) if Scheme(scheme) is Scheme.PAGE else np.abs(d)
    boundary = threshold_c * scale_hat * weight(m, np.arange(1, d.size + 1), gamma)
    return first_crossing(stat, boundary)


# -- end-to-end monitoring ------------------------------------------------

@dataclass(frozen=True)
class DetectionReport:
    stopped: bool
    stop_index: int | None
    boundary_value_at_stop: float | None
    detector_value_at_stop: float | None
    config: MonitorConfig
    status: Status
    lags_observed: int
    max_ratio: float

    def absolute_index(self, offset: int | None = None) -> int | None:
        """Observation index of the stop; defaults to ``m + stop_index``."""
        if self.stop_index is None:
            return None
        return (self.config.m if offset is None else offset) + self.stop_index

    def to_dict(self) -> dict:
        return {"status": self.status.value, "stopped": self.stopped,
                "stop_index": self.stop_index,
                "absolute_index": self.absolute_index(),
                "boundary_value_at_stop": self.boundary_value_at_stop,
                "detector_value_at_stop": self.detector_value_at_stop,
                "lags_observed": self.lags_observed, "max_ratio": self.max_ratio,
                "config": self.config.to_dict()}


def scale_for(fitted: FittedModel, target: Target | str) -> float:
    return fitted.model.sigma if Target(target) is Target.MEAN else fitted.eta_hat


def run_monitor(fitted: FittedModel, stream: Iterable[float], config: MonitorConfig) -> DetectionReport:
    """Monitor ``stream`` (``Y_{m+1}, Y_{m+2}, ...``) against a fitted model.

    Observations are consumed lazily; monitoring stops at the first crossing
    or after ``config.effective_horizon`` lags.
    """
    if config.m != fitted.m:
        raise ValueError(f"config.m={config.m} differs from training size {fitted.m}")
    square = config.target is Target.GENERAL
    resid_filter = ResidualFilter.from_history(fitted.model, fitted.data, fitted.residuals)
    state = init_detector(fitted.residuals, config.target, scale_for(fitted, config.target))
    horizon = config.effective_horizon
    max_ratio = 0.0
    for y in stream:
        e = resid_filter.update(y)
        res = step(state, e * e if square else e, config)
        state = res.state
        stat = res.page_value if config.scheme is Scheme.PAGE else res.cusum_value
        max_ratio = max(max_ratio, stat / res.boundary)
        if res.crossed:
            return DetectionReport(True, state.k, res.boundary, stat, config,
                                   Status.DETECTED, state.k, max_ratio)
        if state.k >= horizon:
            return DetectionReport(False, None, None, None, config, Status.HORIZON,
                                   state.k, max_ratio)
    return DetectionReport(False, None, None, None, config, Status.STREAM_END, state.k,
                           max_ratio)
