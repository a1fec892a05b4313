"""Monte Carlo experiments: stopping-time distributions under designed breaks.

Each replication simulates a training window and a monitoring window,
optionally re-estimates the model on the training part, and records the
stopping lag of every ``(gamma, scheme)`` rule on the same path.
Replication ``r`` draws from ``default_rng([seed, r])``, so results do not
depend on how replications are spread over worker processes.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .arma import ArmaModel, default_burn_in, innovation_family, residuals, simulate_path, \
    simulate_switching_path
from .delay import BreakKind, BreakSpec, DelayAsymptotics, standardized_delay_cdf
from .detectors import Scheme, Target, monitor_batch
from .estimation import fit
from .exceptions import ArmaMonitorError, TooFewDetections
from .limits import critical_value

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentSpec:
    """Simulation design.

    ``model`` generates the training data (its ``sigma`` is the innovation
    standard deviation for either family). ``fit_order`` selects the fitted
    ARMA order; ``estimate=False`` monitors with the generating model.
    ``thresholds`` overrides the critical values per ``(gamma, scheme)``.
    """

    model: ArmaModel
    m: int
    brk: BreakSpec | None = None
    innovations: str = "gaussian"
    gammas: tuple = (0.0,)
    schemes: tuple = (Scheme.PAGE, Scheme.CUSUM)
    target: Target = Target.GENERAL
    alpha: float = 0.05
    replications: int = 2500
    horizon: int | None = None
    seed: int = 1
    estimate: bool = True
    fit_order: tuple | None = None
    thresholds: dict | None = None
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))
        object.__setattr__(self, "target", Target(self.target))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        if self.replications < 1:
            raise ValueError("replications must be positive")
        if self.brk is not None and self.effective_horizon < self.brk.k_star:
            raise ValueError("horizon ends before the break")

    @property
    def effective_horizon(self) -> int:
        return 10 * self.m if self.horizon is None else self.horizon

    @property
    def order(self) -> tuple[int, int]:
        return self.fit_order if self.fit_order is not None else (self.model.p, self.model.q)

    @property
    def k_star(self) -> int | None:
        return None if self.brk is None else self.brk.k_star

    def cells(self):
        return [(g, s) for g in self.gammas for s in self.schemes]

    def threshold(self, gamma, scheme) -> float:
        if self.thresholds and (gamma, scheme) in self.thresholds:
            return self.thresholds[(gamma, scheme)]
        return critical_value(gamma, self.alpha, scheme)


@dataclass(frozen=True)
class CellSummary:
    median: float
    upper95: float
    frr: float
    detection_rate: float
    nondetection_rate: float
    n: int

    def absolute(self, offset: int) -> tuple[float, float]:
        return self.median + offset, self.upper95 + offset


@dataclass
class ExperimentSummary:
    spec: ExperimentSpec
    stops: dict
    fit_failures: int
    cells: dict = field(default_factory=dict)

    def __getitem__(self, key) -> CellSummary:
        gamma, scheme = key
        return self.cells[(float(gamma), Scheme(scheme))]

    def rows(self):
        off = self.spec.offset
        for (g, s), c in self.cells.items():
            yield {"gamma": g, "scheme": s.value, "median": c.median + off,
                   "upper95": c.upper95 + off, "frr": c.frr,
                   "detection_rate": c.detection_rate,
                   "nondetection_rate": c.nondetection_rate, "n": c.n}


def _order_stat(values: np.ndarray, q: float) -> float:
    s = np.sort(values)
    return float(s[min(math.ceil(q * s.size) - 1, s.size - 1)])


def summarize(stops: np.ndarray, k_star: int | None) -> CellSummary:
    """Cell statistics; ``inf`` marks no detection, ``nan`` a failed fit."""
    s = stops[~np.isnan(stops)]
    n = s.size
    if n == 0:
        return CellSummary(math.nan, math.nan, math.nan, math.nan, math.nan, 0)
    finite = np.isfinite(s)
    if k_star is None:
        frr = float(np.mean(finite))
        det = 0.0
    else:
        frr = float(np.mean(finite & (s < k_star)))
        det = float(np.mean(finite & (s >= k_star)))
    return CellSummary(float(np.median(s)), _order_stat(s, 0.95), frr, det,
                       float(np.mean(~finite)), n)


def simulate_replication(spec: ExperimentSpec, rng: np.random.Generator) -> np.ndarray:
    """Observations ``Y_{1-P}, ..., Y_{m+horizon}`` with the break applied.

    ``P`` is the AR order of the fitted model (the training presample).
    """
    model = spec.model
    P = spec.order[0]
    n = P + spec.m + spec.effective_horizon
    burn = default_burn_in(model)
    unit = innovation_family(spec.innovations, 1.0)
    z = unit.sample(rng, burn + n)
    brk = spec.brk
    if brk is None or brk.kind is BreakKind.MEAN:
        y = simulate_path(model, n, innovations=model.sigma * z, burn_in=burn)
        if brk is not None:
            y[P + spec.m + brk.k_star - 1:] += brk.delta
        return y
    cut = burn + P + spec.m + brk.k_star - 1
    if brk.kind is BreakKind.SCALE:
        sig = np.where(np.arange(burn + n) < cut, model.sigma, model.sigma + brk.delta)
        return simulate_path(model, n, innovations=sig * z, burn_in=burn)
    sig = np.where(np.arange(burn + n) < cut, model.sigma, brk.after.sigma)
    return simulate_switching_path(model, brk.after, burn + n, cut, sig * z)[burn:]


def _replication_stops(spec: ExperimentSpec, r: int, thresholds: dict) -> dict:
    rng = np.random.default_rng([spec.seed, r])
    y = simulate_replication(spec, rng)
    p, q = spec.order
    P, m = p, spec.m
    try:
        if spec.estimate:
            fitted = fit(y[: P + m], p, q, standard_errors=False)
            model = fitted.model
            sigma, eta = model.sigma, fitted.eta_hat
            e = residuals(model, y, P)
        else:
            model = spec.model
            e = residuals(model, y, P)
            sigma = model.sigma
            eta = math.sqrt(np.mean((e[:m] ** 2 - np.mean(e[:m] ** 2)) ** 2))
    except ArmaMonitorError as exc:
        logger.debug("replication %d failed: %s", r, exc)
        return {cell: math.nan for cell in thresholds}
    vals = e if spec.target is Target.MEAN else e * e
    scale = sigma if spec.target is Target.MEAN else eta
    train, monitor = vals[:m], vals[m:]
    total = float(np.sum(train))
    out = {}
    for (g, s), c in thresholds.items():
        k = monitor_batch(monitor, total, scale, m, c, g, s)
        out[(g, s)] = math.inf if k is None else float(k)
    return out


def _block(args):
    spec, start, stop, thresholds = args
    return start, [_replication_stops(spec, r, thresholds) for r in range(start, stop)]


def run_experiment(spec: ExperimentSpec, n_jobs: int = 1, block: int = 100) -> ExperimentSummary:
    """Run all replications and summarise every ``(gamma, scheme)`` cell."""
    thresholds = {(g, s): spec.threshold(g, s) for g, s in spec.cells()}
    R = spec.replications
    tasks = [(spec, a, min(a + block, R), thresholds) for a in range(0, R, block)]
    results = [None] * R
    if n_jobs == 1:
        outputs = map(_block, tasks)
    else:
        ex = ProcessPoolExecutor(n_jobs)
        outputs = ex.map(_block, tasks)
    for start, rows in outputs:
        results[start: start + len(rows)] = rows
    if n_jobs != 1:
        ex.shutdown()
    stops = {cell: np.array([row[cell] for row in results]) for cell in thresholds}
    failures = int(np.sum(np.isnan(next(iter(stops.values())))))
    if failures:
        logger.warning("%d of %d replications failed to fit", failures, R)
    summary = ExperimentSummary(spec, stops, failures)
    summary.cells = {cell: summarize(v, spec.k_star) for cell, v in stops.items()}
    return summary


def null_frr(spec: ExperimentSpec, **kwargs) -> dict:
    """Fraction of replications with any crossing within the horizon, per cell."""
    if spec.brk is not None:
        spec = replace(spec, brk=None)
    res = run_experiment(spec, **kwargs)
    return {cell: c.frr for cell, c in res.cells.items()}


@dataclass(frozen=True)
class LawCheck:
    ks_distance: float
    p_value: float
    n_used: int
    standardized: np.ndarray = field(repr=False)


def delay_law_check(summary: ExperimentSummary, asymptotics: DelayAsymptotics, scheme,
                    gamma: float | None = None, min_detections: int = 100) -> LawCheck:
    """KS distance between standardised stops and the limiting delay law.

    Only replications that stop at or after ``k*`` enter.
    """
    scheme = Scheme(scheme)
    gamma = asymptotics.gamma if gamma is None else gamma
    stops = summary.stops[(float(gamma), scheme)]
    k_star = summary.spec.k_star
    ok = np.isfinite(stops) & (stops >= (k_star or 0))
    used = stops[ok]
    if used.size < min_detections:
        raise TooFewDetections(f"only {used.size} usable detections")
    u = asymptotics.standardize(used)
    cdf = np.vectorize(lambda v: standardized_delay_cdf(v, asymptotics, scheme))
    res = stats.kstest(u, cdf)
    return LawCheck(float(res.statistic), float(res.pvalue), int(used.size), u)


# -- the two application designs --------------------------------------------

EEG_MODEL = ArmaModel(-207.0, (1.65, -0.75, -0.12, 0.18), (), 5.6 * math.sqrt(2.0))
IBM_ARMA22 = ArmaModel(0.0, (-0.40, -0.68), (0.67, 0.76), math.sqrt(8.5e-5))
IBM_POST = ArmaModel(0.0, (), (), math.sqrt(0.00135))

# monitoring lag of observation 18 500 and the lag-to-absolute offset
EEG_CASES = {"TP1": (1500, 17000), "TP2": (500, 18000)}


def eeg_spec(case: str = "TP2", gammas=(0.0, 0.25, 0.49), replications: int = 2500,
             seed: int = 18500, **kw) -> ExperimentSpec:
    """Laplace AR(4) design with the scale ``b`` raised from 5.6 to 10.7."""
    k_star, offset = EEG_CASES[case]
    delta = (10.7 - 5.6) * math.sqrt(2.0)
    params = dict(model=EEG_MODEL, m=1000, brk=BreakSpec.scale(delta, k_star),
                  innovations="laplace", gammas=gammas, target=Target.GENERAL,
                  replications=replications, seed=seed, offset=offset)
    params.update(kw)
    return ExperimentSpec(**params)


def ibm_spec(fit_order=(2, 2), gammas=(0.0, 0.25, 0.49), replications: int = 2500,
             seed: int = 235, **kw) -> ExperimentSpec:
    """ARMA(2,2) training data switching to white noise at observation 235."""
    params = dict(model=IBM_ARMA22, m=200, brk=BreakSpec.switch(IBM_POST, 35),
                  innovations="gaussian", gammas=gammas, target=Target.GENERAL,
                  replications=replications, seed=seed, fit_order=tuple(fit_order),
                  offset=200)
    params.update(kw)
    return ExperimentSpec(**params)
