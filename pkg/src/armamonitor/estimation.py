"""Training-period estimation of ARMA parameters by conditional sum of squares.

The mean is the sample mean of the training window. AR and MA coefficients
minimise the sum of squared conditional residuals, starting from a
Hannan-Rissanen regression and polished with a Nelder-Mead simplex.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .arma import ArmaModel, reflect_roots, residuals, validate_model
from .exceptions import (
    ArmaMonitorError,
    InsufficientData,
    InvalidOrder,
    NoValidFit,
    OptimizerDiverged,
)

logger = logging.getLogger(__name__)

MAX_ORDER = 10


@dataclass(frozen=True)
class FittedModel:
    """Estimated model together with the training-window by-products.

    ``residuals`` are the ``m`` conditional residuals of the training window
    and ``data`` the window itself (presample included); monitoring continues
    the residual recursion from them.
    """

    model: ArmaModel
    eta_sq_hat: float
    m: int
    aic: float
    standard_errors: np.ndarray | None = None
    residuals: np.ndarray = field(default=None, repr=False)
    data: np.ndarray = field(default=None, repr=False)

    @property
    def sigma_sq_hat(self) -> float:
        return self.model.sigma ** 2

    @property
    def eta_hat(self) -> float:
        return math.sqrt(self.eta_sq_hat)

    @property
    def order(self) -> tuple[int, int]:
        return self.model.p, self.model.q


def min_length(p: int, q: int) -> int:
    return max(30, 10 * (p + q + 1))


def _check_order(p, q):
    if not (isinstance(p, (int, np.integer)) and isinstance(q, (int, np.integer))):
        raise InvalidOrder("orders must be integers")
    if p < 0 or q < 0 or p > MAX_ORDER or q > MAX_ORDER:
        raise InvalidOrder(f"orders must lie in [0, {MAX_ORDER}], got ({p}, {q})")


def _lags(x: np.ndarray, k: int, start: int) -> np.ndarray:
    """Columns ``x[t-1], ..., x[t-k]`` for ``t = start, ..., len(x) - 1``."""
    n = x.size
    return np.column_stack([x[start - j: n - j] for j in range(1, k + 1)]) if k else \
        np.empty((n - start, 0))


def hannan_rissanen(x: np.ndarray, p: int, q: int, presample: int) -> np.ndarray:
    """Least-squares starting values ``(phi, theta)`` for centred data ``x``.

    For ``q == 0`` this is ordinary least squares on the lagged series, which
    is the exact conditional-sum-of-squares minimiser.
    """
    n = x.size
    if q == 0:
        if p == 0:
            return np.empty(0)
        X = _lags(x, p, presample)
        beta, *_ = np.linalg.lstsq(X, x[presample:], rcond=None)
        return beta
    # long autoregression for an innovation proxy
    h = int(min(max(2 * (p + q), round(math.log(n) ** 2)), n // 4))
    h = max(h, p + q)
    Xh = _lags(x, h, h)
    a, *_ = np.linalg.lstsq(Xh, x[h:], rcond=None)
    proxy = np.zeros(n)
    proxy[h:] = x[h:] - Xh @ a
    start = max(h + q, presample)
    X = np.column_stack([_lags(x, p, start), _lags(proxy, q, start)])
    beta, *_ = np.linalg.lstsq(X, x[start:], rcond=None)
    return beta


def _project(beta: np.ndarray, p: int) -> np.ndarray:
    phi = reflect_roots(beta[:p], -1.0) if p else beta[:0]
    theta = reflect_roots(beta[p:], +1.0) if beta.size > p else beta[p:]
    return np.concatenate([phi, theta])


def css_objective(beta: np.ndarray, y: np.ndarray, mu: float, p: int, presample: int) -> float:
    """Sum of squared conditional residuals at ``beta = (phi, theta)``."""
    model = ArmaModel(mu, tuple(beta[:p]), tuple(beta[p:]), 1.0)
    e = residuals(model, y, presample)
    val = float(e @ e)
    return val if math.isfinite(val) else math.inf


def _valid(beta, p) -> bool:
    try:
        validate_model(0.0, beta[:p], beta[p:], 1.0)
    except ArmaMonitorError:
        return False
    return True


def _numerical_hessian(f, x, rel_step=1e-4):
    k = x.size
    H = np.empty((k, k))
    h = rel_step * np.maximum(np.abs(x), 1e-2)
    for i in range(k):
        for j in range(i, k):
            ei = np.zeros(k)
            ej = np.zeros(k)
            ei[i] = h[i]
            ej[j] = h[j]
            val = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej))
            H[i, j] = H[j, i] = val / (4.0 * h[i] * h[j])
    return H


def fit(data, p: int, q: int, *, presample: int | None = None,
        standard_errors: bool = True) -> FittedModel:
    """Fit an ARMA(p, q) model to a training window.

    Parameters
    ----------
    data : array_like
        Training observations ``Y_{1-presample}, ..., Y_m``.
    p, q : int
        Model orders.
    presample : int, optional
        Leading observations used only as AR lags. Defaults to ``p``; order
        selection passes a common value so that every candidate sees the
        same ``m``.
    standard_errors : bool
        Approximate standard errors from the numerical Hessian of the
        objective. Skip for speed in Monte Carlo loops.

    Returns
    -------
    FittedModel
    """
    _check_order(p, q)
    y = np.asarray(data, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InsufficientData("data contain non-finite values")
    presample = p if presample is None else int(presample)
    if presample < p:
        raise ValueError("presample must be at least p")
    if y.size < min_length(p, q):
        raise InsufficientData(
            f"ARMA({p},{q}) needs at least {min_length(p, q)} observations, got {y.size}")
    mu = float(np.mean(y))
    x = y - mu
    m = y.size - presample
    k = p + q

    if k == 0:
        beta = np.empty(0)
    else:
        init = _project(hannan_rissanen(x, p, q, presample), p)
        if q == 0 and _valid(init, p):
            beta = init
        else:
            def obj(b):
                return css_objective(_project(b, p), y, mu, p, presample)

            f0 = obj(init)
            if not math.isfinite(f0):
                raise OptimizerDiverged("objective is not finite at the starting values")
            opts = dict(xatol=1e-8, fatol=1e-10 * f0, maxfev=2000 * k)
            res = optimize.minimize(obj, init, method="Nelder-Mead", options=opts)
            beta = _project(res.x, p)
            if not np.allclose(beta, res.x):
                res = optimize.minimize(obj, beta, method="Nelder-Mead", options=opts)
                beta = _project(res.x, p)
            if not math.isfinite(obj(beta)):
                raise OptimizerDiverged("no valid point found")
            if obj(beta) > f0:
                beta = init

    e = residuals(ArmaModel(mu, tuple(beta[:p]), tuple(beta[p:]), 1.0), y, presample)
    sigma_sq = float(e @ e) / m
    model = validate_model(mu, beta[:p], beta[p:], math.sqrt(sigma_sq))
    eta_sq = float(np.mean((e ** 2 - sigma_sq) ** 2))
    aic = m * math.log(sigma_sq) + 2 * (k + 1)

    se = None
    if standard_errors:
        se = np.full(k + 1, np.nan)
        se[0] = model.long_run_std() / math.sqrt(y.size)
        if k:
            H = _numerical_hessian(lambda b: css_objective(b, y, mu, p, presample), beta)
            try:
                cov = 2.0 * sigma_sq * np.linalg.inv(H)
                se[1:] = np.sqrt(np.clip(np.diag(cov), 0.0, None))
            except np.linalg.LinAlgError:
                logger.warning("singular Hessian; standard errors unavailable")
    return FittedModel(model, eta_sq, m, aic, se, e, y)


def select_order(data, p_max: int, q_max: int, **kwargs) -> tuple[int, int]:
    """AIC-minimising ``(p, q)`` over ``0..p_max x 0..q_max``.

    All candidates share the presample ``p_max`` so their AIC values are
    computed on the same residual count. Candidates whose fit fails are
    skipped.
    """
    if p_max < 0 or q_max < 0:
        raise InvalidOrder("grid must be nonempty")
    best, best_aic = None, math.inf
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            try:
                res = fit(data, p, q, presample=p_max, standard_errors=False, **kwargs)
            except ArmaMonitorError as exc:
                logger.debug("ARMA(%d,%d) rejected: %s", p, q, exc)
                continue
            if res.aic < best_aic:
                best, best_aic = (p, q), res.aic
    if best is None:
        raise NoValidFit(f"no ARMA(p,q) with p<={p_max}, q<={q_max} could be fitted")
    return best
