"""Asymptotic delay of the stopping times after a break.

A break at monitoring lag ``k*`` induces a drift ``Delta`` in the detector
increments. The stopping time, centred by ``a_m(c)`` and scaled by
``b_m(c)``, converges to a normal law for CUSUM and to a case-dependent law
``1 - Psi(-u)`` for Page's CUSUM; the case (early / intermediate / late)
follows from the limit of ``|Delta| m**(beta (1 - gamma) - 1/2 + gamma)``.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .arma import ArmaModel, psi_expansion
from .detectors import Scheme
from .exceptions import AssumptionViolated, DegenerateDrift


class BreakKind(str, enum.Enum):
    MEAN = "mean"
    SCALE = "scale"
    SWITCH = "switch"


@dataclass(frozen=True)
class BreakSpec:
    """Break at monitoring lag ``k_star`` (first affected observation ``Y_{m+k*}``).

    ``delta`` is the mean shift (``MEAN``) or the change of the innovation
    standard deviation (``SCALE``). ``SWITCH`` replaces the whole model by
    ``after``. The location is also written as ``k* = floor(theta_loc m**beta_loc)``.
    """

    kind: BreakKind
    k_star: int
    delta: float = 0.0
    theta_loc: float | None = None
    beta_loc: float = 0.0
    after: ArmaModel | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BreakKind(self.kind))
        if self.k_star < 1:
            raise ValueError("k_star must be a positive lag")
        if not 0.0 <= self.beta_loc < 1.0:
            raise ValueError("beta_loc must lie in [0, 1)")
        if self.theta_loc is None:
            object.__setattr__(self, "theta_loc", float(self.k_star))
        if self.theta_loc <= 0:
            raise ValueError("theta_loc must be positive")
        if self.kind is BreakKind.SWITCH and self.after is None:
            raise ValueError("a model switch needs the post-break model")

    @classmethod
    def mean(cls, delta, k_star, **kw):
        return cls(BreakKind.MEAN, k_star, delta, **kw)

    @classmethod
    def scale(cls, delta, k_star, **kw):
        return cls(BreakKind.SCALE, k_star, delta, **kw)

    @classmethod
    def switch(cls, after: ArmaModel, k_star, **kw):
        return cls(BreakKind.SWITCH, k_star, after=after, **kw)

    def location_consistent(self, m: int) -> bool:
        return math.floor(self.theta_loc * m ** self.beta_loc) == self.k_star


# -- drifts -------------------------------------------------------------------

def drift_mean(model: ArmaModel, delta_mu: float) -> float:
    """Residual drift ``delta * phi(1) / theta(1)`` of a mean shift."""
    return delta_mu * model.phi_at_one / model.theta_at_one


def drift_scale(sigma0: float, delta_sigma: float) -> float:
    """Squared-residual drift ``delta**2 + 2 sigma0 delta`` of a scale shift."""
    if not sigma0 + delta_sigma > 0:
        raise ValueError("post-break scale must be positive")
    out = delta_sigma ** 2 + 2.0 * sigma0 * delta_sigma
    if out == 0.0:
        raise DegenerateDrift("scale break induces no drift")
    return out


def lambda_mu_path(model_hat: ArmaModel, delta_mu: float, M: int) -> np.ndarray:
    """``Lambda_s`` for ``s = 0..M``: residual response to a unit-delta mean step."""
    p = model_hat.p
    psi = psi_expansion(model_hat, M).coefficients
    partial = 1.0 - np.concatenate([[0.0], np.cumsum(model_hat.phi)])  # 1 - sum_{j<=l} phi_j
    cum_psi = np.cumsum(psi)
    out = np.empty(M + 1)
    for s in range(M + 1):
        if s < p:
            out[s] = np.dot(psi[s::-1], partial[: s + 1])
        else:
            head = model_hat.phi_at_one * cum_psi[s - p]
            out[s] = head + np.dot(psi[s - np.arange(p)], partial[:p])
    return delta_mu * out


def lambda_mu_oracle(model_hat: ArmaModel, delta_mu: float, s: int) -> float:
    """Residual drift ``s`` lags after a mean shift (0 before the shift)."""
    if s < 0:
        return 0.0
    return float(lambda_mu_path(model_hat, delta_mu, s)[s])


# -- cases ----------------------------------------------------------------

class Case(str, enum.Enum):
    EARLY = "i"
    INTERMEDIATE = "ii"
    LATE = "iii"


@dataclass(frozen=True)
class CaseTag:
    case: Case
    C1: float | None = None
    d1: float | None = None


def scaled_drift(drift: float, m: int, beta_loc: float, gamma: float) -> float:
    return abs(drift) * m ** (beta_loc * (1.0 - gamma) - 0.5 + gamma)


def classify_case(drift: float, m: int, beta_loc: float, gamma: float, limit: float,
                  theta_loc: float = 1.0, c: float | None = None) -> CaseTag:
    """Tag the regime from the declared limit of the scaled drift.

    ``limit`` is the caller's statement of ``lim Delta~_m``: ``0`` (early),
    ``inf`` (late) or a positive constant (intermediate). The finite-``m``
    value is only used to warn about an implausible declaration. For the
    intermediate case ``c`` is needed to solve for ``d1``.
    """
    if limit < 0 or math.isnan(limit):
        raise AssumptionViolated("the scaled drift limit must be nonnegative")
    if not math.sqrt(m) * abs(drift) > 1.0:
        warnings.warn("sqrt(m)|Delta| is small; the drift may be undetectable", stacklevel=2)
    tilde = scaled_drift(drift, m, beta_loc, gamma)
    if limit == 0.0:
        if tilde > 10.0:
            warnings.warn(f"declared early case but scaled drift is {tilde:.3g}", stacklevel=2)
        return CaseTag(Case.EARLY)
    if math.isinf(limit):
        if tilde < 0.1:
            warnings.warn(f"declared late case but scaled drift is {tilde:.3g}", stacklevel=2)
        return CaseTag(Case.LATE)
    if not 0.1 <= tilde / limit <= 10.0:
        warnings.warn(f"scaled drift {tilde:.3g} far from declared limit {limit:.3g}",
                      stacklevel=2)
    if c is None:
        raise AssumptionViolated("the intermediate case needs the threshold c")
    C1 = theta_loc ** (1.0 - gamma) * limit
    return CaseTag(Case.INTERMEDIATE, C1, solve_d1(c, C1, gamma))


# -- fixed points -----------------------------------------------------------

def solve_d1(c: float, C1: float, gamma: float) -> float:
    """Root in (0, 1) of ``d = 1 - (c / C1) d**(1-gamma)``; bisection unless ``gamma = 0``."""
    if not (c >= 0 and C1 > 0):
        raise ValueError("need c >= 0 and C1 > 0")
    if c == 0:
        return 1.0
    if gamma == 0.0:
        return C1 / (C1 + c)
    r = c / C1

    def f(d):
        return 1.0 - r * d ** (1.0 - gamma) - d

    lo, hi = 0.0, 1.0
    mid = 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if val == 0.0 or hi - lo < 1e-17:
            break
        if val > 0:
            lo = mid
        else:
            hi = mid
    return mid


def _bisection_fixed_point(A, k_star, gamma):
    g = lambda x: x - A * x ** gamma - k_star
    lo = max(k_star, 0.0)
    hi = max(k_star, 1.0) + A * max(k_star, 1.0) ** gamma
    while g(hi) < 0:
        hi *= 2.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def solve_a_m(c: float, m: int, drift_abs: float, k_star: float, gamma: float,
              scale: float = 1.0) -> float:
    """Positive fixed point of ``x = A x**gamma + k*``, ``A = c scale m**(1/2-gamma) / |Delta|``.

    ``scale`` is the innovation scale the detector is normalised by (sigma
    or eta); the boundary is ``c * scale * g_gamma``, so the drift has to
    cover ``c * scale`` rather than ``c``. ``scale=1`` recovers the
    unit-variance form.
    """
    if drift_abs <= 0:
        raise ValueError("drift must be nonzero")
    if gamma == 0.0:
        return c * scale * math.sqrt(m) / abs(drift_abs) + k_star
    A = c * scale * m ** (0.5 - gamma) / abs(drift_abs)
    if A == 0.0:
        return float(k_star)
    x = k_star + A * max(k_star, 1.0) ** gamma
    for _ in range(200):
        new = A * x ** gamma + k_star
        if abs(new - x) <= 1e-13 * new:
            break
        x = new
    else:
        return _bisection_fixed_point(A, k_star, gamma)
    # Newton polish; the derivative 1 - gamma (x - k*) / x stays above 1 - gamma
    for _ in range(2):
        new = new - (new - A * new ** gamma - k_star) / (1.0 - gamma * A * new ** (gamma - 1.0))
    return new


def solve_b_m(a_m: float, sigma_or_eta: float, drift_abs: float, gamma: float,
              k_star: float) -> float:
    return sigma_or_eta * math.sqrt(a_m) / abs(drift_abs) / (1.0 - gamma * (1.0 - k_star / a_m))


# -- limit laws ----------------------------------------------------------

def psi_limit_cdf(u: float, case: CaseTag) -> float:
    """Case-dependent CDF ``Psi(u)``."""
    if case.case is Case.EARLY:
        return float(stats.norm.cdf(u))
    if case.case is Case.LATE:
        return 0.0 if u < 0 else float(2.0 * stats.norm.cdf(u) - 1.0)
    d1 = case.d1
    if d1 is None:
        raise AssumptionViolated("intermediate case needs d1")
    sd0, sd1 = math.sqrt(d1), math.sqrt(1.0 - d1)
    lower = -8.0 * sd0
    if u <= lower:
        return 0.0

    def integrand(w):
        return stats.norm.pdf(w, scale=sd0) * (2.0 * stats.norm.cdf((u - w) / sd1) - 1.0)

    # the normal weight is negligible beyond 8 sd on either side
    upper = min(u, 8.0 * sd0)
    points = [0.0] if lower < 0.0 < upper else None
    val, _ = integrate.quad(integrand, lower, upper, epsabs=1e-8, epsrel=1e-10, limit=200,
                            points=points)
    return float(min(max(val, 0.0), 1.0))


@dataclass(frozen=True)
class DelayAsymptotics:
    drift: float
    case_tag: CaseTag
    a_m: float
    b_m: float
    sigma_or_eta: float
    c: float
    gamma: float
    k_star: int
    m: int

    def standardize(self, tau):
        return (np.asarray(tau, dtype=float) - self.a_m) / self.b_m

    def cdf(self, u, scheme) -> float:
        return standardized_delay_cdf(u, self, scheme)


def delay_asymptotics(c: float, m: int, drift: float, k_star: int, gamma: float,
                      sigma_or_eta: float, case: CaseTag) -> DelayAsymptotics:
    a = solve_a_m(c, m, abs(drift), k_star, gamma, sigma_or_eta)
    b = solve_b_m(a, sigma_or_eta, abs(drift), gamma, k_star)
    return DelayAsymptotics(drift, case, a, b, sigma_or_eta, c, gamma, k_star, m)


def standardized_delay_cdf(u: float, asymptotics: DelayAsymptotics, scheme) -> float:
    """Limit CDF of ``(tau - a_m) / b_m``: ``Phi`` for CUSUM, ``1 - Psi(-u)`` for Page."""
    if Scheme(scheme) is Scheme.CUSUM:
        return float(stats.norm.cdf(u))
    return 1.0 - psi_limit_cdf(-u, asymptotics.case_tag)
