"""ARMA(p, q) models: validation, power-series expansions, simulation, residuals.

The model is written as

.. math::
    \\phi(B)(Y_t - \\mu) = \\theta(B)\\varepsilon_t,

with :math:`\\phi(z) = 1 - \\phi_1 z - \\dots - \\phi_p z^p` and
:math:`\\theta(z) = 1 + \\theta_1 z + \\dots + \\theta_q z^q`.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter, lfiltic

from .exceptions import (
    CommonRoot,
    InsufficientData,
    InvalidModel,
    NonCausal,
    NonInvertible,
    NonPositiveSigma,
)

ROOT_MARGIN = 1e-6
COMMON_ROOT_TOL = 1e-6
MAX_TRUNCATION = 10_000


def _as_coefs(values) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float)).ravel()
    return arr


def poly_roots(coefs: np.ndarray, sign: float) -> np.ndarray:
    """Roots of ``1 + sign * (c_1 z + ... + c_k z^k)``.

    ``sign=-1`` gives the AR polynomial, ``sign=+1`` the MA polynomial.
    Trailing zero coefficients lower the degree, and so do negligible ones:
    their roots lie far outside the unit circle and would overflow.
    """
    c = np.asarray(coefs, dtype=float)
    c = np.trim_zeros(np.where(np.abs(c) > 1e-14 * max(1.0, np.abs(c).max(initial=0.0)), c, 0.0), "b")
    if c.size == 0:
        return np.empty(0, dtype=complex)
    # np.roots wants the highest power first
    return np.roots(np.concatenate([sign * c[::-1], [1.0]]))


@dataclass(frozen=True)
class ArmaModel:
    """Time-constant ARMA(p, q) parameter vector ``(mu, phi, theta, sigma)``.

    Construct through :func:`validate_model` (or :meth:`ArmaModel.create`) to
    get the causality / invertibility checks.
    """

    mu: float
    phi: tuple = ()
    theta: tuple = ()
    sigma: float = 1.0

    @classmethod
    def create(cls, mu=0.0, phi=(), theta=(), sigma=1.0) -> "ArmaModel":
        return validate_model(mu, phi, theta, sigma)

    @property
    def p(self) -> int:
        return len(self.phi)

    @property
    def q(self) -> int:
        return len(self.theta)

    @property
    def ar_poly(self) -> np.ndarray:
        """Coefficients ``(1, -phi_1, ..., -phi_p)`` in increasing powers."""
        return np.concatenate([[1.0], -np.asarray(self.phi, dtype=float)])

    @property
    def ma_poly(self) -> np.ndarray:
        return np.concatenate([[1.0], np.asarray(self.theta, dtype=float)])

    @property
    def phi_at_one(self) -> float:
        return 1.0 - float(np.sum(self.phi))

    @property
    def theta_at_one(self) -> float:
        return 1.0 + float(np.sum(self.theta))

    def ar_roots(self) -> np.ndarray:
        return poly_roots(np.asarray(self.phi), -1.0)

    def ma_roots(self) -> np.ndarray:
        return poly_roots(np.asarray(self.theta), +1.0)

    def long_run_std(self) -> float:
        """Standard deviation of the sample mean times sqrt(n)."""
        return self.sigma * abs(self.theta_at_one / self.phi_at_one)

    def replace(self, **changes) -> "ArmaModel":
        params = dict(mu=self.mu, phi=self.phi, theta=self.theta, sigma=self.sigma)
        params.update(changes)
        return validate_model(**params)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "phi": list(self.phi),
            "theta": list(self.theta),
            "sigma": self.sigma,
        }


def validate_model(mu=0.0, phi=(), theta=(), sigma=1.0, *, margin=ROOT_MARGIN,
                   common_tol=COMMON_ROOT_TOL) -> ArmaModel:
    """Check a raw parameter tuple and return an :class:`ArmaModel`.

    Raises
    ------
    NonCausal, NonInvertible, CommonRoot, NonPositiveSigma
        When the corresponding condition fails. ``InvalidModel`` for
        non-finite input.
    """
    phi = _as_coefs(phi)
    theta = _as_coefs(theta)
    values = np.concatenate([[mu, sigma], phi, theta])
    if not np.all(np.isfinite(values)):
        raise InvalidModel("parameters must be finite")
    if not sigma > 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")

    ar = poly_roots(phi, -1.0)
    ma = poly_roots(theta, +1.0)
    if ar.size and np.min(np.abs(ar)) <= 1.0 + margin:
        bad = ar[np.argmin(np.abs(ar))]
        raise NonCausal(f"AR polynomial has a root at {bad:.6g} (|z|={abs(bad):.6g})")
    if ma.size and np.min(np.abs(ma)) <= 1.0 + margin:
        bad = ma[np.argmin(np.abs(ma))]
        raise NonInvertible(f"MA polynomial has a root at {bad:.6g} (|z|={abs(bad):.6g})")
    if ar.size and ma.size:
        dist = np.abs(ar[:, None] - ma[None, :])
        if np.min(dist) < common_tol:
            raise CommonRoot("AR and MA polynomials share a root")
    return ArmaModel(float(mu), tuple(float(x) for x in phi),
                     tuple(float(x) for x in theta), float(sigma))


def reflect_roots(coefs, sign: float, margin: float = 1e-3) -> np.ndarray:
    """Map roots inside the closed unit disk to their reciprocal conjugates.

    Returns the coefficient vector (without the leading 1) of the resulting
    polynomial. Roots on the unit circle are pushed out to ``1 + margin``.
    """
    c = np.asarray(coefs, dtype=float)
    roots = poly_roots(c, sign)
    if roots.size == 0:
        return c.copy()
    mod = np.abs(roots)
    if np.all(mod > 1.0 + ROOT_MARGIN):
        return c.copy()
    inside = mod < 1.0
    roots = np.where(inside, 1.0 / np.conj(np.where(inside, roots, 1.0)), roots)
    mod = np.abs(roots)
    roots = np.where(mod < 1.0 + margin, roots / mod * (1.0 + margin), roots)
    # prod (1 - z / r) expanded in increasing powers
    poly = np.array([1.0 + 0j])
    for r in roots:
        poly = np.convolve(poly, [1.0, -1.0 / r])
    poly = poly.real
    out = np.zeros_like(c)
    out[: poly.size - 1] = sign * poly[1:]
    return out


@dataclass(frozen=True)
class PsiExpansion:
    """Truncated power series of the reciprocal of an ARMA polynomial.

    ``|coefficients[l]| <= bound_k * decay**l`` for every stored ``l``, and
    ``tail_bound`` bounds the absolute sum of the dropped coefficients.
    """

    coefficients: np.ndarray
    truncation_length: int
    tail_bound: float
    decay: float = 0.0
    bound_k: float = 1.0

    def __len__(self):
        return self.coefficients.size

    def sum(self) -> float:
        return float(np.sum(self.coefficients))


def _decay_rate(roots: np.ndarray) -> tuple[float, float]:
    if roots.size == 0:
        return 0.0, 0.1
    c0 = 1.0 / float(np.min(np.abs(roots)))
    # the extra 10% of the gap absorbs polynomial factors from repeated roots
    return c0, c0 + 0.1 * (1.0 - c0)


def default_truncation(decay: float) -> int:
    if decay <= 0.0:
        return 1
    return int(min(MAX_TRUNCATION, math.ceil(math.log(1e-12) / math.log(decay))))


def reciprocal_series(poly: np.ndarray, L: int) -> np.ndarray:
    """First ``L + 1`` coefficients of ``1 / poly(z)`` (``poly[0] == 1``)."""
    impulse = np.zeros(L + 1)
    impulse[0] = 1.0
    return lfilter([1.0], poly, impulse)


def _expansion(poly: np.ndarray, roots: np.ndarray, L: int | None) -> PsiExpansion:
    _, c = _decay_rate(roots)
    if L is None:
        L = default_truncation(c)
    if L < 0:
        raise ValueError("truncation length must be nonnegative")
    coefs = reciprocal_series(poly, L)
    powers = c ** np.arange(L + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(powers > 0, np.abs(coefs) / powers, 0.0)
    K = max(1.0, float(np.max(ratio)))
    tail = K * c ** (L + 1) / (1.0 - c)
    return PsiExpansion(coefs, L, float(tail), float(c), K)


def psi_expansion(model: ArmaModel, L: int | None = None) -> PsiExpansion:
    """Coefficients of ``1 / theta(z)``."""
    return _expansion(model.ma_poly, model.ma_roots(), L)


def pi_expansion(model: ArmaModel, L: int | None = None) -> PsiExpansion:
    """Coefficients of ``1 / phi(z)``."""
    return _expansion(model.ar_poly, model.ar_roots(), L)


def ma_infinity(model: ArmaModel, L: int) -> np.ndarray:
    """First ``L + 1`` coefficients of ``theta(z) / phi(z)``."""
    impulse = np.zeros(L + 1)
    impulse[0] = 1.0
    return lfilter(model.ma_poly, model.ar_poly, impulse)


# -- innovations ----------------------------------------------------------

@dataclass(frozen=True)
class Gaussian:
    """Normal innovations with standard deviation ``std``."""

    std: float = 1.0

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.std * rng.standard_normal(size)

    @property
    def eta(self) -> float:
        return math.sqrt(2.0) * self.std ** 2


@dataclass(frozen=True)
class Laplace:
    """Laplace(0, b) innovations, sampled through the inverse CDF.

    The variance is ``2 b**2``.
    """

    b: float = 1.0

    @classmethod
    def from_std(cls, std: float) -> "Laplace":
        return cls(std / math.sqrt(2.0))

    @property
    def std(self) -> float:
        return math.sqrt(2.0) * self.b

    @property
    def eta(self) -> float:
        # E[e^4] = 24 b^4, sigma^4 = 4 b^4
        return math.sqrt(20.0) * self.b ** 2

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        u = rng.random(size) - 0.5
        return -self.b * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def innovation_family(name: str, std: float):
    name = name.lower()
    if name in ("gaussian", "normal"):
        return Gaussian(std)
    if name == "laplace":
        return Laplace.from_std(std)
    raise ValueError(f"unknown innovation family {name!r}")


def default_burn_in(model: ArmaModel) -> int:
    return 500 + 10 * (model.p + model.q)


def simulate_path(model: ArmaModel, n: int, innovations=None, burn_in: int | None = None,
                  rng: np.random.Generator | int | None = None,
                  family: str = "gaussian") -> np.ndarray:
    """Simulate ``Y_1, ..., Y_n`` from the ARMA recursion.

    Parameters
    ----------
    model : ArmaModel
    n : int
        Number of returned observations.
    innovations : array_like, optional
        Explicit innovations of length ``burn_in + n``. When omitted they
        are drawn from ``family`` scaled to ``model.sigma``.
    burn_in : int, optional
        Values discarded from the start of the zero-initialised recursion.
        Defaults to ``500 + 10 (p + q)`` when innovations are drawn, and to
        ``len(innovations) - n`` when they are supplied.
    rng : Generator or seed, optional
    family : {"gaussian", "laplace"}
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if innovations is None:
        if burn_in is None:
            burn_in = default_burn_in(model)
        rng = np.random.default_rng(rng)
        eps = innovation_family(family, model.sigma).sample(rng, burn_in + n)
    else:
        eps = np.asarray(innovations, dtype=float)
        if burn_in is None:
            burn_in = eps.size - n
        if eps.size != burn_in + n:
            raise ValueError("innovations must have length burn_in + n")
    x = lfilter(model.ma_poly, model.ar_poly, eps)
    return model.mu + x[burn_in:]


def simulate_switching_path(before: ArmaModel, after: ArmaModel, n: int, switch_at: int,
                            innovations: np.ndarray) -> np.ndarray:
    """Path whose parameters change from ``before`` to ``after``.

    ``innovations`` has length ``n`` and already carries the time-varying
    scale. Observation index ``switch_at`` (0-based) is the first generated
    under ``after``; the recursion keeps the centred past ``Y - mu`` and the
    past innovations across the switch.
    """
    eps = np.asarray(innovations, dtype=float)
    if eps.size != n:
        raise ValueError("need exactly n innovations")
    s = int(np.clip(switch_at, 0, n))
    x = np.empty(n)
    x[:s] = lfilter(before.ma_poly, before.ar_poly, eps[:s])
    if s < n:
        b, a = after.ma_poly, after.ar_poly
        k = max(len(a), len(b)) - 1
        if k and s:
            zi = lfiltic(b, a, x[:s][::-1][: len(a) - 1], eps[:s][::-1][: len(b) - 1])
            x[s:], _ = lfilter(b, a, eps[s:], zi=zi)
        else:
            x[s:] = lfilter(b, a, eps[s:])
    mu = np.where(np.arange(n) < s, before.mu, after.mu)
    return mu + x


# -- residuals ------------------------------------------------------------

def residuals(model: ArmaModel, data, p_presample: int | None = None) -> np.ndarray:
    """Conditional residuals of ``data`` under ``model``.

    The first ``p_presample`` (default ``model.p``) observations act as the
    AR presample, so the output has ``len(data) - p_presample`` entries for
    ``t = 1, ..., n``. The MA recursion starts from zero residuals.
    """
    y = np.asarray(data, dtype=float)
    p = model.p if p_presample is None else int(p_presample)
    if p < model.p:
        raise ValueError("presample shorter than the AR order")
    if y.size < p + 1:
        raise InsufficientData(f"need at least {p + 1} observations, got {y.size}")
    x = y - model.mu
    e = x[p:].copy()
    for j, phi_j in enumerate(model.phi, start=1):
        e -= phi_j * x[p - j: y.size - j]
    if model.q == 0:
        return e
    return lfilter([1.0], model.ma_poly, e)


@dataclass
class ResidualFilter:
    """Streaming continuation of :func:`residuals`.

    Seed it with the trailing observations and residuals of a batch
    computation; :meth:`update` then produces one residual per observation.
    """

    model: ArmaModel
    past_x: deque = field(default_factory=deque)
    past_e: deque = field(default_factory=deque)

    @classmethod
    def from_history(cls, model: ArmaModel, data, resid) -> "ResidualFilter":
        x = np.asarray(data, dtype=float)[-model.p:] - model.mu if model.p else []
        e = np.asarray(resid, dtype=float)[-model.q:] if model.q else []
        past_x = deque((float(v) for v in x[::-1]), maxlen=model.p)
        past_e = deque((float(v) for v in e[::-1]), maxlen=model.q)
        if len(past_e) < model.q:
            past_e.extend([0.0] * (model.q - len(past_e)))
        return cls(model, past_x, past_e)

    def update(self, y: float) -> float:
        m = self.model
        x = float(y) - m.mu
        e = x
        for phi_j, x_j in zip(m.phi, self.past_x):
            e -= phi_j * x_j
        for theta_j, e_j in zip(m.theta, self.past_e):
            e -= theta_j * e_j
        if m.p:
            self.past_x.appendleft(x)
        if m.q:
            self.past_e.appendleft(e)
        return e
