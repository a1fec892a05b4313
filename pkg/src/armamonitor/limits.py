"""Critical values from the Brownian limits of the CUSUM and Page detectors.

Under the null hypothesis the normalised CUSUM detector converges to
``sup_{0<x<1} |W(x)| / x**gamma`` and Page's detector to

    sup_{0<x<1} sup_{0<=y<=x} |W(x) - (1-x)/(1-y) W(y)| / x**gamma.

Both are simulated on the grid ``x_i = i/G`` from Gaussian increments.
For fixed ``x`` the inner supremum is linear in ``V(y) = W(y)/(1-y)``, so it
only needs the running minimum and maximum of ``V`` (``V(0) = 0``); one
path costs ``O(G)``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import optimize, stats

from .detectors import Scheme

logger = logging.getLogger(__name__)

CACHE_FILE = "critical_values.txt"


@dataclass(frozen=True)
class MCConfig:
    """Grid size, replications and seed of a critical-value simulation.

    ``chunk`` paths share one generator seeded with ``(seed, chunk_index)``,
    which makes the draws independent of how chunks are distributed over
    workers.
    """

    G: int = 10_000
    R: int = 1_000_000
    seed: int = 20130701
    chunk: int = 200


# -- functionals of a single path -----------------------------------------

def cusum_functional_from_path(x: np.ndarray, w: np.ndarray, gamma: float) -> float:
    """``max_i |w_i| / x_i**gamma`` over the supplied grid."""
    return float(np.max(np.abs(w) / x ** gamma))


def page_functional_from_path(x: np.ndarray, w: np.ndarray, gamma: float) -> float:
    """Double supremum over the supplied grid, inner ``y`` ranging over ``{0} u {x_j <= x_i}``."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    one_minus = 1.0 - x
    interior = one_minus > 0
    v = np.where(interior, w / np.where(interior, one_minus, 1.0), 0.0)
    lo = np.minimum(np.minimum.accumulate(v), 0.0)
    hi = np.maximum(np.maximum.accumulate(v), 0.0)
    inner = np.maximum(w - one_minus * lo, one_minus * hi - w)
    return float(np.max(inner / x ** gamma))


def _brownian(increments: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    G = increments.shape[-1]
    x = np.arange(1, G + 1) / G
    return x, np.cumsum(increments, axis=-1) / math.sqrt(G)


def simulate_cusum_functional(gamma: float, G: int = 10_000, rng=None, increments=None) -> float:
    """One draw of the CUSUM limit functional."""
    if increments is None:
        increments = np.random.default_rng(rng).standard_normal(G)
    x, w = _brownian(np.asarray(increments, dtype=float))
    return cusum_functional_from_path(x, w, gamma)


def simulate_page_functional(gamma: float, G: int = 10_000, rng=None, increments=None) -> float:
    """One draw of the Page limit functional."""
    if increments is None:
        increments = np.random.default_rng(rng).standard_normal(G)
    x, w = _brownian(np.asarray(increments, dtype=float))
    return page_functional_from_path(x, w, gamma)


# -- batched simulation ---------------------------------------------------

def functionals_from_increments(increments: np.ndarray, gammas, schemes=(Scheme.CUSUM, Scheme.PAGE)):
    """Both functionals for every row of ``increments`` and every ``gamma``.

    Returns a dict ``{(scheme, gamma): array of len(increments)}``.
    """
    gammas = [float(g) for g in gammas]
    schemes = [Scheme(s) for s in schemes]
    x, w = _brownian(np.atleast_2d(increments))
    out = {}
    inv_pow = {g: x ** -g for g in gammas}
    if Scheme.CUSUM in schemes:
        a = np.abs(w)
        for g in gammas:
            out[(Scheme.CUSUM, g)] = np.max(a * inv_pow[g], axis=1)
    if Scheme.PAGE in schemes:
        one_minus = 1.0 - x
        v = w[:, :-1] / one_minus[:-1]
        lo = np.minimum(np.minimum.accumulate(v, axis=1), 0.0)
        hi = np.maximum(np.maximum.accumulate(v, axis=1), 0.0)
        inner = np.empty_like(w)
        inner[:, :-1] = np.maximum(w[:, :-1] - one_minus[:-1] * lo,
                                   one_minus[:-1] * hi - w[:, :-1])
        inner[:, -1] = np.abs(w[:, -1])
        for g in gammas:
            out[(Scheme.PAGE, g)] = np.max(inner * inv_pow[g], axis=1)
    return out


def _chunk_draws(args):
    index, size, G, seed, gammas, schemes = args
    rng = np.random.default_rng([seed, index])
    return index, functionals_from_increments(rng.standard_normal((size, G)), gammas, schemes)


def simulate_functionals(gammas, config: MCConfig = MCConfig(),
                         schemes=(Scheme.CUSUM, Scheme.PAGE), n_jobs: int = 1):
    """Draws of both limit functionals on shared paths.

    All ``gammas`` and ``schemes`` are evaluated on the same Brownian paths,
    so per-path comparisons (dominance, monotonicity in gamma) hold exactly.
    """
    gammas = tuple(float(g) for g in gammas)
    schemes = tuple(Scheme(s) for s in schemes)
    n_chunks = -(-config.R // config.chunk)
    tasks = [(i, min(config.chunk, config.R - i * config.chunk), config.G, config.seed,
              gammas, schemes) for i in range(n_chunks)]
    parts = [None] * n_chunks
    if n_jobs == 1:
        for t in tasks:
            i, res = _chunk_draws(t)
            parts[i] = res
    else:
        with ProcessPoolExecutor(n_jobs) as ex:
            for i, res in ex.map(_chunk_draws, tasks, chunksize=4):
                parts[i] = res
    return {key: np.concatenate([part[key] for part in parts]) for key in parts[0]}


def empirical_quantile(draws: np.ndarray, alpha: float) -> float:
    """Order statistic number ``ceil((1 - alpha) R)`` of the draws."""
    s = np.sort(draws)
    idx = math.ceil((1.0 - alpha) * s.size) - 1
    return float(s[min(max(idx, 0), s.size - 1)])


# -- analytic oracle for gamma = 0 ----------------------------------------

def sup_abs_bm_cdf(c: float, terms: int = 50) -> float:
    """``P(sup_{0<=x<=1} |W(x)| <= c)`` from the reflection series."""
    if c <= 0:
        return 0.0
    k = np.arange(-terms, terms + 1)
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    return float(np.sum(signs * (stats.norm.cdf((2 * k + 1) * c) - stats.norm.cdf((2 * k - 1) * c))))


def sup_abs_bm_quantile(alpha: float) -> float:
    """Threshold ``c`` with ``P(sup |W| > c) = alpha``."""
    return float(optimize.brentq(lambda c: sup_abs_bm_cdf(c) - (1.0 - alpha), 0.1, 10.0,
                                 xtol=1e-13))


# -- table and cache ------------------------------------------------------

@dataclass
class CriticalValueTable:
    """Thresholds keyed by ``(gamma, alpha, scheme)``."""

    entries: dict = field(default_factory=dict)
    mc_config: MCConfig = MCConfig()

    def get(self, gamma: float, alpha: float, scheme) -> float:
        return self.entries[(round(float(gamma), 6), round(float(alpha), 6), Scheme(scheme))]

    def __contains__(self, key) -> bool:
        gamma, alpha, scheme = key
        return (round(float(gamma), 6), round(float(alpha), 6), Scheme(scheme)) in self.entries

    def add(self, gamma, alpha, scheme, c):
        self.entries[(round(float(gamma), 6), round(float(alpha), 6), Scheme(scheme))] = float(c)

    def rows(self):
        for (g, a, s), c in sorted(self.entries.items(), key=lambda kv: (kv[0][2].value, kv[0][0], kv[0][1])):
            yield g, a, s, c

    def to_text(self) -> str:
        cfg = self.mc_config
        lines = ["# gamma alpha scheme c R G seed"]
        for g, a, s, c in self.rows():
            lines.append(f"{g:g} {a:g} {s.value} {c:.6f} {cfg.R} {cfg.G} {cfg.seed}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "CriticalValueTable":
        table = cls()
        cfg = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            g, a, s, c, R, G, seed = line.split()
            table.add(float(g), float(a), s, float(c))
            cfg = MCConfig(G=int(G), R=int(R), seed=int(seed))
        if cfg is not None:
            table.mc_config = cfg
        return table

    @classmethod
    def load(cls, path) -> "CriticalValueTable":
        return cls.from_text(Path(path).read_text())


def build_table(gammas, alphas, schemes=(Scheme.CUSUM, Scheme.PAGE),
                config: MCConfig = MCConfig(), n_jobs: int = 1) -> CriticalValueTable:
    draws = simulate_functionals(gammas, config, schemes, n_jobs=n_jobs)
    table = CriticalValueTable(mc_config=config)
    for (scheme, g), d in draws.items():
        for a in alphas:
            table.add(g, a, scheme, empirical_quantile(d, a))
    return table


@lru_cache(maxsize=1)
def bundled_table() -> CriticalValueTable:
    """Precomputed cache shipped with the package (regenerable)."""
    try:
        text = resources.files("armamonitor.data").joinpath(CACHE_FILE).read_text()
    except FileNotFoundError:
        return CriticalValueTable()
    return CriticalValueTable.from_text(text)


@lru_cache(maxsize=64)
def _cached_draws(gamma: float, scheme: Scheme, config: MCConfig) -> np.ndarray:
    return simulate_functionals([gamma], config, [scheme])[(scheme, gamma)]


def critical_value(gamma: float, alpha: float, scheme=Scheme.CUSUM,
                   mc_config: MCConfig | None = None) -> float:
    """``(1 - alpha)`` quantile of the limit functional.

    Without ``mc_config`` the bundled cache is consulted first; on a miss
    the default configuration is simulated (several minutes for R = 1e6).
    """
    scheme = Scheme(scheme)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0.0 <= gamma < 0.5:
        raise ValueError("gamma must lie in [0, 1/2)")
    if mc_config is None:
        table = bundled_table()
        if (gamma, alpha, scheme) in table:
            return table.get(gamma, alpha, scheme)
        mc_config = MCConfig()
        logger.info("no cached value for (%g, %g, %s); simulating R=%d", gamma, alpha,
                    scheme.value, mc_config.R)
    return empirical_quantile(_cached_draws(float(gamma), scheme, mc_config), alpha)
