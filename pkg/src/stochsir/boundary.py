"""Stationary law of the infection-free susceptible process.

With I = 0 the susceptibles follow ``dS = (alpha - mu*S) dt + sigma1*S dB``,
whose stationary density is inverse-gamma with shape ``a = 2*c1/sigma1**2``
and scale ``b = 2*alpha/sigma1**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError
from .params import SirParams, c1, validate
from .rng import RngStream


@dataclass(frozen=True)
class StationaryDensity:
    a: float
    b: float

    @classmethod
    def from_params(cls, params: SirParams) -> "StationaryDensity":
        p = validate(params)
        return cls(a=2 * c1(p) / p.sigma1**2, b=2 * p.alpha / p.sigma1**2)

    @property
    def log_normalizer(self) -> float:
        return self.a * math.log(self.b) - special.gammaln(self.a)

    @property
    def normalizer(self) -> float:
        return math.exp(self.log_normalizer)

    @property
    def mode(self) -> float:
        return self.b / (self.a + 1)


def _positive(x):
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr > 0)):
        raise DomainError("stationary density is supported on x > 0")
    return x_arr


def density_at(d: StationaryDensity, x):
    x_arr = _positive(x)
    log_f = d.log_normalizer - (d.a + 1) * np.log(x_arr) - d.b / x_arr
    out = np.exp(log_f)
    return float(out) if out.ndim == 0 else out


def stationary_cdf(d: StationaryDensity, x):
    """P(X <= x) = Q(a, b/x), the upper regularized incomplete gamma."""
    x_arr = _positive(x)
    out = special.gammaincc(d.a, d.b / x_arr)
    return float(out) if out.ndim == 0 else out


def stationary_sf(d: StationaryDensity, x):
    """P(X > x) = P(a, b/x); accurate in the upper tail where the cdf rounds to 1."""
    x_arr = _positive(x)
    out = special.gammainc(d.a, d.b / x_arr)
    return float(out) if out.ndim == 0 else out


def stationary_quantile(d: StationaryDensity, q):
    return d.b / special.gammainccinv(d.a, q)


def stationary_mean(d: StationaryDensity) -> float:
    return d.b / (d.a - 1)


def sample(d: StationaryDensity, rng: RngStream, n: int) -> np.ndarray:
    """Exact draws: 1/G with G ~ Gamma(shape a, rate b)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    g = rng.generator.standard_gamma(d.a, size=n) / d.b
    return 1.0 / g


def quad_total_mass(d: StationaryDensity) -> tuple[float, float]:
    """Integral of the density via y = 1/x, where it becomes a gamma density."""

    def integrand(y):
        return math.exp(d.log_normalizer + (d.a - 1) * math.log(y) - d.b * y)

    return integrate.quad(integrand, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)


def quad_mean(d: StationaryDensity) -> tuple[float, float]:
    def integrand(y):
        return math.exp(d.log_normalizer + (d.a - 2) * math.log(y) - d.b * y)

    return integrate.quad(integrand, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)


def quad_cdf(d: StationaryDensity, x: float) -> tuple[float, float]:
    """Mass of (0, x] by quadrature: y runs over [1/x, inf)."""
    _positive(x)

    def integrand(y):
        return math.exp(d.log_normalizer + (d.a - 1) * math.log(y) - d.b * y)

    return integrate.quad(integrand, 1.0 / x, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)


def binned_mass(d: StationaryDensity, edges) -> np.ndarray:
    """Stationary probability per bin; the outer bins absorb both tails.

    Matches :func:`stochsir.estimators.empirical_density_1d` with ``clip=True``.
    """
    edges = np.asarray(edges, dtype=float)
    inner = edges[1:-1]
    cdf = np.concatenate(([0.0], stationary_cdf(d, inner) if inner.size else [], [1.0]))
    return np.diff(cdf)
