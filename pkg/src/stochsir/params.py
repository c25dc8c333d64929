"""Model constants of the stochastic SIR system and their closed-form consequences.

The degenerate model driven by a single Brownian motion ``B`` reads::

    dS = (alpha - beta*S*I - mu*S) dt + sigma1*S dB
    dI = (beta*S*I - (mu + rho + gamma)*I) dt + sigma2*I dB
    dR = (gamma*I - mu*R) dt + sigma3*R dB

Everything here is pure arithmetic on a :class:`SirParams` value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .errors import NegativeRate, NonPositiveRate, ZeroSigma1

CRITICAL_TOL = 1e-12


@dataclass(frozen=True)
class SirParams:
    alpha: float
    beta: float
    mu: float
    rho: float
    gamma: float
    sigma1: float
    sigma2: float
    sigma3: float = 0.0

    @property
    def removal(self) -> float:
        """Total per-capita outflow of infectives, mu + rho + gamma."""
        return self.mu + self.rho + self.gamma


class Verdict(str, Enum):
    EXTINCTION = "Extinction"
    PERMANENCE = "Permanence"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class DerivedQuantities:
    c1: float
    c2: float
    r: float
    a: float
    b: float
    lam: float
    lam_d: float
    r0: float
    dstar: float
    cstar: Optional[float]
    verdict: Verdict


def validate(params: SirParams, relaxed: bool = False) -> SirParams:
    """Check rate signs and normalize to ``sigma1 > 0``.

    A negative ``sigma1`` flips the sign of all noise intensities together,
    which leaves the law of the system unchanged (``B`` and ``-B`` are both
    Brownian motions).  ``relaxed`` admits ``sigma1 == 0`` and ``beta == 0``,
    which the simulators accept for noise-free and decoupled reductions.
    """
    for name in ("alpha", "beta", "mu"):
        value = getattr(params, name)
        if relaxed and name == "beta" and value == 0:
            continue
        if not value > 0:
            raise NonPositiveRate(f"{name} must be > 0, got {value}")
    for name in ("rho", "gamma"):
        value = getattr(params, name)
        if not value >= 0:
            raise NegativeRate(f"{name} must be >= 0, got {value}")
    if params.sigma1 == 0 and not relaxed:
        raise ZeroSigma1("sigma1 must be nonzero")
    if params.sigma1 < 0:
        params = replace(
            params,
            sigma1=-params.sigma1,
            sigma2=-params.sigma2,
            sigma3=-params.sigma3,
        )
    return params


def threshold_lambda(params: SirParams) -> float:
    p = params
    return p.alpha * p.beta / p.mu - (p.removal + 0.5 * p.sigma2**2)


def threshold_lambda_deterministic(params: SirParams) -> float:
    p = params
    return p.beta * p.alpha / p.mu - p.removal


def reproduction_number(params: SirParams) -> float:
    p = params
    return p.beta * p.alpha / (p.mu * p.removal)


def c1(params: SirParams) -> float:
    return params.mu + 0.5 * params.sigma1**2


def c2(params: SirParams) -> float:
    return params.removal + 0.5 * params.sigma2**2


def ratio_r(params: SirParams) -> float:
    """Exponent r = -sigma2/sigma1 of the noise-free combination S**r * I."""
    return -params.sigma2 / params.sigma1


def classify_lambda(lam: float, tol: float = CRITICAL_TOL) -> Verdict:
    if abs(lam) < tol:
        return Verdict.CRITICAL
    return Verdict.EXTINCTION if lam < 0 else Verdict.PERMANENCE


@dataclass(frozen=True)
class LjxReport:
    """Older sufficient conditions for a stationary distribution.

    ``delta``, ``delta_cond`` are ``None`` when delta is undefined because
    ``mu == sigma1**2`` or ``mu + rho + gamma == sigma2**2``.
    """

    mu_cond: bool
    rho_cond: bool
    r0_cond: bool
    delta_cond: Optional[bool]
    all: bool
    delta: Optional[float]
    s_star: float
    i_star: float


def ljx_sufficient_conditions(params: SirParams) -> LjxReport:
    p = validate(params)
    m = p.removal
    s1sq, s2sq = p.sigma1**2, p.sigma2**2
    s_star = m / p.beta
    i_star = p.alpha / m - p.mu / p.beta
    mu_cond = p.mu > s1sq
    rho_cond = m > s2sq
    r0_cond = reproduction_number(p) > 1

    delta: Optional[float]
    delta_cond: Optional[bool]
    if p.mu == s1sq or m == s2sq:
        delta, delta_cond = None, None
    else:
        delta = (
            p.mu * s1sq / (p.mu - s1sq) * s_star**2
            + m * s2sq / (m - s2sq) * i_star**2
            + m / (2 * p.beta) * i_star * s2sq
        )
        bound = min(
            p.mu**2 / (p.mu - s1sq) * s_star**2,
            m**2 / (m - s2sq) * i_star**2,
        )
        delta_cond = delta < bound

    # sigma2 > 0 is a standing assumption of those conditions
    everything = (
        p.sigma2 > 0 and mu_cond and rho_cond and r0_cond and bool(delta_cond)
    )
    return LjxReport(
        mu_cond=mu_cond,
        rho_cond=rho_cond,
        r0_cond=r0_cond,
        delta_cond=delta_cond,
        all=everything,
        delta=delta,
        s_star=s_star,
        i_star=i_star,
    )


def derive(params: SirParams) -> DerivedQuantities:
    from .support import compute_cstar, compute_dstar

    p = validate(params)
    k1 = c1(p)
    lam = threshold_lambda(p)
    if p.sigma2 == 0:
        dstar, cstar = math.nan, None
    else:
        dstar = compute_dstar(p)
        cstar = compute_cstar(p, dstar)
    return DerivedQuantities(
        c1=k1,
        c2=c2(p),
        r=ratio_r(p),
        a=2 * k1 / p.sigma1**2,
        b=2 * p.alpha / p.sigma1**2,
        lam=lam,
        lam_d=threshold_lambda_deterministic(p),
        r0=reproduction_number(p),
        dstar=dstar,
        cstar=cstar,
        verdict=classify_lambda(lam),
    )


EXAMPLE_1 = SirParams(alpha=20, beta=4, mu=1, rho=10, gamma=1, sigma1=1, sigma2=-1)
EXAMPLE_2 = SirParams(alpha=7, beta=3, mu=1, rho=1, gamma=2, sigma1=1, sigma2=1)
EXAMPLE_3 = SirParams(alpha=5, beta=5, mu=4, rho=1, gamma=1, sigma1=2, sigma2=-1)
# reference lambda for EXAMPLE_3 is -1.75; the formula gives -0.25 unless sigma2 = +-2
EXAMPLE_3_REFERENCE_LAMBDA = -1.75
EXTINCTION_VARIANT = replace(EXAMPLE_3, sigma2=2.0)

EXAMPLES = {1: EXAMPLE_1, 2: EXAMPLE_2, 3: EXAMPLE_3}
