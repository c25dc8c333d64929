"""Geometric certificates for the degenerate system.

Covers the Lie-bracket rank (Hormander) check, the transformed control
system in coordinates ``(u, z = u**r * v)``, the minimization that decides
whether the invariant measure lives on the whole quadrant or above the curve
``S**r * I = c*``, and the Lyapunov function used for the drift bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DomainError, SigmaTwoZero
from .params import SirParams, c1, c2, ratio_r, validate

GRID_LO = 1e-8
GRID_HI = 1e8
GRID_POINTS = 10_000
GOLDEN_RTOL = 1e-10

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _require_sigma2(p: SirParams) -> None:
    if p.sigma2 == 0:
        raise SigmaTwoZero("sigma2 must be nonzero for the degenerate analysis")


def psi(params: SirParams, u):
    """-(c1*r + c2)*u**r + beta*u**(1+r) + alpha*r*u**(r-1), for u > 0.

    Accepts scalars or arrays.
    """
    p = validate(params)
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0):
        raise DomainError("psi is defined for u > 0 only")
    r = ratio_r(p)
    out = (
        -(c1(p) * r + c2(p)) * u_arr**r
        + p.beta * u_arr ** (1 + r)
        + p.alpha * r * u_arr ** (r - 1)
    )
    return float(out) if out.ndim == 0 else out


def golden_section(f, lo: float, hi: float, rtol: float = GOLDEN_RTOL, max_iter: int = 500):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if abs(b - a) <= rtol * (abs(a) + abs(b)) / 2 + 1e-300:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
    if f1 <= f2:
        return x1, f1
    return x2, f2


@dataclass(frozen=True)
class PsiMinimum:
    value: float
    argmin: float
    at_boundary: bool


def minimize_psi(params: SirParams, n_grid: int = GRID_POINTS) -> PsiMinimum:
    """Global numeric minimum of :func:`psi` over a log-grid plus refinement.

    The refinement works in ``log u`` so that the bracket is well scaled.
    """
    p = validate(params)
    _require_sigma2(p)
    log_grid = np.linspace(math.log(GRID_LO), math.log(GRID_HI), n_grid)
    with np.errstate(over="ignore", invalid="ignore"):
        values = psi(p, np.exp(log_grid))
    # overflow at the grid ends can give inf - inf; those points cannot be minima
    values = np.where(np.isnan(values), np.inf, values)
    k = int(np.argmin(values))
    at_boundary = k == 0 or k == n_grid - 1
    lo = log_grid[max(k - 1, 0)]
    hi = log_grid[min(k + 1, n_grid - 1)]

    def f(t):
        return psi(p, math.exp(t))

    t_best, v_best = golden_section(f, lo, hi)
    if values[k] < v_best:
        t_best, v_best = log_grid[k], float(values[k])
    return PsiMinimum(value=float(v_best), argmin=math.exp(t_best), at_boundary=at_boundary)


def compute_dstar(params: SirParams) -> float:
    p = validate(params)
    _require_sigma2(p)
    r = ratio_r(p)
    if r < 0:
        # alpha*r*u**(r-1) -> -inf as u -> 0
        return -math.inf
    found = minimize_psi(p).value
    if r > 1:
        # psi -> 0 as u -> 0, so the infimum never exceeds 0
        return min(0.0, found)
    return found


def dstar_closed_form_r1(params: SirParams) -> float:
    """Vertex value alpha - (c1 + c2)**2 / (4 beta) of the r = 1 quadratic."""
    p = validate(params)
    return p.alpha - (c1(p) + c2(p)) ** 2 / (4 * p.beta)


def compute_cstar(params: SirParams, dstar: Optional[float] = None) -> Optional[float]:
    p = validate(params)
    if dstar is None:
        dstar = compute_dstar(p)
    if not dstar > 0:
        return None
    return dstar / (p.beta * ratio_r(p))


class SupportKind(str, Enum):
    FULL_QUADRANT = "FullQuadrant"
    BARRIER_REGION = "BarrierRegion"


@dataclass(frozen=True)
class SupportSpec:
    r: float
    dstar: float
    cstar: Optional[float]
    kind: SupportKind


def support_spec(params: SirParams) -> SupportSpec:
    p = validate(params)
    dstar = compute_dstar(p)
    cstar = compute_cstar(p, dstar)
    kind = SupportKind.BARRIER_REGION if cstar is not None else SupportKind.FULL_QUADRANT
    return SupportSpec(r=ratio_r(p), dstar=dstar, cstar=cstar, kind=kind)


def support_contains(spec: SupportSpec, s, i, slack: float = 0.0):
    """Membership test; vectorizes over ``s`` and ``i``."""
    s_arr = np.asarray(s, dtype=float)
    i_arr = np.asarray(i, dtype=float)
    if spec.kind is SupportKind.FULL_QUADRANT:
        out = np.ones(np.broadcast(s_arr, i_arr).shape, dtype=bool)
    else:
        out = s_arr**spec.r * i_arr >= spec.cstar * (1 - slack)
    return bool(out) if out.ndim == 0 else out


def support_boundary(spec: SupportSpec, i_values) -> np.ndarray:
    """S on the barrier curve S**r * I = c*, i.e. (c*/I)**(1/r)."""
    if spec.kind is not SupportKind.BARRIER_REGION:
        raise DomainError("full-quadrant support has no boundary curve")
    i_arr = np.asarray(i_values, dtype=float)
    return (spec.cstar / i_arr) ** (1.0 / spec.r)


def _check_uz(u, z):
    if np.any(np.asarray(u) <= 0) or np.any(np.asarray(z) <= 0):
        raise DomainError("control system lives on u > 0, z > 0")


def control_g(params: SirParams, u, z):
    """Drift of u in the transformed control system (noise part excluded)."""
    p = validate(params)
    _check_uz(u, z)
    r = ratio_r(p)
    u = np.asarray(u, dtype=float)
    return p.alpha - c1(p) * u - p.beta * z * u ** (1 - r)


def control_h(params: SirParams, u, z):
    """Velocity of z = u**r * v; the noise cancels in this combination."""
    p = validate(params)
    _check_uz(u, z)
    r = ratio_r(p)
    u = np.asarray(u, dtype=float)
    bracket = (
        -(c1(p) * r + c2(p)) * u**r
        + p.beta * u ** (1 + r)
        + p.alpha * r * u ** (r - 1)
        - p.beta * r * z
    )
    return u ** (-r) * z * bracket


@dataclass(frozen=True)
class BracketFields:
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    F: np.ndarray


def bracket_fields(params: SirParams, x: float, y: float) -> BracketFields:
    """C = B/sigma1 and the iterated brackets D = [A,C], E = [C,D], F = [C,E].

    Valid for any nonzero r.
    """
    p = validate(params)
    _require_sigma2(p)
    r = ratio_r(p)
    bxy = p.beta * x * y
    return BracketFields(
        C=np.array([x, -r * y]),
        D=np.array([p.alpha - r * bxy, -bxy]),
        E=np.array([-p.alpha + r**2 * bxy, -bxy]),
        F=np.array([p.alpha - r**3 * bxy, -bxy]),
    )


@dataclass(frozen=True)
class BracketRank:
    rank: int
    det_cd: float
    det_de: float
    det_df: float


def _det(v, w):
    return float(v[0] * w[1] - v[1] * w[0])


def lie_bracket_rank(params: SirParams, x: float, y: float, rtol: float = 1e-12) -> BracketRank:
    if not (x > 0 and y > 0):
        raise DomainError("bracket rank is checked on the open quadrant only")
    fl = bracket_fields(params, x, y)
    dets = (_det(fl.C, fl.D), _det(fl.D, fl.E), _det(fl.D, fl.F))
    pairs = ((fl.C, fl.D), (fl.D, fl.E), (fl.D, fl.F))
    rank = 1
    for d, (v, w) in zip(dets, pairs):
        scale = np.linalg.norm(v) * np.linalg.norm(w)
        if abs(d) > rtol * scale:
            rank = 2
            break
    return BracketRank(rank=rank, det_cd=dets[0], det_de=dets[1], det_df=dets[2])


def p_star_upper(params: SirParams) -> float:
    """Exclusive upper limit for the Lyapunov exponent p*."""
    p = validate(params)
    bounds = [2 * p.mu / p.sigma1**2]
    if p.sigma2 != 0:
        bounds.append(2 * p.removal / p.sigma2**2)
    return min(bounds)


def _check_p_star(params: SirParams, p_star: float) -> None:
    if not 0 < p_star < p_star_upper(params):
        raise DomainError(f"p_star={p_star} outside (0, {p_star_upper(params)})")


def lyapunov_U(params: SirParams, p_star: float, u, v):
    """U(u, v) = (u + v)**(1 + p*) + u**(-p*/2)."""
    _check_p_star(params, p_star)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return (u + v) ** (1 + p_star) + u ** (-p_star / 2)


def generator_LU(params: SirParams, p_star: float, u, v):
    """Ito generator of the degenerate (S, I) system applied to U.

    Uses the shared noise, hence the cross term (sigma1*u + sigma2*v)**2.
    """
    p = validate(params)
    _check_p_star(p, p_star)
    q = p_star
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = u + v
    total_drift = p.alpha - p.mu * u - p.removal * v
    s_drift = p.alpha - p.beta * u * v - p.mu * u
    return (
        (1 + q) * w**q * total_drift
        + 0.5 * (1 + q) * q * w ** (q - 1) * (p.sigma1 * u + p.sigma2 * v) ** 2
        - 0.5 * q * u ** (-q / 2 - 1) * s_drift
        + q * (2 + q) / 8 * p.sigma1**2 * u ** (-q / 2)
    )


def generator_LU_expanded(params: SirParams, p_star: float, u, v):
    """Regrouped form of :func:`generator_LU` (same value, different algebra)."""
    p = validate(params)
    _check_p_star(p, p_star)
    q = p_star
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = u + v
    quad = (
        (p.mu - 0.5 * q * p.sigma1**2) * u**2
        + (p.removal - 0.5 * q * p.sigma2**2) * v**2
        + (2 * p.mu + p.rho + p.gamma - q * p.sigma1 * p.sigma2) * u * v
    )
    return (
        (1 + q) * p.alpha * w**q
        - (1 + q) * w ** (q - 1) * quad
        - 0.5 * q * p.alpha * u ** (-(2 + q) / 2)
        + 0.5 * p.beta * q * u ** (-q / 2) * v
        + 0.5 * q * ((2 + q) * p.sigma1**2 / 4 + p.mu) * u ** (-q / 2)
    )


def drift_rate_k1(params: SirParams, p_star: float, factor: float = 0.9) -> float:
    """A decay rate strictly inside (0, min(mu - p*s1^2/2, mu+rho+gamma - p*s2^2/2))."""
    p = validate(params)
    return factor * min(
        p.mu - 0.5 * p_star * p.sigma1**2,
        p.removal - 0.5 * p_star * p.sigma2**2,
    )


@dataclass(frozen=True)
class DriftBound:
    k1: float
    k2: float
    argmax: tuple


def drift_bound(params: SirParams, p_star: float, lo: float = 0.1, hi: float = 50.0,
                n: int = 400, k1: Optional[float] = None) -> DriftBound:
    """Grid supremum K2 of LU + K1*U over the square [lo, hi]**2."""
    if k1 is None:
        k1 = drift_rate_k1(params, p_star)
    grid = np.linspace(lo, hi, n)
    uu, vv = np.meshgrid(grid, grid, indexing="ij")
    vals = generator_LU(params, p_star, uu, vv) + k1 * lyapunov_U(params, p_star, uu, vv)
    idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
    return DriftBound(k1=k1, k2=float(vals[idx]), argmax=(float(uu[idx]), float(vv[idx])))
