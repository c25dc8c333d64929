"""Positivity-preserving path simulation for every SDE in the model family.

Schemes
-------
``split`` (default)
    Per step, the linear part of each drift is solved exactly with the
    coefficients frozen at the left end point, then the multiplicative
    noise is applied as an exact geometric Brownian factor.  ``I`` is
    propagated in log space (``ln I += (beta*S - c2) dt + sigma2 dB``), so
    it never underflows internally.  Each update is monotone in the state
    and in the competing compartment, which makes the discrete paths obey
    the same pathwise comparisons as the continuous ones, and the
    noise-free equilibria are reproduced exactly.
``log_euler``
    Plain Euler-Maruyama on ``(ln S, ln I)``.
``projected_euler``
    Euler-Maruyama in the original coordinates, clamped at 1e-300.  For
    cross-checks only.

Every path owns an :class:`~stochsir.rng.RngStream`; increments are a pure
function of ``(master_seed, stream_index)``, so ensembles are reproducible
independent of block size or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .errors import ConfigError, DomainError, NonFiniteState
from .params import SirParams, validate
from .rng import RngStream

CLAMP = 1e-300
MAX_STEPS = 10**9
MAX_RECORDS = 10**6
CHUNK = 2048


class Scheme(str, Enum):
    SPLIT = "split"
    LOG_EULER = "log_euler"
    PROJECTED_EULER = "projected_euler"


@dataclass(frozen=True)
class PathConfig:
    dt: float = 1e-3
    t_final: float = 10.0
    scheme: Scheme = Scheme.SPLIT
    record_stride: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_final > self.dt:
            raise ConfigError("t_final must exceed dt")
        if self.t_final / self.dt > MAX_STEPS:
            raise ConfigError("too many steps (t_final/dt > 1e9)")
        if self.record_stride is not None and self.record_stride < 1:
            raise ConfigError("record_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def stride(self) -> int:
        if self.record_stride is not None:
            return self.record_stride
        return max(1, math.ceil(self.n_steps / (MAX_RECORDS - 1)))

    def record_steps(self) -> np.ndarray:
        steps = np.arange(0, self.n_steps + 1, self.stride)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps


@dataclass
class Trajectory:
    times: np.ndarray
    s: np.ndarray
    log_i: Optional[np.ndarray] = None
    r_class: Optional[np.ndarray] = None
    i: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if self.log_i is not None and self.i is None:
            with np.errstate(under="ignore"):
                self.i = np.exp(self.log_i)

    @property
    def t_final(self) -> float:
        return float(self.times[-1])


# ---------------------------------------------------------------- step rules

_SPLIT, _LOG_EULER, _PROJECTED = 0, 1, 2
_SCHEME_CODE = {Scheme.SPLIT: _SPLIT, Scheme.LOG_EULER: _LOG_EULER, Scheme.PROJECTED_EULER: _PROJECTED}

# system layouts (state rows)
_SIR2, _SIR3, _SIR3_INDEP, _BOUNDARY, _COUPLED = 0, 1, 2, 3, 4
_N_STATE = {_SIR2: 2, _SIR3: 3, _SIR3_INDEP: 3, _BOUNDARY: 1, _COUPLED: 4}
_N_NOISE = {_SIR2: 1, _SIR3: 1, _SIR3_INDEP: 3, _BOUNDARY: 1, _COUPLED: 1}

# parameter vector slots
_A, _B, _MU, _REM, _G, _S1, _S2, _S3, _TH = range(9)


@njit(cache=True)
def _step_s(scheme, s, alpha, kill, sigma1, dt, db):
    """dS = (alpha - kill*S) dt + sigma1*S dB, with kill = death rate + beta*I."""
    if scheme == _SPLIT:
        kdt = kill * dt
        gain = -math.expm1(-kdt) / kill
        return (s * math.exp(-kdt) + alpha * gain) * math.exp(sigma1 * db - 0.5 * sigma1 * sigma1 * dt)
    if scheme == _LOG_EULER:
        return math.exp(math.log(s) + (alpha / s - kill - 0.5 * sigma1 * sigma1) * dt + sigma1 * db)
    return max(s + (alpha - kill * s) * dt + sigma1 * s * db, CLAMP)


@njit(cache=True)
def _step_log_i(scheme, log_i, s, beta, removal, sigma2, dt, db):
    """dI = (beta*S - removal)*I dt + sigma2*I dB, carried as ln I."""
    if scheme == _PROJECTED:
        i = math.exp(log_i)
        return math.log(max(i + (beta * s - removal) * i * dt + sigma2 * i * db, CLAMP))
    return log_i + (beta * s - (removal + 0.5 * sigma2 * sigma2)) * dt + sigma2 * db


@njit(cache=True)
def _step_r(scheme, r, i, gamma, mu, sigma3, dt, db):
    if scheme == _SPLIT:
        mdt = mu * dt
        return (r * math.exp(-mdt) + gamma * i * (-math.expm1(-mdt) / mu)) * math.exp(
            sigma3 * db - 0.5 * sigma3 * sigma3 * dt)
    if scheme == _LOG_EULER:
        return math.exp(math.log(r) + (gamma * i / r - mu - 0.5 * sigma3 * sigma3) * dt + sigma3 * db)
    return max(r + (gamma * i - mu * r) * dt + sigma3 * r * db, CLAMP)


@njit(cache=True, nogil=True)
def _advance(kind, scheme, par, state, dB, dt, k0, rec_steps, rec_pos, records):
    """Advance every path through one chunk of increments.

    ``state`` is updated in place; rows of ``records`` are filled when the
    global step index hits ``rec_steps[rec_pos]``.  Returns the new
    ``rec_pos`` and the first global step with a state that is non-finite or,
    outside the ln I rows, not positive (or -1).
    """
    n_state, n_paths = state.shape
    m = dB.shape[2]
    alpha, beta, mu, rem = par[_A], par[_B], par[_MU], par[_REM]
    gamma, s1, s2, s3 = par[_G], par[_S1], par[_S2], par[_S3]
    bad = -1
    for j in range(n_paths):
        pos = rec_pos
        for c in range(m):
            k = k0 + c + 1
            if kind == _BOUNDARY:
                kill = (mu + beta * par[_TH]) + beta * 0.0
                state[0, j] = _step_s(scheme, state[0, j], alpha, kill, s1, dt, dB[j, 0, c])
            else:
                db0 = dB[j, 0, c]
                s = state[0, j]
                li = state[1, j]
                i = math.exp(li)
                db_i = dB[j, 1, c] if kind == _SIR3_INDEP else db0
                state[0, j] = _step_s(scheme, s, alpha, mu + beta * i, s1, dt, db0)
                state[1, j] = _step_log_i(scheme, li, s, beta, rem, s2, dt, db_i)
                if kind == _SIR3 or kind == _SIR3_INDEP:
                    db_r = dB[j, 2, c] if kind == _SIR3_INDEP else db0
                    state[2, j] = _step_r(scheme, state[2, j], i, gamma, mu, s3, dt, db_r)
                elif kind == _COUPLED:
                    sh = state[2, j]
                    state[2, j] = _step_s(scheme, sh, alpha, mu + beta * 0.0, s1, dt, db0)
                    state[3, j] = _step_log_i(scheme, state[3, j], sh, beta, rem, s2, dt, db0)
            for q in range(n_state):
                x = state[q, j]
                # ln I rows may be any finite number; the others must stay > 0
                log_row = q == 1 or (kind == _COUPLED and q == 3)
                if not math.isfinite(x) or (not log_row and x <= 0.0):
                    if bad < 0 or k < bad:
                        bad = k
            if pos < rec_steps.shape[0] and rec_steps[pos] == k:
                for q in range(n_state):
                    records[q, pos, j] = state[q, j]
                pos += 1
            if bad >= 0 and bad <= k:
                break
    new_pos = rec_pos
    while new_pos < rec_steps.shape[0] and rec_steps[new_pos] <= k0 + m:
        new_pos += 1
    return new_pos, bad


# ------------------------------------------------------------------- engine


def _param_vector(p: SirParams, theta: float = 0.0) -> np.ndarray:
    return np.array([p.alpha, p.beta, p.mu, p.removal, p.gamma, p.sigma1, p.sigma2, p.sigma3,
                     theta], dtype=float)


def _noise_streams(rng: RngStream, n_noise: int) -> list:
    if n_noise == 1:
        return [RngStream(rng.master_seed, rng.stream_index, rng.sub)]
    return [rng.substream(k) for k in range(n_noise)]


def _integrate(kind: int, par: np.ndarray, init, rngs, cfg: PathConfig, record_steps: np.ndarray):
    """Integrate a batch of paths; returns records of shape (n_state, n_records, n_paths)."""
    n_paths = len(rngs)
    n_noise = _N_NOISE[kind]
    streams = [_noise_streams(r, n_noise) for r in rngs]
    state = np.stack([np.array(np.broadcast_to(x, (n_paths,)), dtype=float) for x in init])
    record_steps = np.asarray(record_steps, dtype=np.int64)
    records = np.empty((state.shape[0], len(record_steps), n_paths))
    pos = 0
    if len(record_steps) and record_steps[0] == 0:
        records[:, 0, :] = state
        pos = 1
    scheme = _SCHEME_CODE[cfg.scheme]
    dt, n_steps = cfg.dt, cfg.n_steps
    dB = np.empty((n_paths, n_noise, CHUNK))
    k = 0
    while k < n_steps:
        m = min(CHUNK, n_steps - k)
        for j, path_streams in enumerate(streams):
            for q, st in enumerate(path_streams):
                dB[j, q, :m] = st.brownian_increments(m, dt)
        pos, bad = _advance(kind, scheme, par, state, dB[:, :, :m], dt, k, record_steps, pos,
                            records)
        if bad >= 0:
            raise NonFiniteState(f"state left the representable range at step {bad}",
                                 step=int(bad))
        k += m
    return records


def _check_initial(*values):
    for v in values:
        if np.any(~(np.asarray(v, dtype=float) > 0)):
            raise DomainError("initial values must be strictly positive")


def _sim_params(params: SirParams) -> SirParams:
    # zero noise and beta = 0 are legitimate reductions for simulation
    return validate(params, relaxed=True)


def _single(kind, par, init, cfg, rng):
    steps = cfg.record_steps()
    rec = _integrate(kind, par, init, [rng], cfg, steps)
    return steps * cfg.dt, rec[:, :, 0]


def simulate_degenerate(params: SirParams, s0: float, i0: float, cfg: PathConfig,
                        rng: RngStream) -> Trajectory:
    """Two-compartment system driven by one Brownian path."""
    p = _sim_params(params)
    _check_initial(s0, i0)
    t, rec = _single(_SIR2, _param_vector(p), (s0, math.log(i0)), cfg, rng)
    return Trajectory(times=t, s=rec[0], log_i=rec[1])


def simulate_full_degenerate(params: SirParams, s0: float, i0: float, r0: float,
                             cfg: PathConfig, rng: RngStream) -> Trajectory:
    """Three compartments, one shared Brownian path; R never feeds back."""
    p = _sim_params(params)
    _check_initial(s0, i0, r0)
    t, rec = _single(_SIR3, _param_vector(p), (s0, math.log(i0), r0), cfg, rng)
    return Trajectory(times=t, s=rec[0], log_i=rec[1], r_class=rec[2])


def simulate_nondegenerate(params: SirParams, s0: float, i0: float, r0: float,
                           cfg: PathConfig, rng: RngStream) -> Trajectory:
    """Three compartments with independent noises from substreams 0, 1, 2."""
    p = _sim_params(params)
    _check_initial(s0, i0, r0)
    t, rec = _single(_SIR3_INDEP, _param_vector(p), (s0, math.log(i0), r0), cfg, rng)
    return Trajectory(times=t, s=rec[0], log_i=rec[1], r_class=rec[2])


def simulate_boundary(params: SirParams, s0: float, cfg: PathConfig, rng: RngStream) -> Trajectory:
    """Infection-free susceptibles, dS = (alpha - mu S) dt + sigma1 S dB."""
    return simulate_tilde(params, 0.0, s0, cfg, rng)


def simulate_tilde(params: SirParams, theta: float, s0: float, cfg: PathConfig,
                   rng: RngStream) -> Trajectory:
    """Boundary process with death rate raised to mu + beta*theta."""
    p = _sim_params(params)
    if theta < 0:
        raise DomainError("theta must be >= 0")
    _check_initial(s0)
    t, rec = _single(_BOUNDARY, _param_vector(p, theta), (s0,), cfg, rng)
    return Trajectory(times=t, s=rec[0])


@dataclass
class CoupledPaths:
    traj: Trajectory
    s_hat: np.ndarray
    log_i_hat: np.ndarray

    @property
    def i_hat(self) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self.log_i_hat)


def coupled_comparison(params: SirParams, s0: float, i0: float, cfg: PathConfig,
                       rng: RngStream) -> CoupledPaths:
    """(S, I) and its dominating pair (S_hat, I_hat) on the same noise.

    S_hat is the boundary process and I_hat solves
    dI_hat = I_hat (beta*S_hat - (mu+rho+gamma)) dt + sigma2 I_hat dB.
    """
    p = _sim_params(params)
    _check_initial(s0, i0)
    li0 = math.log(i0)
    t, rec = _single(_COUPLED, _param_vector(p), (s0, li0, s0, li0), cfg, rng)
    traj = Trajectory(times=t, s=rec[0], log_i=rec[1])
    return CoupledPaths(traj=traj, s_hat=rec[2], log_i_hat=rec[3])


# ----------------------------------------------------------------- ensembles


class Model(str, Enum):
    DEGENERATE = "degenerate"
    FULL_DEGENERATE = "full_degenerate"
    NONDEGENERATE = "nondegenerate"
    BOUNDARY = "boundary"


_MODEL_KIND = {
    Model.DEGENERATE: _SIR2,
    Model.FULL_DEGENERATE: _SIR3,
    Model.NONDEGENERATE: _SIR3_INDEP,
    Model.BOUNDARY: _BOUNDARY,
}


@dataclass
class Ensemble:
    """Recorded states, one column per path (ordered by stream index)."""

    times: np.ndarray
    s: np.ndarray
    log_i: Optional[np.ndarray] = None
    r_class: Optional[np.ndarray] = None
    stream_indices: Optional[np.ndarray] = None

    @property
    def n_paths(self) -> int:
        return self.s.shape[1]

    def path(self, j: int) -> Trajectory:
        return Trajectory(
            times=self.times,
            s=self.s[:, j],
            log_i=None if self.log_i is None else self.log_i[:, j],
            r_class=None if self.r_class is None else self.r_class[:, j],
        )

    def index_of(self, t: float) -> int:
        return int(np.argmin(np.abs(self.times - t)))


def simulate_ensemble(params: SirParams, s0, i0, cfg: PathConfig, master_seed: int,
                      n_paths: int, model: Model = Model.DEGENERATE, r0=1.0,
                      first_stream: int = 0, record_times: Optional[Sequence[float]] = None,
                      n_workers: int = 1, block_size: int = 512) -> Ensemble:
    """Many independent paths; path ``j`` uses stream ``first_stream + j``.

    ``s0``/``i0``/``r0`` may be scalars or per-path arrays.  Paths are
    integrated in blocks of ``block_size``, optionally on ``n_workers``
    threads; each path depends only on its own stream, so neither setting
    changes the output.
    """
    model = Model(model)
    if n_paths < 1:
        raise ConfigError("n_paths must be >= 1")
    p = _sim_params(params)
    if record_times is None:
        steps = cfg.record_steps()
    else:
        steps = np.unique(np.round(np.asarray(record_times, dtype=float) / cfg.dt).astype(np.int64))
        if steps[0] < 0 or steps[-1] > cfg.n_steps:
            raise ConfigError("record_times must lie within [0, t_final]")

    kind = _MODEL_KIND[model]
    s0 = np.broadcast_to(np.asarray(s0, dtype=float), (n_paths,))
    _check_initial(s0)
    if kind == _BOUNDARY:
        init = (s0,)
    else:
        i0 = np.broadcast_to(np.asarray(i0, dtype=float), (n_paths,))
        _check_initial(i0)
        init = (s0, np.log(i0))
        if kind != _SIR2:
            r0 = np.broadcast_to(np.asarray(r0, dtype=float), (n_paths,))
            _check_initial(r0)
            init = init + (r0,)
    par = _param_vector(p)

    streams = np.arange(first_stream, first_stream + n_paths)
    blocks = [slice(lo, min(lo + block_size, n_paths)) for lo in range(0, n_paths, block_size)]

    def run(block):
        rngs = [RngStream(master_seed, int(k)) for k in streams[block]]
        return _integrate(kind, par, tuple(x[block] for x in init), rngs, cfg, steps)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    rec = np.concatenate(parts, axis=2)
    out = Ensemble(times=steps * cfg.dt, s=rec[0], stream_indices=streams)
    if rec.shape[0] > 1:
        out.log_i = rec[1]
    if rec.shape[0] > 2:
        out.r_class = rec[2]
    return out


def deterministic_rhs(params: SirParams):
    """Right-hand side of the noise-free (S, I, R) system, for ODE solvers."""
    p = params

    def rhs(t, y):
        s, i, r = y
        return [
            p.alpha - p.beta * s * i - p.mu * s,
            p.beta * s * i - p.removal * i,
            p.gamma * i - p.mu * r,
        ]

    return rhs
