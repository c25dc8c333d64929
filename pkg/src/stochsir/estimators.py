"""Turn simulated paths into long-run quantities.

Lyapunov exponents of ``I``, ergodic time averages, normalized histograms
and total-variation distances between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .errors import EmptyInput, InsufficientData, ShapeMismatch
from .params import SirParams
from .sde import Model, PathConfig, Trajectory, simulate_ensemble

MIN_WINDOW = 10.0
MIN_TV_PATHS = 1000


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float


def _window(times: np.ndarray, burn_in: float, min_window: float) -> np.ndarray:
    if times[-1] - burn_in < min_window:
        raise InsufficientData(
            f"need at least {min_window} time units after burn-in, have {times[-1] - burn_in}"
        )
    return times >= burn_in


def lyapunov_exponent(traj: Trajectory, burn_in: float = 0.0,
                      min_window: float = MIN_WINDOW) -> SlopeFit:
    """Least-squares growth rate of ln I over ``[burn_in, t_final]``.

    Residuals of ln I around a line behave like a Brownian path, not like
    independent noise, so the iid OLS standard error is far too small.  The
    reported ``stderr`` is ``sigma_hat * sqrt(6 / (5 * window))``, the exact
    standard deviation of the OLS slope of ``sigma * W`` on a window of that
    length, with ``sigma_hat**2`` the quadratic variation of the residuals
    per unit time.
    """
    if traj.log_i is None:
        raise InsufficientData("trajectory carries no infective class")
    keep = _window(traj.times, burn_in, min_window)
    if keep.sum() < 3:
        raise InsufficientData("fewer than 3 recorded points in the window")
    t = traj.times[keep]
    y = traj.log_i[keep]
    fit = stats.linregress(t, y)
    resid = y - (fit.intercept + fit.slope * t)
    sigma_sq = np.sum(np.diff(resid) ** 2) / (t[-1] - t[0])
    stderr = math.sqrt(sigma_sq * 6.0 / (5.0 * (t[-1] - t[0])))
    return SlopeFit(slope=float(fit.slope), stderr=stderr)


def time_average(traj: Trajectory, f: Callable, burn_in: float = 0.0,
                 min_window: float = 0.0) -> float:
    """Left-rectangle average of ``f(s, i)`` over the recorded grid after burn-in.

    ``f`` receives arrays of S and I (I is ``None`` for boundary paths).
    """
    keep = _window(traj.times, burn_in, min_window)
    idx = np.flatnonzero(keep)
    if idx.size < 2:
        raise InsufficientData("need two recorded points after burn-in")
    t = traj.times[idx]
    s = traj.s[idx[:-1]]
    i = None if traj.i is None else traj.i[idx[:-1]]
    vals = np.broadcast_to(np.asarray(f(s, i), dtype=float), s.shape)
    widths = np.diff(t)
    return float(np.sum(vals * widths) / np.sum(widths))


@dataclass(frozen=True)
class Histogram1D:
    edges: np.ndarray
    mass: np.ndarray
    count: int

    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


@dataclass(frozen=True)
class Histogram2D:
    x_edges: np.ndarray
    y_edges: np.ndarray
    mass: np.ndarray
    count: int


def _edges(lo: float, hi: float, n_bins: int) -> np.ndarray:
    if hi <= lo:
        # degenerate sample: one bin holds everything
        half = 0.5 if lo == 0 else 0.5 * abs(lo)
        lo, hi = lo - half, hi + half
    return np.linspace(lo, hi, n_bins + 1)


def _bin_index(values: np.ndarray, edges: np.ndarray, clip: bool):
    n = len(edges) - 1
    idx = np.searchsorted(edges, values, side="right") - 1
    idx[values == edges[-1]] = n - 1
    if clip:
        return np.clip(idx, 0, n - 1), np.ones(values.shape, dtype=bool)
    inside = (idx >= 0) & (idx < n)
    return idx, inside


def empirical_density_1d(samples, n_bins: int, range: Optional[tuple] = None,
                         clip: bool = False) -> Histogram1D:
    """Equal-width histogram normalized to probability mass.

    Samples outside ``range`` are dropped unless ``clip`` folds them into the
    outer bins.  The default range is ``[min, max]`` of the samples.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise EmptyInput("no samples")
    lo, hi = (x.min(), x.max()) if range is None else range
    edges = _edges(float(lo), float(hi), n_bins)
    idx, inside = _bin_index(x, edges, clip)
    counts = np.bincount(idx[inside], minlength=n_bins).astype(float)
    total = counts.sum()
    if total == 0:
        raise EmptyInput("no samples fall inside the histogram range")
    return Histogram1D(edges=edges, mass=counts / total, count=int(total))


def empirical_density_2d(points, nx: int, ny: int, ranges: Optional[tuple] = None,
                         clip: bool = False) -> Histogram2D:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise EmptyInput("no points")
    if ranges is None:
        ranges = ((pts[:, 0].min(), pts[:, 0].max()), (pts[:, 1].min(), pts[:, 1].max()))
    (xlo, xhi), (ylo, yhi) = ranges
    x_edges = _edges(float(xlo), float(xhi), nx)
    y_edges = _edges(float(ylo), float(yhi), ny)
    ix, in_x = _bin_index(pts[:, 0], x_edges, clip)
    iy, in_y = _bin_index(pts[:, 1], y_edges, clip)
    keep = in_x & in_y
    counts = np.bincount(ix[keep] * ny + iy[keep], minlength=nx * ny).astype(float)
    total = counts.sum()
    if total == 0:
        raise EmptyInput("no points fall inside the histogram ranges")
    return Histogram2D(x_edges=x_edges, y_edges=y_edges, mass=(counts / total).reshape(nx, ny),
                       count=int(total))


def _same_grid(h1, h2) -> bool:
    if type(h1) is not type(h2):
        return False
    if isinstance(h1, Histogram1D):
        return h1.edges.shape == h2.edges.shape and np.array_equal(h1.edges, h2.edges)
    return (
        h1.x_edges.shape == h2.x_edges.shape
        and h1.y_edges.shape == h2.y_edges.shape
        and np.array_equal(h1.x_edges, h2.x_edges)
        and np.array_equal(h1.y_edges, h2.y_edges)
    )


def tv_distance(h1, h2) -> float:
    """Half the L1 distance between bin masses on a common grid."""
    if not _same_grid(h1, h2):
        raise ShapeMismatch("histograms must share identical bin edges")
    return float(0.5 * np.abs(h1.mass - h2.mass).sum())


def tv_between_masses(m1, m2) -> float:
    m1, m2 = np.asarray(m1, dtype=float), np.asarray(m2, dtype=float)
    if m1.shape != m2.shape:
        raise ShapeMismatch(f"mass shapes differ: {m1.shape} vs {m2.shape}")
    return float(0.5 * np.abs(m1 - m2).sum())


def log_state_ranges(s: np.ndarray, log_i: np.ndarray, q: float = 0.005):
    """Quantile box in (ln S, ln I) coordinates, used as a shared grid."""
    ls = np.log(s)
    return (
        (float(np.quantile(ls, q)), float(np.quantile(ls, 1 - q))),
        (float(np.quantile(log_i, q)), float(np.quantile(log_i, 1 - q))),
    )


@dataclass(frozen=True)
class TvSeries:
    times: np.ndarray
    tv: np.ndarray


def tv_decay_series(params: SirParams, s0: float, i0: float, n_paths: int,
                    checkpoints: Sequence[float], reference_time: float, cfg: PathConfig,
                    master_seed: int, n_bins: int = 20, model: Model = Model.DEGENERATE,
                    n_workers: int = 1) -> TvSeries:
    """TV distance between the ensemble law at each checkpoint and at ``reference_time``.

    The late-time ensemble stands in for the invariant measure.  States are
    binned in ``(ln S, ln I)`` on an ``n_bins x n_bins`` grid spanning the
    central 99% of the reference sample in each coordinate; the outer cells
    absorb the tails so every histogram carries full mass.
    """
    if n_paths < MIN_TV_PATHS:
        raise InsufficientData(f"tv decay needs at least {MIN_TV_PATHS} paths")
    checkpoints = np.asarray(checkpoints, dtype=float)
    if reference_time < checkpoints.max():
        raise ValueError("reference_time must not precede the checkpoints")
    run_cfg = PathConfig(dt=cfg.dt, t_final=reference_time, scheme=cfg.scheme)
    ens = simulate_ensemble(params, s0, i0, run_cfg, master_seed, n_paths, model=model,
                            record_times=list(checkpoints) + [reference_time],
                            n_workers=n_workers)
    k_ref = ens.index_of(reference_time)
    ranges = log_state_ranges(ens.s[k_ref], ens.log_i[k_ref])

    def hist(k):
        pts = np.column_stack([np.log(ens.s[k]), ens.log_i[k]])
        return empirical_density_2d(pts, n_bins, n_bins, ranges=ranges, clip=True)

    ref = hist(k_ref)
    tv = np.array([tv_distance(hist(ens.index_of(t)), ref) for t in checkpoints])
    return TvSeries(times=checkpoints, tv=tv)
