"""Scenario configuration and orchestration behind the command line."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import export
from .boundary import (
    StationaryDensity,
    binned_mass,
    density_at,
    quad_total_mass,
    stationary_cdf,
    stationary_mean,
    stationary_quantile,
)
from .errors import ConfigError, ParseError
from .estimators import (
    empirical_density_1d,
    empirical_density_2d,
    lyapunov_exponent,
    tv_between_masses,
    tv_decay_series,
)
from .params import (
    EXAMPLE_3_REFERENCE_LAMBDA,
    EXAMPLES,
    SirParams,
    derive,
    ljx_sufficient_conditions,
    validate,
)
from .sde import Model, PathConfig, Scheme, simulate_ensemble
from .support import SupportKind, minimize_psi, support_boundary, support_spec

SCENARIOS = (
    "simulate",
    "classify",
    "stationary",
    "lyapunov",
    "tv-decay",
    "support",
    "example1",
    "example2",
    "example3",
)

RATE_KEYS = ("alpha", "beta", "mu", "rho", "gamma", "sigma1", "sigma2")

# key -> (converter, default); rates have no default and are required
_FLOAT = float
_INT = int


def _floats(text: str):
    return tuple(float(x) for x in text.split(",") if x.strip())


_OPTIONAL_KEYS = {
    "sigma3": (_FLOAT, 0.0),
    "s0": (_FLOAT, 1.0),
    "i0": (_FLOAT, 1.0),
    "r0_init": (_FLOAT, 1.0),
    "dt": (_FLOAT, 1e-3),
    "t_final": (_FLOAT, 100.0),
    "record_stride": (_INT, None),
    "scheme": (str, Scheme.SPLIT.value),
    "model": (str, Model.DEGENERATE.value),
    "n_paths": (_INT, 100),
    "seed": (_INT, 0),
    "outputs": (str, "out"),
    "scenario": (str, "classify"),
    "burn_in": (_FLOAT, None),
    "checkpoints": (_floats, (5.0, 10.0, 20.0, 40.0)),
    "reference_time": (_FLOAT, 80.0),
    "n_bins": (_INT, 20),
    "n_workers": (_INT, 1),
}


@dataclass
class ScenarioConfig:
    params: Optional[SirParams]
    s0: float = 1.0
    i0: float = 1.0
    r0_init: float = 1.0
    path: PathConfig = field(default_factory=PathConfig)
    model: Model = Model.DEGENERATE
    n_paths: int = 100
    seed: int = 0
    outputs: Path = Path("out")
    scenario: str = "classify"
    burn_in: Optional[float] = None
    checkpoints: tuple = (5.0, 10.0, 20.0, 40.0)
    reference_time: float = 80.0
    n_bins: int = 20
    n_workers: int = 1

    def check(self) -> "ScenarioConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.n_paths < 1:
            raise ConfigError("n_paths must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.params is not None:
            self.params = validate(self.params)
        elif not self.scenario.startswith("example"):
            raise ConfigError(f"scenario {self.scenario!r} needs model parameters (--config)")
        return self


def _read_pairs(path: Path):
    pairs = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, value = line.split("=", 1)
            elif ":" in line:
                key, value = line.split(":", 1)
            else:
                raise ParseError("expected 'key = value'", line=lineno)
            key = key.strip()
            value = value.strip().strip('"').strip("'")
            if key in pairs:
                raise ParseError("duplicate key", line=lineno, key=key)
            pairs[key] = (value, lineno)
    return pairs


def parse_config(path) -> ScenarioConfig:
    """Read a flat ``key = value`` file; unknown keys are rejected."""
    pairs = _read_pairs(Path(path))
    for key, (_, lineno) in pairs.items():
        if key not in RATE_KEYS and key not in _OPTIONAL_KEYS:
            raise ParseError("unknown key", line=lineno, key=key)

    values = {}
    for key in RATE_KEYS:
        if key not in pairs:
            raise ParseError("missing required key", key=key)
    for key, (text, lineno) in pairs.items():
        conv = _FLOAT if key in RATE_KEYS else _OPTIONAL_KEYS[key][0]
        try:
            values[key] = conv(text)
        except ValueError:
            raise ParseError(f"cannot parse value {text!r}", line=lineno, key=key) from None
    for key, (_, default) in _OPTIONAL_KEYS.items():
        values.setdefault(key, default)

    params = SirParams(**{k: values[k] for k in RATE_KEYS}, sigma3=values["sigma3"])
    try:
        path_cfg = PathConfig(dt=values["dt"], t_final=values["t_final"],
                              scheme=Scheme(values["scheme"]),
                              record_stride=values["record_stride"])
        model = Model(values["model"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = ScenarioConfig(
        params=params,
        s0=values["s0"],
        i0=values["i0"],
        r0_init=values["r0_init"],
        path=path_cfg,
        model=model,
        n_paths=values["n_paths"],
        seed=values["seed"],
        outputs=Path(values["outputs"]),
        scenario=values["scenario"],
        burn_in=values["burn_in"],
        checkpoints=tuple(values["checkpoints"]),
        reference_time=values["reference_time"],
        n_bins=values["n_bins"],
        n_workers=values["n_workers"],
    )
    return cfg.check()


# ------------------------------------------------------------------ reports


def classification_report(params: SirParams) -> dict:
    """Every closed-form quantity plus the verdict; never simulates."""
    p = validate(params)
    dq = derive(p)
    report = {
        "params": asdict(p),
        "lambda": dq.lam,
        "lambda_d": dq.lam_d,
        "r0": dq.r0,
        "c1": dq.c1,
        "c2": dq.c2,
        "r": dq.r,
        "a": dq.a,
        "b": dq.b,
        "stationary_mean": p.alpha / p.mu,
        "dstar": dq.dstar,
        "cstar": dq.cstar,
        "verdict": dq.verdict,
        "ljx_conditions": asdict(ljx_sufficient_conditions(p)),
    }
    if p.sigma2 != 0:
        spec = support_spec(p)
        report["support"] = {"kind": spec.kind, "r": spec.r, "cstar": spec.cstar}
        if spec.r > 0:
            found = minimize_psi(p)
            report["dstar_argmin"] = found.argmin
            report["dstar_argmin_at_grid_edge"] = found.at_boundary
    else:
        report["support"] = None
    if p == validate(EXAMPLES[3]):
        report["paper_note"] = (
            f"reference value lambda = {EXAMPLE_3_REFERENCE_LAMBDA}; the threshold formula with "
            f"these parameters gives {dq.lam}; both are negative (same verdict). "
            "The reference value matches sigma2 = +-2."
        )
    return report


def _burn_in(cfg: ScenarioConfig) -> float:
    return cfg.burn_in if cfg.burn_in is not None else 0.5 * cfg.path.t_final


def _out(cfg: ScenarioConfig) -> Path:
    out = Path(cfg.outputs)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_classify(cfg: ScenarioConfig) -> dict:
    report = classification_report(cfg.params)
    export.write_json(_out(cfg) / "classification.json", report)
    return report


def run_simulate(cfg: ScenarioConfig) -> dict:
    out = _out(cfg)
    ens = simulate_ensemble(cfg.params, cfg.s0, cfg.i0, cfg.path, cfg.seed, cfg.n_paths,
                            model=cfg.model, r0=cfg.r0_init, n_workers=cfg.n_workers)
    files = []
    for j in range(ens.n_paths):
        name = "trajectory.csv" if ens.n_paths == 1 else f"trajectory_{j:04d}.csv"
        export.write_trajectory(out / name, ens.path(j))
        files.append(name)
    summary = {"scenario": "simulate", "files": files, "seed": cfg.seed, "model": cfg.model}
    export.write_json(out / "summary.json", summary)
    return summary


def stationary_table(density: StationaryDensity, n: int = 400, q_hi: float = 0.999):
    x = np.linspace(0, stationary_quantile(density, q_hi), n + 1)[1:]
    return x, density_at(density, x), stationary_cdf(density, x)


def run_stationary(cfg: ScenarioConfig) -> dict:
    out = _out(cfg)
    d = StationaryDensity.from_params(cfg.params)
    x, f, cdf = stationary_table(d)
    export.write_table(out / "stationary_density.csv", "x,density,cdf", [x, f, cdf])
    mass, _ = quad_total_mass(d)
    summary = {
        "a": d.a,
        "b": d.b,
        "mean": stationary_mean(d),
        "alpha_over_mu": cfg.params.alpha / cfg.params.mu,
        "mode": d.mode,
        "quadrature_mass": mass,
    }
    export.write_json(out / "summary.json", summary)
    return summary


def run_lyapunov(cfg: ScenarioConfig) -> dict:
    out = _out(cfg)
    ens = simulate_ensemble(cfg.params, cfg.s0, cfg.i0, cfg.path, cfg.seed, cfg.n_paths,
                            model=cfg.model, r0=cfg.r0_init, n_workers=cfg.n_workers)
    burn = cfg.burn_in if cfg.burn_in is not None else 0.0
    fits = [lyapunov_exponent(ens.path(j), burn) for j in range(ens.n_paths)]
    slopes = np.array([f.slope for f in fits])
    export.write_table(out / "lyapunov.csv", "path,slope,stderr",
                       [np.arange(ens.n_paths), slopes, [f.stderr for f in fits]])
    summary = {
        "lambda": derive(cfg.params).lam,
        "mean_slope": float(slopes.mean()),
        "max_slope": float(slopes.max()),
        "n_paths": ens.n_paths,
        "burn_in": burn,
    }
    export.write_json(out / "summary.json", summary)
    return summary


def run_tv_decay(cfg: ScenarioConfig) -> dict:
    out = _out(cfg)
    series = tv_decay_series(cfg.params, cfg.s0, cfg.i0, cfg.n_paths, cfg.checkpoints,
                             cfg.reference_time, cfg.path, cfg.seed, n_bins=cfg.n_bins,
                             model=cfg.model, n_workers=cfg.n_workers)
    export.write_tv_series(out / "tv_decay.csv", series.times, series.tv)
    summary = {"times": series.times, "tv": series.tv, "reference_time": cfg.reference_time}
    export.write_json(out / "summary.json", summary)
    return summary


def boundary_grid(i_lo: float = 1.0, i_hi: float = 100.0, n: int = 401) -> np.ndarray:
    return np.geomspace(i_lo, i_hi, n)


def run_support(cfg: ScenarioConfig) -> dict:
    out = _out(cfg)
    spec = support_spec(cfg.params)
    summary = {"kind": spec.kind, "r": spec.r, "dstar": spec.dstar, "cstar": spec.cstar}
    if spec.r > 0:
        found = minimize_psi(cfg.params)
        summary["dstar_argmin"] = found.argmin
        summary["dstar_argmin_at_grid_edge"] = found.at_boundary
    if spec.kind is SupportKind.BARRIER_REGION:
        i_vals = boundary_grid()
        export.write_table(out / "support_boundary.csv", "I,S_boundary",
                           [i_vals, support_boundary(spec, i_vals)])
    export.write_json(out / "support.json", summary)
    return summary


# ----------------------------------------------------------------- examples

EXAMPLE_DEFAULTS = {"s0": 1.0, "i0": 1.0, "traj_t_final": 50.0, "traj_stride": 10,
                    "ens_t_final": 100.0, "ens_stride": 100, "burn_in": 50.0}


def _phase_density(params, cfg: ScenarioConfig, model: Model, n_bins: int = 50):
    ens_cfg = PathConfig(dt=cfg.path.dt, t_final=EXAMPLE_DEFAULTS["ens_t_final"],
                         scheme=cfg.path.scheme, record_stride=EXAMPLE_DEFAULTS["ens_stride"])
    ens = simulate_ensemble(params, EXAMPLE_DEFAULTS["s0"], EXAMPLE_DEFAULTS["i0"], ens_cfg,
                            cfg.seed, cfg.n_paths, model=model, n_workers=cfg.n_workers)
    keep = ens.times >= EXAMPLE_DEFAULTS["burn_in"]
    s = ens.s[keep].ravel()
    i = np.exp(ens.log_i[keep]).ravel()
    hist = empirical_density_2d(np.column_stack([s, i]), n_bins, n_bins)
    return hist, s, i


def _example_trajectory(params, cfg: ScenarioConfig, out: Path):
    traj_cfg = PathConfig(dt=cfg.path.dt, t_final=EXAMPLE_DEFAULTS["traj_t_final"],
                          scheme=cfg.path.scheme, record_stride=EXAMPLE_DEFAULTS["traj_stride"])
    ens = simulate_ensemble(params, EXAMPLE_DEFAULTS["s0"], EXAMPLE_DEFAULTS["i0"], traj_cfg,
                            cfg.seed, 1)
    traj = ens.path(0)
    export.write_trajectory(out / "trajectory.csv", traj)
    return traj


def run_example(n: int, cfg: ScenarioConfig) -> dict:
    """Reproduce one of the three worked examples into ``cfg.outputs``."""
    if n not in EXAMPLES:
        raise ConfigError("examples are numbered 1, 2, 3")
    params = validate(EXAMPLES[n])
    out = _out(cfg)
    summary = {"example": n, "seed": cfg.seed, "n_paths": cfg.n_paths,
               "classification": classification_report(params)}
    traj = _example_trajectory(params, cfg, out)
    files = ["trajectory.csv"]

    if n in (1, 2):
        hist, s, i = _phase_density(params, cfg, Model.DEGENERATE)
        export.write_histogram_2d(out / "empirical_density_2d.csv", hist)
        files.append("empirical_density_2d.csv")
        spec = support_spec(params)
        if spec.kind is SupportKind.BARRIER_REGION:
            i_vals = boundary_grid()
            export.write_table(out / "support_boundary.csv", "I,S_boundary",
                               [i_vals, support_boundary(spec, i_vals)])
            files.append("support_boundary.csv")
            z = s**spec.r * i
            summary["fraction_below_0.9_cstar"] = float(np.mean(z < 0.9 * spec.cstar))
            summary["min_s_r_i"] = float(z.min())
        else:
            summary["quadrant_counts"] = _quadrants(s, i)
        if n == 1:
            hist_nd, _, _ = _phase_density(params, cfg, Model.NONDEGENERATE)
            export.write_histogram_2d(out / "empirical_density_2d_nondegenerate.csv", hist_nd)
            files.append("empirical_density_2d_nondegenerate.csv")
    else:
        d = StationaryDensity.from_params(params)
        ens_cfg = PathConfig(dt=cfg.path.dt, t_final=50.0, scheme=cfg.path.scheme)
        ens = simulate_ensemble(params, EXAMPLE_DEFAULTS["s0"], EXAMPLE_DEFAULTS["i0"], ens_cfg,
                                cfg.seed, cfg.n_paths, record_times=[50.0],
                                n_workers=cfg.n_workers)
        edges_hi = stationary_quantile(d, 0.995)
        hist = empirical_density_1d(ens.s[-1], 50, range=(0.0, edges_hi), clip=True)
        centers = hist.centers()
        export.write_table(out / "stationary_density.csv", "x,density", [centers, density_at(d, centers)])
        export.write_histogram_1d(out / "empirical_S_t50.csv", hist)
        files += ["stationary_density.csv", "empirical_S_t50.csv"]
        summary["tv_S50_vs_stationary"] = tv_between_masses(hist.mass, binned_mass(d, hist.edges))
        summary["trajectory_lyapunov_slope"] = lyapunov_exponent(traj, 10.0).slope
    summary["files"] = files
    export.write_json(out / "summary.json", summary)
    return summary


def _quadrants(s, i, lo: float = 0.1, hi: float = 10.0) -> dict:
    """Counts in the four sub-boxes of [lo, hi]^2 split at the geometric midpoint."""
    mid = math.sqrt(lo * hi)
    box = (s >= lo) & (s <= hi) & (i >= lo) & (i <= hi)
    out = {}
    for s_name, s_mask in (("S_low", s < mid), ("S_high", s >= mid)):
        for i_name, i_mask in (("I_low", i < mid), ("I_high", i >= mid)):
            out[f"{s_name}_{i_name}"] = int(np.sum(box & s_mask & i_mask))
    return out


def run(cfg: ScenarioConfig) -> dict:
    cfg.check()
    name = cfg.scenario
    if name.startswith("example"):
        return run_example(int(name[-1]), cfg)
    handlers = {
        "classify": run_classify,
        "simulate": run_simulate,
        "stationary": run_stationary,
        "lyapunov": run_lyapunov,
        "tv-decay": run_tv_decay,
        "support": run_support,
    }
    return handlers[name](cfg)


def with_overrides(cfg: ScenarioConfig, **kw) -> ScenarioConfig:
    path_kw = {k: kw.pop(k) for k in ("dt", "t_final") if kw.get(k) is not None}
    kw = {k: v for k, v in kw.items() if v is not None}
    if path_kw:
        kw["path"] = replace(cfg.path, **path_kw)
    return replace(cfg, **kw)
