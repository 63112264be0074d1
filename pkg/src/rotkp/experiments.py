"""Run configuration, Boussinesq-vs-scalar comparisons and mu sweeps.

Config files are flat ``key = value`` text; ``#`` starts a comment. Keys:

    regime      rkp | kp | ostrovsky | kdv
    mu          one value or a comma-separated list
    nx, ny      grid size (even, >= 16)
    lx, ly      box lengths (default 32*pi)
    t0          slow-time horizon; the Boussinesq run covers t in [0, t0/mu]
    dt          Boussinesq time step (default from the step-size bound, capped at 0.1)
    dt_tau      scalar-model step in tau (default 0.005)
    profile     gaussian_dx | gaussian_dx2 | kdv_soliton | line_soliton_y_modulated
    amplitude   peak of the initial profile
    wx, wy      profile widths (wy = none gives y-independent data)
    samples     number of comparison times after t = 0
    v0_mode     prepared | zero
    workers     processes for sweeps (1 = serial)
    seed        recorded with the run; no shipped profile is random
    out         output directory
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats

from .ansatz import Ansatz, ConfigError, leading_order_state
from .boussinesq import solve_boussinesq
from .io import write_csv, write_json
from .profiles import PROFILES, make_profile
from .regimes import RegimeKind, params_for
from .scalar_models import n_steps_for, solve
from .spectral import Grid, ScalarField

log = logging.getLogger(__name__)

SCALAR_REGIMES = ("rkp", "kp", "ostrovsky", "kdv")


def bound(t, mu: float):
    """mu t/(1+t) (1 + sqrt(mu) t)."""
    t = np.asarray(t, dtype=float)
    return mu * t / (1 + t) * (1 + math.sqrt(mu) * t)


@dataclass(frozen=True)
class RunConfig:
    regime: str = "rkp"
    mu: tuple = (0.04,)
    nx: int = 128
    ny: int = 128
    lx: float = 32 * math.pi
    ly: float = 32 * math.pi
    t0: float = 1.0
    dt: Optional[float] = None
    dt_tau: float = 0.005
    profile: str = "gaussian_dx"
    amplitude: float = 1.0
    wx: float = 2.0
    wy: Optional[float] = 6.0
    samples: int = 20
    v0_mode: str = "prepared"
    workers: int = 1
    seed: int = 0
    out: str = "runs"

    def __post_init__(self):
        mu = self.mu if isinstance(self.mu, (tuple, list)) else (self.mu,)
        object.__setattr__(self, "mu", tuple(float(m) for m in mu))
        self.validate()

    def validate(self) -> None:
        if self.regime not in SCALAR_REGIMES:
            raise ConfigError(f"regime must be one of {', '.join(SCALAR_REGIMES)}, got {self.regime!r}")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}; choose from {', '.join(sorted(PROFILES))}")
        if not self.mu or any(not 0 < m <= 0.25 for m in self.mu):
            raise ConfigError(f"every mu must lie in (0, 0.25], got {self.mu}")
        if len(set(self.mu)) != len(self.mu):
            raise ConfigError("mu values must be distinct")
        if self.t0 <= 0 or self.samples < 1 or self.amplitude < 0 or self.workers < 1:
            raise ConfigError("t0, samples and workers must be positive and amplitude non-negative")
        if self.v0_mode not in ("prepared", "zero"):
            raise ConfigError(f"v0_mode must be prepared or zero, got {self.v0_mode!r}")
        try:
            self.grid()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        kmax = self.grid().dealias_fraction * math.pi * max(self.nx / self.lx, self.ny / self.ly)
        if self.dt_tau * 1.5 * self.amplitude * kmax > 0.5:
            raise ConfigError(f"dt_tau={self.dt_tau} exceeds the step-size bound for amplitude {self.amplitude}")
        for m in self.mu:
            dt = self.boussinesq_dt(m)
            if dt * m * self.amplitude * kmax > 0.5:
                raise ConfigError(f"dt={dt} exceeds the step-size bound at mu={m}")

    def grid(self) -> Grid:
        return Grid(self.nx, self.ny, self.lx, self.ly)

    def boussinesq_dt(self, mu: float) -> float:
        if self.dt is not None:
            return self.dt
        kmax = self.grid().dealias_fraction * math.pi * max(self.nx / self.lx, self.ny / self.ly)
        limit = 0.5 * 0.5 / max(mu * self.amplitude * kmax, 1e-300)
        horizon = self.t0 / mu
        # largest step below the cap that divides the horizon into a multiple of the samples
        n = self.samples * max(1, math.ceil(horizon / min(0.1, limit) / self.samples))
        return horizon / n

    def initial_profile(self) -> ScalarField:
        g = self.grid()
        if self.profile in ("gaussian_dx", "gaussian_dx2"):
            return make_profile(self.profile, g, self.amplitude, wx=self.wx, wy=self.wy)
        if self.profile == "line_soliton_y_modulated":
            return make_profile(self.profile, g, self.amplitude, wy=self.wy if self.wy is not None else 16.0)
        return make_profile(self.profile, g, self.amplitude)

    def single(self, mu: float) -> "RunConfig":
        return replace(self, mu=(mu,))


_INT_KEYS = {"nx", "ny", "samples", "workers", "seed"}
_FLOAT_KEYS = {"lx", "ly", "t0", "dt", "dt_tau", "amplitude", "wx", "wy"}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    try:
        if key == "mu":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return None if raw.lower() == "none" else float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def parse_config(text: str, overrides: Optional[dict] = None) -> RunConfig:
    """Parse flat ``key = value`` text; ``overrides`` (already typed) win over the file."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values)


def load_config(path, overrides: Optional[dict] = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), overrides)


@dataclass
class ErrorReport:
    """E(t) = max(|zeta_B - K|_inf, |u_B - K|_inf) against bound(t) at sampled times."""

    regime: str
    mu: float
    times: np.ndarray
    error: np.ndarray
    complete: bool = True
    failure: str = ""
    runtime_s: float = 0.0

    @property
    def bound(self) -> np.ndarray:
        return bound(self.times, self.mu)

    @property
    def ratio(self) -> np.ndarray:
        b = self.bound
        return np.where(b > 0, self.error / np.where(b > 0, b, 1.0), 0.0)

    @property
    def end_error(self) -> float:
        return float(self.error[-1])

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratio))

    def rows(self) -> list[dict]:
        return [
            {"regime": self.regime, "mu": self.mu, "t": float(t), "error_linf": float(e), "bound": float(b), "ratio": float(r)}
            for t, e, b, r in zip(self.times, self.error, self.bound, self.ratio)
        ]


def run_comparison(cfg: RunConfig, mu: Optional[float] = None) -> ErrorReport:
    """Solve the scalar model and Boussinesq-Coriolis from matching data and compare."""
    mu = cfg.mu[0] if mu is None else mu
    start = time.perf_counter()
    regime = RegimeKind(cfg.regime)
    k0 = cfg.initial_profile()
    traj = solve(k0, regime.scalar_model, cfg.t0, cfg.dt_tau, sample_every=1)
    ans = Ansatz(regime, traj, mu, v0_mode=cfg.v0_mode)
    params = params_for(regime, mu)
    dt = cfg.boussinesq_dt(mu)
    horizon = cfg.t0 / mu
    n = n_steps_for(horizon, dt)
    if n % cfg.samples:
        raise ConfigError(f"{n} Boussinesq steps do not split into {cfg.samples} samples")
    bt = solve_boussinesq(ans.initial_state(), params, horizon, dt, sample_every=n // cfg.samples,
                          diagnostics=False, partial_ok=True)
    errors = []
    for i, t in enumerate(bt.times):
        lead = leading_order_state(traj, float(t), mu).arrays()
        errors.append(float(np.max(np.abs(bt.fields[i][:2] - lead[:2]))))
    if not bt.complete:
        log.warning("mu=%g: Boussinesq run stopped at t=%g (%s)", mu, bt.times[-1], bt.failure)
    return ErrorReport(cfg.regime, float(mu), np.asarray(bt.times, dtype=float), np.array(errors),
                       bt.complete, bt.failure, time.perf_counter() - start)


def _run_one(args) -> ErrorReport:
    cfg, mu = args
    return run_comparison(cfg, mu)


@dataclass
class SweepReport:
    regime: str
    runs: list
    slope_p: float
    slope_r2: float
    slope_stderr: float
    max_ratio_spread: float
    excluded: list = field(default_factory=list)

    @property
    def mu_list(self) -> list:
        return [r.mu for r in self.runs]

    def rows(self) -> list[dict]:
        return [row for r in self.runs for row in r.rows()]

    def payload(self, runtimes: bool = True) -> dict:
        out = {
            "regime": self.regime,
            "mu_list": self.mu_list,
            "slope_p": self.slope_p,
            "slope_r2": self.slope_r2,
            "slope_stderr": self.slope_stderr,
            "max_ratio_spread": self.max_ratio_spread,
            "excluded_mu": [r.mu for r in self.excluded],
        }
        if runtimes:
            out["runtimes_s"] = [round(r.runtime_s, 3) for r in self.runs]
        return out


SWEEP_COLUMNS = ["regime", "mu", "t", "error_linf", "bound", "ratio"]


def fit_slope(mus, errors) -> tuple[float, float, float]:
    """Least-squares p, R^2 and the standard error of p for E = C mu^p."""
    res = stats.linregress(np.log(mus), np.log(errors))
    return float(res.slope), float(res.rvalue**2), float(res.stderr)


def sweep_mu(cfg: RunConfig) -> SweepReport:
    """run_comparison for every mu (in parallel when workers > 1), ordered by mu descending."""
    mus = sorted(cfg.mu, reverse=True)
    if len(mus) < 3:
        raise ConfigError("a sweep needs at least three mu values")
    jobs = [(cfg, m) for m in mus]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            runs = list(pool.map(_run_one, jobs))
    else:
        runs = [_run_one(j) for j in jobs]
    good = [r for r in runs if r.complete]
    excluded = [r for r in runs if not r.complete]
    for r in excluded:
        log.warning("excluding partial run at mu=%g", r.mu)
    if len(good) >= 2:
        p, r2, se = fit_slope([r.mu for r in good], [r.end_error for r in good])
        maxima = [r.max_ratio for r in good]
        spread = max(maxima) / min(maxima) if min(maxima) > 0 else math.inf
    else:
        p = r2 = se = spread = math.nan
    return SweepReport(cfg.regime, good, p, r2, se, spread, excluded)


def write_sweep(report: SweepReport, out) -> tuple[Path, Path]:
    """sweep.csv and report.json; wall-clock runtimes go only into report.json and run.log."""
    out = Path(out)
    csv_path = write_csv(out / "sweep.csv", SWEEP_COLUMNS, report.rows())
    json_path = write_json(out / "report.json", report.payload())
    with (out / "run.log").open("a") as fh:
        stamp = time.strftime("%Y-%m-%dT%H:%M:%S")
        for r in report.runs + report.excluded:
            fh.write(f"{stamp} {report.regime} mu={r.mu} runtime_s={r.runtime_s:.3f} complete={r.complete}\n")
    return csv_path, json_path


def config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["mu"] = list(cfg.mu)
    return d
