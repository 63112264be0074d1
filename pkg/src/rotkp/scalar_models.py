"""KdV, Ostrovsky, KP and rotation-modified KP in evolution form.

All four share

    k_tau = -3/2 k k_xi - 1/6 k_xixixi - a/2 ∂ξ⁻¹ k_yy + b/2 ∂ξ⁻¹ k

with (a, b) = (0, 0) KdV, (0, 1) Ostrovsky, (1, 0) KP, (1, 1) RKP. The linear
part is diagonal in Fourier space and is propagated exactly by ETDRK4.

Step-size guidance: the linear part imposes no restriction; keep
``dt <= 0.5 / (1.5 * max|k| * kx_max)`` for the quadratic term.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .etd import BlowUpError, ETDCoefficients, etdrk4_step
from .spectral import Grid, ScalarField, check_x_range


class ScalarModelKind(str, enum.Enum):
    KDV = "kdv"
    OSTROVSKY = "ostrovsky"
    KP = "kp"
    RKP = "rkp"

    @property
    def transverse(self) -> bool:
        return self in (ScalarModelKind.KP, ScalarModelKind.RKP)

    @property
    def rotation(self) -> bool:
        return self in (ScalarModelKind.OSTROVSKY, ScalarModelKind.RKP)

    @property
    def needs_zero_x_mean(self) -> bool:
        return self is not ScalarModelKind.KDV


def linear_symbol(kind: ScalarModelKind, kx, ky=0.0):
    """lambda(kx, ky) with k_tau = lambda k for the linear part; zero at kx = 0."""
    kind = ScalarModelKind(kind)
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    safe = np.where(kx != 0, kx, 1.0)
    lam = 1j * kx**3 / 6
    if kind.transverse:
        lam = lam - 1j * ky**2 / (2 * safe)
    if kind.rotation:
        lam = lam - 1j / (2 * safe)
    lam = np.where(kx != 0, lam, 0.0)
    return lam[()] if lam.ndim == 0 else lam


def frequency(kind: ScalarModelKind, kx, ky=0.0):
    """Plane-wave frequency omega for k ~ exp(i(kx xi + ky y - omega tau))."""
    return np.real(1j * linear_symbol(kind, kx, ky))


def grid_symbol(grid: Grid, kind: ScalarModelKind) -> np.ndarray:
    # odd-safe kx: Nyquist column and kx=0 column carry no linear dynamics
    return linear_symbol(kind, np.broadcast_to(grid.kx_odd, grid.spectral_shape), grid.ky)


def nonlinear_hat(grid: Grid, khat: np.ndarray, dealiased: bool = True) -> np.ndarray:
    """Fourier coefficients of -3/4 ∂ξ(k^2)."""
    k = grid.ifft(khat)
    out = -0.75 * grid.symbol(ox=1) * grid.fft(k * k)
    return out * grid.dealias_mask if dealiased else out


def rhs_hat(grid: Grid, kind: ScalarModelKind, khat: np.ndarray, dealiased: bool = True) -> np.ndarray:
    return grid_symbol(grid, kind) * khat + nonlinear_hat(grid, khat, dealiased)


def rhs_tangent_hat(grid: Grid, kind: ScalarModelKind, khat, hhat, dealiased: bool = True):
    """Derivative of the right-hand side at k in direction h (gives k_tautau)."""
    k = grid.ifft(khat)
    h = grid.ifft(hhat)
    out = -1.5 * grid.symbol(ox=1) * grid.fft(k * h)
    if dealiased:
        out = out * grid.dealias_mask
    return grid_symbol(grid, kind) * hhat + out


@dataclass(frozen=True)
class ScalarState:
    kind: ScalarModelKind
    k: ScalarField
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScalarModelKind(self.kind))


def rhs_nonlinear(state: ScalarState) -> ScalarField:
    g = state.k.grid
    return state.k.with_values(g.ifft(nonlinear_hat(g, state.k.hat)))


def rhs(state: ScalarState, dealiased: bool = True) -> ScalarField:
    """Full right-hand side, i.e. k_tau."""
    g = state.k.grid
    return state.k.with_values(g.ifft(rhs_hat(g, state.kind, state.k.hat, dealiased)))


class ScalarStepper:
    """Cached ETDRK4 stepper for one (kind, grid, dt)."""

    def __init__(self, kind: ScalarModelKind, grid: Grid, dt: float, nonlinear: bool = True, forcing=None):
        if dt == 0:
            raise ValueError("dt must be non-zero")
        self.kind = ScalarModelKind(kind)
        self.grid = grid
        self.dt = dt
        self.nonlinear = nonlinear
        self.forcing = forcing
        self.coeffs = ETDCoefficients.build(grid_symbol(grid, self.kind), dt)

    def _n(self, khat, tau):
        out = nonlinear_hat(self.grid, khat) if self.nonlinear else np.zeros_like(khat)
        if self.forcing is not None:
            out = out + self.grid.fft(self.forcing(tau))
        return out

    def advance(self, khat: np.ndarray, tau: float = 0.0) -> np.ndarray:
        new = etdrk4_step(khat, tau, self.dt, self.coeffs, self._n)
        if self.kind.needs_zero_x_mean:
            new[:, 0] = 0.0
        return new


@lru_cache(maxsize=32)
def _stepper(kind, grid, dt, nonlinear) -> ScalarStepper:
    return ScalarStepper(kind, grid, dt, nonlinear)


def _prepare(k: ScalarField, kind: ScalarModelKind) -> np.ndarray:
    g = k.grid
    hat = k.hat * g.dealias_mask
    if kind.needs_zero_x_mean:
        check_x_range(g, hat)
        hat[:, 0] = 0.0
    return hat


def step(state: ScalarState, dt: float, nonlinear: bool = True) -> ScalarState:
    """One ETDRK4 step. The input is dealiased (and x-mean projected) first."""
    g = state.k.grid
    st = _stepper(state.kind, g, dt, nonlinear)
    new = st.advance(_prepare(state.k, state.kind), state.tau)
    values = g.ifft(new)
    if not np.all(np.isfinite(values)):
        raise BlowUpError(1, state.tau + dt)
    return ScalarState(state.kind, ScalarField(g, values, zero_x_mean=state.kind.needs_zero_x_mean), state.tau + dt)


@dataclass
class ScalarTrajectory:
    """Sampled solution of a scalar model; ``k`` has shape (samples, ny, nx)."""

    kind: ScalarModelKind
    grid: Grid
    taus: np.ndarray
    k: np.ndarray
    dt: float
    diagnostics: list = field(default_factory=list)

    def field(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.k[i], zero_x_mean=self.kind.needs_zero_x_mean)

    def state(self, i: int) -> ScalarState:
        return ScalarState(self.kind, self.field(i), float(self.taus[i]))

    @property
    def horizon(self) -> float:
        return float(self.taus[-1])

    def interpolate_hat(self, tau: float) -> np.ndarray:
        """Cubic Hermite interpolation in tau; slopes from the model itself."""
        taus = self.taus
        if tau < taus[0] - 1e-12 or tau > taus[-1] + 1e-12:
            raise ValueError(f"tau={tau} outside the solved horizon [{taus[0]}, {taus[-1]}]")
        g = self.grid
        i = int(np.clip(np.searchsorted(taus, tau, side="right") - 1, 0, len(taus) - 2)) if len(taus) > 1 else 0
        if len(taus) == 1:
            return g.fft(self.k[0])
        h = taus[i + 1] - taus[i]
        s = (tau - taus[i]) / h
        if abs(s) < 1e-14:
            return g.fft(self.k[i])
        if abs(s - 1) < 1e-14:
            return g.fft(self.k[i + 1])
        a, b = g.fft(self.k[i]), g.fft(self.k[i + 1])
        da, db = rhs_hat(g, self.kind, a), rhs_hat(g, self.kind, b)
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        out = h00 * a + h10 * h * da + h01 * b + h11 * h * db
        if self.kind.needs_zero_x_mean:
            out[:, 0] = 0.0
        return out

    def at(self, tau: float) -> ScalarField:
        return ScalarField(self.grid, self.grid.ifft(self.interpolate_hat(tau)), self.kind.needs_zero_x_mean)

    def l2_drift(self) -> float:
        l2 = np.array([d["l2"] for d in self.diagnostics])
        return float(np.max(np.abs(l2 - l2[0])) / l2[0]) if l2[0] > 0 else float(np.max(l2))


def _diag(g: Grid, khat: np.ndarray, tau: float, dt: float) -> dict:
    values = g.ifft(khat)
    return {
        "tau": float(tau),
        "l2": float(np.sqrt(g.l2_sq_hat(khat))),
        "linf": float(np.max(np.abs(values))),
        "mass_x0": float(np.max(np.abs(khat[:, 0])) * g.cell_area / g.ny),
        "dt": float(dt),
    }


def n_steps_for(T: float, dt: float) -> int:
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError(f"T={T} is not an integer multiple of dt={dt}")
    return n


def solve(k0: ScalarField, kind: ScalarModelKind, T: float, dt: float, sample_every: int = 1,
          nonlinear: bool = True, forcing=None) -> ScalarTrajectory:
    """Integrate from tau=0 to T, keeping every ``sample_every``-th step and the last one.

    ``forcing(tau)``, if given, returns a physical array added to the right-hand side.
    """
    kind = ScalarModelKind(kind)
    g = k0.grid
    n = n_steps_for(T, dt)
    st = _stepper(kind, g, dt, nonlinear) if forcing is None else ScalarStepper(kind, g, dt, nonlinear, forcing)
    khat = _prepare(k0, kind)
    taus, ks, diags = [0.0], [g.ifft(khat)], [_diag(g, khat, 0.0, dt)]
    # overflow on the way to a blow-up is reported through BlowUpError
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n + 1):
            khat = st.advance(khat, (i - 1) * dt)
            if i % sample_every == 0 or i == n:
                values = g.ifft(khat)
                if not np.all(np.isfinite(values)):
                    raise BlowUpError(i, i * dt)
                taus.append(i * dt)
                ks.append(values)
                diags.append(_diag(g, khat, i * dt, dt))
            elif not np.all(np.isfinite(khat)):
                raise BlowUpError(i, i * dt)
    return ScalarTrajectory(kind, g, np.array(taus), np.array(ks), dt, diags)


__all__ = [
    "ScalarModelKind", "ScalarState", "ScalarTrajectory", "ScalarStepper", "linear_symbol",
    "frequency", "rhs_nonlinear", "rhs", "step", "solve",
]
