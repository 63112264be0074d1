"""Boussinesq-Coriolis system on a periodic grid.

    zeta_t + ∇^γ·((1 + eps zeta) V) = 0
    (1 - mu/3 ∇^γ ∇^γ·) V_t + ∇^γ zeta + eps (V·∇^γ) V + rot V⊥ = 0

The linearization (eps = 0) is skew-adjoint for the energy
``|zeta|^2 + V^H (I + mu/3 κκᵀ) V`` and is propagated exactly mode by mode
through a Hermitian eigendecomposition. The quadratic terms go through
ETDRK4 stages. With the linear part exact, the step size is limited only by
the nonlinear terms: keep ``dt * eps * max|V| * kmax <= 0.5``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .etd import BlowUpError, ETDCoefficients, etdrk4_step
from .spectral import (
    Grid,
    ScalarField,
    VectorField2,
    elliptic_symbols,
    invert_elliptic_hat,
)
from .scalar_models import n_steps_for


class CavitationError(ValueError):
    """Raised when 1 + eps*zeta drops below the depth floor."""


@dataclass(frozen=True)
class ModelParams:
    mu: float
    eps: float
    gamma: float = 1.0
    rot: float = 0.0
    h_min: float = 0.25

    def __post_init__(self):
        if self.mu < 0 or self.eps < 0 or self.rot < 0:
            raise ValueError("mu, eps and rot must be non-negative")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.h_min <= 0:
            raise ValueError("h_min must be positive")


@dataclass(frozen=True)
class BoussinesqState:
    zeta: ScalarField
    vbar: VectorField2
    time: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.zeta.grid

    @classmethod
    def from_arrays(cls, grid: Grid, zeta, u, v, time: float = 0.0) -> "BoussinesqState":
        return cls(ScalarField(grid, zeta), VectorField2(ScalarField(grid, u), ScalarField(grid, v)), time)

    def arrays(self) -> np.ndarray:
        return np.stack([self.zeta.values, self.vbar.u.values, self.vbar.v.values])


def check_cavitation(grid: Grid, zeta: np.ndarray, params: ModelParams) -> None:
    h = 1.0 + params.eps * zeta
    j = int(np.argmin(h))
    if h.flat[j] < params.h_min:
        iy, ix = np.unravel_index(j, h.shape)
        raise CavitationError(
            f"cavitation: 1+eps*zeta={h.flat[j]:.4g} < h_min={params.h_min} at "
            f"(x={grid.x[ix]:.4g}, y={grid.y[iy]:.4g})"
        )


def _nonlinear_hat(grid: Grid, params: ModelParams, zeta, u, v):
    """Dealiased transforms of eps*zeta*V and eps*(V·∇^γ)V (physical inputs)."""
    g = grid
    e = params.eps
    sx, sy = g.symbol(ox=1), g.symbol(oy=1, gamma=params.gamma)
    uh, vh = g.fft(u), g.fft(v)
    ux, uy = g.ifft(sx * uh), g.ifft(sy * uh)
    vx, vy = g.ifft(sx * vh), g.ifft(sy * vh)
    m = g.dealias_mask
    flux_x = m * g.fft(e * zeta * u)
    flux_y = m * g.fft(e * zeta * v)
    adv_u = m * g.fft(e * (u * ux + v * uy))
    adv_v = m * g.fft(e * (u * vx + v * vy))
    return sx * flux_x + sy * flux_y, adv_u, adv_v


def rhs_boussinesq(state: BoussinesqState, params: ModelParams) -> tuple[ScalarField, VectorField2]:
    """(zeta_t, V_t) from the full system."""
    g = state.grid
    zeta, u, v = state.arrays()
    check_cavitation(g, zeta, params)
    sx, sy = g.symbol(ox=1), g.symbol(oy=1, gamma=params.gamma)
    uh, vh, zh = g.fft(u), g.fft(v), g.fft(zeta)
    div_flux, adv_u, adv_v = _nonlinear_hat(g, params, zeta, u, v)
    dz = -(sx * uh + sy * vh) - div_flux
    fu = -(sx * zh + adv_u - params.rot * vh)
    fv = -(sy * zh + adv_v + params.rot * uh)
    du, dv = invert_elliptic_hat(g, fu, fv, params.mu, params.gamma)
    mk = lambda h: ScalarField(g, g.ifft(h))
    return mk(dz), VectorField2(mk(du), mk(dv))


def linear_generator(grid: Grid, params: ModelParams) -> np.ndarray:
    """Per-mode 3x3 matrices A with d/dt (zeta, u, v)^ = A (zeta, u, v)^ when eps = 0."""
    ax, ay, d = elliptic_symbols(grid, params.mu, params.gamma)
    c = params.mu / 3.0
    # M^{-1} = I - c κκᵀ/d
    mi_xx = 1 - c * ax * ax / d
    mi_xy = -c * ax * ay / d
    mi_yy = 1 - c * ay * ay / d
    A = np.zeros(grid.spectral_shape + (3, 3), dtype=complex)
    A[..., 0, 1] = -1j * ax
    A[..., 0, 2] = -1j * ay
    A[..., 1, 0] = -1j * (mi_xx * ax + mi_xy * ay)
    A[..., 2, 0] = -1j * (mi_xy * ax + mi_yy * ay)
    # -rot M^{-1} J with J = [[0, -1], [1, 0]]
    r = params.rot
    A[..., 1, 1] = -r * mi_xy
    A[..., 1, 2] = r * mi_xx
    A[..., 2, 1] = -r * mi_yy
    A[..., 2, 2] = r * mi_xy
    return A


@lru_cache(maxsize=16)
def linear_modes(grid: Grid, params: ModelParams):
    """Eigen-factorization A = P diag(lam) P^{-1}, lam purely imaginary."""
    ax, ay, _ = elliptic_symbols(grid, params.mu, params.gamma)
    c = params.mu / 3.0
    shape = grid.spectral_shape
    M = np.empty(shape + (2, 2))
    M[..., 0, 0] = 1 + c * ax * ax
    M[..., 0, 1] = M[..., 1, 0] = c * ax * ay
    M[..., 1, 1] = 1 + c * ay * ay
    L = np.zeros(shape + (3, 3), dtype=complex)
    L[..., 0, 0] = 1.0
    L[..., 1:, 1:] = np.linalg.cholesky(M)
    # H = i E A, Hermitian
    H = np.zeros(shape + (3, 3), dtype=complex)
    H[..., 0, 1] = H[..., 1, 0] = ax
    H[..., 0, 2] = H[..., 2, 0] = ay
    H[..., 1, 2] = 1j * params.rot
    H[..., 2, 1] = -1j * params.rot
    Linv = np.linalg.inv(L)
    LinvH = np.conj(np.swapaxes(Linv, -1, -2))
    Hs = Linv @ H @ LinvH
    Hs = 0.5 * (Hs + np.conj(np.swapaxes(Hs, -1, -2)))
    w, U = np.linalg.eigh(Hs)
    P = LinvH @ U
    Pinv = np.conj(np.swapaxes(U, -1, -2)) @ np.conj(np.swapaxes(L, -1, -2))
    return -1j * w, P, Pinv


def _matvec(P: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Batched (ny, nk, 3, 3) @ (3, ny, nk) -> (3, ny, nk)."""
    return np.einsum("abij,jab->iab", P, x, optimize=False)


Forcing = Callable[[float], tuple[np.ndarray, np.ndarray, np.ndarray]]


class BoussinesqStepper:
    """ETDRK4 in the eigen-coordinates of the linearized system."""

    def __init__(self, grid: Grid, params: ModelParams, dt: float, forcing: Optional[Forcing] = None):
        if dt == 0:
            raise ValueError("dt must be non-zero")
        self.grid, self.params, self.dt, self.forcing = grid, params, dt, forcing
        lam, self.P, self.Pinv = linear_modes(grid, params)
        self.coeffs = ETDCoefficients.build(np.moveaxis(lam, -1, 0), dt)

    def to_modes(self, hat: np.ndarray) -> np.ndarray:
        return _matvec(self.Pinv, hat)

    def from_modes(self, w: np.ndarray) -> np.ndarray:
        return _matvec(self.P, w)

    def _n(self, w: np.ndarray, t: float) -> np.ndarray:
        g, p = self.grid, self.params
        hat = self.from_modes(w)
        out = np.zeros_like(hat)
        if p.eps != 0:
            zeta, u, v = g.ifft(hat)
            div_flux, adv_u, adv_v = _nonlinear_hat(g, p, zeta, u, v)
            out[0] = -div_flux
            out[1], out[2] = invert_elliptic_hat(g, -adv_u, -adv_v, p.mu, p.gamma)
        if self.forcing is not None:
            sz, su, sv = self.forcing(t)
            out[0] += g.fft(sz)
            fu, fv = invert_elliptic_hat(g, g.fft(su), g.fft(sv), p.mu, p.gamma)
            out[1] += fu
            out[2] += fv
        return self.to_modes(out)

    def advance(self, w: np.ndarray, t: float) -> np.ndarray:
        return etdrk4_step(w, t, self.dt, self.coeffs, self._n)


@lru_cache(maxsize=16)
def _cached_stepper(grid, params, dt) -> BoussinesqStepper:
    return BoussinesqStepper(grid, params, dt)


def _stepper(grid, params, dt, forcing):
    return _cached_stepper(grid, params, dt) if forcing is None else BoussinesqStepper(grid, params, dt, forcing)


def step_imex(state: BoussinesqState, params: ModelParams, dt: float, forcing: Optional[Forcing] = None) -> BoussinesqState:
    """One exponential ETDRK4 step. A negative dt integrates backward in time."""
    g = state.grid
    check_cavitation(g, state.zeta.values, params)
    st = _stepper(g, params, dt, forcing)
    w = st.advance(st.to_modes(g.fft(state.arrays())), state.time)
    new = g.ifft(st.from_modes(w))
    if not np.all(np.isfinite(new)):
        raise BlowUpError(1, state.time + dt)
    return BoussinesqState.from_arrays(g, *new, time=state.time + dt)


def mass(state: BoussinesqState) -> float:
    return state.grid.integrate(state.zeta.values)


def _multi_indices(N: int):
    return [(a, b) for n in range(N + 1) for a in range(n + 1) for b in [n - a]]


def energy_symmetrized(state: BoussinesqState, params: ModelParams, N: int = 0) -> float:
    """E^N = 1/2 sum_{|α|<=N} (S(U) ∂^α U, ∂^α U) with S = diag(1, h - mu/3 ∇^γ(h ∇^γ·))."""
    if not 0 <= N <= 3:
        raise ValueError("N must be in 0..3")
    g = state.grid
    zeta, u, v = state.arrays()
    check_cavitation(g, zeta, params)
    h = 1.0 + params.eps * zeta
    zh, uh, vh = g.fft(zeta), g.fft(u), g.fft(v)
    sx, sy = g.symbol(ox=1), g.symbol(oy=1, gamma=params.gamma)
    total = 0.0
    for a, b in _multi_indices(N):
        s = g.symbol(ox=a, oy=b)
        dz, du, dv = g.ifft(s * zh), g.ifft(s * uh), g.ifft(s * vh)
        div = g.ifft(s * (sx * uh + sy * vh))
        dens = dz**2 + h * (du**2 + dv**2) + params.mu / 3.0 * h * div**2
        total += 0.5 * g.integrate(dens)
    return total


@dataclass
class BoussinesqTrajectory:
    grid: Grid
    params: ModelParams
    times: np.ndarray
    fields: np.ndarray  # (samples, 3, ny, nx): zeta, u, v
    dt: float
    diagnostics: list = field(default_factory=list)
    complete: bool = True
    failure: str = ""

    def state(self, i: int) -> BoussinesqState:
        return BoussinesqState.from_arrays(self.grid, *self.fields[i], time=float(self.times[i]))


def _diag(state: BoussinesqState, params: ModelParams, dt: float, energy_order: int) -> dict:
    g = state.grid
    zh = state.zeta.hat
    return {
        "t": float(state.time),
        "l2": float(np.sqrt(g.l2_sq_hat(zh))),
        "linf": float(np.max(np.abs(state.zeta.values))),
        "mass_x0": float(np.max(np.abs(zh[:, 0])) * g.cell_area / g.ny),
        "dt": float(dt),
        "mass": mass(state),
        "e0": energy_symmetrized(state, params, 0),
        "eN": energy_symmetrized(state, params, energy_order),
    }


DIAGNOSTIC_COLUMNS = ["t", "l2", "linf", "mass_x0", "dt", "mass", "e0", "eN"]


def solve_boussinesq(state0: BoussinesqState, params: ModelParams, T: float, dt: float, sample_every: int = 1,
                     forcing: Optional[Forcing] = None, energy_order: int = 2, diagnostics: bool = True,
                     partial_ok: bool = False) -> BoussinesqTrajectory:
    """Integrate to time T; with ``partial_ok`` a blow-up truncates the run instead of raising."""
    g = state0.grid
    n = n_steps_for(T, dt)
    st = _stepper(g, params, dt, forcing)
    t0 = state0.time
    check_cavitation(g, state0.zeta.values, params)
    w = st.to_modes(g.fft(state0.arrays()))
    times, fields = [t0], [state0.arrays()]
    diags = [_diag(state0, params, dt, energy_order)] if diagnostics else []
    traj = BoussinesqTrajectory(g, params, np.array(times), np.array(fields), dt, diags)
    for i in range(1, n + 1):
        try:
            w = st.advance(w, t0 + (i - 1) * dt)
            if i % sample_every == 0 or i == n:
                phys = g.ifft(st.from_modes(w))
                if not np.all(np.isfinite(phys)):
                    raise BlowUpError(i, t0 + i * dt)
                check_cavitation(g, phys[0], params)
                times.append(t0 + i * dt)
                fields.append(phys)
                if diagnostics:
                    diags.append(_diag(BoussinesqState.from_arrays(g, *phys, time=t0 + i * dt), params, dt, energy_order))
            else:
                zeta = g.ifft(st.from_modes(w)[0])
                if not np.all(np.isfinite(zeta)):
                    raise BlowUpError(i, t0 + i * dt)
                check_cavitation(g, zeta, params)
        except (BlowUpError, CavitationError) as exc:
            if not partial_ok:
                raise
            traj.complete = False
            traj.failure = str(exc)
            break
    traj.times = np.array(times)
    traj.fields = np.array(fields)
    traj.diagnostics = diags
    return traj
