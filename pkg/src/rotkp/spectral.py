"""Periodic Fourier collocation on a rectangular box.

Transform convention (used everywhere in the package): the forward transform
is numpy's unnormalized ``rfft2`` over the (y, x) axes, the inverse is
``irfft2`` carrying the ``1/(nx*ny)`` factor. Fields are stored row-major with
``ny`` rows (y is the outer index) and ``nx`` columns.

Odd-order derivative symbols vanish on the Nyquist column/row so that real
fields stay real; even-order symbols keep the Nyquist mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

Axis = Literal["x", "y"]

#: Relative size below which kx=0 coefficients are treated as roundoff.
RANGE_TOL = 1e-10


class NotInRangeError(ValueError):
    """Raised when a field is not (discretely) an x-derivative."""


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    lx: float = 32 * np.pi
    ly: float = 32 * np.pi
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if n < 16 or n % 2:
                raise ValueError(f"{name} must be even and >= 16, got {n}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError(f"domain lengths must be positive, got lx={self.lx}, ly={self.ly}")
        if not (0 < self.dealias_fraction <= 1):
            raise ValueError("dealias_fraction must lie in (0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def spectral_shape(self) -> tuple[int, int]:
        return (self.ny, self.nx // 2 + 1)

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.lx + self.dx * np.arange(self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        return -0.5 * self.ly + self.dy * np.arange(self.ny)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) arrays of shape (ny, nx)."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    # integer mode indices in rfft2 layout
    @cached_property
    def jx(self) -> np.ndarray:
        return np.arange(self.nx // 2 + 1)[None, :]

    @cached_property
    def jy(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.ny) * self.ny).astype(int)[:, None]

    @cached_property
    def kx(self) -> np.ndarray:
        """Wavenumbers 2*pi*j/lx, shape (1, nx//2+1)."""
        return 2 * np.pi / self.lx * self.jx

    @cached_property
    def ky(self) -> np.ndarray:
        """Wavenumbers 2*pi*j/ly in fft order, shape (ny, 1)."""
        return 2 * np.pi / self.ly * self.jy

    @cached_property
    def kx_odd(self) -> np.ndarray:
        k = self.kx.copy()
        k[:, -1] = 0.0
        return k

    @cached_property
    def ky_odd(self) -> np.ndarray:
        k = self.ky.copy()
        k[self.ny // 2, :] = 0.0
        return k

    @cached_property
    def inv_kx(self) -> np.ndarray:
        """1/kx on the odd-safe wavenumbers, zero where kx_odd = 0."""
        with np.errstate(divide="ignore"):
            inv = np.where(self.kx_odd != 0.0, 1.0 / np.where(self.kx_odd != 0, self.kx_odd, 1.0), 0.0)
        return inv

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        keep_x = np.abs(self.jx) <= self.dealias_fraction * self.nx / 2
        keep_y = np.abs(self.jy) <= self.dealias_fraction * self.ny / 2
        return (keep_x & keep_y).astype(float)

    @cached_property
    def parseval_weight(self) -> np.ndarray:
        """Multiplicity of each stored rfft2 column in the full spectrum."""
        w = np.full((1, self.nx // 2 + 1), 2.0)
        w[0, 0] = 1.0
        w[0, -1] = 1.0
        return w

    def symbol(self, ox: int = 0, oy: int = 0, gamma: float = 1.0) -> np.ndarray:
        """Fourier symbol of d^ox/dx^ox (gamma d/dy)^oy; ox may be -1 or -2."""
        if ox >= 0:
            sx = (1j * (self.kx_odd if ox % 2 else self.kx)) ** ox
        else:
            sx = (-1j * self.inv_kx) ** (-ox)
        ky = self.ky_odd if oy % 2 else self.ky
        sy = (1j * gamma * ky) ** oy
        return sx * sy

    def fft(self, values: np.ndarray) -> np.ndarray:
        return np.fft.rfft2(values, axes=(-2, -1))

    def ifft(self, hat: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(hat, s=self.shape, axes=(-2, -1))

    def shift_x(self, hat: np.ndarray, distance: float) -> np.ndarray:
        """Translate by `distance` along x: f(x) -> f(x - distance)."""
        return hat * np.exp(-1j * self.kx_odd * distance)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values) * self.cell_area)

    def l2_sq_hat(self, hat: np.ndarray, weight: np.ndarray | float = 1.0) -> float:
        """Integral of |f|^2 (times a Fourier weight) from rfft2 coefficients."""
        s = np.sum(self.parseval_weight * weight * np.abs(hat) ** 2)
        return float(s * self.cell_area / (self.nx * self.ny))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray
    zero_x_mean: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, func, **kw) -> "ScalarField":
        X, Y = grid.mesh
        return cls(grid, np.broadcast_to(func(X, Y), grid.shape), **kw)

    @classmethod
    def zeros(cls, grid: Grid, **kw) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape), **kw)

    @property
    def hat(self) -> np.ndarray:
        return self.grid.fft(self.values)

    def with_values(self, values: np.ndarray, zero_x_mean: bool | None = None) -> "ScalarField":
        flag = self.zero_x_mean if zero_x_mean is None else zero_x_mean
        return ScalarField(self.grid, values, zero_x_mean=flag)


@dataclass(frozen=True)
class VectorField2:
    u: ScalarField
    v: ScalarField = field(default=None)

    def __post_init__(self):
        if self.v is None:
            object.__setattr__(self, "v", ScalarField.zeros(self.u.grid))
        if self.u.grid != self.v.grid:
            raise ValueError("vector components must share one grid")

    @property
    def grid(self) -> Grid:
        return self.u.grid


def _require_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite input field")


def deriv(f: ScalarField, axis: Axis = "x", order: int = 1, gamma: float = 1.0) -> ScalarField:
    """Spectral derivative; along y the operator is (gamma d/dy)^order."""
    if not 1 <= order <= 4:
        raise ValueError("order must be in 1..4")
    _require_finite(f.values)
    g = f.grid
    sym = g.symbol(ox=order) if axis == "x" else g.symbol(oy=order, gamma=gamma)
    return f.with_values(g.ifft(sym * f.hat))


def x_mean_defect(grid: Grid, hat: np.ndarray) -> tuple[float, int]:
    """Largest kx=0 coefficient relative to the field's rms, and its ky row."""
    col = np.abs(hat[:, 0]) / (grid.nx * grid.ny)
    rms = np.sqrt(grid.l2_sq_hat(hat) / (grid.lx * grid.ly))
    if rms == 0.0:
        return 0.0, 0
    row = int(np.argmax(col))
    return float(col[row] / rms), row


def check_x_range(grid: Grid, hat: np.ndarray, tol: float = RANGE_TOL) -> None:
    defect, row = x_mean_defect(grid, hat)
    if defect > tol:
        raise NotInRangeError(
            f"field is not in range of ∂ₓ: kx=0 coefficient at ky row {row} "
            f"(ky={grid.ky[row, 0]:.6g}) is {defect:.3e} relative to the rms (tol {tol:g})"
        )


def antideriv_x_hat(grid: Grid, hat: np.ndarray, power: int = 1) -> np.ndarray:
    """Apply the x-antiderivative to Fourier coefficients; kx=0 column is dropped."""
    check_x_range(grid, hat)
    return grid.symbol(ox=-power) * hat


def antideriv_x(f: ScalarField, power: int = 1) -> ScalarField:
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    _require_finite(f.values)
    g = f.grid
    return f.with_values(g.ifft(antideriv_x_hat(g, f.hat, power)), zero_x_mean=True)


def project_zero_x_mean(f: ScalarField) -> ScalarField:
    """Zero the kx=0 column after checking it is only roundoff."""
    g = f.grid
    hat = f.hat
    check_x_range(g, hat)
    hat[:, 0] = 0.0
    return f.with_values(g.ifft(hat), zero_x_mean=True)


def elliptic_symbols(grid: Grid, mu: float, gamma: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(kappa_x, kappa_y, 1 + mu/3 |kappa|^2) with kappa = (kx, gamma ky)."""
    ax = np.broadcast_to(grid.kx_odd, grid.spectral_shape)
    ay = np.broadcast_to(gamma * grid.ky_odd, grid.spectral_shape)
    return ax, ay, 1.0 + mu / 3.0 * (ax**2 + ay**2)


def invert_elliptic_hat(grid: Grid, fu: np.ndarray, fv: np.ndarray, mu: float, gamma: float):
    """Solve (I + mu/3 kappa kappa^T) W = F per mode (Sherman-Morrison)."""
    ax, ay, denom = elliptic_symbols(grid, mu, gamma)
    proj = (mu / 3.0) * (ax * fu + ay * fv) / denom
    return fu - ax * proj, fv - ay * proj


def apply_elliptic_hat(grid: Grid, wu: np.ndarray, wv: np.ndarray, mu: float, gamma: float):
    ax, ay, _ = elliptic_symbols(grid, mu, gamma)
    s = (mu / 3.0) * (ax * wu + ay * wv)
    return wu + ax * s, wv + ay * s


def invert_boussinesq_elliptic(F: VectorField2, mu: float, gamma: float = 1.0) -> VectorField2:
    """Solve (1 - mu/3 ∇^γ ∇^γ·) W = F exactly in Fourier space."""
    if mu < 0:
        raise ValueError("mu must be non-negative")
    g = F.grid
    _require_finite(F.u.values)
    _require_finite(F.v.values)
    wu, wv = invert_elliptic_hat(g, F.u.hat, F.v.hat, mu, gamma)
    return VectorField2(ScalarField(g, g.ifft(wu)), ScalarField(g, g.ifft(wv)))


def apply_boussinesq_elliptic(W: VectorField2, mu: float, gamma: float = 1.0) -> VectorField2:
    g = W.grid
    fu, fv = apply_elliptic_hat(g, W.u.hat, W.v.hat, mu, gamma)
    return VectorField2(ScalarField(g, g.ifft(fu)), ScalarField(g, g.ifft(fv)))


def dealias(f: ScalarField) -> ScalarField:
    g = f.grid
    return f.with_values(g.ifft(g.dealias_mask * f.hat))


def _sobolev_weight(grid: Grid, order: int) -> np.ndarray:
    return (1.0 + grid.kx**2 + grid.ky**2) ** order


def norm(f, kind: str = "L2", N: int = 0, mu: float = 0.0, gamma: float = 1.0) -> float:
    """L2, Linf, Hs (order N) or Xmu (order N) norm.

    ``Xmu`` expects ``f = (zeta, V)`` and returns
    sqrt(|zeta|_{H^N}^2 + |V|_{H^N}^2 + mu |∇^γ·V|_{H^N}^2).
    """
    if kind in ("Hs", "Xmu") and not 0 <= N <= 4:
        raise ValueError("Sobolev order must be in 0..4")
    if kind == "Xmu":
        zeta, V = f
        g = zeta.grid
        w = _sobolev_weight(g, N)
        uh, vh = V.u.hat, V.v.hat
        div = g.symbol(ox=1) * uh + g.symbol(oy=1, gamma=gamma) * vh
        total = g.l2_sq_hat(zeta.hat, w) + g.l2_sq_hat(uh, w) + g.l2_sq_hat(vh, w) + mu * g.l2_sq_hat(div, w)
        return float(np.sqrt(total))
    g = f.grid
    if kind == "L2":
        return float(np.sqrt(np.sum(f.values**2) * g.cell_area))
    if kind == "Linf":
        return float(np.max(np.abs(f.values)))
    if kind == "Hs":
        return float(np.sqrt(g.l2_sq_hat(f.hat, _sobolev_weight(g, N))))
    raise ValueError(f"unknown norm kind {kind!r}")


def hs_norm_hat(grid: Grid, hat: np.ndarray, N: int) -> float:
    return float(np.sqrt(grid.l2_sq_hat(hat, _sobolev_weight(grid, N))))
