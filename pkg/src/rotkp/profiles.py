"""Named initial profiles for the scalar models.

Every profile is scaled so that ``max|k| = amplitude`` (up to the discrete
sampling of the peak). ``wy=None`` gives data that is independent of y.
"""

from __future__ import annotations

import numpy as np

from .spectral import Grid, ScalarField, antideriv_x_hat


def _envelope_y(grid: Grid, wy):
    _, Y = grid.mesh
    return np.ones_like(Y) if wy is None else np.exp(-(Y / wy) ** 2)


def gaussian_dx(grid: Grid, amplitude: float = 1.0, wx: float = 2.0, wy=None, x0: float = 0.0) -> ScalarField:
    """x-derivative of exp(-(x/wx)^2 - (y/wy)^2); zero x-mean by construction."""
    X, _ = grid.mesh
    s = (X - x0) / wx
    peak = np.sqrt(2.0) * np.exp(-0.5)
    values = -2.0 * s * np.exp(-s * s) / peak * _envelope_y(grid, wy)
    return _finish(grid, amplitude * values)


def gaussian_dx2(grid: Grid, amplitude: float = 1.0, wx: float = 2.0, wy=None, x0: float = 0.0) -> ScalarField:
    """Second x-derivative of a Gaussian (so that its double x-primitive is smooth)."""
    X, _ = grid.mesh
    s = (X - x0) / wx
    values = (2.0 * s * s - 1.0) * np.exp(-s * s) * _envelope_y(grid, wy)
    return _finish(grid, amplitude * values)


def kdv_soliton(grid: Grid, amplitude: float = 0.5, x0: float = 0.0) -> ScalarField:
    """a sech^2(sqrt(3a)/2 (x - x0)); travels at speed a/2 under KdV."""
    if amplitude <= 0:
        raise ValueError("soliton amplitude must be positive")
    X, _ = grid.mesh
    return ScalarField(grid, amplitude / np.cosh(0.5 * np.sqrt(3 * amplitude) * (X - x0)) ** 2)


def line_soliton_y_modulated(grid: Grid, amplitude: float = 0.5, wy: float = 16.0, x0: float = 0.0) -> ScalarField:
    """Soliton profile times a slow Gaussian envelope in y, with each row's x-mean removed."""
    if amplitude <= 0:
        raise ValueError("soliton amplitude must be positive")
    X, _ = grid.mesh
    base = 1.0 / np.cosh(0.5 * np.sqrt(3 * amplitude) * (X - x0)) ** 2
    values = base * _envelope_y(grid, wy)
    values = values - values.mean(axis=1, keepdims=True)
    values *= amplitude / np.max(np.abs(values))
    return _finish(grid, values)


def _finish(grid: Grid, values: np.ndarray) -> ScalarField:
    hat = grid.fft(values)
    hat[:, 0] = 0.0
    return ScalarField(grid, grid.ifft(hat), zero_x_mean=True)


PROFILES = {
    "gaussian_dx": gaussian_dx,
    "gaussian_dx2": gaussian_dx2,
    "kdv_soliton": kdv_soliton,
    "line_soliton_y_modulated": line_soliton_y_modulated,
}


def make_profile(name: str, grid: Grid, amplitude: float = 1.0, **widths) -> ScalarField:
    """Look up a profile by name; unknown keyword widths are rejected by the profile itself."""
    try:
        func = PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {', '.join(sorted(PROFILES))}") from None
    return func(grid, amplitude=amplitude, **widths)


def primitive_x(f: ScalarField) -> ScalarField:
    """Zero-mean x-primitive, handy for building transverse data."""
    return f.with_values(f.grid.ifft(antideriv_x_hat(f.grid, f.hat)))
