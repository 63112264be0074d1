"""ETDRK4 coefficients (Cox-Matthews scheme, Kassam-Trefethen evaluation).

The phi-type coefficients are averaged over a circle of radius 1 around each
``z = dt*lambda`` so that small |z| does not suffer from cancellation. The
contour is a full circle because the eigenvalues here are imaginary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONTOUR_POINTS = 32


class BlowUpError(RuntimeError):
    """Raised when a time stepper produces NaN or Inf."""

    def __init__(self, step: int, time: float):
        super().__init__(f"blow-up: non-finite values after step {step} (t={time:.6g})")
        self.step = step
        self.time = time


@dataclass(frozen=True)
class ETDCoefficients:
    """Diagonal ETDRK4 weights for linear eigenvalues ``lam`` and step ``dt``."""

    E: np.ndarray
    E2: np.ndarray
    Q: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray

    @classmethod
    def build(cls, lam: np.ndarray, dt: float, points: int = CONTOUR_POINTS) -> "ETDCoefficients":
        z = dt * np.asarray(lam, dtype=complex)
        roots = np.exp(2j * np.pi * (np.arange(points) + 0.5) / points)
        lr = z[..., None] + roots
        ez = np.exp(lr)
        ez2 = np.exp(lr / 2)
        lr3 = lr**3
        Q = dt * np.mean((ez2 - 1) / lr, axis=-1)
        f1 = dt * np.mean((-4 - lr + ez * (4 - 3 * lr + lr**2)) / lr3, axis=-1)
        f2 = dt * np.mean((2 + lr + ez * (lr - 2)) / lr3, axis=-1)
        f3 = dt * np.mean((-4 - 3 * lr - lr**2 + ez * (4 - lr)) / lr3, axis=-1)
        return cls(np.exp(z), np.exp(z / 2), Q, f1, f2, f3)


def etdrk4_step(v, t, dt, c: ETDCoefficients, nonlinear):
    """One ETDRK4 step in diagonal coordinates; ``nonlinear(v, t)`` -> N(v)."""
    Nv = nonlinear(v, t)
    a = c.E2 * v + c.Q * Nv
    Na = nonlinear(a, t + dt / 2)
    b = c.E2 * v + c.Q * Na
    Nb = nonlinear(b, t + dt / 2)
    cc = c.E2 * a + c.Q * (2 * Nb - Nv)
    Nc = nonlinear(cc, t + dt)
    return c.E * v + c.f1 * Nv + 2 * c.f2 * (Na + Nb) + c.f3 * Nc
