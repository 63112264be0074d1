"""Manufactured solutions shared by the convergence tests."""

import numpy as np

from rotkp.boussinesq import BoussinesqState, ModelParams, solve_boussinesq
from rotkp.scalar_models import ScalarModelKind, solve
from rotkp.spectral import Grid, ScalarField

GRID = Grid(32, 32, 2 * np.pi, 2 * np.pi)


def scalar_exact(tau):
    X, Y = GRID.mesh
    return 0.3 * np.cos(X + Y - tau) * (1 + 0.5 * np.sin(tau))


def scalar_forcing(kind):
    kind = ScalarModelKind(kind)
    a = 1.0 if kind.transverse else 0.0
    b = 1.0 if kind.rotation else 0.0
    X, Y = GRID.mesh

    def f(tau):
        s = 1 + 0.5 * np.sin(tau)
        ph = X + Y - tau
        k = 0.3 * np.cos(ph) * s
        k_tau = 0.3 * (np.sin(ph) * s + 0.5 * np.cos(ph) * np.cos(tau))
        k_x = -0.3 * np.sin(ph) * s
        k_xxx = 0.3 * np.sin(ph) * s
        inv_k = 0.3 * np.sin(ph) * s  # x-primitive of cos
        inv_kyy = -inv_k
        return k_tau + 1.5 * k * k_x + k_xxx / 6 + 0.5 * a * inv_kyy - 0.5 * b * inv_k

    return f


def scalar_error(kind, dt, T=2.0):
    k0 = ScalarField(GRID, scalar_exact(0.0))
    traj = solve(k0, kind, T, dt, sample_every=10**6, forcing=scalar_forcing(kind))
    return float(np.max(np.abs(traj.k[-1] - scalar_exact(T))))


PARAMS = ModelParams(mu=0.3, eps=0.5, gamma=0.7, rot=0.4)


def boussinesq_exact(t):
    X, Y = GRID.mesh
    zeta = 0.1 * np.cos(X + Y - t)
    u = 0.1 * np.sin(X - 2 * t)
    v = 0.1 * np.cos(Y + t)
    return np.stack([zeta, u, v])


def boussinesq_forcing(p=PARAMS):
    X, Y = GRID.mesh
    e, mu, g, r = p.eps, p.mu, p.gamma, p.rot

    def f(t):
        zeta, u, v = boussinesq_exact(t)
        zt = 0.1 * np.sin(X + Y - t)
        zx = zy = -0.1 * np.sin(X + Y - t)
        ut = -0.2 * np.cos(X - 2 * t)
        ux = 0.1 * np.cos(X - 2 * t)
        vt = -0.1 * np.sin(Y + t)
        vy = -0.1 * np.sin(Y + t)
        h = 1 + e * zeta
        sz = zt + (e * zx * u + h * ux) + g * (e * zy * v + h * vy)
        # (1 - mu/3 ∇γ∇γ·) V_t with u_t depending on x only and v_t on y only
        su = ut + mu / 3 * ut
        sv = vt + mu / 3 * g * g * vt
        su = su + zx + e * u * ux - r * v
        sv = sv + g * zy + e * g * v * vy + r * u
        return sz, su, sv

    return f


def boussinesq_error(dt, T=2.0):
    s0 = BoussinesqState.from_arrays(GRID, *boussinesq_exact(0.0))
    tr = solve_boussinesq(s0, PARAMS, T, dt, sample_every=10**6, forcing=boussinesq_forcing(), diagnostics=False)
    return float(np.max(np.abs(tr.fields[-1] - boussinesq_exact(T))))


def observed_order(errors, dts):
    return float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
