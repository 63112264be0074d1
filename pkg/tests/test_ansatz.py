import json

import numpy as np
import pytest

from rotkp.ansatz import (
    Ansatz,
    ConfigError,
    correctors_transverse,
    leading_order_state,
    residual_eval,
    residual_parts,
    solve_corrector_transport,
    transport_growth_probe,
)
from rotkp.profiles import gaussian_dx, kdv_soliton, primitive_x
from rotkp.scalar_models import solve
from rotkp.spectral import Grid, ScalarField

REGIMES = ["rkp", "kp", "ostrovsky", "kdv"]


@pytest.fixture(scope="module")
def grid():
    return Grid(64, 64)


@pytest.fixture(scope="module")
def k0(grid):
    return gaussian_dx(grid, 0.5, wx=4, wy=5)


def smooth(grid, phase):
    X, Y = grid.mesh
    return ScalarField(grid, 0.2 * np.exp(-((X - phase) ** 2 + Y**2) / 30))


@pytest.mark.parametrize("regime", REGIMES)
def test_correctors_start_from_initial_data(grid, k0, regime):
    vh0 = smooth(grid, 1.0) if regime != "kdv" else None
    vo0 = smooth(grid, -2.0) if regime != "rkp" else None
    traj = solve(k0, regime, 0.1, 0.01)
    cs = Ansatz(regime, traj, 0.04, vh0, vo0, v0_mode="given").correctors(0.0)
    if vh0 is not None:
        assert np.allclose(cs.v_half.values, vh0.values, atol=1e-14)
    if vo0 is not None:
        assert np.allclose(cs.v_one.values, vo0.values, atol=1e-14)
    assert np.max(np.abs(cs.w_plus.values)) == 0 and np.max(np.abs(cs.w_minus.values)) == 0


def test_rkp_v_half_against_quadrature():
    g = Grid(128, 16)
    k = gaussian_dx(g, 1.0, wx=3)
    t = 3.0
    v_half, v_one = correctors_transverse("rkp", k, 0.04, t, v_half0=ScalarField.zeros(g))
    # v_half(t) = -int_0^t k(x - s) ds at frozen tau, integrated by Simpson on shifted copies
    s = np.linspace(0.0, t, 301)
    shifted = np.array([g.ifft(g.shift_x(k.hat, si)) for si in s])
    w = np.ones_like(s)
    w[1:-1:2], w[2:-1:2] = 4, 2
    quad = -(s[1] - s[0]) / 3 * np.tensordot(w, shifted, axes=1)
    assert np.max(np.abs(v_half.values - quad)) < 1e-8
    expected = g.ifft(g.shift_x(primitive_x(k).hat, t)) - primitive_x(k).values
    assert np.allclose(v_half.values, expected, atol=1e-13)
    assert np.max(np.abs(v_one.values)) == 0


def test_kp_v_one_is_shift_equivariant(grid, k0):
    m = 5
    t = m * grid.dx
    vo0 = smooth(grid, 0.0)
    _, v_one = correctors_transverse("kp", k0, 0.04, t, v_half0=ScalarField.zeros(grid), v_one0=vo0)
    K = primitive_x(k0).values
    oracle = np.roll(K, m, axis=1) - K
    assert np.allclose(v_one.values - vo0.values, oracle, atol=1e-13)


@pytest.mark.parametrize("regime", REGIMES)
def test_w_pm_solve_their_transport_equations(grid, k0, regime):
    vh0 = smooth(grid, 2.0) if regime != "kdv" else None
    ans = Ansatz(regime, k0, 0.04, vh0, smooth(grid, -1.0), v0_mode="given")
    t, h = 4.0, 0.005
    js = [ans.jets(t + i * h) for i in (-2, -1, 1, 2)]
    j = ans.jets(t)
    sx = grid.symbol(ox=1)
    for name, c in (("w_plus", 1), ("w_minus", -1)):
        fd = (js[0][name] - 8 * js[1][name] + 8 * js[2][name] - js[3][name]) / (12 * h)
        assert np.max(np.abs(grid.ifft(fd - j[name + "_t"]))) < 1e-8
        src = j["P_plus"] if c == 1 else j["P_minus"]
        f = ans.f_plus if c == 1 else ans.f_minus
        pde = j[name + "_t"] + c * sx * j[name] + src + f
        assert np.max(np.abs(grid.ifft(pde))) < 1e-12


def test_transport_samples_match_jets(grid, k0):
    ans = Ansatz("kp", k0, 0.04)
    wp, wm = solve_corrector_transport(ans, [0.0, 2.0])
    assert wp.shape == (2,) + grid.shape
    assert np.allclose(wp[1], ans.correctors(2.0).w_plus.values)


@pytest.mark.parametrize("regime", REGIMES)
def test_zero_data_has_zero_residual(grid, regime):
    ans = Ansatz(regime, ScalarField.zeros(grid), 0.04)
    rep = residual_eval(ans, [0.0, 3.0])
    for key, vals in rep.entries.items():
        assert all(v == (0.0, 0.0) for v in vals), key


@pytest.mark.parametrize("regime", REGIMES)
def test_targeted_residuals_vanish_for_model_solutions(grid, k0, regime):
    traj = solve(k0, regime, 0.4, 0.01, sample_every=5)
    rep = residual_eval(Ansatz(regime, traj, 0.04), [0.0, 3.0, 10.0])
    for key in ("r1_one", "r2_half", "r2_one"):
        assert rep.max_linf(key) < 1e-6


def test_frozen_profile_leaves_secular_source(grid, k0):
    ans = Ansatz("rkp", k0, 0.04)
    j0, j1 = ans.jets(10.0), ans.jets(20.0)
    n = lambda h: np.max(np.abs(grid.ifft(h)))
    assert n(j1["w_plus"]) > 1.8 * n(j0["w_plus"])


@pytest.mark.parametrize("regime", REGIMES)
@pytest.mark.parametrize("mu", [0.1, 0.01])
def test_split_reconstructs_full_residual(regime, mu):
    g = Grid(128, 128)
    k = gaussian_dx(g, 0.2, wx=6, wy=6)
    traj = solve(k, regime, 0.5, 0.01, sample_every=10)
    ans = Ansatz(regime, traj, mu, v0_mode="zero")
    parts = residual_parts(ans, 0.4 / mu)
    assert np.max(np.abs(parts["split1"])) < 1e-10
    assert np.max(np.abs(parts["split2"])) < 1e-10
    assert np.max(np.abs(parts["full2"])) > 1e-6


def test_missing_corrector_data_is_a_config_error(grid, k0):
    with pytest.raises(ConfigError, match="v_one0"):
        Ansatz("kp", k0, 0.04, v_half0=ScalarField.zeros(grid), v0_mode="given")
    with pytest.raises(ConfigError, match="v_half0"):
        Ansatz("ostrovsky", k0, 0.04, v0_mode="given")
    with pytest.raises(ConfigError):
        Ansatz("boussinesq", k0, 0.04)
    with pytest.raises(ConfigError):
        Ansatz("kp", k0, 0.04, v0_mode="nope")


def test_report_json(grid, k0):
    rep = residual_eval(Ansatz("ostrovsky", k0, 0.04), [0.0, 1.0])
    data = json.loads(rep.to_json())
    assert data["regime"] == "ostrovsky" and data["times"] == [0.0, 1.0]
    assert all(x >= 0 for vals in data["entries"].values() for pair in vals for x in pair)


def test_leading_order_at_zero_is_initial_profile(grid, k0):
    traj = solve(k0, "kp", 0.1, 0.01)
    s = leading_order_state(traj, 0.0, 0.04)
    # the trajectory starts from the dealiased projection of k0
    assert np.allclose(s.zeta.values, traj.k[0], rtol=0, atol=1e-14)
    assert np.array_equal(s.zeta.values, s.vbar.u.values)
    assert np.all(s.vbar.v.values == 0)


def test_leading_order_soliton_composes_frames():
    g = Grid(512, 16, 32 * np.pi, 16.0)
    a, mu, t = 0.5, 0.1, 5.0
    traj = solve(kdv_soliton(g, a), "kdv", mu * t, 0.001, sample_every=50)
    s = leading_order_state(traj, t, mu)
    exact = kdv_soliton(g, a, x0=t + 0.5 * a * mu * t).values
    assert np.max(np.abs(s.zeta.values - exact)) < 1e-6


def test_leading_order_interpolation_refines():
    g = Grid(128, 16)
    k = gaussian_dx(g, 0.5, wx=3)
    coarse = solve(k, "kdv", 0.5, 0.001, sample_every=10)
    fine = solve(k, "kdv", 0.5, 0.001, sample_every=1)
    for t in (1.23, 3.3, 4.77):
        d = leading_order_state(coarse, t, 0.1).arrays() - leading_order_state(fine, t, 0.1).arrays()
        assert np.max(np.abs(d)) < 1e-8
    with pytest.raises(ValueError):
        leading_order_state(coarse, 6.0, 0.1)


def test_probe_trivial_and_invalid():
    g = Grid(32, 16)
    z = ScalarField.zeros(g)
    rep = transport_growth_probe(1.0, -1.0, z, z, 10.0, n_samples=11)
    assert np.all(rep.h2 == 0)
    with pytest.raises(ValueError):
        transport_growth_probe(1.0, 1.0, z, z, 10.0)


def test_probe_dichotomy():
    g = Grid(128, 32)
    k2 = gaussian_dx(g, 1.0, wx=2, wy=4)
    z = ScalarField.zeros(g)
    bounded = transport_growth_probe(1.0, -1.0, z, k2, 100.0, n_samples=1001, early=20.0)
    growing = transport_growth_probe(1.0, -1.0, primitive_x(k2), z, 100.0, n_samples=201)
    assert abs(bounded.boundedness_ratio - 1) < 0.05
    assert bounded.bound_constant > 0
    assert growing.slope > 0 and growing.r2 > 0.99
    rows = growing.rows()
    assert rows[0] == {"t": 0.0, "h2_norm": 0.0, "ratio": 0.0}
