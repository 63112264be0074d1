import json
import math

import numpy as np
import pytest

from rotkp.ansatz import ConfigError
from rotkp.experiments import (
    RunConfig,
    bound,
    config_dict,
    fit_slope,
    load_config,
    parse_config,
    run_comparison,
    sweep_mu,
    write_sweep,
)

SMALL = dict(regime="kdv", mu=(0.2, 0.1, 0.05), nx=64, ny=16, wx=4.0, wy=None, amplitude=0.5, t0=0.1,
             dt_tau=0.005, samples=4)


def test_bound_values():
    assert bound(0.0, 0.04) == 0
    assert np.isclose(bound(1.0, 0.04), 0.02 * 1.2)
    t = np.linspace(0, 100, 11)
    assert np.all(np.diff(bound(t, 0.01)) > 0)


def test_parse_config_with_comments_and_overrides():
    text = """
    # a comment
    regime = kp      # trailing comment
    mu = 0.04, 0.02,0.01
    nx = 64
    wy = none
    """
    cfg = parse_config(text, {"nx": 32, "ny": None})
    assert cfg.regime == "kp" and cfg.mu == (0.04, 0.02, 0.01)
    assert cfg.nx == 32 and cfg.ny == 128 and cfg.wy is None
    assert config_dict(cfg)["mu"] == [0.04, 0.02, 0.01]


@pytest.mark.parametrize(
    "text, match",
    [
        ("colour = red", "unknown key"),
        ("nx 64", "key = value"),
        ("nx = sixty", "bad value"),
        ("regime = boussinesq", "regime"),
        ("profile = square", "unknown profile"),
        ("mu = 0.5", "mu"),
        ("mu = 0.1, 0.1", "distinct"),
        ("v0_mode = given", "v0_mode"),
        ("nx = 15", "even"),
        ("dt_tau = 0.5", "step-size"),
        ("dt = 5.0\nmu = 0.25", "step-size"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.cfg")
    p = tmp_path / "run.cfg"
    p.write_text("regime = ostrovsky\n")
    assert load_config(p).regime == "ostrovsky"


def test_default_boussinesq_step_divides_the_horizon():
    cfg = RunConfig(mu=(0.03,), samples=7)
    dt = cfg.boussinesq_dt(0.03)
    n = (cfg.t0 / 0.03) / dt
    assert dt <= 0.1 and abs(n - round(n)) < 1e-9 and round(n) % 7 == 0


def test_zero_data_gives_zero_error():
    rep = run_comparison(RunConfig(**{**SMALL, "amplitude": 0.0}), 0.1)
    assert rep.complete and np.all(rep.error == 0)
    assert rep.times[0] == 0 and np.isclose(rep.times[-1], 1.0)


def test_comparison_is_small_for_small_mu():
    cfg = RunConfig(**{**SMALL, "mu": (1e-3,), "t0": 0.01, "nx": 128})
    rep = run_comparison(cfg)
    assert rep.complete and rep.error[0] < 1e-12
    assert np.all(rep.error[1:] < rep.bound[1:])
    assert len(rep.rows()) == cfg.samples + 1


def test_fit_slope_recovers_power():
    mus = np.array([0.04, 0.02, 0.01, 0.005])
    p, r2, se = fit_slope(mus, 3.0 * mus**0.75)
    assert math.isclose(p, 0.75) and math.isclose(r2, 1.0) and se < 1e-12


def test_sweep_needs_three_values():
    with pytest.raises(ConfigError, match="three"):
        sweep_mu(RunConfig(**{**SMALL, "mu": (0.1, 0.05)}))


@pytest.fixture(scope="module")
def small_sweep():
    return sweep_mu(RunConfig(**SMALL))


def test_sweep_report(small_sweep, tmp_path):
    rep = small_sweep
    assert rep.mu_list == [0.2, 0.1, 0.05] and not rep.excluded
    assert rep.slope_p > 0 and rep.max_ratio_spread >= 1
    csv_path, json_path = write_sweep(rep, tmp_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "regime,mu,t,error_linf,bound,ratio" and len(lines) == 1 + 3 * 5
    data = json.loads(json_path.read_text())
    assert set(data) == {"regime", "mu_list", "slope_p", "slope_r2", "slope_stderr", "max_ratio_spread",
                         "excluded_mu", "runtimes_s"}
    assert (tmp_path / "run.log").read_text().count("mu=") == 3


def test_sweep_is_deterministic(small_sweep, tmp_path):
    write_sweep(small_sweep, tmp_path / "a")
    write_sweep(sweep_mu(RunConfig(**SMALL)), tmp_path / "b")
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_parallel_sweep_matches_serial(small_sweep):
    par = sweep_mu(RunConfig(**{**SMALL, "workers": 2}))
    assert par.rows() == small_sweep.rows()
    assert par.payload(runtimes=False) == small_sweep.payload(runtimes=False)
