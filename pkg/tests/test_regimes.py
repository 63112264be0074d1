import math

import pytest
from hypothesis import given, strategies as st

from rotkp.boussinesq import ModelParams
from rotkp.regimes import (
    RegimeKind,
    ScaleClass,
    classify,
    in_boussinesq_regime,
    params_for,
    recommend_model,
    regime_table,
)
from rotkp.scalar_models import ScalarModelKind


@pytest.mark.parametrize(
    "gamma_class, rot_class, model",
    [
        ("sqrt_mu", "sqrt_mu", "rkp"),
        ("sqrt_mu", "mu", "kp"),
        ("mu", "sqrt_mu", "ostrovsky"),
        ("mu", "mu", "kdv"),
    ],
)
def test_recommendation_table(gamma_class, rot_class, model):
    assert recommend_model(gamma_class, rot_class) is ScalarModelKind(model)


def test_rkp_parameters_at_mu_004():
    p = params_for("rkp", 0.04)
    assert (p.eps, p.gamma, p.rot) == (0.04, 0.2, 0.2)


def test_unknown_class_is_rejected():
    with pytest.raises(ValueError):
        recommend_model("mu2", "mu")


def test_scalar_regimes_fix_the_triple():
    with pytest.raises(ValueError, match="fixed"):
        params_for("kp", 0.04, rot=0.1)


def test_boussinesq_defaults_and_rejection():
    p = params_for("boussinesq", 0.09)
    assert (p.eps, p.gamma, p.rot) == (0.09, 1.0, 0.3)
    with pytest.raises(ValueError, match="outside"):
        params_for("boussinesq", 0.09, eps=0.2)
    with pytest.raises(ValueError, match="outside"):
        params_for("boussinesq", 0.09, rot=0.5)


@pytest.mark.parametrize("mu", [0.0, -0.1, 0.3])
def test_mu_range(mu):
    with pytest.raises(ValueError):
        params_for("kdv", mu)


def test_table_rows():
    rows = regime_table()
    assert [r["regime"] for r in rows] == ["rkp", "kp", "ostrovsky", "kdv"]
    assert all(r["regime"] == r["model"] for r in rows)


def test_regime_to_model_mapping():
    assert RegimeKind.OSTROVSKY.scalar_model is ScalarModelKind.OSTROVSKY
    with pytest.raises(ValueError):
        RegimeKind.BOUSSINESQ.scalar_model


def test_classify_off_table_is_boussinesq():
    assert classify(ModelParams(mu=0.04, eps=0.02, gamma=0.2, rot=0.2)) is RegimeKind.BOUSSINESQ
    assert classify(ModelParams(mu=0.04, eps=0.04, gamma=1.0, rot=0.2)) is RegimeKind.BOUSSINESQ


@given(mu=st.floats(1e-6, 0.24), regime=st.sampled_from(["rkp", "kp", "ostrovsky", "kdv"]))
def test_params_roundtrip(mu, regime):
    p = params_for(regime, mu)
    assert in_boussinesq_regime(p)
    assert classify(p) is RegimeKind(regime)
    row = next(r for r in regime_table() if r["regime"] == regime)
    expect = lambda c: math.sqrt(mu) if ScaleClass(c) is ScaleClass.SQRT_MU else mu
    assert math.isclose(p.gamma, expect(row["gamma"])) and math.isclose(p.rot, expect(row["rot"]))
