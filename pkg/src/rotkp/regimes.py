"""Asymptotic regimes: parameter families and the recommended scalar model.

Each weakly transverse regime ties (eps, gamma, rot) to the shallowness mu:

    ==========  =====  ========  ========
    regime      eps    gamma     rot
    ==========  =====  ========  ========
    rkp         mu     sqrt(mu)  sqrt(mu)
    kp          mu     sqrt(mu)  mu
    ostrovsky   mu     mu        sqrt(mu)
    kdv         mu     mu        mu
    ==========  =====  ========  ========

The general Boussinesq regime only asks ``eps <= mu``, ``gamma <= 1`` and
``rot <= sqrt(mu)`` with ``0 < mu <= mu0``.
"""

from __future__ import annotations

import enum
import math

from .boussinesq import ModelParams
from .scalar_models import ScalarModelKind

MU0 = 0.25


class RegimeKind(str, enum.Enum):
    BOUSSINESQ = "boussinesq"
    RKP = "rkp"
    KP = "kp"
    OSTROVSKY = "ostrovsky"
    KDV = "kdv"

    @property
    def scalar_model(self) -> ScalarModelKind:
        if self is RegimeKind.BOUSSINESQ:
            raise ValueError("the general Boussinesq regime has no single scalar model")
        return ScalarModelKind(self.value)


class ScaleClass(str, enum.Enum):
    """How a parameter scales with mu."""

    SQRT_MU = "sqrt_mu"
    MU = "mu"


_CLASSES = {
    RegimeKind.RKP: (ScaleClass.SQRT_MU, ScaleClass.SQRT_MU),
    RegimeKind.KP: (ScaleClass.SQRT_MU, ScaleClass.MU),
    RegimeKind.OSTROVSKY: (ScaleClass.MU, ScaleClass.SQRT_MU),
    RegimeKind.KDV: (ScaleClass.MU, ScaleClass.MU),
}


def _scale(cls: ScaleClass, mu: float) -> float:
    return math.sqrt(mu) if cls is ScaleClass.SQRT_MU else mu


def _check_mu(mu: float, mu0: float) -> None:
    if not 0 < mu <= mu0:
        raise ValueError(f"mu must lie in (0, {mu0}], got {mu}")


def params_for(regime, mu: float, mu0: float = MU0, eps: float | None = None, gamma: float | None = None,
               rot: float | None = None, h_min: float = 0.25) -> ModelParams:
    """Model parameters for a regime at shallowness ``mu``.

    For the scalar regimes the triple is fixed by the table above and explicit
    ``eps``, ``gamma`` or ``rot`` are rejected. For ``boussinesq`` they default to
    ``(mu, 1, sqrt(mu))`` and are checked against the admissible set.
    """
    regime = RegimeKind(regime)
    _check_mu(mu, mu0)
    if regime is RegimeKind.BOUSSINESQ:
        p = ModelParams(mu=mu, eps=mu if eps is None else eps, gamma=1.0 if gamma is None else gamma,
                        rot=math.sqrt(mu) if rot is None else rot, h_min=h_min)
        if not in_boussinesq_regime(p, mu0):
            raise ValueError(
                f"(eps={p.eps}, gamma={p.gamma}, rot={p.rot}) is outside the Boussinesq regime at mu={mu}"
            )
        return p
    if eps is not None or gamma is not None or rot is not None:
        raise ValueError(f"eps, gamma and rot are fixed by the {regime.value} regime")
    gcls, rcls = _CLASSES[regime]
    return ModelParams(mu=mu, eps=mu, gamma=_scale(gcls, mu), rot=_scale(rcls, mu), h_min=h_min)


def in_boussinesq_regime(p: ModelParams, mu0: float = MU0, tol: float = 1e-12) -> bool:
    return (0 < p.mu <= mu0 and p.eps <= p.mu * (1 + tol) and 0 < p.gamma <= 1
            and p.rot <= math.sqrt(p.mu) * (1 + tol))


def recommend_model(gamma_class, rot_class) -> ScalarModelKind:
    """Scalar model for a (gamma, rot) scaling pair."""
    key = (ScaleClass(gamma_class), ScaleClass(rot_class))
    for regime, classes in _CLASSES.items():
        if classes == key:
            return regime.scalar_model
    raise ValueError(f"no model for {key}")  # pragma: no cover


def classify(p: ModelParams, tol: float = 1e-9) -> RegimeKind:
    """Identify which weakly transverse regime ``p`` belongs to, if any."""
    if not math.isclose(p.eps, p.mu, rel_tol=tol):
        return RegimeKind.BOUSSINESQ
    found = []
    for regime, (gcls, rcls) in _CLASSES.items():
        if (math.isclose(p.gamma, _scale(gcls, p.mu), rel_tol=tol)
                and math.isclose(p.rot, _scale(rcls, p.mu), rel_tol=tol)):
            found.append(regime)
    return found[0] if len(found) == 1 else RegimeKind.BOUSSINESQ


def regime_table() -> list[dict]:
    """Rows (regime, gamma_class, rot_class, model) for display and tests."""
    return [
        {"regime": r.value, "gamma": g.value, "rot": c.value, "model": recommend_model(g, c).value}
        for r, (g, c) in _CLASSES.items()
    ]
