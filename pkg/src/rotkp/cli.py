"""Command-line entry point: ``python -m rotkp <command> [options]``.

Exit status is 0 on success, 1 on invalid input and 2 when a solver fails
numerically (non-finite values or a depth below the floor).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .ansatz import Ansatz, ConfigError, residual_eval, transport_growth_probe
from .boussinesq import DIAGNOSTIC_COLUMNS, BoussinesqState, CavitationError, solve_boussinesq
from .etd import BlowUpError
from .experiments import RunConfig, config_dict, load_config, run_comparison, sweep_mu, write_sweep
from .io import write_csv, write_json, write_snapshot
from .profiles import primitive_x
from .regimes import RegimeKind, params_for, recommend_model, regime_table
from .scalar_models import solve
from .spectral import NotInRangeError, ScalarField

log = logging.getLogger("rotkp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _mu_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid mu list {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value file")
    p.add_argument("--regime", help="boussinesq, rkp, kp, ostrovsky or kdv")
    p.add_argument("--mu", type=_mu_list, help="value or comma-separated list")
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--t0", type=float, help="slow-time horizon")
    p.add_argument("--dt", type=float)
    p.add_argument("--out", help="output directory")
    p.add_argument("--profile")
    p.add_argument("--amplitude", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rotkp", description="Boussinesq-Coriolis and KP-type model runs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, helptext in [
        ("solve", "integrate one model and write snapshots plus diagnostics"),
        ("compare", "Boussinesq solution against the scalar-model reconstruction"),
        ("sweep", "error scaling over several mu values"),
        ("residual", "plug the multiscale ansatz into the Boussinesq equations"),
        ("probe", "two-speed transport growth test"),
    ]:
        _common(sub.add_parser(name, help=helptext))
    reg = sub.add_parser("regime", help="parameters of a regime and its recommended model")
    reg.add_argument("--regime", required=True)
    reg.add_argument("--mu", type=float, required=True)
    return parser


def _config(args, need_scalar: bool = True) -> RunConfig:
    over = {"regime": args.regime, "mu": args.mu, "nx": args.nx, "ny": args.ny, "t0": args.t0,
            "profile": args.profile, "amplitude": args.amplitude, "out": args.out}
    if args.command != "solve":
        over["dt"] = args.dt
    if args.config is not None:
        return load_config(args.config, over)
    return RunConfig(**{k: v for k, v in over.items() if v is not None})


def _cmd_regime(args) -> int:
    regime = RegimeKind(args.regime)
    p = params_for(regime, args.mu)
    print(f"ε={p.eps:g} γ={p.gamma:g} rot={p.rot:g}")
    if regime is not RegimeKind.BOUSSINESQ:
        row = next(r for r in regime_table() if r["regime"] == regime.value)
        print(f"model={recommend_model(row['gamma'], row['rot']).value}")
    return 0


def _cmd_solve(args) -> int:
    if args.regime == "boussinesq":
        if args.mu is None or len(args.mu) != 1:
            raise ConfigError("solve --regime boussinesq needs one --mu")
        mu = args.mu[0]
        args.regime = None
        cfg = _config(args)
        params = params_for(RegimeKind.BOUSSINESQ, mu)
        k0 = cfg.initial_profile().values
        state = BoussinesqState.from_arrays(cfg.grid(), k0, k0, np.zeros_like(k0))
        dt = args.dt if args.dt is not None else cfg.boussinesq_dt(mu)
        horizon = cfg.t0 / mu
        n = max(1, round(horizon / dt))
        traj = solve_boussinesq(state, params, n * dt, dt, sample_every=max(1, n // cfg.samples))
        out = Path(cfg.out)
        write_csv(out / "diagnostics.csv", DIAGNOSTIC_COLUMNS, traj.diagnostics)
        last = traj.state(len(traj.times) - 1)
        for name, f in (("zeta", last.zeta), ("u", last.vbar.u), ("v", last.vbar.v)):
            write_snapshot(out / f"{name}_final", f, last.time, name)
        print(f"t={last.time:g} mass={traj.diagnostics[-1]['mass']:.12g} e0={traj.diagnostics[-1]['e0']:.12g}")
        return 0
    cfg = _config(args)
    dt = args.dt if args.dt is not None else cfg.dt_tau
    kind = RegimeKind(cfg.regime).scalar_model
    traj = solve(cfg.initial_profile(), kind, cfg.t0, dt, sample_every=max(1, round(cfg.t0 / dt) // cfg.samples))
    out = Path(cfg.out)
    write_csv(out / "diagnostics.csv", ["tau", "l2", "linf", "mass_x0", "dt"], traj.diagnostics)
    write_snapshot(out / "k_final", traj.field(len(traj.taus) - 1), traj.horizon, "k")
    print(f"tau={traj.horizon:g} l2_drift={traj.l2_drift():.3e}")
    return 0


def _cmd_compare(args) -> int:
    cfg = _config(args)
    rep = run_comparison(cfg)
    out = Path(cfg.out)
    write_csv(out / "compare.csv", ["regime", "mu", "t", "error_linf", "bound", "ratio"], rep.rows())
    write_json(out / "config.json", config_dict(cfg))
    print(f"{cfg.regime} mu={rep.mu:g} E(T)={rep.end_error:.4e} max_ratio={rep.max_ratio:.4f}"
          + ("" if rep.complete else f" partial: {rep.failure}"))
    return 0 if rep.complete else 2


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    rep = sweep_mu(cfg)
    write_sweep(rep, cfg.out)
    print(f"{cfg.regime} p={rep.slope_p:.3f}±{rep.slope_stderr:.3f} R2={rep.slope_r2:.4f} "
          f"ratio_spread={rep.max_ratio_spread:.3f}")
    if not rep.runs:
        return 2
    return 0


def _cmd_residual(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out)
    traj = solve(cfg.initial_profile(), RegimeKind(cfg.regime).scalar_model, cfg.t0, cfg.dt_tau)
    for mu in cfg.mu:
        ans = Ansatz(cfg.regime, traj, mu, v0_mode=cfg.v0_mode)
        times = np.linspace(0.0, cfg.t0 / mu, cfg.samples + 1)
        rep = residual_eval(ans, times)
        (out / f"residual_mu{mu:g}.json").parent.mkdir(parents=True, exist_ok=True)
        (out / f"residual_mu{mu:g}.json").write_text(rep.to_json() + "\n")
        print(f"mu={mu:g} max Linf: R1_(1)={rep.max_linf('r1_one'):.2e} R2_(1/2)={rep.max_linf('r2_half'):.2e} "
              f"R2_(1)={rep.max_linf('r2_one'):.2e}")
    return 0


def _cmd_probe(args) -> int:
    cfg = _config(args)
    k2 = cfg.initial_profile()
    zero = ScalarField.zeros(k2.grid)
    k1 = primitive_x(k2)
    T = 200.0 if args.t0 is None else args.t0
    out = Path(cfg.out)
    for label, a, b in (("bounded", zero, k2), ("growing", k1, zero)):
        rep = transport_growth_probe(1.0, -1.0, a, b, T)
        write_csv(out / f"probe_{label}.csv", ["t", "h2_norm", "ratio"], rep.rows())
        print(f"{label}: slope={rep.slope:.4g} r2={rep.r2:.5f} sup_ratio={rep.boundedness_ratio:.5f}")
    return 0


COMMANDS = {"solve": _cmd_solve, "compare": _cmd_compare, "sweep": _cmd_sweep, "residual": _cmd_residual,
            "probe": _cmd_probe, "regime": _cmd_regime}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (BlowUpError, CavitationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, NotInRangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
