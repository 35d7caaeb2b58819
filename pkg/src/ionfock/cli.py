"""Command-line entry point.

Exit status: 0 on success, 1 for configuration or domain errors, 2 for
numerical failures. Errors are written to stderr as one JSON object.
"""

import argparse
import json
import math
import sys
import warnings

import numpy as np

from . import chain, protocols, sweep
from .config import load_config
from .errors import CapacityError, ConfigError, DomainError, NumericalError, ProtocolAbort
from .hilbert import write_population_csv
from .integrator import convergence_audit


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _coefficient(text):
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"cannot parse coefficient {text!r}", "c0/c1") from None


def _write_trajectory(report, path):
    steps = [s for s in report.steps if s.trajectory is not None]
    if not steps:
        return
    times, states, drift = [], [], []
    offset = steps[0].trajectory.times[0]
    for i, s in enumerate(steps):
        tr = s.trajectory
        t = tr.times - tr.times[0] + offset
        sl = slice(1 if i else 0, None)
        times.append(t[sl])
        states.append(tr.states[sl])
        drift.append(tr.norm_drift[sl])
        offset = t[-1]
    write_population_csv(
        path, np.concatenate(times), np.concatenate(states), steps[0].trajectory.basis,
        extra={"norm_drift": np.concatenate(drift)}, time_name="tau",
    )


def cmd_simulate(args):
    cfg = load_config(args.config)
    chain_cfg, pulse, settings = cfg.chain(), cfg.pulse(), cfg.settings()
    keep = cfg.trajectory_csv is not None
    if cfg.protocol == "fock_blue":
        rep = protocols.fock_via_blue(chain_cfg, pulse, settings)
    elif cfg.protocol == "fock_red":
        rep = protocols.fock_via_red(chain_cfg, pulse, settings)
    else:
        kind = "BLUE_CARRIER" if cfg.protocol == "cycle_blue_carrier" else "BLUE_RED"
        rep = protocols.transition_cycle(chain_cfg, cfg.k, kind, blue=pulse, settings=settings,
                                         keep_trajectory=keep)
    if keep:
        _write_trajectory(rep, cfg.trajectory_csv)
    out = rep.to_dict()
    out["config"] = cfg.to_dict()
    _dump(out, cfg.summary_json)


def cmd_sweep(args):
    cfg = load_config(args.config)
    grid = sweep.SweepGrid(
        sweep.Axis(*args.g0T[:2], int(args.g0T[2])),
        sweep.Axis(*args.delta0T[:2], int(args.delta0T[2])),
        cfg.chain(), cfg.pulse(), nuT=args.nuT,
    )
    res = sweep.fidelity_map(grid, cfg.settings(), jobs=args.jobs, ceiling=args.ceiling)
    res.to_csv(args.out)
    bl, tr = res.quadrant_means()
    _dump({
        "csv": args.out, "cells": int(res.fidelity.size), "failed": len(res.errors),
        "max_fidelity": float(res.fidelity.max()), "bottom_left_mean": bl, "top_right_mean": tr,
        "config": cfg.to_dict(),
    })


def cmd_modes(args):
    m = chain.normal_modes(args.N)
    _dump({
        "N": m.N,
        "positions": m.positions,
        "frequencies": m.frequencies,
        "kappa": m.kappa,
        "sidebands": {
            "order2": chain.sideband_spectrum(m, 2, include_com=args.include_com),
            "order3": chain.sideband_spectrum(m, 3, include_com=args.include_com),
        },
    }, args.out)


def cmd_ghz(args):
    rep = protocols.ghz_prepare(
        args.n, _coefficient(args.c0), _coefficient(args.c1), eta=args.eta,
        epsilon=args.epsilon, margin=args.margin,
    )
    _dump(rep.to_dict(), args.out)


def cmd_superpose(args):
    cfg = load_config(args.config)
    rep = protocols.motional_superposition(
        cfg.chain(), _coefficient(args.c0), _coefficient(args.c1), args.k,
        red=cfg.pulse(), blue=cfg.pulse(), settings=cfg.settings(),
    )
    out = rep.to_dict()
    out["config"] = cfg.to_dict()
    _dump(out, args.out)


def cmd_heating(args):
    nu = 2 * math.pi * args.nu_hz
    g0 = None if args.g0_hz is None else 2 * math.pi * args.g0_hz
    om = None if args.omega0_hz is None else 2 * math.pi * args.omega0_hz
    schemes = ["GLOBAL", "LOCAL"] if args.scheme == "BOTH" else [args.scheme]
    reports = [
        protocols.heating_estimate(args.N, args.epsilon, nu, g0=g0, Omega0=om, eta=args.eta,
                                   rate=args.rate, scheme=s).to_dict()
        for s in schemes
    ]
    _dump(reports[0] if len(reports) == 1 else {"reports": reports}, args.out)


def cmd_check(args):
    cfg = load_config(args.config)
    left, right = protocols.adiabaticity_margins(cfg.chain(), cfg.pulse(), args.epsilon)
    _dump({
        "epsilon": args.epsilon, "left_margin": left, "right_margin": right,
        "satisfied": bool(left >= 1 and right >= 1), "config": cfg.to_dict(),
    }, args.out)


def cmd_audit(args):
    cfg = load_config(args.config)
    rep = convergence_audit(cfg.chain(), cfg.pulse(), cfg.settings(), threshold=args.threshold)
    out = rep.to_dict()
    out["config"] = cfg.to_dict()
    _dump(out, args.out)
    if not rep.converged and args.strict:
        raise NumericalError(f"convergence audit flagged {rep.flagged}")


def build_parser():
    p = argparse.ArgumentParser(prog="ionfock", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one protocol from a JSON config")
    s.add_argument("config")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="fidelity map over (g0T, delta0T)")
    s.add_argument("config")
    s.add_argument("--g0T", nargs=3, type=float, default=[0.5, 15.0, 30], metavar=("MIN", "MAX", "COUNT"))
    s.add_argument("--delta0T", nargs=3, type=float, default=[0.5, 15.0, 30], metavar=("MIN", "MAX", "COUNT"))
    s.add_argument("--nuT", type=float, default=None, help="fixed nuT (default 20 pi g0T per cell)")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--ceiling", type=float, default=sweep.DEFAULT_CEILING)
    s.add_argument("--out", default="sweep.csv")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("modes", help="equilibrium positions and normal modes")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--include-com", action="store_true",
                   help="let the COM mode appear in sideband combinations")
    s.add_argument("--out")
    s.set_defaults(func=cmd_modes)

    s = sub.add_parser("ghz", help="GHZ preparation on 2n+1 ions")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--c0", default=str(1 / math.sqrt(2)))
    s.add_argument("--c1", default=str(1 / math.sqrt(2)))
    s.add_argument("--eta", type=float, default=0.1)
    s.add_argument("--epsilon", type=float, default=0.01)
    s.add_argument("--margin", type=float, default=1.5)
    s.add_argument("--out")
    s.set_defaults(func=cmd_ghz)

    s = sub.add_parser("superpose", help="GHZ to motional superposition")
    s.add_argument("config")
    s.add_argument("--c0", default=str(1 / math.sqrt(2)))
    s.add_argument("--c1", default=str(1 / math.sqrt(2)))
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_superpose)

    s = sub.add_parser("heating", help="pulse duration and heating budget")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--nu-hz", type=float, required=True)
    s.add_argument("--g0-hz", type=float, default=None, help="peak coupling g(0)/2pi")
    s.add_argument("--omega0-hz", type=float, default=None, help="peak Rabi frequency/2pi (needs --eta)")
    s.add_argument("--eta", type=float, default=None)
    s.add_argument("--rate", type=float, default=5.0, help="heating rate per ion (phonons/s)")
    s.add_argument("--scheme", choices=["GLOBAL", "LOCAL", "BOTH"], default="GLOBAL")
    s.add_argument("--out")
    s.set_defaults(func=cmd_heating)

    s = sub.add_parser("check-adiabatic", help="adiabaticity margins of a config")
    s.add_argument("config")
    s.add_argument("--epsilon", type=float, default=0.01)
    s.add_argument("--out")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("audit", help="convergence audit of a config")
    s.add_argument("config")
    s.add_argument("--threshold", type=float, default=1e-4)
    s.add_argument("--strict", action="store_true", help="exit 2 when the audit flags a shift")
    s.add_argument("--out")
    s.set_defaults(func=cmd_audit)
    return p


def _fail(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if getattr(exc, "field", None) is not None:
        payload["field"] = exc.field
    if isinstance(exc, ProtocolAbort):
        payload["diagnostics"] = exc.diagnostics
    sys.stderr.write(json.dumps(payload, default=_default) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            args.func(args)
        for w in caught:
            sys.stderr.write(json.dumps({"warning": str(w.message)}) + "\n")
    except (ConfigError, DomainError, CapacityError) as exc:
        return _fail(exc, 1)
    except NumericalError as exc:
        return _fail(exc, 2)
    except OSError as exc:
        return _fail(exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
