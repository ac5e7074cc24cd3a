"""Command-line front end: ``decoq {sigma,times,table1,fidelity,mc-validate}``.

Exit codes: 0 success, 1 numeric or check failure, 2 usage error.
Output is CSV (``# key=value`` parameter lines, a header row, 9 significant
digits) or a JSON object with ``params`` and ``rows``.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .fidelity import BracketError, fidelity_series, gamma_star
from .kernels import OU, POWER_LAW, ChannelParams, KernelSpec, QuadratureError, sigma_eval, sigma_trajectory
from .montecarlo import PathConfig, empirical_sigma, simulate_phi, worker_count
from .nonclassicality import depth_times, klyshko_times, vogel_times, wigner_times
from .states import StateSpec

# Published decoherence times for gamma=0.05, lambda=1 (first sudden death of
# each criterion), cat with alpha=sqrt(2) and Fock n=2.
TABLE1_DELTAS = (0.0, 0.3, 0.4, 0.5)
TABLE1_REFERENCE = {
    "cat": {
        "t_Q": (6.676, 8.982, 47.467, 81.091),
        "t_W": (4.645, 5.118, 5.823, 29.355),
        "t_V": (4.272, 4.624, 5.067, 16.773),
        "t_K": (4.054, 4.349, 4.694, 17.700),
    },
    "fock": {
        "t_Q": (6.676, 8.982, 47.467, 81.091),
        "t_W": (4.645, 5.118, 5.823, 29.355),
        "t_V": (3.886, 4.140, 4.425, 5.128),
        "t_K": (5.412, 6.253, 21.329, 49.527),
    },
}
# t_Q and t_W come straight from sigma root finding and get a tighter band
TABLE1_TOLERANCE = {"t_Q": 0.005, "t_W": 0.005, "t_V": 0.01, "t_K": 0.01}
TABLE1_T_MAX = 200.0

NUMERIC_ERRORS = (ArithmeticError, ValueError, QuadratureError, np.linalg.LinAlgError, BracketError)


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, bool):
        return "PASS" if v else "FAIL"
    if isinstance(v, (float, np.floating)):
        return "%.9g" % v
    if v is None:
        return ""
    return str(v)


def render(params: dict, rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        clean = lambda v: None if isinstance(v, float) and not math.isfinite(v) else v
        rows = [{k: clean(_py(v)) for k, v in r.items()} for r in rows]
        return json.dumps({"params": params, "rows": rows}, indent=2) + "\n"
    buf = io.StringIO()
    for k, v in params.items():
        buf.write(f"# {k}={_fmt(v) if not isinstance(v, (list, tuple)) else ';'.join(map(_fmt, v))}\n")
    if rows:
        cols = list(rows[0])
        buf.write(",".join(cols) + "\n")
        for r in rows:
            buf.write(",".join(_fmt(r.get(c)) for c in cols) + "\n")
    return buf.getvalue()


def _py(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


# ---------------------------------------------------------------- parsing

def _channel_flags(p: argparse.ArgumentParser, need_lambda: bool = True):
    g = p.add_argument_group("channel")
    g.add_argument("--kernel", choices=["ou", "plaw"], default="ou")
    g.add_argument("--lambda", dest="lam", type=float, required=need_lambda, help="coupling strength")
    g.add_argument("--gamma", type=float, default=0.05, help="memory parameter (inverse correlation time)")
    g.add_argument("--beta", type=float, default=None, help="power-law exponent (> 2)")
    g.add_argument("--delta", type=float, default=0.0, help="detuning")


def _state_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("state")
    g.add_argument("--state", choices=["cat", "fock"], default="cat")
    g.add_argument("--alpha", type=complex, default=complex(math.sqrt(2.0)), help="cat amplitude")
    g.add_argument("--n", type=int, default=2, help="Fock number")


def _output_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("output")
    g.add_argument("--format", choices=["csv", "json"], default="csv")
    g.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decoq", description="Decoherence of an oscillator in a classical Gaussian field.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sigma", help="channel width sigma(t) and its rate")
    _channel_flags(p)
    p.add_argument("--tmax", type=float, default=20.0)
    p.add_argument("--points", type=int, default=201)
    _output_flags(p)

    p = sub.add_parser("times", help="death/birth times for every criterion")
    _channel_flags(p)
    _state_flags(p)
    p.add_argument("--tmax", type=float, default=TABLE1_T_MAX)
    p.add_argument("--umax", type=float, default=None, help="Vogel scan range on the real axis")
    _output_flags(p)

    p = sub.add_parser("table1", help="reproduce the reference decoherence-time table")
    p.add_argument("--tolerance", type=float, default=None,
                   help="relative tolerance for every cell (default 1%%, 0.5%% for t_Q and t_W)")
    p.add_argument("--umax", type=float, default=None)
    _output_flags(p)

    p = sub.add_parser("fidelity", help="input-output fidelity series or the gamma* threshold")
    _channel_flags(p)
    _state_flags(p)
    p.add_argument("--tmax", type=float, default=60.0)
    p.add_argument("--points", type=int, default=601)
    p.add_argument("--gamma-star", action="store_true", help="emit the monotonicity threshold for (lambda, delta)")
    _output_flags(p)

    p = sub.add_parser("mc-validate", help="compare Monte Carlo sigma with the analytic value")
    _channel_flags(p)
    p.add_argument("--tmax", type=float, default=5.0)
    p.add_argument("--points", type=int, default=10, help="number of comparison times")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=4.0, help="largest accepted |z|")
    _output_flags(p)
    return parser


def _kernel(args) -> KernelSpec:
    family = OU if args.kernel == "ou" else POWER_LAW
    beta = args.beta if family == POWER_LAW else None
    if family == POWER_LAW and beta is None:
        raise UsageError("--beta is required for --kernel plaw")
    try:
        return KernelSpec(family, args.lam, args.gamma, beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _state(args) -> StateSpec:
    try:
        return StateSpec.cat(args.alpha) if args.state == "cat" else StateSpec.fock(args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _channel_params(args) -> dict:
    d = {"kernel": args.kernel, "lambda": args.lam, "gamma": args.gamma, "delta": args.delta}
    if args.kernel == "plaw":
        d["beta"] = args.beta
    return d


def _state_params(args) -> dict:
    if args.state == "cat":
        a = args.alpha
        return {"state": "cat", "alpha": _fmt(a.real) if a.imag == 0 else str(a).strip("()")}
    return {"state": "fock", "n": args.n}


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise UsageError(f"{name} must be positive")


# ---------------------------------------------------------------- commands

def cmd_sigma(args):
    _positive("--tmax", args.tmax)
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    params = ChannelParams(_kernel(args), args.delta)
    traj = sigma_trajectory(params, args.tmax, args.points)
    rows = [{"t": float(t), "sigma": float(s), "rate": float(r)} for t, s, r in zip(traj.times, traj.sigma, traj.rate)]
    return 0, _channel_params(args), rows


def _criterion_rows(state, params, t_max, u_max):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        reports = [
            ("t_Q", depth_times(params, t_max=t_max)),
            ("t_W", wigner_times(params, t_max=t_max)),
            ("t_V", vogel_times(state, params, t_max=t_max, u_max=u_max)),
            ("t_K", klyshko_times(state, params, t_max=t_max)),
        ]
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return reports


def cmd_times(args):
    _positive("--tmax", args.tmax)
    params = ChannelParams(_kernel(args), args.delta)
    state = _state(args)
    rows = []
    for name, rep in _criterion_rows(state, params, args.tmax, args.umax):
        for i, c in enumerate(rep.crossings):
            rows.append({"criterion": name, "index": i, "kind": c.kind, "t": c.t})
    meta = {**_channel_params(args), **_state_params(args), "tmax": args.tmax}
    return 0, meta, rows


def _table1_column(delta, u_max):
    params = ChannelParams(KernelSpec.ou(1.0, 0.05), delta)
    out = {}
    for block, state in (("cat", StateSpec.cat(math.sqrt(2.0))), ("fock", StateSpec.fock(2))):
        for name, rep in _criterion_rows(state, params, TABLE1_T_MAX, u_max):
            out[(block, name)] = rep.first_death
    return out


def cmd_table1(args):
    if args.tolerance is not None:
        _positive("--tolerance", args.tolerance)
    workers = min(worker_count(), len(TABLE1_DELTAS))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        columns = list(pool.map(lambda d: _table1_column(d, args.umax), TABLE1_DELTAS))
    rows = []
    for block, table in TABLE1_REFERENCE.items():
        for name, refs in table.items():
            tol = args.tolerance if args.tolerance is not None else TABLE1_TOLERANCE[name]
            for j, delta in enumerate(TABLE1_DELTAS):
                got = columns[j][(block, name)]
                ref = refs[j]
                rel = abs(got - ref) / ref if got is not None else float("inf")
                rows.append({"block": block, "criterion": name, "delta": delta, "computed": got,
                             "reference": ref, "rel_error": rel, "tolerance": tol, "pass": bool(rel <= tol)})
    n_fail = sum(not r["pass"] for r in rows)
    meta = {"lambda": 1.0, "gamma": 0.05, "alpha": "1.41421356", "n": 2, "tmax": TABLE1_T_MAX,
            "cells": len(rows), "failed": n_fail}
    for r in rows:
        if not r["pass"]:
            print(f"FAIL {r['block']} {r['criterion']} delta={r['delta']}: computed {_fmt(r['computed'])} "
                  f"reference {r['reference']}", file=sys.stderr)
    return (1 if n_fail else 0), meta, rows


def cmd_fidelity(args):
    if args.gamma_star:
        family = OU if args.kernel == "ou" else POWER_LAW
        g = gamma_star(args.lam, args.delta, family=family, beta=args.beta)
        meta = {"kernel": args.kernel, "lambda": args.lam, "delta": args.delta}
        return 0, meta, [{"lambda": args.lam, "delta": args.delta, "gamma_star": g}]
    _positive("--tmax", args.tmax)
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    params = ChannelParams(_kernel(args), args.delta)
    series = fidelity_series(_state(args), params, args.tmax, args.points)
    rows = [{"t": float(t), "sigma": float(s), "fidelity": float(f)}
            for t, s, f in zip(series.times, series.sigma, series.fidelity)]
    meta = {**_channel_params(args), **_state_params(args), "monotone": series.monotone}
    return 0, meta, rows


def cmd_mc_validate(args):
    _positive("--tmax", args.tmax)
    _positive("--dt", args.dt)
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    spec = _kernel(args)
    n_steps = int(round(args.tmax / args.dt))
    try:
        cfg = PathConfig(args.dt, n_steps, args.paths, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    idx = np.unique(np.rint(np.linspace(n_steps / args.points, n_steps, args.points)).astype(int))
    times = idx * args.dt
    ens = simulate_phi(spec, cfg, args.delta, record_times=times)
    params = ChannelParams(spec, args.delta)
    rows, bad = [], []
    for t in times:
        est, se = empirical_sigma(ens, float(t))
        exact = float(sigma_eval(params, float(t)))
        diff = est - exact
        z = 0.0 if diff == 0.0 else (diff / se if se > 0 else math.copysign(math.inf, diff))
        rows.append({"t": float(t), "sigma_exact": exact, "sigma_mc": est, "std_error": se, "z": z})
        if abs(z) > args.tolerance:
            bad.append((float(t), z))
    meta = {**_channel_params(args), "paths": args.paths, "dt": args.dt, "seed": args.seed, "z_max": args.tolerance}
    for t, z in bad:
        print(f"statistical failure at t={t:.9g}: z={z:.3f}", file=sys.stderr)
    return (1 if bad else 0), meta, rows


COMMANDS = {
    "sigma": cmd_sigma,
    "times": cmd_times,
    "table1": cmd_table1,
    "fidelity": cmd_fidelity,
    "mc-validate": cmd_mc_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, meta, rows = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"decoq: error: {exc}", file=sys.stderr)
        return 2
    except NUMERIC_ERRORS as exc:
        print(f"decoq: numeric failure: {exc}", file=sys.stderr)
        return 1
    text = render({"command": args.command, **meta}, rows, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
