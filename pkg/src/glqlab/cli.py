"""Command-line front end.

Subcommands ``steady``, ``solve``, ``scan``, ``hautus`` and ``heat`` read a
plain-text configuration (see :mod:`glqlab.config`) and write CSV files with
17 significant digits into the output directory.
"""

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .closed_loop import solve_glq
from .config import ConfigError, RunConfig, load_config, loads_config
from .errors import KktSingular, NonFiniteState, SpectralUnreliable
from .heat import (
    HeatConfig,
    demo_counterexample,
    demo_stable,
    truncation_agreement,
    truncation_study,
)
from .steady import solve_steady
from .structure import hautus_detectable, hautus_stabilizable, unobservable_subspace
from .turnpike import deviation_curve, horizon_scan

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_KKT = 3
EXIT_BLOWUP = 4
EXIT_SPECTRAL = 5

OUT_ENV = "GLQLAB_OUT"

EPILOG = """\
exit codes:
  0  success
  2  configuration or argument parse failure
  3  singular steady-state KKT system
  4  non-finite state (trajectory blow-up)
  5  unreliable eigen-decomposition in a structural test

The output directory is --out, else the config key 'out', else $GLQLAB_OUT,
else the current directory.
"""

log = logging.getLogger(__name__)


def fmt(x):
    """Float with 17 significant digits (bit-exact when read back)."""
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])


def _out_dir(cfg):
    path = Path(cfg.out or os.environ.get(OUT_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _vec(v):
    return "[" + ", ".join(fmt(x) for x in np.ravel(v)) + "]"


def write_trajectory(path, traj, d=None):
    n, m = traj.states.shape[1], traj.controls.shape[1]
    d = deviation_curve(traj) if d is None else d
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"u{j + 1}" for j in range(m)] + ["d"]
    rows = (
        [float(t), *map(float, x), *map(float, u), float(dd)]
        for t, x, u, dd in zip(traj.grid, traj.states, traj.controls, d)
    )
    _write_csv(path, header, rows)


def write_report(out, report, prefix=""):
    """``report.csv``, the long-format deviation file and one trajectory file per horizon."""
    rows = [
        [float(r.T), float(r.measure_outside), float(r.k), float(r.M), float(r.midpoint_deviation), r.status]
        for r in report.results
    ]
    _write_csv(out / f"{prefix}report.csv", ["T", "measure_outside", "k", "M", "midpoint_deviation", "status"], rows)
    long_rows = []
    for r in report.results:
        if r.deviation is not None:
            long_rows.extend([float(r.T), float(t), float(d)] for t, d in zip(r.grid, r.deviation))
    _write_csv(out / f"{prefix}deviation_long.csv", ["T", "t", "d"], long_rows)
    for r in report.results:
        if r.trajectory is not None:
            write_trajectory(out / f"{prefix}trajectory_T{fmt(r.T)}.csv", r.trajectory, r.deviation)


def print_report(report):
    print(f"{'T':>8} {'measure':>12} {'k':>12} {'M':>12} {'d(T/2)':>12}  status")
    for r in report.results:
        print(f"{r.T:8.4g} {r.measure_outside:12.6g} {r.k:12.6g} {r.M:12.6g} {r.midpoint_deviation:12.6g}  {r.status}")


def cmd_steady(cfg: RunConfig, args):
    try:
        st = solve_steady(cfg.problem)
    except KktSingular as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_KKT
    print(f"x_e = {_vec(st.x_e)}")
    print(f"u_e = {_vec(st.u_e)}")
    print(f"w = {_vec(st.w)}")
    print(f"kkt_residual = {fmt(st.kkt_residual)}")
    print(f"unique = {str(st.unique).lower()}")
    rows = [["x_e", i + 1, float(x)] for i, x in enumerate(st.x_e)]
    rows += [["u_e", j + 1, float(u)] for j, u in enumerate(st.u_e)]
    rows += [["w", i + 1, float(x)] for i, x in enumerate(st.w)]
    rows += [["kkt_residual", 0, float(st.kkt_residual)], ["unique", 0, int(st.unique)]]
    _write_csv(_out_dir(cfg) / "steady.csv", ["field", "index", "value"], rows)
    return EXIT_OK


def cmd_solve(cfg: RunConfig, args):
    out = _out_dir(cfg)
    try:
        traj = solve_glq(cfg.problem, cfg.x0, cfg.T, cfg.dt)
    except KktSingular as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_KKT
    except NonFiniteState as exc:
        print(f"error: {exc}; last finite time t = {fmt(exc.t_last)}", file=sys.stderr)
        return EXIT_BLOWUP
    write_trajectory(out / "trajectory.csv", traj)
    print(f"cost = {fmt(traj.cost)}")
    return EXIT_OK


def cmd_scan(cfg: RunConfig, args):
    report = horizon_scan(cfg.problem, cfg.x0, cfg.horizons, cfg.dt, cfg.epsilon)
    write_report(_out_dir(cfg), report)
    print_report(report)
    return EXIT_OK


def _print_witness(label, res):
    print(f"{label} = {str(res.holds).lower()}")
    if not res.holds:
        s = res.witness_eigenvalue
        s_text = fmt(s.real) if s.imag == 0 else f"{fmt(s.real)}{'+' if s.imag >= 0 else '-'}{fmt(abs(s.imag))}j"
        print(f"{label}_witness_eigenvalue = {s_text}")
        vec = res.witness_vector
        if np.iscomplexobj(vec):
            print(f"{label}_witness_vector_real = {_vec(vec.real)}")
            print(f"{label}_witness_vector_imag = {_vec(vec.imag)}")
        else:
            print(f"{label}_witness_vector = {_vec(vec)}")


def cmd_hautus(cfg: RunConfig, args):
    pr = cfg.problem
    try:
        stab = hautus_stabilizable(pr.A, pr.B)
        det = hautus_detectable(pr.A, pr.C)
    except SpectralUnreliable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPECTRAL
    obs = unobservable_subspace(pr.A, pr.C)
    _print_witness("stabilizable", stab)
    _print_witness("detectable", det)
    print(f"unobservable_dim = {obs.dim}")
    print(f"stable_on_unobservable = {str(obs.stable_on_unobservable).lower()}")
    return EXIT_OK


def _heat_cfg(cfg):
    if cfg.heat is not None:
        return cfg.heat
    return HeatConfig()


def cmd_heat(cfg: RunConfig, args):
    out = _out_dir(cfg)
    if args.mode == "counterexample":
        n = cfg.heat.n_modes if cfg.heat is not None else 4
        rep = demo_counterexample(n, cfg.horizons, cfg.dt)
        _print_witness("stabilizable", rep.stabilizable)
        _print_witness("detectable", rep.detectable)
        print(f"b = {_vec(rep.extras['b'])}")
        if "mode2_ratio" in rep.extras:
            print(f"mode2_ratio = {fmt(rep.extras['mode2_ratio'])}")
        write_report(out, rep.scan)
        print_report(rep.scan)
    elif args.mode == "stable":
        h = _heat_cfg(cfg)
        rep = demo_stable(h.n_modes, cfg.horizons, cfg.dt, omega=h.omega, operator_kind=h.operator_kind,
                          seed=cfg.seed, epsilon=cfg.epsilon)
        for key, val in rep.extras.items():
            print(f"{key} = {str(val).lower()}")
        write_report(out, rep.scan)
        print_report(rep.scan)
    else:
        h = _heat_cfg(cfg)
        n_list = args.n_list or [4, 8, 16]
        rows = truncation_study(h, n_list, cfg.T, cfg.dt)
        flags = truncation_agreement(rows)
        _write_csv(
            out / "truncation.csv",
            ["n_modes", "midpoint_deviation", "k", "status"],
            [[r.n_modes, float(r.midpoint_deviation), float(r.k), r.status] for r in rows],
        )
        for r in rows:
            print(f"n_modes = {r.n_modes}  d(T/2) = {fmt(r.midpoint_deviation)}  k = {fmt(r.k)}  {r.status}")
        for (a, b), ok in zip(zip(n_list, n_list[1:]), flags):
            print(f"agree_3_digits({a}, {b}) = {str(ok).lower()}")
    return EXIT_OK


COMMANDS = {
    "steady": (cmd_steady, "solve the steady-state KKT system"),
    "solve": (cmd_solve, "optimal trajectory at the largest horizon"),
    "scan": (cmd_scan, "turnpike statistics over all horizons"),
    "hautus": (cmd_hautus, "stabilizability and detectability tests"),
    "heat": (cmd_heat, "heat-equation demos"),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="glqlab",
        description="Finite-horizon linear-quadratic control with linear cost terms, and turnpike diagnostics.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", type=Path, required=name != "heat", help="configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--dt", type=float, help="time step (overrides the config)")
        p.add_argument("--epsilon", type=float, help="threshold for the time spent away")
        p.add_argument("--seed", type=int, help="seed for random sources and presets")
        if name == "heat":
            p.add_argument("--mode", choices=("stable", "counterexample", "truncation"), default="stable")
            p.add_argument("--n-list", type=int, nargs="+", help="mode counts for the truncation study")
    return parser


_HEAT_DEFAULTS = {
    "stable": "source = heat\nc = 0\nn_modes = 8\nomega = [0.5, 2.0]\nhorizons = [5, 10, 20, 40]\ndt = 1e-3\n",
    "counterexample": "source = heat\nc = 5\nn_modes = 4\nomega = [pi/4, 3*pi/4]\nhorizons = [5, 10]\ndt = 1e-3\n",
    "truncation": "source = heat\nc = 0\nomega = [0.5, 2.0]\nT = 10\ndt = 1e-3\n",
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    overrides = {"dt": args.dt, "epsilon": args.epsilon, "seed": args.seed, "out": args.out}
    try:
        if args.config is None:
            cfg = loads_config(_HEAT_DEFAULTS[args.mode], overrides)
        else:
            cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        where = f"{args.config}: " if args.config else ""
        print(f"error: {where}{exc}", file=sys.stderr)
        return EXIT_PARSE
    handler = COMMANDS[args.command][0]
    try:
        return handler(cfg, args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
