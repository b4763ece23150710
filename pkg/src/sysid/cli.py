"""Command-line entry points: simulate, sweep, lowerbound, analyze, selectl."""
from __future__ import annotations

import argparse
import json
import math
import sys as _sys

import numpy as np

from . import estimators as est
from .analysis import (PhaseRankNotFound, k1, k2, m_constants,
                       minimal_polynomial, phase_rank)
from .bench import (ExperimentConfig, cmd_lowerbound, noise_from_dict,
                    preset_system, run_sweep, write_csv)
from .lti import JordanSpec, StateSpace, simulate


def _ints(text: str):
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _load_system(args) -> StateSpace:
    if args.system:
        with open(args.system) as fh:
            return StateSpace.from_json(fh.read())
    return preset_system(args.preset)


def _noise(args):
    doc = {"kind": args.noise}
    if args.noise == "gaussian":
        doc.update(sigma_w=args.sigma_w, sigma_z=args.sigma_z)
    elif args.noise == "adversarial":
        doc.update(generator=args.generator, period=args.period)
    return noise_from_dict(doc)


def _add_system_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--preset", default="double-integrator",
                   help="named system (double-integrator, scalar-marginal, stable-random)")
    g.add_argument("--system", help="path to a state-space JSON file")
    p.add_argument("--noise", default="none", choices=("none", "gaussian", "adversarial"))
    p.add_argument("--sigma-w", type=float, default=1.0)
    p.add_argument("--sigma-z", type=float, default=1.0)
    p.add_argument("--generator", default="constant-sign",
                   choices=("constant-sign", "square-wave", "aligned"))
    p.add_argument("--period", type=int, default=1)


def cmd_simulate(args) -> int:
    system = _load_system(args)
    traj = simulate(system, args.N, _noise(args), args.seed)
    cols = (["t"] + [f"u{i}" for i in range(system.p)]
            + [f"x{i}" for i in range(system.n)] + [f"y{i}" for i in range(system.m)])
    rows = [[t + 1, *traj.u[t], *traj.x[t], *traj.y[t]] for t in range(args.N)]
    write_csv(args.out, cols, rows)
    print(f"wrote {args.N} steps to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        config = ExperimentConfig.from_json(fh.read())
    if args.out:
        config = ExperimentConfig(**{**config.__dict__, "out": args.out})
    rows = run_sweep(config)
    failures = [r for r in rows if r.error]
    print(f"{len(rows)} rows ({len(failures)} with errors)"
          + (f" -> {config.out}" if config.out else ""))
    return 0


def cmd_lowerbound_cli(args) -> int:
    rows = cmd_lowerbound(args.preset, _ints(args.N), _ints(args.seeds),
                          T=args.T, out=args.out)
    print(f"{len(rows)} rows" + (f" -> {args.out}" if args.out else ""))
    return 0


def cmd_analyze(args) -> int:
    with open(args.jordan) as fh:
        spec = JordanSpec.from_json(fh.read())
    print(f"blocks: {[(str(l), k) for l, k in spec.blocks]}")
    try:
        cert = phase_rank(spec, args.alpha, args.T, d_max=args.d_max)
        d = cert.d
        print(f"({args.alpha:g}, {args.T}) phase rank <= {d}; "
              f"witnesses {[str(w) for w in cert.witnesses]}")
    except PhaseRankNotFound as exc:
        d = args.d_max
        print(f"no phase-rank certificate found: {exc}")
    for q, tag in ((2, "q=2"), (math.inf, "q=inf")):
        print(f"K1(d={d}, T={args.T}, alpha={args.alpha:g}, {tag}) = "
              f"{k1(spec, d, args.T, args.alpha, q):.6g}")
    print(f"K2(N={args.N}) = {k2(spec, args.N):.6g}")
    f = minimal_polynomial(spec, args.T)
    print(f"minimal polynomial of A^T: degree {f.degree}, coeffs {list(f.coeffs)}, "
          f"l1 = {f.l1():.6g}")
    if args.system:
        with open(args.system) as fh:
            system = StateSpace.from_json(fh.read())
        mc = m_constants(system, np.eye(system.n), args.N)
        print(f"M0 = {mc.m0:.6g}, MB = {mc.mb:.6g}, MC = {mc.mc:.6g}, "
              f"MD = {mc.md:.6g}, Mbar = {mc.mbar:.6g} (S = I)")
    return 0


def cmd_selectl(args) -> int:
    system = _load_system(args)
    traj = simulate(system, args.N, _noise(args), args.seed)
    res = est.select_L(traj, args.T, args.l_max, args.mu, args.delta)
    for L in sorted(res.conf):
        star = "*" if L == res.selected else " "
        admissible = "admissible" if L in res.admissible else "inadmissible"
        print(f"{star} L={L}: conf={res.conf[L]:.6g} opt_hat={res.opt_hat[L]:.6g} ({admissible})")
    if res.empty_admissible:
        print("warning: admissible set empty; selected over all candidates")
    print(f"selected L = {res.selected}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sysid",
                                     description="System identification benchmark CLI")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a system and write the trajectory CSV")
    _add_system_args(p)
    p.add_argument("-N", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the experiment sweep from a JSON config")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lowerbound", help="OLS error vs Gramian growth, zero noise")
    p.add_argument("--preset", default="double-integrator")
    p.add_argument("-N", required=True, help="comma-separated N grid")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("-T", type=int, default=5)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_lowerbound_cli)

    p = sub.add_parser("analyze", help="phase rank / K1 / K2 / Mbar report for a JordanSpec")
    p.add_argument("--jordan", required=True, help="JordanSpec JSON: [{re, im, k}, ...]")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("-T", type=int, default=1)
    p.add_argument("--d-max", type=int, default=8)
    p.add_argument("-N", type=int, default=1024)
    p.add_argument("--system", help="optional state-space JSON for the M constants")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("selectl", help="data-driven selection of the filter length L")
    _add_system_args(p)
    p.add_argument("-N", type=int, required=True)
    p.add_argument("-T", type=int, default=5)
    p.add_argument("--l-max", type=int, default=4)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selectl)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    _sys.exit(main())
