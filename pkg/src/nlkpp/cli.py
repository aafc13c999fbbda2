"""Command line entry point ``nlkpp``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .evolution import SCHEMES, evolve, logistic_reference
from .exceptions import ConfigurationError, NlkppError
from .experiments import parse_config, records_to_csv, run_sweep
from .expr import Expression
from .grid import build_grid, norm, sample
from .io import fmt, read_field, read_rate_points, write_field, write_triplets
from .kernel import make_kernel
from .operator import BOUNDARIES, assemble
from .probes import averaged_logistic_probe, dirichlet_small_sigma_probe
from .ratefit import fit_rate, large_sigma_verdict, small_sigma_verdict
from .spectral import principal_eigenpair, sandwich_bounds
from .stationary import LIMIT_KINDS, limit_profile, solve_stationary

EXIT_OK, EXIT_CONFIG, EXIT_FLAGGED = 0, 1, 2


def _floats(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _source(text, grid):
    if Path(text).is_file():
        return read_field(text, grid)
    return sample(grid, Expression(text))


def _problem_args(p):
    p.add_argument("--kernel", default="uniform")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--n", default="200", help="nodes per axis, e.g. 400 or 40,40")
    p.add_argument("--domain", default="1", help="box side lengths, e.g. 1 or 1,2")
    p.add_argument("--coef", default="2 + sin(2*pi*x)", help="expression or field CSV")
    p.add_argument("--boundary", choices=BOUNDARIES, default="neumann")
    p.add_argument("--dump-matrix", metavar="PATH", help="write nonzero operator entries as i,j,value")


def _setup(args):
    domain = _floats(args.domain)
    n = [int(float(k)) for k in _floats(args.n)]
    grid = build_grid(domain, n if len(n) > 1 else n[0])
    kernel = make_kernel(args.kernel, grid.dim)
    op = assemble(grid, kernel, args.sigma, args.m, args.boundary)
    if args.dump_matrix:
        write_triplets(op, args.dump_matrix)
    a = _source(args.coef, grid)
    return grid, kernel, op, a


def _row(header, values, out=None):
    out = out or sys.stdout
    out.write(",".join(header) + "\n")
    out.write(",".join(v if isinstance(v, str) else fmt(v) for v in values) + "\n")


def cmd_eigen(args):
    grid, _, op, a = _setup(args)
    pair = principal_eigenpair(op, a)
    lower, upper = sandwich_bounds(grid, a)
    if args.dump_phi:
        write_field(pair.phi, args.dump_phi)
    _row(["lambda", "residual", "lower", "upper", "eigenfunction_criterion"],
         [pair.lam, pair.residual, lower, upper, str(int(pair.diagnostics["eigenfunction_criterion"]))])
    return EXIT_OK


def cmd_stationary(args):
    grid, kernel, op, a = _setup(args)
    sol = solve_stationary(op, a)
    if args.out:
        write_field(sol.theta, args.out)
    header = ["exists", "residual", "method_agreement"]
    values = [str(int(sol.exists)), sol.residual, sol.method_agreement]
    norms = {"a_plus": "Linf", "v1": "L1", "v2": "L2", "abar": "L2"}
    for kind in LIMIT_KINDS:
        header.append(f"gap_{kind}_{norms[kind].lower()}")
        try:
            target = limit_profile(kind, grid, kernel, a)
        except NlkppError:
            values.append("")
            continue
        values.append(norm(sol.theta - target, norms[kind]))
        if args.limit == kind:
            write_field(target, args.limit_out or f"limit_{kind}.csv")
    _row(header, values)
    return EXIT_OK


def cmd_evolve(args):
    grid, _, op, a = _setup(args)
    u0 = _source(args.u0, grid)
    traj = evolve(op, a, u0, args.T, out_times=args.out_times, scheme=args.scheme)
    out = sys.stdout
    out.write("t,linf_gap,mass\n")
    for t, u, mass in zip(traj.times, traj.values, traj.masses()):
        gap = ""
        if args.ref == "logistic":
            gap = fmt(np.max(np.abs(u - logistic_reference(a.values, u0.values, float(t)))))
        out.write(f"{fmt(t)},{gap},{fmt(mass)}\n")
    if args.dump_final:
        write_field(traj.final, args.dump_final)
    return EXIT_OK


def cmd_sweep(args):
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    records = run_sweep(cfg)
    text = records_to_csv(records, cfg.task)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(r.ok for r in records) else EXIT_FLAGGED


def cmd_rate_fit(args):
    points = read_rate_points(args.input, m=args.m)
    fit = fit_rate(points)
    verdict = "low-confidence" if fit.low_confidence else "ok"
    if args.regime and args.m is not None:
        if args.regime == "small":
            passed = small_sigma_verdict(fit, args.m)
        else:
            passed = large_sigma_verdict(fit, args.m, args.dim)
        verdict = "pass" if passed else "fail"
    _row(["slope", "intercept", "r2", "verdict"], [fit.slope, fit.intercept, fit.r2, verdict])
    return EXIT_OK if verdict in ("ok", "pass") else EXIT_FLAGGED


def cmd_probe(args):
    coef = Expression(args.coef)
    sigmas = _floats(args.sigmas)
    if args.kind == "dirichlet-blowup":
        rows = dirichlet_small_sigma_probe(coef, sigmas, m=args.m, kernel=args.kernel)
    else:
        rows = averaged_logistic_probe(coef, Expression(args.u0), sigmas, m=args.m, T=args.T,
                                       kernel=args.kernel)
    keys = list(rows[0])
    sys.stdout.write(",".join(keys) + "\n")
    for r in rows:
        sys.stdout.write(",".join(fmt(r[k]) for k in keys) + "\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="nlkpp", description="Nonlocal KPP numerical laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="principal eigenvalue of M + a")
    _problem_args(p)
    p.add_argument("--dump-phi", metavar="PATH")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("stationary", help="positive steady state and limit profiles")
    _problem_args(p)
    p.add_argument("--limit", choices=LIMIT_KINDS)
    p.add_argument("--limit-out", metavar="PATH")
    p.add_argument("--out", metavar="PATH", help="theta field CSV")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("evolve", help="time-dependent problem")
    _problem_args(p)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--u0", default="1")
    p.add_argument("--out-times", type=int, default=100)
    p.add_argument("--ref", choices=("logistic", "none"), default="logistic")
    p.add_argument("--scheme", choices=SCHEMES, default="strang")
    p.add_argument("--dump-final", metavar="PATH")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("sweep", help="run a config-driven (sigma, m) sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rate-fit", help="fit error ~ C sigma^q from a CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--m", type=float, help="keep only rows with this m; also used by the verdict")
    p.add_argument("--regime", choices=("small", "large"))
    p.add_argument("--dim", type=int, default=1)
    p.set_defaults(func=cmd_rate_fit)

    p = sub.add_parser("probe", help="numerical probes of open conjectures")
    p.add_argument("kind", choices=("dirichlet-blowup", "averaged-logistic"))
    p.add_argument("--coef", default="2 + sin(2*pi*x)")
    p.add_argument("--u0", default="1 + 0.5*cos(pi*x)")
    p.add_argument("--sigmas", default="0.1,0.05,0.025")
    p.add_argument("--m", type=float, default=3.0)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--kernel", default="uniform")
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"nlkpp: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NlkppError as exc:
        print(f"nlkpp: {exc}", file=sys.stderr)
        return EXIT_FLAGGED


if __name__ == "__main__":
    sys.exit(main())
