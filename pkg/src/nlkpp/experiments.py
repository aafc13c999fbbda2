"""Configuration-driven (sigma, m) sweeps producing CSV records.

A config is a list of ``key = value`` lines; ``#`` starts a comment and
lists are comma separated::

    task     = eigen
    kernel   = uniform
    domain   = 1
    n        = auto        # per-cell grid with n = ceil(4 * oversample * L / sigma)
    coef     = 2 + sin(2*pi*x)
    sigma    = 0.2, 0.1, 0.05
    m        = 0, 2
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .evolution import SCHEMES, evolve, logistic_trajectory, sup_error
from .exceptions import ConfigurationError, NlkppError, RegimeError
from .expr import Expression
from .grid import Field, Grid, build_grid, norm, sample
from .io import fmt, read_field
from .kernel import make_kernel
from .operator import BOUNDARIES, assemble
from .spectral import limit_targets, principal_eigenpair
from .stationary import LIMIT_KINDS, limit_profile, solve_stationary

__all__ = ["SweepConfig", "SweepRecord", "parse_config", "run_sweep", "records_to_csv",
           "grid_for_sigma", "TASKS"]

log = logging.getLogger(__name__)

TASKS = ("eigen", "stationary", "evolve-rate")

_KEYS = {
    "task", "kernel", "domain", "n", "oversample", "n_min", "coef", "sigma", "m", "boundary",
    "t", "u0", "out_times", "reference", "limit", "scheme", "dt_refine",
}


@dataclass(frozen=True)
class SweepConfig:
    task: str
    kernel: str
    domain: tuple
    sigmas: tuple
    ms: tuple
    coef: object
    n: tuple | None = None
    oversample: float = 4.0
    n_min: int = 100
    boundary: str = "neumann"
    T: float = 1.0
    u0: object = None
    out_times: int = 100
    reference: str = "logistic"
    limits: tuple = LIMIT_KINDS
    scheme: str = "strang"
    dt_refine: bool = True

    @property
    def dim(self) -> int:
        return len(self.domain)


@dataclass(frozen=True)
class SweepRecord:
    sigma: float
    m: float
    n: tuple
    values: dict
    flags: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.flags


def grid_for_sigma(domain, sigma: float, oversample: float = 4.0, n_min: int = 100) -> Grid:
    """Grid keeping ``4 * oversample`` cells across the kernel radius."""
    n = tuple(max(int(n_min), math.ceil(4.0 * oversample * L / sigma - 1e-9)) for L in domain)
    return build_grid(domain, n)


def _floats(text, key, lineno):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigurationError(f"line {lineno}: {key} must be a comma-separated list of numbers") from None


def _coef_source(text, lineno):
    text = text.strip()
    if text.lower().endswith(".csv"):
        return Path(text)
    try:
        return Expression(text)
    except ConfigurationError as exc:
        raise ConfigurationError(f"line {lineno}: {exc}") from None


def parse_config(text: str) -> SweepConfig:
    """Parse and validate a sweep config; errors name the offending line."""
    raw, where = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in _KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        raw[key], where[key] = value, lineno

    def line_of(key):
        return where.get(key, 0)

    for required in ("sigma", "m", "coef"):
        if required not in raw:
            raise ConfigurationError(f"missing required key {required!r}")
    task = raw.get("task", "eigen").lower()
    if task not in TASKS:
        raise ConfigurationError(f"line {line_of('task')}: task must be one of {TASKS}")
    kernel = raw.get("kernel", "uniform")
    domain = _floats(raw.get("domain", "1"), "domain", line_of("domain"))
    if not 1 <= len(domain) <= 2 or any(L <= 0 for L in domain):
        raise ConfigurationError(f"line {line_of('domain')}: domain needs 1 or 2 positive lengths")
    try:
        make_kernel(kernel, len(domain))
    except ConfigurationError as exc:
        raise ConfigurationError(f"line {line_of('kernel')}: {exc}") from None
    sigmas = _floats(raw["sigma"], "sigma", line_of("sigma"))
    if not sigmas or any(not s > 0 for s in sigmas):
        raise ConfigurationError(f"line {line_of('sigma')}: sigma values must be positive")
    if len(set(sigmas)) != len(sigmas):
        raise ConfigurationError(f"line {line_of('sigma')}: duplicate sigma values")
    ms = _floats(raw["m"], "m", line_of("m"))
    if not ms or any(m < 0 for m in ms):
        raise ConfigurationError(f"line {line_of('m')}: m values must be nonnegative")

    n = None
    if raw.get("n", "auto").lower() != "auto":
        counts = _floats(raw["n"], "n", line_of("n"))
        if any(c != int(c) or c < 2 for c in counts):
            raise ConfigurationError(f"line {line_of('n')}: n must be integers >= 2 or 'auto'")
        n = tuple(int(c) for c in counts)
        if len(n) == 1:
            n = n * len(domain)
        if len(n) != len(domain):
            raise ConfigurationError(f"line {line_of('n')}: n needs one count per axis")
        h = max(L / k for L, k in zip(domain, n))
        for s in sigmas:
            if s / h < 4 * (1 - 1e-12):
                need = max(math.ceil(4 * L / s) for L in domain)
                raise ConfigurationError(
                    f"line {line_of('sigma')}: sigma={s:g} violates sigma/h >= 4 on the "
                    f"fixed grid (need n >= {need})"
                )
    oversample = float(raw.get("oversample", 4.0))
    if oversample < 1:
        raise ConfigurationError(f"line {line_of('oversample')}: oversample must be >= 1")
    n_min = int(float(raw.get("n_min", 100)))
    if n_min < 2:
        raise ConfigurationError(f"line {line_of('n_min')}: n_min must be >= 2")

    coef = _coef_source(raw["coef"], line_of("coef"))
    if isinstance(coef, Path) and n is None:
        raise ConfigurationError(f"line {line_of('coef')}: a coefficient file needs a fixed n")
    boundary = raw.get("boundary", "neumann").lower()
    if boundary not in BOUNDARIES:
        raise ConfigurationError(f"line {line_of('boundary')}: boundary must be one of {BOUNDARIES}")
    T = float(raw.get("t", 1.0))
    if not T > 0:
        raise ConfigurationError(f"line {line_of('t')}: T must be positive")
    u0 = _coef_source(raw["u0"], line_of("u0")) if "u0" in raw else None
    if task == "evolve-rate" and u0 is None:
        raise ConfigurationError("evolve-rate task needs u0")
    reference = raw.get("reference", "logistic").lower()
    if reference not in ("logistic", "none"):
        raise ConfigurationError(f"line {line_of('reference')}: reference must be logistic or none")
    limits = tuple(s.strip().lower() for s in raw.get("limit", ",".join(LIMIT_KINDS)).split(",") if s.strip())
    bad = [k for k in limits if k not in LIMIT_KINDS]
    if bad:
        raise ConfigurationError(f"line {line_of('limit')}: unknown limit kinds {bad}")
    scheme = raw.get("scheme", "strang").lower()
    if scheme not in SCHEMES:
        raise ConfigurationError(f"line {line_of('scheme')}: scheme must be one of {SCHEMES}")
    dt_refine = raw.get("dt_refine", "true").lower() in ("1", "true", "yes", "on")
    out_times = int(float(raw.get("out_times", 100)))
    if out_times < 1:
        raise ConfigurationError(f"line {line_of('out_times')}: out_times must be >= 1")
    return SweepConfig(
        task=task, kernel=kernel, domain=domain, sigmas=sigmas, ms=ms, coef=coef, n=n,
        oversample=oversample, n_min=n_min, boundary=boundary, T=T, u0=u0, out_times=out_times,
        reference=reference, limits=limits, scheme=scheme, dt_refine=dt_refine,
    )


def _grid(cfg: SweepConfig, sigma: float) -> Grid:
    if cfg.n is not None:
        return build_grid(cfg.domain, cfg.n)
    return grid_for_sigma(cfg.domain, sigma, cfg.oversample, cfg.n_min)


def _field(source, grid: Grid) -> Field:
    if isinstance(source, Path):
        return read_field(source, grid)
    return sample(grid, source)


def _eigen_cell(cfg, grid, op, a):
    flags = []
    dense = principal_eigenpair(op, a, "dense")
    inv = principal_eigenpair(op, a, "inverse")
    targets = limit_targets(a, grid)
    agreement = abs(dense.lam - inv.lam)
    if agreement > 1e-8:
        flags.append("solver_disagreement")
    sandwich = targets["neg_sup"] - 1e-9 <= dense.lam <= targets["neg_mean"] + 1e-9
    if cfg.boundary == "neumann" and not sandwich:
        flags.append("sandwich_violation")
    if not dense.diagnostics["sign_ok"]:
        flags.append("eigenfunction_sign")
    if dense.degenerate:
        flags.append("degenerate")
    flat = norm(dense.phi - grid.volume**-0.5, "L2")
    values = {
        "lambda": dense.lam,
        "lambda_inverse": inv.lam,
        "solver_gap": agreement,
        "residual": dense.residual,
        "neg_sup": targets["neg_sup"],
        "neg_mean": targets["neg_mean"],
        "gap_to_neg_sup": abs(dense.lam - targets["neg_sup"]),
        "gap_to_neg_mean": abs(dense.lam - targets["neg_mean"]),
        "phi_flatness_l2": flat,
        "spectral_gap": dense.gap,
        "eigenfunction_criterion": int(dense.diagnostics["eigenfunction_criterion"]),
    }
    return values, flags


def _stationary_cell(cfg, grid, op, a, kernel):
    flags = []
    sol = solve_stationary(op, a)
    av = a.values
    theta = sol.theta
    if sol.diagnostics.get("newton_failed"):
        flags.append("newton_fallback")
    scale = (1.0 + np.abs(av).max()) ** 2
    if sol.residual > 1e-8 * scale:
        flags.append("residual")
    values = {
        "exists": int(sol.exists),
        "lambda": sol.lam,
        "residual": sol.residual,
        "method_agreement": sol.method_agreement,
        "theta_max": float(theta.values.max()),
    }
    norms = {"a_plus": "Linf", "v1": "L1", "v2": "L2", "abar": "L2"}
    for kind in cfg.limits:
        try:
            target = limit_profile(kind, grid, kernel, a)
            values[f"gap_{kind}_{norms[kind].lower()}"] = norm(theta - target, norms[kind])
        except RegimeError:
            values[f"gap_{kind}_{norms[kind].lower()}"] = math.nan
            flags.append(f"regime_{kind}")
    return values, flags


def _evolve_cell(cfg, grid, op, a):
    flags = []
    u0 = _field(cfg.u0, grid)
    traj = evolve(op, a, u0, cfg.T, out_times=cfg.out_times, scheme=cfg.scheme)
    values = {
        "dt": traj.dt_policy["dt"],
        "final_mass": float(traj.masses()[-1]),
        "final_max": float(traj.values[-1].max()),
    }
    if cfg.reference == "logistic":
        ref = logistic_trajectory(traj, a, u0, traj.times)
        err = sup_error(traj, ref)
        values["sup_error"] = err
        if cfg.dt_refine:
            half = evolve(op, a, u0, cfg.T, out_times=cfg.out_times, scheme=cfg.scheme,
                          max_dt=0.5 * traj.dt_policy["dt"])
            err_half = sup_error(half, logistic_trajectory(half, a, u0, half.times))
            change = abs(err - err_half) / err if err > 0 else 0.0
            values["sup_error_half_dt"] = err_half
            values["dt_change"] = change
            if change > 0.05:
                flags.append("dt_sensitive")
    return values, flags


def run_cell(cfg: SweepConfig, sigma: float, m: float) -> SweepRecord:
    """Run one (sigma, m) cell; failures become flags instead of exceptions."""
    grid = None
    try:
        grid = _grid(cfg, sigma)
        kernel = make_kernel(cfg.kernel, cfg.dim)
        op = assemble(grid, kernel, sigma, m, cfg.boundary)
        a = _field(cfg.coef, grid)
        if cfg.task == "eigen":
            values, flags = _eigen_cell(cfg, grid, op, a)
        elif cfg.task == "stationary":
            values, flags = _stationary_cell(cfg, grid, op, a, kernel)
        else:
            values, flags = _evolve_cell(cfg, grid, op, a)
    except NlkppError as exc:
        log.warning("cell sigma=%g m=%g failed: %s", sigma, m, exc)
        values, flags = {}, [f"error:{type(exc).__name__}"]
    n = grid.n if grid is not None else ()
    return SweepRecord(sigma=float(sigma), m=float(m), n=n, values=values, flags=tuple(flags))


def _workers() -> int:
    env = os.environ.get("NLKPP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer NLKPP_THREADS=%r", env)
    return max(1, min(4, os.cpu_count() or 1))


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> list:
    """One record per (m, sigma) cell, m-major in config order."""
    cells = [(s, m) for m in cfg.ms for s in cfg.sigmas]
    workers = workers or _workers()
    if workers == 1:
        return [run_cell(cfg, s, m) for s, m in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: run_cell(cfg, *c), cells))


_COLUMNS = {
    "eigen": ["lambda", "lambda_inverse", "solver_gap", "residual", "neg_sup", "neg_mean",
              "gap_to_neg_sup", "gap_to_neg_mean", "phi_flatness_l2", "spectral_gap",
              "eigenfunction_criterion"],
    "stationary": ["exists", "lambda", "residual", "method_agreement", "theta_max",
                   "gap_a_plus_linf", "gap_v1_l1", "gap_v2_l2", "gap_abar_l2"],
    "evolve-rate": ["sup_error", "sup_error_half_dt", "dt_change", "dt", "final_mass", "final_max"],
}


def _cell_text(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def records_to_csv(records, task: str) -> str:
    """Render records with a fixed column order (gnuplot friendly, comma separated)."""
    cols = ["sigma", "m", "n"] + _COLUMNS[task] + ["flags"]
    lines = [",".join(cols)]
    for r in records:
        row = [fmt(r.sigma), fmt(r.m), "x".join(str(k) for k in r.n)]
        row += [_cell_text(r.values.get(c)) for c in _COLUMNS[task]]
        row.append(";".join(r.flags))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
