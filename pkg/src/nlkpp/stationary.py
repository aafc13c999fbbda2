"""Positive steady states of ``A theta + theta (a - theta) = 0`` and their limit profiles."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import DomainError, NumericalError, RegimeError
from .grid import Field, Grid, as_values
from .kernel import Kernel
from .operator import NonlocalOperator
from .spectral import local_neumann_eigenpair, neumann_laplacian, principal_eigenpair

__all__ = [
    "StationarySolution",
    "solve_stationary",
    "march",
    "newton",
    "limit_profile",
    "LIMIT_KINDS",
]

log = logging.getLogger(__name__)

LIMIT_KINDS = ("a_plus", "v1", "v2", "abar")

# below this explicit step the marching switches to linearly implicit steps
_IMPLICIT_SWITCH = 1e-3


@dataclass(frozen=True)
class StationarySolution:
    theta: Field = dc_field(repr=False)
    exists: bool
    residual: float
    method_agreement: float
    lam: float = math.nan
    diagnostics: dict = dc_field(default_factory=dict, repr=False, compare=False)


def _residual(A, av, theta):
    return A @ theta + theta * (av - theta)


def march(op: NonlocalOperator, a, u0, tol: float = 1e-10, max_steps: int = 200_000,
          dt: float | None = None, check_monotone: bool = True) -> tuple:
    """Positivity-preserving pseudo-time marching to a steady state.

    The reaction is split as ``a = a_plus - a_minus`` so that the explicit step

        u_new = (u + dt (A u + a_plus u)) / (1 + dt (u + a_minus))

    keeps every iterate nonnegative.  When the explicit step would be tiny
    (large ``sigma**-m``) the linear part is taken implicitly instead:

        (diag(1 + dt (u + a_minus)) - dt A) u_new = u (1 + dt a_plus)

    Both updates have the exact steady state as their fixed point.
    Returns ``(u, info)``.
    """
    grid = op.grid
    A = op.matrix
    av = as_values(grid, a)
    ap, am = np.maximum(av, 0.0), np.maximum(-av, 0.0)
    u = np.array(as_values(grid, u0), dtype=float)
    if np.any(u < 0):
        raise DomainError("marching needs a nonnegative start")
    pmax = float(op.p_sigma.values.max())
    dt_explicit = 0.5 * min(1.0, op.sigma**op.m / pmax, 1.0 / (1.0 + am.max()))
    implicit = dt is None and dt_explicit < _IMPLICIT_SWITCH
    if dt is None:
        dt = 0.5 if implicit else dt_explicit
    direction = 0.0
    for step in range(1, max_steps + 1):
        if implicit:
            M = -dt * np.array(A)
            M[np.diag_indices_from(M)] += 1.0 + dt * (u + am)
            new = sla.solve(M, u * (1.0 + dt * ap), assume_a="gen", check_finite=False)
        else:
            new = (u + dt * (A @ u + ap * u)) / (1.0 + dt * (u + am))
        delta = new - u
        if check_monotone:
            # iterates must move one way only (comparison principle)
            s = float(np.sum(delta))
            if direction == 0.0 and abs(s) > 0:
                direction = math.copysign(1.0, s)
            bad = direction * delta < -1e-9 * (1.0 + np.abs(u))
            if direction != 0.0 and np.any(bad):
                raise NumericalError(
                    "marching iterates are not monotone",
                    {"step": step, "max_violation": float(np.max(-direction * delta))},
                )
        u = new
        if not np.all(np.isfinite(u)):
            raise NumericalError("marching produced non-finite values", {"step": step})
        if np.max(np.abs(delta)) / dt < tol:
            break
    else:
        raise NumericalError("marching did not reach the stopping tolerance",
                             {"steps": max_steps, "last_change": float(np.max(np.abs(delta)) / dt)})
    return u, {"steps": step, "dt": dt, "implicit": implicit}


def newton(A, av, theta0, tol: float = 1e-12, max_iter: int = 50) -> tuple:
    """Newton iteration on ``F(theta) = A theta + theta (a - theta)``."""
    theta = np.array(theta0, dtype=float)
    scale = 1.0 + float(np.abs(np.diag(A)).max()) * max(1.0, float(np.abs(theta).max()))
    F = _residual(A, av, theta)
    history = [float(np.abs(F).max())]
    for it in range(1, max_iter + 1):
        if history[-1] < tol or history[-1] < 1e-15 * scale:
            return theta, {"iterations": it - 1, "history": history}
        Jm = np.array(A)
        Jm[np.diag_indices_from(Jm)] += av - 2.0 * theta
        step = sla.solve(Jm, -F, check_finite=False)
        theta = theta + step
        F = _residual(A, av, theta)
        history.append(float(np.abs(F).max()))
        if not np.isfinite(history[-1]) or (it > 5 and history[-1] > history[-2] and history[-1] > 1e3 * tol):
            raise NumericalError("Newton iteration diverged", {"iterations": it, "history": history})
        if len(history) > 3 and history[-1] >= history[-2] and history[-1] < 1e-9 * scale:
            # stagnated at rounding level
            return theta, {"iterations": it, "history": history}
    if history[-1] < 1e-9 * scale:
        return theta, {"iterations": max_iter, "history": history}
    raise NumericalError("Newton iteration did not converge", {"iterations": max_iter, "history": history})


def solve_stationary(op: NonlocalOperator, a, start: str | np.ndarray = "super",
                     eigen=None) -> StationarySolution:
    """Solve the stationary KPP problem on ``op``'s grid.

    Existence is decided by the sign of the principal eigenvalue; when it is
    negative the solution is obtained by marching from the constant
    super-solution ``max(sup a, 1)`` (or from ``start`` when an array is
    given) and then polished by Newton's method.
    """
    grid = op.grid
    av = as_values(grid, a)
    if eigen is None:
        eigen = principal_eigenpair(op, av)
    lam = eigen.lam
    diagnostics = {"lambda": lam}
    if lam >= 0:
        zero = np.zeros(grid.size)
        res = float(np.abs(_residual(op.matrix, av, zero)).max())
        return StationarySolution(theta=Field(grid, zero), exists=False, residual=res,
                                  method_agreement=0.0, lam=lam, diagnostics=diagnostics)

    if isinstance(start, str):
        if start != "super":
            raise DomainError(f"unknown start {start!r}")
        u0 = np.full(grid.size, max(float(av.max()), 1.0))
    else:
        u0 = as_values(grid, start)
    marched, info = march(op, av, u0)
    diagnostics["march"] = info
    try:
        theta, ninfo = newton(op.matrix, av, marched)
        diagnostics["newton"] = ninfo
        if np.any(theta < -1e-12):
            raise NumericalError("Newton left the positive cone", {"min": float(theta.min())})
    except NumericalError as exc:
        log.warning("Newton polish failed (%s); keeping the marching answer", exc)
        diagnostics["newton_failed"] = True
        theta = marched
    theta = np.maximum(theta, 0.0)
    residual = float(np.abs(_residual(op.matrix, av, theta)).max())
    agreement = float(np.abs(theta - marched).max())
    return StationarySolution(theta=Field(grid, theta), exists=True, residual=residual,
                              method_agreement=agreement, lam=lam, diagnostics=diagnostics)


def _local_logistic(grid: Grid, D: float, av: np.ndarray, tol: float = 1e-10, max_iter: int = 100):
    """Newton solve of ``D Lap_h V + V (a - V) = 0`` from ``V = sup a``."""
    L = D * neumann_laplacian(grid)
    V = np.full(grid.size, float(av.max()))
    # rounding floor of the stencil: |L| ~ 4 D / h^2
    floor = 1e-14 * 4.0 * D / min(grid.h) ** 2 * max(1.0, float(np.abs(av).max()))
    history = []
    for it in range(max_iter):
        F = L @ V + V * (av - V)
        history.append(float(np.abs(F).max()))
        if history[-1] < max(tol, floor):
            break
        Jm = (L + sp.diags(av - 2.0 * V)).tocsc()
        V = V + spla.spsolve(Jm, -F)
    else:
        raise NumericalError("local logistic Newton did not converge", {"history": history[-5:]})
    if np.any(V <= 0):
        raise NumericalError("local logistic solution is not positive", {"min": float(V.min())})
    return V


def limit_profile(kind: str, grid: Grid, kernel: Kernel, a) -> Field:
    """Limit objects of the steady state as the dispersal spread degenerates.

    ``a_plus`` and ``v1`` are the positive part of ``a``; ``v2`` solves the
    local logistic problem with diffusivity ``d2 / (2N)``; ``abar`` is the
    constant spatial mean of ``a``.
    """
    av = as_values(grid, a)
    if kind in ("a_plus", "v1"):
        return Field(grid, np.maximum(av, 0.0))
    if kind == "abar":
        mean = grid.weight * av.sum() / grid.volume
        if not mean > 0:
            raise RegimeError(f"the homogenised limit needs a positive mean of a, got {mean:.6g}")
        return Field(grid, np.full(grid.size, mean))
    if kind == "v2":
        D = kernel.diffusivity
        lam = local_neumann_eigenpair(grid, D, av).lam
        if not lam < 0:
            raise RegimeError(
                f"the local logistic limit needs a negative local principal eigenvalue, got {lam:.6g}"
            )
        return Field(grid, _local_logistic(grid, D, av))
    raise DomainError(f"unknown limit kind {kind!r}; choose from {LIMIT_KINDS}")
