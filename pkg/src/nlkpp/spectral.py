"""Principal eigenvalue of ``M + a`` and the local Neumann reference problem.

The generalised principal eigenvalue is computed as its variational value,
the smallest eigenvalue of the symmetric matrix ``B = -(A + diag(a))``.  Two
independent routes are provided:

``dense``
    LAPACK symmetric eigensolve restricted to the two lowest eigenpairs.
``inverse``
    Bisection on the inertia of ``B - mu I`` (Cholesky succeeds iff
    ``mu < lambda_0``) started from the shift ``-max(a) - 1``, followed by
    shifted inverse iteration with the final bisection shift.  Bisection makes
    the route insensitive to the tiny spectral gaps that appear when the
    dispersal spread is large.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .exceptions import DomainError, NumericalError
from .grid import Field, Grid, as_values, build_grid, sample
from .operator import NonlocalOperator

__all__ = [
    "EigenPair",
    "principal_eigenpair",
    "rayleigh_quotient",
    "local_neumann_eigenpair",
    "local_reference_eigenvalue",
    "neumann_laplacian",
    "limit_targets",
    "sandwich_bounds",
]

log = logging.getLogger(__name__)

GAP_TOL = 1e-10


@dataclass(frozen=True)
class EigenPair:
    """Principal eigenvalue, its L2-normalised nonnegative eigenfunction and diagnostics."""

    lam: float
    phi: Field = dc_field(repr=False)
    residual: float
    gap: float = math.inf
    method: str = "dense"
    diagnostics: dict = dc_field(default_factory=dict, repr=False, compare=False)

    @property
    def degenerate(self) -> bool:
        return self.gap < GAP_TOL


def _symmetric_problem(op: NonlocalOperator, a) -> tuple:
    av = as_values(op.grid, a)
    B = -np.array(op.matrix)
    B[np.diag_indices_from(B)] -= av
    return B, av


def _orient(grid: Grid, vec: np.ndarray) -> tuple:
    w = grid.weight
    v = vec / math.sqrt(w * np.dot(vec, vec))
    if v.sum() < 0:
        v = -v
    scale = np.max(np.abs(v))
    neg = v.min()
    # rounding-level negatives in exponentially small tails are zeroed
    sign_ok = neg >= -1e-10 * scale
    if sign_ok and neg < 0:
        v = np.where(v < 0, 0.0, v)
        v = v / math.sqrt(w * np.dot(v, v))
    return v, bool(sign_ok)


def _residual(grid, B, lam, v) -> float:
    r = B @ v - lam * v
    return math.sqrt(grid.weight * np.dot(r, r))


def sandwich_bounds(grid: Grid, a) -> tuple:
    """``(-max a, -mean_w a)``: the Neumann principal eigenvalue lies in between."""
    av = as_values(grid, a)
    return float(-av.max()), float(-grid.weight * av.sum() / grid.volume)


def _dense(B):
    k = min(1, B.shape[0] - 1)
    vals, vecs = sla.eigh(B, subset_by_index=[0, k], check_finite=True)
    gap = float(vals[1] - vals[0]) if k == 1 else math.inf
    return float(vals[0]), vecs, gap


def _cholesky_below(B, mu):
    """Return the Cholesky factor of ``B - mu I`` or None if it is not positive definite."""
    M = B.copy()
    M[np.diag_indices_from(M)] -= mu
    try:
        return sla.cho_factor(M, lower=False, check_finite=False)
    except np.linalg.LinAlgError:
        return None


def _inverse(B, av, rtol=1e-14, max_iter=200):
    n = B.shape[0]
    lo = -float(av.max()) - 1.0
    fac = _cholesky_below(B, lo)
    expand = 0
    while fac is None:
        expand += 1
        if expand > 60:
            raise NumericalError("could not find a shift below the spectrum",
                                 {"last_shift": lo})
        lo = lo - 2.0**expand
        fac = _cholesky_below(B, lo)
    ones = np.ones(n)
    hi = float(ones @ B @ ones) / n
    hi = hi + 1e-12 * (1.0 + abs(hi))
    bisections = 0
    while hi - lo > rtol * (1.0 + abs(lo) + abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        trial = _cholesky_below(B, mid)
        if trial is None:
            hi = mid
        else:
            lo, fac = mid, trial
        bisections += 1
        if bisections > 400:
            break

    x = ones / math.sqrt(n)
    lam = lo
    history = []
    for it in range(1, max_iter + 1):
        y = sla.cho_solve(fac, x, check_finite=False)
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0:
            raise NumericalError("inverse iteration broke down",
                                 {"iteration": it, "shift": lo, "bisections": bisections})
        y = y / ny
        if y.sum() < 0:
            y = -y
        Bx = B @ y
        lam = float(y @ Bx)
        res = float(np.linalg.norm(Bx - lam * y))
        history.append(res)
        step = float(np.linalg.norm(y - x))
        x = y
        if res <= 1e-13 * (1.0 + abs(lam) + np.abs(np.diag(B)).max()) or step < 1e-15:
            break
    else:
        raise NumericalError("inverse iteration did not converge",
                             {"iterations": max_iter, "shift": lo, "residual_history": history[-5:]})
    return lam, x, {"bisections": bisections, "iterations": it, "shift": lo}


def principal_eigenpair(op: NonlocalOperator, a, method: str = "dense") -> EigenPair:
    """Smallest eigenvalue of ``-(A + diag(a))`` with its eigenfunction.

    Parameters
    ----------
    op : NonlocalOperator
    a : Field or array-like
        Growth-rate coefficient sampled on ``op.grid``.
    method : {"dense", "inverse"}
        Which of the two independent solvers to use.
    """
    grid = op.grid
    B, av = _symmetric_problem(op, a)
    diagnostics = {}
    if method == "dense":
        lam, vecs, gap = _dense(B)
        vec = vecs[:, 0]
        if gap < GAP_TOL:
            # degenerate bottom: keep the candidate with the largest signed L1 mass
            cand = [vecs[:, 0], vecs[:, 1]]
            vec = max(cand, key=lambda v: abs(v.sum()))
    elif method == "inverse":
        lam, vec, diagnostics = _inverse(B, av)
        gap = math.nan
    else:
        raise DomainError(f"unknown eigensolver {method!r}")

    phi, sign_ok = _orient(grid, vec)
    lam = float(lam)
    residual = _residual(grid, B, lam, phi)
    pmax = float(op.p_sigma.values.max())
    criterion = float(np.max(av - op.rate * op.p_sigma.values))
    diagnostics.update(
        sign_ok=sign_ok,
        degenerate=bool(gap < GAP_TOL),
        # discrete reading of the eigenfunction-existence criterion
        eigenfunction_criterion=bool(lam < -criterion),
        large_sigma_bound=float(-av.max() + op.rate * pmax),
    )
    return EigenPair(lam=lam, phi=Field(grid, phi), residual=residual, gap=gap,
                     method=method, diagnostics=diagnostics)


def rayleigh_quotient(op: NonlocalOperator, a, phi) -> float:
    """Variational functional: nonlocal energy minus ``int a phi^2``, over ``int phi^2``."""
    grid = op.grid
    v = as_values(grid, phi)
    av = as_values(grid, a)
    w = grid.weight
    denom = w * np.dot(v, v)
    if denom == 0:
        raise DomainError("Rayleigh quotient of the zero field")
    return float((op.quadratic_form(v) - w * np.dot(av, v * v)) / denom)


def neumann_laplacian(grid: Grid) -> sp.csr_matrix:
    """Second-difference Laplacian with ghost-node reflection on every face."""
    mats = []
    for k, h in zip(grid.n, grid.h):
        main = np.full(k, -2.0)
        main[0] = main[-1] = -1.0
        off = np.ones(k - 1)
        mats.append(sp.diags([off, main, off], [-1, 0, 1]) / (h * h))
    if grid.dim == 1:
        return sp.csr_matrix(mats[0])
    I0 = sp.identity(grid.n[0])
    I1 = sp.identity(grid.n[1])
    return sp.csr_matrix(sp.kron(mats[0], I1) + sp.kron(I0, mats[1]))


def local_neumann_eigenpair(grid: Grid, D: float, a, index: int = 0) -> EigenPair:
    """Eigenpair ``index`` (0 = principal) of ``-(D Lap_h + diag(a))``."""
    if not D > 0:
        raise DomainError(f"diffusivity must be positive, got {D}")
    av = as_values(grid, a)
    if grid.dim == 1:
        h = grid.h[0]
        d = np.full(grid.size, 2.0 * D / h**2)
        d[0] = d[-1] = D / h**2
        d = d - av
        e = np.full(grid.size - 1, -D / h**2)
        hi = min(index + 1, grid.size - 1)
        vals, vecs = sla.eigh_tridiagonal(d, e, select="i", select_range=(index, hi))
        L = -D * neumann_laplacian(grid) - sp.diags(av)
    else:
        L = -D * neumann_laplacian(grid) - sp.diags(av)
        hi = min(index + 1, grid.size - 1)
        vals, vecs = sla.eigh(L.toarray(), subset_by_index=[index, hi])
    lam = float(vals[0])
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else math.inf
    vec = vecs[:, 0]
    if index == 0:
        phi, sign_ok = _orient(grid, vec)
    else:
        phi = vec / math.sqrt(grid.weight * vec @ vec)
        sign_ok = True
    r = L @ phi - lam * phi
    residual = math.sqrt(grid.weight * r @ r)
    return EigenPair(lam=lam, phi=Field(grid, phi), residual=residual, gap=gap,
                     method="local", diagnostics={"sign_ok": sign_ok, "index": index})


def local_reference_eigenvalue(extent, n: int, D: float, coef) -> dict:
    """Richardson-extrapolated principal eigenvalue of ``D Lap + a`` from n and 2n grids.

    ``coef`` is a coordinate function (as for :func:`sample`).
    """
    coarse_grid = build_grid(extent, n)
    fine_grid = build_grid(extent, 2 * n)
    coarse = local_neumann_eigenpair(coarse_grid, D, sample(coarse_grid, coef)).lam
    fine = local_neumann_eigenpair(fine_grid, D, sample(fine_grid, coef)).lam
    return {"coarse": coarse, "fine": fine, "extrapolated": (4.0 * fine - coarse) / 3.0}


def limit_targets(a, grid: Grid) -> dict:
    """Large-spread target ``-max a`` and homogenised target ``-mean a``."""
    neg_sup, neg_mean = sandwich_bounds(grid, a)
    return {"neg_sup": neg_sup, "neg_mean": neg_mean}
