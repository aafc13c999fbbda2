"""Numerical probes for open conjectures; they report numbers and assert nothing."""

from __future__ import annotations

import numpy as np

from .evolution import evolve, logistic_trajectory, sup_error
from .experiments import grid_for_sigma
from .grid import sample
from .kernel import make_kernel
from .operator import assemble
from .spectral import principal_eigenpair

__all__ = ["dirichlet_small_sigma_probe", "averaged_logistic_probe"]


def dirichlet_small_sigma_probe(coef, sigmas, m=3.0, kernel="uniform", domain=(1.0,), oversample=4.0):
    """Dirichlet principal eigenvalue along a decreasing sigma sequence (expected to blow up for m > 2)."""
    k = make_kernel(kernel, len(domain))
    rows = []
    for s in sigmas:
        g = grid_for_sigma(domain, s, oversample)
        op = assemble(g, k, s, m, "dirichlet")
        rows.append({"sigma": float(s), "m": float(m), "lambda": principal_eigenpair(op, sample(g, coef)).lam})
    return rows


def averaged_logistic_probe(coef, u0, sigmas, m=3.0, T=1.0, kernel="uniform", domain=(1.0,), oversample=4.0):
    """Gap between the nonlocal evolution and the logistic ODE driven by the mean of ``a``."""
    k = make_kernel(kernel, len(domain))
    rows = []
    for s in sigmas:
        g = grid_for_sigma(domain, s, oversample)
        op = assemble(g, k, s, m)
        a = sample(g, coef)
        u = sample(g, u0)
        abar = g.weight * a.values.sum() / g.volume
        traj = evolve(op, a, u, T)
        ref = logistic_trajectory(traj, np.full(g.size, abar), u, traj.times)
        rows.append({"sigma": float(s), "m": float(m), "sup_error_vs_mean_logistic": sup_error(traj, ref)})
    return rows
