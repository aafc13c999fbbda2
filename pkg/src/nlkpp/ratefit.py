"""Least-squares power-law fits ``error ~ C sigma**slope``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import FitError

__all__ = ["RateFit", "fit_rate", "small_sigma_verdict", "large_sigma_verdict"]


@dataclass(frozen=True)
class RateFit:
    points: tuple
    slope: float
    intercept: float
    r2: float

    @property
    def low_confidence(self) -> bool:
        return self.r2 < 0.9

    @property
    def constant(self) -> float:
        return math.exp(self.intercept)


def fit_rate(points) -> RateFit:
    """Ordinary least squares of ``log(error)`` against ``log(sigma)``.

    Points with a nonpositive error are dropped with a warning.
    """
    pts = []
    for sigma, err in points:
        sigma, err = float(sigma), float(err)
        if not sigma > 0:
            raise FitError(f"sigma must be positive, got {sigma}")
        if not err > 0:
            warnings.warn(f"dropping point sigma={sigma:g} with nonpositive error {err:g}",
                          RuntimeWarning, stacklevel=2)
            continue
        pts.append((sigma, err))
    if len({s for s, _ in pts}) < 3:
        raise FitError(f"need at least 3 points with distinct sigma, got {len(pts)}")
    pts.sort()
    x = np.log([s for s, _ in pts])
    y = np.log([e for _, e in pts])
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_res = float(np.sum((y - intercept - slope * x) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(points=tuple(pts), slope=slope, intercept=intercept, r2=r2)


def small_sigma_verdict(fit: RateFit, m: float, window: float = 0.4, min_r2: float = 0.95) -> bool:
    """Two-sided check of the ``sigma**(2 - m)`` rate."""
    return abs(fit.slope - (2.0 - m)) <= window and fit.r2 >= min_r2


def large_sigma_verdict(fit: RateFit, m: float, dim: int = 1, slack: float = 0.5,
                        min_r2: float = 0.9) -> bool:
    """One-sided check of the ``sigma**-(m + N)`` bound (faster decay allowed)."""
    return fit.slope <= -(m + dim) + slack and fit.r2 >= min_r2
