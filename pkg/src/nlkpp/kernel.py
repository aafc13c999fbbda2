"""Compactly supported dispersal kernels and their scalings.

Every family is a closed-form radial profile ``J(z) = c * g(|z|)`` supported on
the closed unit ball, normalised to unit mass.  The scaled kernel is
``J_sigma(z) = sigma**-N * J(z / sigma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, DomainError

__all__ = ["Kernel", "make_kernel", "eval_scaled", "scaled_second_moment", "KERNEL_FAMILIES"]

KERNEL_FAMILIES = ("uniform", "triangular", "quartic-bump")

_ALIASES = {"quartic": "quartic-bump", "quartic_bump": "quartic-bump", "tri": "triangular"}

# (family, dim) -> (normalisation constant, second moment int J(z)|z|^2 dz)
_CLOSED_FORMS = {
    ("uniform", 1): (0.5, 1.0 / 3.0),
    ("uniform", 2): (1.0 / math.pi, 0.5),
    ("triangular", 1): (1.0, 1.0 / 6.0),
    ("quartic-bump", 1): (0.75, 0.2),
    ("quartic-bump", 2): (2.0 / math.pi, 1.0 / 3.0),
}

# relative slack used to decide that a point sits exactly on the support edge
_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class Kernel:
    """A normalised dispersal density on the unit ball of R^dim.

    Attributes
    ----------
    family : str
        One of ``uniform``, ``triangular`` (1D only) or ``quartic-bump``.
    dim : int
        Spatial dimension, 1 or 2.
    norm_const : float
        Value of the profile constant so that the total mass is 1.
    d2 : float
        Second moment ``int J(z) |z|^2 dz``.
    """

    family: str
    dim: int
    norm_const: float
    d2: float

    @property
    def diffusivity(self) -> float:
        """Effective diffusivity ``d2 / (2 N)`` of the local limit."""
        return self.d2 / (2 * self.dim)

    def profile(self, r):
        """Evaluate J at radius ``r = |z|`` (array-friendly)."""
        r = np.abs(np.asarray(r, dtype=float))
        c = self.norm_const
        if self.family == "uniform":
            # the jump at r = 1 takes the mean of the one-sided limits
            inside = np.where(r < 1.0 - _EDGE_TOL, c, 0.0)
            edge = np.abs(r - 1.0) <= _EDGE_TOL
            return np.where(edge, 0.5 * c, inside)
        if self.family == "triangular":
            return c * np.clip(1.0 - r, 0.0, None)
        return c * np.clip(1.0 - r * r, 0.0, None)

    def __call__(self, z):
        """Evaluate J(z); ``z`` is a scalar/array in 1D or ``(..., 2)`` in 2D."""
        return self.profile(_radius(z, self.dim))


def _radius(z, dim):
    z = np.asarray(z, dtype=float)
    if dim == 1:
        if z.ndim >= 1 and z.shape[-1] == 1:
            z = z[..., 0]
        return np.abs(z)
    if z.shape[-1] != 2:
        raise DomainError(f"2D kernel expects points with a trailing axis of length 2, got {z.shape}")
    return np.hypot(z[..., 0], z[..., 1])


def make_kernel(family: str, dim: int = 1) -> Kernel:
    """Build a kernel of the given family in dimension ``dim``.

    >>> make_kernel("uniform", 1).d2
    0.3333333333333333
    """
    name = _ALIASES.get(str(family).strip().lower(), str(family).strip().lower())
    key = (name, int(dim))
    if key not in _CLOSED_FORMS:
        raise ConfigurationError(
            f"unsupported kernel {family!r} in dimension {dim}; "
            f"available: {sorted(_CLOSED_FORMS)}"
        )
    norm_const, d2 = _CLOSED_FORMS[key]
    return Kernel(family=name, dim=int(dim), norm_const=norm_const, d2=d2)


def _check_sigma(sigma):
    sigma = float(sigma)
    if not sigma > 0.0 or not math.isfinite(sigma):
        raise DomainError(f"sigma must be a positive finite number, got {sigma}")
    return sigma


def eval_scaled(kernel: Kernel, sigma: float, z):
    """Return ``sigma**-N * J(z / sigma)``."""
    sigma = _check_sigma(sigma)
    r = _radius(z, kernel.dim) / sigma
    out = kernel.profile(r) / sigma**kernel.dim
    return float(out) if np.ndim(out) == 0 else out


def scaled_second_moment(kernel: Kernel, sigma: float) -> float:
    """Second moment of ``J_sigma``, i.e. ``sigma**2 * d2``."""
    sigma = _check_sigma(sigma)
    return sigma * sigma * kernel.d2
