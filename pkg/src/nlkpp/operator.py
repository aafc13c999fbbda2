"""Dense assembly of the scaled nonlocal dispersal operator.

Neumann coupling::

    (A phi)_i = sigma**-m * sum_j w J_sigma(x_i - x_j) (phi_j - phi_i)

Dirichlet coupling::

    (A phi)_i = sigma**-m * (sum_j w J_sigma(x_i - x_j) phi_j - phi_i)
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .exceptions import ConfigurationError, DomainError, ShapeError
from .grid import Field, Grid, as_values
from .kernel import Kernel, eval_scaled

__all__ = ["NonlocalOperator", "assemble", "apply", "pair_kernel_matrix", "BOUNDARIES"]

BOUNDARIES = ("neumann", "dirichlet")


def _offset_matrix(k: int, h: float) -> np.ndarray:
    idx = np.arange(k)
    # integer offsets keep |x_i - x_j| bitwise symmetric in i, j
    return np.subtract.outer(idx, idx).astype(float) * h


def pair_kernel_matrix(grid: Grid, kernel: Kernel, sigma: float) -> np.ndarray:
    """Matrix of ``J_sigma(x_i - x_j)`` over all node pairs."""
    if kernel.dim != grid.dim:
        raise ConfigurationError(f"kernel is {kernel.dim}D but grid is {grid.dim}D")
    if grid.dim == 1:
        return eval_scaled(kernel, sigma, _offset_matrix(grid.n[0], grid.h[0]))
    dx = _offset_matrix(grid.n[0], grid.h[0])
    dy = _offset_matrix(grid.n[1], grid.h[1])
    z = np.empty((grid.n[0], grid.n[1], grid.n[0], grid.n[1], 2))
    z[..., 0] = dx[:, None, :, None]
    z[..., 1] = dy[None, :, None, :]
    return eval_scaled(kernel, sigma, z).reshape(grid.size, grid.size)


@dataclass(frozen=True, eq=False)
class NonlocalOperator:
    """Assembled operator with the data downstream formulas need.

    ``coupling`` holds ``w J_sigma(x_i - x_j)`` (no ``sigma**-m`` prefactor) and
    ``p_sigma`` its row sums, i.e. the kernel mass seen from each node.
    """

    grid: Grid
    kernel: Kernel
    sigma: float
    m: float
    boundary: str
    matrix: np.ndarray = dc_field(repr=False)
    coupling: np.ndarray = dc_field(repr=False)
    p_sigma: Field = dc_field(repr=False)

    @property
    def rate(self) -> float:
        """The prefactor ``sigma**-m``."""
        return self.sigma ** (-self.m)

    @property
    def size(self) -> int:
        return self.grid.size

    def __matmul__(self, phi):
        return self.matrix @ phi

    def quadratic_form(self, phi) -> float:
        """Energy ``(1/(2 sigma^m)) sum_ij w^2 J_sigma(x_i-x_j) (phi_j-phi_i)^2``.

        For the Dirichlet variant this is ``-<A phi, phi>`` instead, which also
        charges the mass lost across the boundary.
        """
        v = as_values(self.grid, phi)
        w = self.grid.weight
        if self.boundary == "dirichlet":
            return float(-w * v @ (self.matrix @ v))
        diff = v[None, :] - v[:, None]
        return float(0.5 * self.rate * w * np.sum(self.coupling * diff * diff))

    def to_triplets(self):
        """Nonzero ``(i, j, value)`` entries, row-major."""
        i, j = np.nonzero(self.matrix)
        return i, j, self.matrix[i, j]


def assemble(grid: Grid, kernel: Kernel, sigma: float, m: float = 0.0,
             boundary: str = "neumann") -> NonlocalOperator:
    """Assemble the dense operator matrix on ``grid``.

    Raises
    ------
    ResolutionError
        If fewer than four cells span the kernel radius.
    """
    sigma = float(sigma)
    m = float(m)
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if m < 0:
        raise DomainError(f"cost parameter m must be nonnegative, got {m}")
    boundary = boundary.lower()
    if boundary not in BOUNDARIES:
        raise ConfigurationError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    grid.check_resolution(sigma)

    coupling = grid.weight * pair_kernel_matrix(grid, kernel, sigma)
    p = coupling.sum(axis=1)
    rate = sigma ** (-m)
    if boundary == "neumann":
        matrix = rate * coupling
        matrix[np.diag_indices_from(matrix)] -= rate * p
    else:
        matrix = rate * coupling
        matrix[np.diag_indices_from(matrix)] -= rate
    matrix.setflags(write=False)
    coupling.setflags(write=False)
    return NonlocalOperator(
        grid=grid, kernel=kernel, sigma=sigma, m=m, boundary=boundary,
        matrix=matrix, coupling=coupling, p_sigma=Field(grid, p),
    )


def apply(op: NonlocalOperator, field) -> Field:
    """Return ``A @ field`` as a Field."""
    if isinstance(field, Field) and not field.grid.same_as(op.grid):
        raise ShapeError("field and operator live on different grids")
    return Field(op.grid, op.matrix @ as_values(op.grid, field))
