"""Periodic uniform grids on the flat torus T^d = R^d/Z^d and field containers.

The torus period is fixed to 1 along every axis, so a grid is described by the
dimension d, the number of nodes per axis n (spacing h = 1/n), a final time T
and the number of time intervals N.  Nodes are located at x_k = k/n
(node-centered sampling); every module of the package shares this convention.

Quadrature is the trapezoid rule, which on a full period reduces to
h^d * sum(values) and is spectrally accurate for smooth periodic fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TorusGrid",
    "ScalarField",
    "DensityField",
    "VectorField",
    "make_grid",
    "integrate",
    "normalize_density",
    "MASS_TOL",
]

# Unit mass must hold to this tolerance for a DensityField.
MASS_TOL = 1e-12


class GridError(ValueError):
    """Invalid grid construction or field/grid mismatch."""


@dataclass(frozen=True)
class TorusGrid:
    """Uniform tensor grid on [0,1)^d with N uniform time intervals on [0,T].

    Interior "kick" times are t_i = i*T/N for i = 1..N-1.
    """

    dim: int
    points_per_axis: int
    horizon: float
    steps: int

    def __post_init__(self):
        if self.dim < 1:
            raise GridError(f"dimension must be >= 1, got {self.dim}")
        if self.points_per_axis < 2:
            raise GridError(f"need at least 2 nodes per axis, got {self.points_per_axis}")
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise GridError(f"final time must be positive, got {self.horizon}")
        if self.steps < 2:
            raise GridError(f"need at least 2 time intervals, got {self.steps}")
        if self.points_per_axis ** self.dim > 2**22:
            raise GridError("grid too large (> 2^22 nodes)")

    @property
    def spacing(self) -> float:
        return 1.0 / self.points_per_axis

    @property
    def num_nodes(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        """All discrete times t_0 = 0 .. t_N = T."""
        return np.linspace(0.0, self.horizon, self.steps + 1)

    @property
    def interior_times(self) -> np.ndarray:
        return self.times[1:-1]

    def axis_coords(self) -> np.ndarray:
        """Node coordinates along one axis: k/n for k = 0..n-1."""
        return np.arange(self.points_per_axis) / self.points_per_axis

    def coords(self) -> list[np.ndarray]:
        """Meshgrid ('ij' indexing) of node coordinates, one array per axis."""
        axes = [self.axis_coords()] * self.dim
        return list(np.meshgrid(*axes, indexing="ij"))

    def cell_volume(self) -> float:
        return self.spacing ** self.dim


@dataclass(frozen=True)
class ScalarField:
    """Real values sampled at the grid nodes, shape (n,)*d."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridError(f"field shape {v.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise GridError("field contains non-finite values")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, values)


@dataclass(frozen=True)
class DensityField:
    """Nonnegative unit-mass scalar field: h^d * sum(values) = 1."""

    underlying: ScalarField

    def __post_init__(self):
        v = self.underlying.values
        if np.any(v < 0):
            k = int(np.argmin(v.ravel()))
            idx = np.unravel_index(k, v.shape)
            raise GridError(f"density is negative at node {idx}: {v[idx]!r}")
        mass = integrate(self.underlying)
        if abs(mass - 1.0) > MASS_TOL:
            raise GridError(f"density mass {mass!r} is not 1 within {MASS_TOL}")

    @property
    def grid(self) -> TorusGrid:
        return self.underlying.grid

    @property
    def values(self) -> np.ndarray:
        return self.underlying.values


@dataclass(frozen=True)
class VectorField:
    """d component scalar fields on a common grid."""

    grid: TorusGrid
    components: tuple[ScalarField, ...]

    def __post_init__(self):
        if len(self.components) != self.grid.dim:
            raise GridError(
                f"expected {self.grid.dim} components, got {len(self.components)}"
            )
        for c in self.components:
            if c.grid.shape != self.grid.shape:
                raise GridError("component shape mismatch")

    @property
    def values(self) -> np.ndarray:
        """Stacked component values, shape (d, n, ..., n)."""
        return np.stack([c.values for c in self.components])


def make_grid(d: int, n: int, T: float, N: int) -> TorusGrid:
    """Build a TorusGrid with d axes, n nodes per axis, horizon T, N intervals."""
    return TorusGrid(dim=int(d), points_per_axis=int(n), horizon=float(T), steps=int(N))


def integrate(f: ScalarField) -> float:
    """Trapezoid quadrature over the torus: h^d * sum of node values."""
    return float(f.grid.cell_volume() * np.sum(f.values))


def normalize_density(raw: ScalarField) -> DensityField:
    """Scale a nonnegative field to unit mass and wrap it as a DensityField.

    Rejects fields with any negative node (naming the offending node) and
    fields with zero total mass.
    """
    v = raw.values
    if np.any(v < 0):
        k = int(np.argmin(v.ravel()))
        idx = np.unravel_index(k, v.shape)
        raise GridError(f"cannot normalize: negative value at node {idx}: {v[idx]!r}")
    mass = integrate(raw)
    if mass <= 0:
        raise GridError("cannot normalize: field has zero mass")
    return DensityField(ScalarField(raw.grid, v / mass))


def as_scalar_field(grid: TorusGrid, values) -> ScalarField:
    """Convenience wrapper accepting flat or shaped arrays."""
    v = np.asarray(values, dtype=float)
    if v.ndim == 1 and v.size == grid.num_nodes:
        v = v.reshape(grid.shape)
    return ScalarField(grid, v)
