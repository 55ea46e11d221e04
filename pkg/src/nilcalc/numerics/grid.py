"""Uniform symmetric grids and sampled functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.ndimage import map_coordinates


@dataclass(frozen=True)
class GridSpec:
    """Box prod [-L_j, L_j] with N_j nodes per axis, both endpoints included."""
    L: tuple
    N: tuple

    def __post_init__(self):
        L = tuple(float(v) for v in self.L)
        N = tuple(int(v) for v in self.N)
        if len(L) != len(N):
            raise ValueError("L and N must have the same length")
        if any(n < 8 for n in N):
            raise ValueError(f"need at least 8 nodes per axis, got {N}")
        if any(v <= 0 for v in L):
            raise ValueError("half-widths must be positive")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "N", N)

    @classmethod
    def cube(cls, L: Sequence[float], n: int):
        return cls(tuple(L), (n,) * len(L))

    @property
    def ndim(self):
        return len(self.N)

    @property
    def h(self) -> tuple:
        return tuple(2 * L / (N - 1) for L, N in zip(self.L, self.N))

    @property
    def cell(self) -> float:
        return float(np.prod(self.h))

    @property
    def shape(self):
        return self.N

    def axes(self) -> list:
        return [np.linspace(-L, L, N) for L, N in zip(self.L, self.N)]

    def mesh(self) -> list:
        return np.meshgrid(*self.axes(), indexing="ij", sparse=True)

    def dense_mesh(self) -> list:
        return np.meshgrid(*self.axes(), indexing="ij")

    def has_origin(self) -> bool:
        return all(n % 2 == 1 for n in self.N)

    def refined(self, factor: float = 2.0) -> "GridSpec":
        """Same box, spacing divided by ``factor`` (odd counts stay odd)."""
        return GridSpec(self.L, tuple(int(round((n - 1) * factor)) + 1 for n in self.N))

    def interior_mask(self, margin: int = 2) -> np.ndarray:
        m = np.zeros(self.N, dtype=bool)
        m[tuple(slice(margin, n - margin) for n in self.N)] = True
        return m


@dataclass
class GridFunction:
    """Samples of a function on a :class:`GridSpec`; quadrature is the nodal sum times the cell volume."""
    grid: GridSpec
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.N:
            raise ValueError(f"values of shape {self.values.shape} do not fit grid {self.grid.N}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function has non-finite values")

    @classmethod
    def from_callable(cls, grid: GridSpec, fn):
        return cls(grid, np.broadcast_to(fn(*grid.mesh()), grid.N).copy())

    def with_values(self, values):
        return GridFunction(self.grid, values)

    def integral(self):
        return self.values.sum() * self.grid.cell

    def norm_l1(self) -> float:
        return float(np.abs(self.values).sum() * self.grid.cell)

    def norm_l2(self) -> float:
        return float(np.sqrt((np.abs(self.values) ** 2).sum() * self.grid.cell))

    def norm_linf(self) -> float:
        return float(np.abs(self.values).max())

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, other):
        return self.with_values(self.values * _vals(other))

    __rmul__ = __mul__

    def boundary_mass(self, width: int = 1) -> float:
        """Fraction of the L1 norm carried by the outer ``width`` layers."""
        total = np.abs(self.values).sum()
        if total == 0:
            return 0.0
        inner = np.abs(self.values[tuple(slice(width, n - width) for n in self.grid.N)]).sum()
        return float((total - inner) / total)

    def interpolate(self, points: Sequence[np.ndarray], order: int = 3) -> np.ndarray:
        """Spline interpolation (order 1 = multilinear) at arbitrary points; zero outside the box."""
        pts = np.broadcast_arrays(*points)
        coords = [(p + L) / h for p, L, h in zip(pts, self.grid.L, self.grid.h)]
        if np.iscomplexobj(self.values):
            return (self._interp(self.values.real, coords, order)
                    + 1j * self._interp(self.values.imag, coords, order))
        return self._interp(self.values, coords, order)

    @staticmethod
    def _interp(values, coords, order):
        shape = coords[0].shape
        flat = np.stack([c.ravel() for c in coords])
        return map_coordinates(values, flat, order=order, mode="constant",
                               cval=0.0).reshape(shape)

    def resample(self, grid: GridSpec) -> "GridFunction":
        return GridFunction(grid, self.interpolate(grid.mesh()))


def _vals(other):
    return other.values if isinstance(other, GridFunction) else other


def relative_error(a, b, norm: str = "l2") -> float:
    """||a - b|| / ||b|| in the grid norm ``norm``."""
    a, b = _vals(a), _vals(b)
    if norm == "l1":
        num, den = np.abs(a - b).sum(), np.abs(b).sum()
    elif norm == "linf":
        num, den = np.abs(a - b).max(), np.abs(b).max()
    else:
        num, den = np.sqrt((np.abs(a - b) ** 2).sum()), np.sqrt((np.abs(b) ** 2).sum())
    return float(num / den) if den else float(num)


def gaussian_bump(grid: GridSpec, center=None, widths=None, amplitude: float = 1.0) -> GridFunction:
    """Separable Gaussian exp(-sum (x_j - c_j)^2 / (2 s_j^2))."""
    d = grid.ndim
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    widths = np.ones(d) if widths is None else np.asarray(widths, dtype=float)
    mesh = grid.mesh()
    expo = sum((x - c) ** 2 / (2 * s ** 2) for x, c, s in zip(mesh, center, widths))
    return GridFunction(grid, np.broadcast_to(amplitude * np.exp(-expo), grid.N).copy())


def random_bump(grid: GridSpec, rng, scale: float = 1.0, spread: float = 0.5) -> GridFunction:
    """Gaussian bump with random center, widths and amplitude sign."""
    d = grid.ndim
    center = rng.uniform(-spread, spread, d) * np.array(grid.L) * 0.25
    widths = scale * rng.uniform(0.6, 1.2, d)
    return gaussian_bump(grid, center, widths, amplitude=float(rng.uniform(0.5, 1.5)))
