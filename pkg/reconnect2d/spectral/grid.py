"""Periodic grid and the field containers that live on it.

Nodes sit at x_i = -L/2 + i*h so that the box centre is a node and the reflections
x -> -x map nodes onto nodes. Arrays are indexed ``values[j, i] = f(x_i, y_j)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from reconnect2d.core.errors import ConfigurationError


@dataclass(frozen=True)
class TorusGrid:
    n: int
    box: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 16 or self.n & (self.n - 1):
            raise ConfigurationError("grid.n", f"must be a power of two >= 16, got {self.n}")
        if not np.isfinite(self.box) or self.box <= 0:
            raise ConfigurationError("grid.box", f"must be > 0, got {self.box}")

    @property
    def spacing(self) -> float:
        return self.box / self.n

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @cached_property
    def coords(self) -> np.ndarray:
        return -0.5 * self.box + self.spacing * np.arange(self.n)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.coords, self.coords, indexing="xy")

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """(kx, ky) broadcast to the rfft2 layout, shape (n, n//2 + 1)."""
        scale = 2.0 * np.pi / self.box
        kx = scale * np.fft.rfftfreq(self.n, 1.0 / self.n)
        ky = scale * np.fft.fftfreq(self.n, 1.0 / self.n)
        return np.meshgrid(kx, ky, indexing="xy")

    @cached_property
    def derivative_wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        # Nyquist modes carry no real derivative.
        kx, ky = (k.copy() for k in self.wavenumbers)
        nyq = self.n // 2
        kx[:, nyq] = 0.0
        ky[nyq, :] = 0.0
        return kx, ky

    @cached_property
    def k2(self) -> np.ndarray:
        kx, ky = self.wavenumbers
        return kx**2 + ky**2

    @cached_property
    def inv_k2(self) -> np.ndarray:
        """1/|k|^2 with the k = 0 entry set to zero (mean projected out)."""
        return np.divide(1.0, self.k2, out=np.zeros_like(self.k2), where=self.k2 > 0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        ix = np.abs(np.fft.rfftfreq(self.n, 1.0 / self.n))
        iy = np.abs(np.fft.fftfreq(self.n, 1.0 / self.n))
        IX, IY = np.meshgrid(ix, iy, indexing="xy")
        return (IX <= self.n / 3) & (IY <= self.n / 3)

    def node_index(self, x: float) -> int:
        return int(round((x + 0.5 * self.box) / self.spacing)) % self.n

    def reflect_x1(self, values: np.ndarray) -> np.ndarray:
        """values(-x1, x2) on the same nodes."""
        return np.roll(values[:, ::-1], 1, axis=1)

    def reflect_x2(self, values: np.ndarray) -> np.ndarray:
        """values(x1, -x2) on the same nodes."""
        return np.roll(values[::-1, :], 1, axis=0)

    def scaled(self, factor: float) -> "TorusGrid":
        return TorusGrid(self.n, self.box * factor)


def make_grid(n: int, box: float) -> TorusGrid:
    return TorusGrid(int(n), float(box))


def _check_values(grid: TorusGrid, values: np.ndarray, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (grid.n, grid.n):
        raise ConfigurationError(name, f"expected shape {(grid.n, grid.n)}, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ConfigurationError(name, "contains non-finite values")
    return values


@dataclass(frozen=True)
class ScalarField:
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _check_values(self.grid, self.values, "field.values"))

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "ScalarField":
        return cls(grid, np.zeros((grid.n, grid.n)))

    @classmethod
    def from_function(cls, grid: TorusGrid, func) -> "ScalarField":
        X, Y = grid.mesh
        return cls(grid, func(X, Y))

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.values - other.values)

    def scaled(self, a: float) -> "ScalarField":
        return ScalarField(self.grid, a * self.values)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class VectorField:
    grid: TorusGrid
    v1: np.ndarray
    v2: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "v1", _check_values(self.grid, self.v1, "vector.v1"))
        object.__setattr__(self, "v2", _check_values(self.grid, self.v2, "vector.v2"))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.grid, self.v1 + other.v1, self.v2 + other.v2)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.grid, self.v1 - other.v1, self.v2 - other.v2)

    def scaled(self, a: float) -> "VectorField":
        return VectorField(self.grid, a * self.v1, a * self.v2)

    @property
    def speed(self) -> np.ndarray:
        return np.hypot(self.v1, self.v2)

    @property
    def max_speed(self) -> float:
        return float(np.max(self.speed))


@dataclass(frozen=True)
class ScalarPair:
    plus: ScalarField
    minus: ScalarField
    time: float = 0.0

    def __post_init__(self) -> None:
        if self.plus.grid != self.minus.grid:
            raise ConfigurationError("sigma", "plus and minus live on different grids")

    @property
    def grid(self) -> TorusGrid:
        return self.plus.grid

    @property
    def F(self) -> ScalarField:
        return ScalarField(self.grid, 0.5 * (self.plus.values + self.minus.values))

    @property
    def omega(self) -> ScalarField:
        return ScalarField(self.grid, 0.5 * (self.plus.values - self.minus.values))

    @property
    def max_abs(self) -> float:
        return max(self.plus.max_abs, self.minus.max_abs)

    def at(self, time: float) -> "ScalarPair":
        return ScalarPair(self.plus, self.minus, time)

    def on_grid(self, grid: TorusGrid) -> "ScalarPair":
        """Same node values on another grid of equal size (used for similarity rescaling)."""
        if grid.n != self.grid.n:
            raise ConfigurationError("grid.n", "node counts differ")
        return ScalarPair(ScalarField(grid, self.plus.values), ScalarField(grid, self.minus.values), self.time)

    @classmethod
    def from_arrays(cls, grid: TorusGrid, plus: np.ndarray, minus: np.ndarray, time: float = 0.0) -> "ScalarPair":
        return cls(ScalarField(grid, plus), ScalarField(grid, minus), time)
