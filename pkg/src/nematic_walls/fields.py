"""Grid-valued containers shared across the package."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .model import GridSpec


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values ``values[i, j] = u(x1_i, x2_j)`` on ``grid``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.nx, self.grid.ny):
            raise GridMismatchError(
                f"values shape {vals.shape} does not match grid {(self.grid.nx, self.grid.ny)}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: GridSpec, fn) -> "Field":
        X1, X2 = grid.mesh()
        return cls(grid, np.broadcast_to(fn(X1, X2), X1.shape).copy())

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros((grid.nx, grid.ny)))

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def mirrored_x1(self) -> "Field":
        """``u(x1, x2) -> u(-x1, x2)``."""
        return Field(self.grid, self.values[::-1, :].copy())

    def mirrored_x2(self) -> "Field":
        """``u(x1, x2) -> u(x1, -x2)``."""
        return Field(self.grid, self.values[:, ::-1].copy())


@dataclass(frozen=True, eq=False)
class Profile1D:
    """Values on the uniform mesh ``linspace(s_min, s_max, n)``."""

    s_min: float
    s_max: float
    values: np.ndarray
    derivative_values: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 3:
            raise ValueError("profile needs a 1D array of at least 3 values")
        if not np.all(np.isfinite(vals)):
            raise ValueError("profile contains non-finite values")
        if not self.s_max > self.s_min:
            raise ValueError("profile needs s_max > s_min")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def s(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.n)

    @property
    def spacing(self) -> float:
        return (self.s_max - self.s_min) / (self.n - 1)

    @classmethod
    def from_function(cls, fn, s_min: float, s_max: float, n: int) -> "Profile1D":
        s = np.linspace(s_min, s_max, n)
        return cls(s_min, s_max, np.asarray(fn(s), dtype=float))

    def __call__(self, s) -> np.ndarray:
        """Linear interpolation inside the mesh."""
        return np.interp(s, self.s, self.values)


def field_spline(u: Field) -> RectBivariateSpline:
    """Bicubic interpolant of a field on its grid."""
    x1, x2 = u.grid.axes()
    return RectBivariateSpline(x1, x2, u.values, kx=3, ky=3)
