"""Graph surfaces: catalog entries with closed-form derivatives, or FD.

Catalog surfaces carry exact first, second and third derivatives so that
identity checks can separate PDE discretization error from differentiation
error.  Axis 0 plays the role of the distinguished "t" coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import derivatives
from .grid import GridSpec, ScalarField, SymmetricMatrixField, VectorField


# ---------------------------------------------------------------------------
# smooth compactly supported bump, the standard e^{-1/s} construction


def bump_profile(s: np.ndarray, order: int = 0) -> np.ndarray:
    """b(s) = exp(1 - 1/(1-s^2)) for |s|<1, 0 outside; b(0)=1.

    ``order`` selects the derivative (0..3).  Smooth and compactly
    supported on [-1, 1].
    """
    s = np.asarray(s, dtype=np.float64)
    inside = np.abs(s) < 1.0
    out = np.zeros_like(s)
    si = s[inside]
    q = 1.0 - si * si
    b = np.exp(1.0 - 1.0 / q)
    if order == 0:
        out[inside] = b
        return out
    r = -2.0 * si / q**2
    if order == 1:
        out[inside] = b * r
        return out
    rp = -2.0 / q**2 - 8.0 * si**2 / q**3
    if order == 2:
        out[inside] = b * (r * r + rp)
        return out
    rpp = -24.0 * si / q**3 - 48.0 * si**3 / q**4
    if order == 3:
        out[inside] = b * (r**3 + 3.0 * r * rp + rpp)
        return out
    raise ValueError("bump_profile supports orders 0..3")


def poly_bump_profile(s: np.ndarray, order: int = 0) -> np.ndarray:
    """b(s) = (1-s^2)^4 on [-1, 1], 0 outside; C^3, b(0) = 1.

    Much tamer high derivatives than the e^{-1/s} bump, so manufactured
    solutions built from it resolve at coarser grids.
    """
    s = np.asarray(s, dtype=np.float64)
    inside = np.abs(s) < 1.0
    out = np.zeros_like(s)
    si = s[inside]
    q = 1.0 - si * si
    if order == 0:
        out[inside] = q**4
    elif order == 1:
        out[inside] = -8.0 * si * q**3
    elif order == 2:
        out[inside] = 8.0 * q**2 * (7.0 * si**2 - 1.0)
    elif order == 3:
        out[inside] = 48.0 * si * q * (3.0 - 7.0 * si**2)
    else:
        raise ValueError("poly_bump_profile supports orders 0..3")
    return out


_PROFILES = {"exp": bump_profile, "poly": poly_bump_profile}


@dataclass(frozen=True)
class SeparableBump:
    """Product over axes of 1d bumps: prod_i b((x_i - c_i)/w_i)."""

    centers: tuple[float, ...]
    widths: tuple[float, ...]
    amplitude: float = 1.0
    profile: str = "exp"

    def _axis_factor(self, x: np.ndarray, i: int, order: int) -> np.ndarray:
        s = (x - self.centers[i]) / self.widths[i]
        return _PROFILES[self.profile](s, order) / self.widths[i] ** order

    def derivative(self, coords: list[np.ndarray], orders: tuple[int, ...]) -> np.ndarray:
        out = np.full(coords[0].shape, self.amplitude)
        for i, (x, o) in enumerate(zip(coords, orders)):
            out = out * self._axis_factor(x, i, o)
        return out

    def value(self, coords):
        return self.derivative(coords, (0,) * len(coords))


# ---------------------------------------------------------------------------
# analytic catalog


class AnalyticSurface:
    """Closed-form u with derivatives up to third order."""

    def value(self, coords):  # pragma: no cover - interface
        raise NotImplementedError

    def grad(self, coords):
        raise NotImplementedError

    def hess(self, coords):
        raise NotImplementedError

    def third(self, coords):
        raise NotImplementedError


@dataclass(frozen=True)
class QuadraticForm(AnalyticSurface):
    """u = 1/2 sum_i a_i x_i^2 with prescribed diagonal coefficients."""

    coeffs: tuple[float, ...]

    def value(self, coords):
        return 0.5 * sum(a * x * x for a, x in zip(self.coeffs, coords))

    def grad(self, coords):
        return np.stack([a * x for a, x in zip(self.coeffs, coords)])

    def hess(self, coords):
        d = len(coords)
        shape = coords[0].shape
        out = np.zeros((d, d) + shape)
        for i, a in enumerate(self.coeffs):
            out[i, i] = a
        return out

    def third(self, coords):
        d = len(coords)
        return np.zeros((d, d, d) + coords[0].shape)


def hyperbolic_paraboloid(dim: int) -> QuadraticForm:
    """u = 1/2(|x|^2 - t^2), t = axis 0."""
    return QuadraticForm((-1.0,) + (1.0,) * (dim - 1))


@dataclass(frozen=True)
class PerturbedParaboloid(AnalyticSurface):
    """Hyperbolic paraboloid plus a small separable interior bump."""

    dim: int
    bump: SeparableBump
    base: QuadraticForm = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "base", hyperbolic_paraboloid(self.dim))

    def value(self, coords):
        return self.base.value(coords) + self.bump.value(coords)

    def grad(self, coords):
        g = self.base.grad(coords).copy()
        for i in range(self.dim):
            orders = [0] * self.dim
            orders[i] = 1
            g[i] += self.bump.derivative(coords, tuple(orders))
        return g

    def hess(self, coords):
        h = self.base.hess(coords).copy()
        for i in range(self.dim):
            for j in range(i, self.dim):
                orders = [0] * self.dim
                orders[i] += 1
                orders[j] += 1
                b = self.bump.derivative(coords, tuple(orders))
                h[i, j] += b
                if i != j:
                    h[j, i] += b
        return h

    def third(self, coords):
        d = self.dim
        out = np.zeros((d, d, d) + coords[0].shape)
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    orders = [0] * d
                    orders[i] += 1
                    orders[j] += 1
                    orders[k] += 1
                    out[i, j, k] = self.bump.derivative(coords, tuple(orders))
        return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraphSurface:
    """A graph function u with analytic or finite-difference derivatives."""

    grid: GridSpec
    values: np.ndarray
    catalog: AnalyticSurface | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    @classmethod
    def from_catalog(cls, grid: GridSpec, catalog: AnalyticSurface) -> "GraphSurface":
        return cls(grid, catalog.value(grid.meshgrid()), catalog)

    @classmethod
    def from_values(cls, grid: GridSpec, values: np.ndarray) -> "GraphSurface":
        return cls(grid, values, None)

    @property
    def analytic(self) -> bool:
        return self.catalog is not None

    def scalar(self) -> ScalarField:
        return ScalarField(self.grid, self.values)

    def gradient_array(self) -> np.ndarray:
        if self.catalog is not None:
            return self.catalog.grad(self.grid.meshgrid())
        return derivatives.grad(self.values, self.grid.spacing)

    def hessian_array(self) -> np.ndarray:
        if self.catalog is not None:
            return self.catalog.hess(self.grid.meshgrid())
        return derivatives.hess(self.values, self.grid.spacing)

    def third_array(self) -> np.ndarray:
        if self.catalog is not None:
            return self.catalog.third(self.grid.meshgrid())
        h = self.hessian_array()
        d = self.grid.dim
        out = np.empty((d, d, d) + self.grid.shape)
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    out[i, j, k] = derivatives.deriv(h[j, k], self.grid.spacing, i)
        return out

    def gradient(self) -> VectorField:
        return VectorField(self.grid, self.gradient_array())

    def hessian(self) -> SymmetricMatrixField:
        return SymmetricMatrixField.from_full(self.grid, self.hessian_array())

    def shifted(self, delta: np.ndarray) -> "GraphSurface":
        """u + delta, dropping to finite-difference mode."""
        return GraphSurface.from_values(self.grid, self.values + delta)
