"""Double-null solver for the linearized equation around the n=2 paraboloid.

In characteristic coordinates zb = t + x, z = t - x the linearized
equation becomes

    d_zb d_z v = (z d_zb v + zb d_z v) / (1 + zb^2/2 + z^2/2),

marched cell by cell from data v(zb=0, z) = z*chi(z), v(zb, z=0) = 0.
The solution grows at least like (1/3) z zb^2 on C = [0,1] x [0, Zbar],
so sup_x |v(t, .)| grows without bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import double_null_march
from .errors import StepTooLarge
from .grid import GridSpec, ScalarField


@dataclass(frozen=True)
class CutoffSpec:
    """Smooth cutoff: 1 on (-inf, inner], 0 on [outer, inf)."""

    inner: float = 1.0
    outer: float = 2.0

    def __post_init__(self):
        if not self.inner < self.outer:
            raise ValueError("cutoff needs inner < outer")


def cutoff_chi(x, spec: CutoffSpec = CutoffSpec()):
    """Standard e^{-1/s} transition; smooth, monotone nonincreasing."""
    x = np.asarray(x, dtype=np.float64)
    s = (spec.outer - x) / (spec.outer - spec.inner)

    def f(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out

    num = f(s)
    den = num + f(1.0 - s)
    out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class NullGrid:
    """Lattice v[i, j] at (zb, z) = (i*delta, j*delta)."""

    delta: float
    z_extent: float
    zbar_extent: float
    values: np.ndarray

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @property
    def zbar(self) -> np.ndarray:
        return np.arange(self.values.shape[0]) * self.delta

    @property
    def z(self) -> np.ndarray:
        return np.arange(self.values.shape[1]) * self.delta


def solve_double_null(
    spec: CutoffSpec = CutoffSpec(),
    delta: float = 1.0 / 200.0,
    z_extent: float = 4.0,
    zbar_extent: float = 8.0,
) -> NullGrid:
    """March the characteristic scheme over [0, Zbar] x [0, Z]."""
    ni = round(zbar_extent / delta)
    nj = round(z_extent / delta)
    v = np.zeros((ni + 1, nj + 1))
    z = np.arange(nj + 1) * delta
    v[0, :] = z * cutoff_chi(z, spec)
    v[:, 0] = 0.0
    min_alpha = double_null_march(v, delta)
    if min_alpha < 0.5:
        raise StepTooLarge(
            f"cell denominator fell to {min_alpha:.3f}; reduce delta or extents"
        )
    return NullGrid(delta, z_extent, zbar_extent, v)


def verify_growth_bound(grid: NullGrid, tol: float = 1e-2) -> dict:
    """Check v >= (1-tol) * z*zb^2/3 on C = {z <= 1}, plus the one-sided
    d_z bound and both monotonicity sign conditions."""
    delta = grid.delta
    jmax = round(1.0 / delta)
    if jmax > grid.values.shape[1] - 1:
        raise ValueError("grid does not cover z in [0, 1]")
    v = grid.values[:, : jmax + 1]
    zb = grid.zbar[:, None]
    z = grid.z[None, : jmax + 1]
    bound = z * zb**2 / 3.0

    margin = v - (1 - tol) * bound
    dz = np.diff(v, axis=1) / delta  # forward differences on C
    dz_bound = (1 - tol) * zb**2 / 3.0
    dzb = np.diff(v, axis=0) / delta

    worst = np.unravel_index(np.argmin(margin), margin.shape)
    return {
        "tol": tol,
        "bound_holds": bool((margin >= 0).all()),
        "min_margin": float(margin.min()),
        "worst_point": {"zbar": float(zb[worst[0], 0]), "z": float(z[0, worst[1]])},
        "dz_bound_holds": bool((dz - dz_bound >= 0).all()),
        "dz_nonnegative": bool((dz >= -1e-14).all()),
        "dzb_nonnegative": bool((dzb >= -1e-14).all()),
        "corner_value": float(v[-1, jmax]),
        "corner_bound": float((1 - tol) * grid.zbar_extent**2 / 3.0),
    }


def _bilinear(values: np.ndarray, fi: np.ndarray, fj: np.ndarray) -> np.ndarray:
    i0 = np.clip(np.floor(fi).astype(int), 0, values.shape[0] - 2)
    j0 = np.clip(np.floor(fj).astype(int), 0, values.shape[1] - 2)
    ti = fi - i0
    tj = fj - j0
    return (
        values[i0, j0] * (1 - ti) * (1 - tj)
        + values[i0 + 1, j0] * ti * (1 - tj)
        + values[i0, j0 + 1] * (1 - ti) * tj
        + values[i0 + 1, j0 + 1] * ti * tj
    )


@dataclass(frozen=True)
class TXResample:
    field: ScalarField  # v(t, x), zero outside the wedge
    inside: np.ndarray  # bool mask of points covered by the null grid
    t: np.ndarray
    sup_abs: np.ndarray  # sup_x |v(t, .)| over inside points, per t

    def sup_increasing(self, t_lo: float, t_hi: float) -> bool:
        sel = (self.t >= t_lo - 1e-12) & (self.t <= t_hi + 1e-12)
        s = self.sup_abs[sel]
        return bool((np.diff(s) > 0).all())

    def cubic_growth_holds(self, tol: float = 1e-2) -> dict:
        """Exploratory: v(t, 0) >= (1-tol) t^3/3 for t > 1 (x = 0 column)."""
        x = self.field.grid.axis_coords(1)
        j = int(np.argmin(np.abs(x)))
        sel = self.t > 1.0
        col = self.field.values[sel, j]
        ok = self.inside[sel, j]
        bound = (1 - tol) * self.t[sel] ** 3 / 3.0
        holds = bool((col[ok] >= bound[ok]).all()) if ok.any() else True
        return {"holds": holds, "points_checked": int(ok.sum())}


def to_txcoords(grid: NullGrid, spacing: float | None = None) -> TXResample:
    """Resample to (t, x) = ((zb+z)/2, (zb-z)/2) by bilinear interpolation."""
    h = spacing if spacing is not None else grid.delta
    t_hi = (grid.zbar_extent + grid.z_extent) / 2.0
    x_lo, x_hi = -grid.z_extent / 2.0, grid.zbar_extent / 2.0
    nt = int(math.floor(t_hi / h + 1e-9)) + 1
    nx = int(math.floor((x_hi - x_lo) / h + 1e-9)) + 1
    gspec = GridSpec((0.0, x_lo), h, (nt, nx))
    T, X = gspec.meshgrid()
    zb = T + X
    z = T - X
    inside = (
        (zb >= -1e-12)
        & (zb <= grid.zbar_extent + 1e-12)
        & (z >= -1e-12)
        & (z <= grid.z_extent + 1e-12)
    )
    vals = np.zeros(gspec.shape)
    fi = np.clip(zb[inside] / grid.delta, 0.0, grid.values.shape[0] - 1.0)
    fj = np.clip(z[inside] / grid.delta, 0.0, grid.values.shape[1] - 1.0)
    vals[inside] = _bilinear(grid.values, fi, fj)
    sup = np.where(inside, np.abs(vals), 0.0).max(axis=1)
    return TXResample(
        field=ScalarField(gspec, vals),
        inside=inside,
        t=gspec.axis_coords(0),
        sup_abs=sup,
    )
