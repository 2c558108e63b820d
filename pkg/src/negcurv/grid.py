"""Uniform Cartesian grids and the fields sampled on them.

All fields are immutable value objects: a grid plus a numpy array of
per-point samples.  Vector components are stored leading, i.e. a
VectorField holds an array of shape ``(dim, *grid.shape)``; symmetric
matrices store only the upper triangle, ``(dim*(dim+1)//2, *grid.shape)``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridTooSmall, NegcurvError


def triangle_indices(dim: int) -> list[tuple[int, int]]:
    """Upper-triangle (i, j) pairs, i <= j, row-major."""
    return [(i, j) for i in range(dim) for j in range(i, dim)]


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid: same spacing along every axis, arbitrary point counts."""

    origin: tuple[float, ...]
    spacing: float
    npoints: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))
        object.__setattr__(self, "npoints", tuple(int(k) for k in self.npoints))
        if len(self.origin) != len(self.npoints):
            raise NegcurvError("origin and npoints must have the same length")
        if self.dim < 2:
            raise NegcurvError("grids must have dim >= 2")
        if self.spacing <= 0:
            raise NegcurvError("grid spacing must be positive")
        if any(k < 2 for k in self.npoints):
            raise GridTooSmall("need at least 2 points per axis")

    @property
    def dim(self) -> int:
        return len(self.npoints)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.npoints

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(self.spacing * (k - 1) for k in self.npoints)

    @property
    def num_points(self) -> int:
        return int(np.prod(self.npoints))

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing * np.arange(self.npoints[axis])

    def meshgrid(self) -> list[np.ndarray]:
        return list(
            np.meshgrid(*(self.axis_coords(i) for i in range(self.dim)), indexing="ij")
        )

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "origin": list(self.origin),
            "spacing": self.spacing,
            "points": list(self.npoints),
            "extent": list(self.extent),
        }

    @classmethod
    def from_json(cls, d: dict) -> "GridSpec":
        return cls(tuple(d["origin"]), float(d["spacing"]), tuple(d["points"]))

    @classmethod
    def cube(cls, lo: float, hi: float, n: int, dim: int) -> "GridSpec":
        h = (hi - lo) / (n - 1)
        return cls((lo,) * dim, h, (n,) * dim)


def _check_values(grid: GridSpec, values: np.ndarray, lead: tuple[int, ...]):
    values = np.asarray(values, dtype=np.float64)
    if values.shape != lead + grid.shape:
        raise NegcurvError(
            f"field shape {values.shape} does not match grid {lead + grid.shape}"
        )
    if not np.all(np.isfinite(values)):
        raise NegcurvError("field contains non-finite values")
    return values


@dataclass(frozen=True)
class ScalarField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.grid, self.values, ()))

    @classmethod
    def from_function(cls, grid: GridSpec, fn) -> "ScalarField":
        return cls(grid, fn(*grid.meshgrid()))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))


@dataclass(frozen=True)
class VectorField:
    grid: GridSpec
    values: np.ndarray  # (dim, *shape)

    def __post_init__(self):
        object.__setattr__(
            self, "values", _check_values(self.grid, self.values, (self.grid.dim,))
        )


@dataclass(frozen=True)
class SymmetricMatrixField:
    grid: GridSpec
    values: np.ndarray  # (dim*(dim+1)//2, *shape), upper triangle row-major

    def __post_init__(self):
        ntri = self.grid.dim * (self.grid.dim + 1) // 2
        object.__setattr__(self, "values", _check_values(self.grid, self.values, (ntri,)))

    @classmethod
    def from_full(cls, grid: GridSpec, full: np.ndarray) -> "SymmetricMatrixField":
        """``full`` has shape (dim, dim, *grid.shape); symmetry is assumed."""
        tri = np.stack([full[i, j] for i, j in triangle_indices(grid.dim)])
        return cls(grid, tri)

    def component(self, i: int, j: int) -> np.ndarray:
        if i > j:
            i, j = j, i
        k = triangle_indices(self.grid.dim).index((i, j))
        return self.values[k]

    def full(self) -> np.ndarray:
        """Dense (dim, dim, *shape) view of the symmetric matrices."""
        d = self.grid.dim
        full = np.empty((d, d) + self.grid.shape)
        for k, (i, j) in enumerate(triangle_indices(d)):
            full[i, j] = self.values[k]
            full[j, i] = self.values[k]
        return full

    def matrices(self) -> np.ndarray:
        """Point-indexed (*shape, dim, dim) array for numpy.linalg calls."""
        return np.moveaxis(self.full(), (0, 1), (-2, -1))


# ---------------------------------------------------------------------------
# serialization: CSV point tables plus a JSON grid descriptor


def _component_names(field) -> list[str]:
    if isinstance(field, ScalarField):
        return ["value"]
    if isinstance(field, VectorField):
        return [f"v{i}" for i in range(field.grid.dim)]
    return [f"m_{i}_{j}" for i, j in triangle_indices(field.grid.dim)]


def write_field_csv(field, path) -> None:
    """One row per grid point: coordinates, then component values."""
    path = Path(path)
    grid = field.grid
    coords = grid.meshgrid()
    comps = field.values if field.values.ndim > grid.dim else field.values[None]
    names = [f"x{i}" for i in range(grid.dim)] + _component_names(field)
    cols = [c.ravel() for c in coords] + [c.ravel() for c in comps]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([f"{x:.17e}" for x in row])
    descriptor = path.with_suffix(path.suffix + ".grid.json")
    descriptor.write_text(json.dumps(grid.to_json(), indent=2) + "\n")


def read_field_csv(path):
    """Inverse of write_field_csv; returns the matching field type."""
    path = Path(path)
    grid = GridSpec.from_json(
        json.loads(path.with_suffix(path.suffix + ".grid.json").read_text())
    )
    with path.open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    ncomp = len(header) - grid.dim
    comps = data[:, grid.dim :].T.reshape((ncomp,) + grid.shape)
    if header[grid.dim] == "value":
        return ScalarField(grid, comps[0])
    if header[grid.dim].startswith("v"):
        return VectorField(grid, comps)
    return SymmetricMatrixField(grid, comps)


def write_mask_csv(grid: GridSpec, mask: np.ndarray, path) -> None:
    """Point list of the True entries of a full-grid boolean mask."""
    path = Path(path)
    coords = grid.meshgrid()
    idx = np.nonzero(mask)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(grid.dim)])
        for pt in zip(*(c[idx] for c in coords)):
            w.writerow([f"{x:.17e}" for x in pt])
