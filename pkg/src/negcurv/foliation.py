"""Lens-shaped foliated domains, spacelike checks, normals, causal cones.

Leaves are coordinate slices along a distinguished time axis; the lateral
boundary is realized by trimming each leaf inward by ceil(c_max * k * dt/h)
cells, where c_max is the maximal characteristic coordinate speed of the
metric, so that the initial leaf is a discrete Cauchy hypersurface for the
trimmed region.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._kernels import minplus_sweep
from .errors import EmptyDomain, NotLorentzian, NotSpacelike
from .geometry import Signature, classify_signature
from .grid import GridSpec, ScalarField, SymmetricMatrixField, VectorField

_P_TOL = 1e-9  # slack at or below this counts as inside the cone
_P_CAP = 8.0  # slack band kept around the front, in cells


def _spatial_axes(dim: int, time_axis: int) -> list[int]:
    return [a for a in range(dim) if a != time_axis]


def char_speeds(metric: SymmetricMatrixField, time_axis: int = 0) -> np.ndarray:
    """Maximal coordinate speed |dx|/dt of null directions, per point.

    Null vectors (1, w) of g satisfy (w - w0)^T G (w - w0) = r^2 with
    G the spatial block, w0 = -G^{-1} g_{0.}, r^2 = g_{0.}^T G^{-1} g_{0.}
    - g_{00}; the largest Euclidean |w| is |w0| + r / sqrt(min eig G).
    """
    full = metric.full()
    dim = metric.grid.dim
    sp = _spatial_axes(dim, time_axis)
    G = np.stack([np.stack([full[a, b] for b in sp]) for a in sp])  # (s, s, *shape)
    g0 = np.stack([full[time_axis, a] for a in sp])  # (s, *shape)
    g00 = full[time_axis, time_axis]
    Gm = np.moveaxis(G, (0, 1), (-2, -1))
    eig = np.linalg.eigvalsh(Gm)
    if np.any(eig[..., 0] <= 0):
        raise NotSpacelike("coordinate slices are not spacelike for this metric")
    Ginv = np.moveaxis(np.linalg.inv(Gm), (-2, -1), (0, 1))
    w0 = -np.einsum("ab...,b...->a...", Ginv, g0)
    r2 = np.einsum("a...,ab...,b...->...", g0, Ginv, g0) - g00
    if np.any(r2 <= 0):
        raise NotLorentzian("time direction is not timelike for this metric")
    return np.sqrt(np.einsum("a...,a...->...", w0, w0)) + np.sqrt(r2) / np.sqrt(
        eig[..., 0]
    )


@dataclass(frozen=True)
class FoliatedDomain:
    grid: GridSpec
    time_axis: int
    trims: np.ndarray  # cumulative trimmed cells per leaf, shape (K,)
    cmax: float

    @property
    def leaf_count(self) -> int:
        return self.grid.npoints[self.time_axis]

    @property
    def spatial_axes(self) -> list[int]:
        return _spatial_axes(self.grid.dim, self.time_axis)

    @property
    def spatial_shape(self) -> tuple[int, ...]:
        return tuple(self.grid.npoints[a] for a in self.spatial_axes)

    def leaf_bounds(self, k: int) -> list[tuple[int, int]]:
        """Inclusive index bounds of leaf k per spatial axis."""
        t = int(self.trims[k])
        return [(t, n - 1 - t) for n in self.spatial_shape]

    def leaf_mask(self, k: int) -> np.ndarray:
        m = np.zeros(self.spatial_shape, dtype=bool)
        sl = tuple(slice(lo, hi + 1) for lo, hi in self.leaf_bounds(k))
        m[sl] = True
        return m

    def leaf_masks(self) -> np.ndarray:
        return np.stack([self.leaf_mask(k) for k in range(self.leaf_count)])

    def mask_full(self) -> np.ndarray:
        """Full-grid boolean mask of Omega (time axis in place)."""
        return np.moveaxis(self.leaf_masks(), 0, self.time_axis)

    def lateral_mask(self) -> np.ndarray:
        """Rim points of each leaf (the discrete lateral boundary Xi)."""
        rims = []
        for k in range(self.leaf_count):
            m = self.leaf_mask(k)
            interior = np.zeros_like(m)
            sl = tuple(slice(lo + 1, hi) for lo, hi in self.leaf_bounds(k))
            if all(lo + 1 <= hi - 1 for lo, hi in self.leaf_bounds(k)):
                interior[sl] = True
            rims.append(m & ~interior)
        return np.moveaxis(np.stack(rims), 0, self.time_axis)

    def temporal_values(self) -> ScalarField:
        """Affine temporal function rescaled to [0, 1]."""
        coords = np.arange(self.leaf_count) / max(1, self.leaf_count - 1)
        shape = [1] * self.grid.dim
        shape[self.time_axis] = self.leaf_count
        t = np.broadcast_to(coords.reshape(shape), self.grid.shape)
        return ScalarField(self.grid, np.array(t))

    def leaf_times(self) -> np.ndarray:
        return np.arange(self.leaf_count) / max(1, self.leaf_count - 1)

    def interior_mask(self, margin: int = 2) -> np.ndarray:
        """Points at least ``margin`` cells from every boundary facet of Omega."""
        masks = self.leaf_masks()
        out = np.zeros_like(masks)
        for k in range(margin, self.leaf_count - margin):
            b = self.leaf_bounds(k)
            if all(lo + margin <= hi - margin for lo, hi in b):
                sl = tuple(slice(lo + margin, hi - margin + 1) for lo, hi in b)
                out[k][sl] = True
        return np.moveaxis(out, 0, self.time_axis)


def build_slab_domain(
    grid: GridSpec, metric: SymmetricMatrixField, time_axis: int = 0
) -> FoliatedDomain:
    """Coordinate-slab leaves trimmed to a discrete domain of dependence."""
    sig = classify_signature(metric)
    if not np.all(sig == Signature.LORENTZIAN):
        raise NotLorentzian("metric must be Lorentzian everywhere")
    speeds = char_speeds(metric, time_axis)  # raises NotSpacelike if slices fail
    cmax = float(speeds.max())
    K = grid.npoints[time_axis]
    # dt = h, so leaf k is trimmed by ceil(cmax * k) cells (exact multiples
    # are not rounded up past themselves).
    trims = np.array([math.ceil(cmax * k - 1e-12) for k in range(K)], dtype=np.int64)
    dom = FoliatedDomain(grid, time_axis, trims, cmax)
    for k in range(K):
        if any(lo > hi for lo, hi in dom.leaf_bounds(k)):
            raise EmptyDomain(f"trimming consumed the grid at leaf {k}")
    return dom


@dataclass(frozen=True)
class SpacelikeReport:
    leaf_min_eig: list[float]  # min eigenvalue of g restricted to each leaf
    leaf_min_timelike: list[float]  # min of -g^{-1}(dt, dt), coordinate dt
    lateral_min_margin: float  # min g(w, w) over effective lateral facets
    leaves_pass: bool
    temporal_pass: bool
    lateral_pass: bool

    @property
    def passed(self) -> bool:
        return self.leaves_pass and self.temporal_pass and self.lateral_pass

    def to_json(self) -> dict:
        return {
            "leaf_min_eig": self.leaf_min_eig,
            "leaf_min_timelike": self.leaf_min_timelike,
            "lateral_min_margin": self.lateral_min_margin,
            "leaves_pass": self.leaves_pass,
            "temporal_pass": self.temporal_pass,
            "lateral_pass": self.lateral_pass,
            "passed": self.passed,
        }


def validate_spacelike(domain: FoliatedDomain, metric: SymmetricMatrixField) -> SpacelikeReport:
    """Per-leaf spacelike margins; failures are reported, never raised."""
    full = metric.full()
    ta = domain.time_axis
    sp = domain.spatial_axes
    G = np.stack([np.stack([full[a, b] for b in sp]) for a in sp])
    eig = np.linalg.eigvalsh(np.moveaxis(G, (0, 1), (-2, -1)))[..., 0]
    ginv = np.moveaxis(np.linalg.inv(np.moveaxis(full, (0, 1), (-2, -1))), (-2, -1), (0, 1))
    timelike = -ginv[ta, ta]

    eig_t = np.moveaxis(eig, ta, 0)
    tl_t = np.moveaxis(timelike, ta, 0)
    leaf_eig, leaf_tl = [], []
    for k in range(domain.leaf_count):
        m = domain.leaf_mask(k)
        leaf_eig.append(float(eig_t[k][m].min()))
        leaf_tl.append(float(tl_t[k][m].min()))

    # effective lateral facet: one leaf step up in time, cumulative trim
    # slope inward; spacelike iff g(e_t + slope*e_j, same) >= 0.
    lateral = np.inf
    full_t = np.moveaxis(full, ta + 2, 2)  # (d, d, K, *spatial)
    for k in range(1, domain.leaf_count - 1):
        slope = domain.trims[k] / k
        rim = domain.leaf_mask(k) & ~domain.leaf_mask(k + 1)
        if not rim.any():
            continue
        for idx_j, j in enumerate(sp):
            w = full_t[ta, ta, k] + 2 * slope * full_t[ta, j, k] + slope**2 * full_t[j, j, k]
            lateral = min(lateral, float(w[rim].min()))
    if not np.isfinite(lateral):
        lateral = float("inf") if domain.trims[-1] == 0 else 0.0

    # ties at exactly zero fail the leaf test (conservative); null lateral
    # facets are the designed limit of the trimming rule and pass at >= 0.
    return SpacelikeReport(
        leaf_min_eig=leaf_eig,
        leaf_min_timelike=leaf_tl,
        lateral_min_margin=float(lateral) if np.isfinite(lateral) else 0.0,
        leaves_pass=bool(min(leaf_eig) > 0),
        temporal_pass=bool(min(leaf_tl) > 0),
        lateral_pass=bool(lateral >= 0) if np.isfinite(lateral) else True,
    )


def normal_field(domain: FoliatedDomain, metric: SymmetricMatrixField) -> VectorField:
    """Future-directed unit timelike normal to the leaves, N = -grad t/|grad t|."""
    rep = validate_spacelike(domain, metric)
    if not (rep.leaves_pass and rep.temporal_pass):
        raise NotSpacelike("domain fails the spacelike validation")
    full = metric.full()
    ginv = np.moveaxis(np.linalg.inv(np.moveaxis(full, (0, 1), (-2, -1))), (-2, -1), (0, 1))
    ta = domain.time_axis
    grad_t = -ginv[:, ta]  # -g^{-1} dt, up to the positive affine scale
    norm2 = -ginv[ta, ta]
    N = grad_t / np.sqrt(norm2)
    # orient future: positive time component
    flip = N[ta] < 0
    N = np.where(flip, -N, N)
    return VectorField(domain.grid, N)


class Direction(Enum):
    FUTURE = "Future"
    PAST = "Past"


@dataclass(frozen=True)
class CausalMask:
    grid: GridSpec
    membership: np.ndarray  # full-grid bool
    direction: Direction
    time_axis: int = 0


def _window_offsets(sdim: int, radius: int):
    ranges = [np.arange(-radius, radius + 1)] * sdim
    mesh = np.meshgrid(*ranges, indexing="ij")
    offsets = np.stack([m.ravel() for m in mesh], axis=1)
    dists = np.sqrt((offsets.astype(float) ** 2).sum(axis=1))
    keep = dists <= radius + 1e-12
    return offsets[keep], dists[keep]


def causal_cone(
    metric: SymmetricMatrixField,
    seed: np.ndarray,
    direction: Direction,
    time_axis: int = 0,
    dilation_cells: float = 0.0,
) -> CausalMask:
    """Discrete causal future/past of a seed set, leaf-by-leaf front propagation.

    A point joins the mask when its accumulated slack (cells outside the
    cone of the source points, minus the per-step reach c*dt/h plus the
    configured dilation) reaches zero.
    """
    grid = metric.grid
    speeds = char_speeds(metric, time_axis)
    speeds_t = np.moveaxis(speeds, time_axis, 0)
    seed_t = np.moveaxis(np.asarray(seed, dtype=bool), time_axis, 0)
    K = grid.npoints[time_axis]
    big = 1e30
    reach = speeds_t + dilation_cells  # dt = h
    radius = int(math.ceil(float(reach.max()) + _P_CAP))
    offsets, dists = _window_offsets(seed_t.ndim - 1, radius)

    order = range(K) if direction is Direction.FUTURE else range(K - 1, -1, -1)
    member = np.zeros_like(seed_t)
    P = None
    for k in order:
        if P is None:
            Pk = np.full(seed_t.shape[1:], big)
        else:
            Pk = minplus_sweep(P, offsets, dists, big)
        Pk = np.where(seed_t[k], 0.0, Pk)
        mem = Pk <= _P_TOL
        member[k] = mem
        Pk = np.where(mem, 0.0, np.minimum(Pk, _P_CAP + 1.0))
        # subtract the next step's reach at the source before propagating
        P = Pk - (reach[k] if direction is Direction.FUTURE else reach[k])
    return CausalMask(grid, np.moveaxis(member, 0, time_axis), direction, time_axis)


def causal_diamond(
    metric: SymmetricMatrixField,
    seed: np.ndarray,
    time_axis: int = 0,
    dilation_cells: float = 0.0,
) -> np.ndarray:
    """J+(seed) intersected with J-(seed)."""
    fut = causal_cone(metric, seed, Direction.FUTURE, time_axis, dilation_cells)
    past = causal_cone(metric, seed, Direction.PAST, time_axis, dilation_cells)
    return fut.membership & past.membership


def write_validation_json(report: SpacelikeReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json(), fh, indent=2)
        fh.write("\n")
