"""Kernel-orthogonality pairing and causal support containment.

A compactly supported perturbation eta admits a localized linearized
solution exactly when it pairs to zero against every solution w of the
homogeneous geometric wave equation.  For n >= 3 the pairing is the
Riemann sum of w * f * eta * sqrt|det g| over the domain; for n = 2 the
linearized operator is divergence-form with respect to the Lebesgue
measure, so the pairing weight is 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import SupportTouchesBoundary
from .foliation import Direction, FoliatedDomain, causal_cone, causal_diamond
from .grid import ScalarField
from .linear_solver import CauchyData, LinearSolveReport, solve_linear
from .surfaces import GraphSurface, SeparableBump

SUPPORT_MARGIN = 2  # grid cells to every boundary facet


def _support_mask(values: np.ndarray, rel: float = 1e-13) -> np.ndarray:
    peak = np.abs(values).max()
    if peak == 0:
        return np.zeros(values.shape, dtype=bool)
    return np.abs(values) > rel * peak


def require_interior_support(
    values: np.ndarray, domain: FoliatedDomain, margin: int = SUPPORT_MARGIN
) -> None:
    supp = _support_mask(values)
    if not supp.any():
        return
    if np.any(supp & ~domain.interior_mask(margin)):
        raise SupportTouchesBoundary(
            f"support comes within {margin} cells of a domain boundary facet"
        )


def _interaction_metric(u: GraphSurface):
    """Metric whose causal structure matches the linearized operator."""
    if u.grid.dim == 2:
        return u.hessian()
    return geometry.lorentzian_metric(u)


@dataclass(frozen=True)
class PairingResult:
    value: float
    normalization: float

    @property
    def relative(self) -> float:
        return self.value / self.normalization if self.normalization > 0 else 0.0


def pairing(
    w: ScalarField, eta: ScalarField, u: GraphSurface, domain: FoliatedDomain
) -> PairingResult:
    """<w, eta> over the domain; zero for every homogeneous-kernel w iff a
    localized solution exists."""
    require_interior_support(eta.values, domain)
    n = u.grid.dim
    h = u.grid.spacing
    mask = domain.mask_full()
    if n >= 3:
        dens = (
            geometry.conformal_factor(u).values
            * geometry.volume_density(geometry.lorentzian_metric(u)).values
        )
    else:
        dens = np.ones(u.grid.shape)
    value = float((w.values * dens * eta.values)[mask].sum() * h**n)
    norm_w = float(np.sqrt((w.values[mask] ** 2).sum() * h**n))
    norm_e = float(np.sqrt(((dens * eta.values)[mask] ** 2).sum() * h**n))
    return PairingResult(value=value, normalization=norm_w * norm_e)


def kernel_sample(
    u: GraphSurface, domain: FoliatedDomain, data: CauchyData
) -> ScalarField:
    """A solution of the homogeneous equation (F = 0 keeps the geometric
    form source-free), generated from Cauchy data."""
    rep = solve_linear(u, ScalarField.zeros(u.grid), data, domain)
    return rep.v


def kernel_family(
    u: GraphSurface, domain: FoliatedDomain, count: int = 32, seed: int = 0
) -> list[tuple[str, ScalarField]]:
    """Deterministic family of homogeneous solutions: tensor bumps times
    low-degree polynomials in the spatial coordinates, plus the constant."""
    rng = np.random.default_rng(seed)
    grid = u.grid
    sp = domain.spatial_axes
    coords = [grid.meshgrid()[a] for a in sp]
    lo = [grid.axis_coords(a)[0] for a in sp]
    hi = [grid.axis_coords(a)[-1] for a in sp]
    # leaf-0 spatial coordinates
    idx0 = [slice(None)] * grid.dim
    idx0[domain.time_axis] = 0
    coords0 = [c[tuple(idx0)] for c in coords]

    out = []
    ones = np.ones(domain.spatial_shape)
    out.append(("constant", kernel_sample(u, domain, CauchyData(ones, 0 * ones))))
    while len(out) < count:
        i = len(out)
        centers = [rng.uniform(l + 0.3 * (h - l), h - 0.3 * (h - l)) for l, h in zip(lo, hi)]
        widths = [rng.uniform(0.25, 0.6) * (h - l) for l, h in zip(lo, hi)]
        bump = SeparableBump(tuple(centers), tuple(widths))
        deg = rng.integers(0, 3, size=len(sp))
        poly = np.ones_like(coords0[0])
        for c, d in zip(coords0, deg):
            poly = poly * c**int(d)
        v1 = bump.value(coords0) * poly
        v2 = rng.uniform(-1, 1) * bump.value(coords0)
        out.append((f"bump-poly-{i}", kernel_sample(u, domain, CauchyData(v1, v2))))
    return out


def tautological_eta(
    u_S: GraphSurface, phi: ScalarField, eps: float = 0.0
) -> ScalarField:
    """eps = 0: the linearized perturbation L_{u_S} phi; eps > 0: the exact
    curvature increment psi(u_S + eps*phi) - psi(u_S), both compactly
    supported in supp(phi)."""
    if phi.grid != u_S.grid:
        raise ValueError("phi must live on the surface grid")
    if eps == 0.0:
        return geometry.apply_linearized(u_S, phi)
    base = GraphSurface.from_values(u_S.grid, u_S.values)
    moved = GraphSurface.from_values(u_S.grid, u_S.values + eps * phi.values)
    return ScalarField(
        u_S.grid, geometry.psi(moved).values - geometry.psi(base).values
    )


def check_support_localization(
    eta: ScalarField,
    u: GraphSurface,
    domain: FoliatedDomain,
    tol: float,
    dilation_cells: float = 1.0,
) -> dict:
    """Solve L_u v = eta with zero data and measure the relative L^2 mass of
    v outside the dilated causal future of supp(eta), and outside the
    dilated causal diamond."""
    require_interior_support(eta.values, domain)
    rep = solve_linear(u, eta, CauchyData.zeros(domain), domain)
    metric = _interaction_metric(u)
    seed = _support_mask(eta.values) & domain.mask_full()
    ta = domain.time_axis
    fut = causal_cone(metric, seed, Direction.FUTURE, ta, dilation_cells)
    dia = causal_diamond(metric, seed, ta, dilation_cells)
    mask = domain.mask_full()
    v2 = rep.v.values**2
    total = float(v2[mask].sum())
    if total == 0:
        return {
            "total_mass": 0.0,
            "outside_future_mass": 0.0,
            "outside_diamond_mass": 0.0,
            "tol": tol,
            "future_pass": True,
            "diamond_pass": True,
        }
    out_fut = float(v2[mask & ~fut.membership].sum()) / total
    out_dia = float(v2[mask & ~dia].sum()) / total
    return {
        "total_mass": total,
        "outside_future_mass": out_fut,
        "outside_diamond_mass": out_dia,
        "tol": tol,
        "future_pass": out_fut <= 1e-10,
        "diamond_pass": out_dia <= tol,
    }


def pairing_table(
    eta: ScalarField,
    u: GraphSurface,
    domain: FoliatedDomain,
    count: int = 32,
    seed: int = 0,
) -> list[dict]:
    """Pairing of eta against the sampled kernel family."""
    rows = []
    for name, w in kernel_family(u, domain, count, seed):
        p = pairing(w, eta, u, domain)
        rows.append(
            {
                "sample": name,
                "value": p.value,
                "normalization": p.normalization,
                "relative": p.relative,
            }
        )
    return rows
