"""Newton iteration for the prescribed-curvature Cauchy problem.

Solves psi(u) = K_S + eta with u = u_S and N_S u = N_S u_S on the initial
leaf.  Each Newton correction v solves the linearized equation
L_{u_k} v = -(psi(u_k) - K_target) with zero Cauchy data, so every iterate
preserves the initial data exactly.  An optional mollifier schedule smooths
the corrections (off by default).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import NegcurvError, SignatureLost
from .foliation import FoliatedDomain
from .grid import ScalarField
from .linear_solver import CauchyData, solve_linear
from .surfaces import GraphSurface, bump_profile


@dataclass(frozen=True)
class NonlinearProblem:
    surface: GraphSurface  # the base surface u_S
    eta: ScalarField  # curvature perturbation; target is psi(u_S) + eta
    domain: FoliatedDomain
    tol: float = 0.0  # residual sup-norm target; 0 means "run to the floor"
    max_iters: int = 12
    mollifier_widths: tuple[int, ...] = ()  # cells per iteration; () = off
    admissibility: float | None = None  # None: default 0.1 * min|K_S|

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")

    def target(self) -> ScalarField:
        base = geometry.psi(self.surface).values
        return ScalarField(self.surface.grid, base + self.eta.values)

    def admissibility_bound(self) -> float:
        """Configured bound, defaulting to 0.1 * min|K_S| over the domain."""
        if self.admissibility is not None:
            return self.admissibility
        k = geometry.psi(self.surface).values[self.domain.mask_full()]
        return 0.1 * float(np.abs(k).min())


@dataclass
class IterationReport:
    residuals: list[float]
    corrections: list[float]  # sup |v_k| per completed step
    converged: bool
    floor_reached: bool
    surface: GraphSurface
    signature_preserved: list[bool]

    @property
    def iterations(self) -> int:
        return len(self.corrections)

    def to_json(self) -> dict:
        return {
            "residuals": self.residuals,
            "corrections": self.corrections,
            "converged": self.converged,
            "floor_reached": self.floor_reached,
            "iterations": self.iterations,
            "signature_preserved": self.signature_preserved,
        }


def residual(u: GraphSurface, k_target: ScalarField) -> ScalarField:
    """psi(u) - K_target pointwise."""
    return ScalarField(u.grid, geometry.psi(u).values - k_target.values)


def _mollify(values: np.ndarray, width: int, time_axis: int) -> np.ndarray:
    """Separable convolution with a normalized compact bump, 2*width+1 taps."""
    if width <= 0:
        return values
    taps = bump_profile(np.linspace(-1, 1, 2 * width + 1) * width / (width + 1))
    taps /= taps.sum()
    out = values
    for ax in range(values.ndim):
        out = np.apply_along_axis(
            lambda m: np.convolve(m, taps, mode="same"), ax, out
        )
    # corrections carry zero Cauchy data; keep the initial leaf untouched
    sl = [slice(None)] * values.ndim
    sl[time_axis] = 0
    out[tuple(sl)] = 0.0
    return out


def newton_step(
    u_k: GraphSurface,
    k_target: ScalarField,
    domain: FoliatedDomain,
    mollify_width: int = 0,
):
    """One Newton update u_{k+1} = u_k + v, L_{u_k} v = -residual, zero data."""
    res = residual(u_k, k_target)
    rhs = ScalarField(u_k.grid, -res.values)
    rep = solve_linear(u_k, rhs, CauchyData.zeros(domain), domain)
    v = rep.v.values
    if mollify_width:
        v = _mollify(v.copy(), mollify_width, domain.time_axis)
    u_next = u_k.shifted(v)
    summary = geometry.signature_summary(u_next.hessian())
    if not summary.lorentzian_everywhere:
        raise SignatureLost(
            f"Hessian left the Lorentzian class: {summary.counts}"
        )
    return u_next, v, rep


def solve_nonlinear(problem: NonlinearProblem) -> IterationReport:
    """Iterate Newton steps until the residual tolerance or the h^2 floor.

    The floor is detected empirically: the loop stops once an iteration
    fails to halve the residual (the better iterate is kept).  Divergence
    is reported, not raised.
    """
    domain = problem.domain
    mask = domain.mask_full()
    k_target = problem.target()
    bound = problem.admissibility_bound()
    eta_sup = float(np.abs(problem.eta.values[mask]).max())
    if eta_sup > bound:
        raise NegcurvError(
            f"perturbation sup-norm {eta_sup:.3e} exceeds the admissibility "
            f"bound {bound:.3e}"
        )

    u = problem.surface
    r = float(np.abs(residual(u, k_target).values[mask]).max())
    residuals = [r]
    corrections: list[float] = []
    flags: list[bool] = []
    converged = r <= problem.tol
    floor = False

    for k in range(problem.max_iters):
        if converged:
            break
        width = (
            problem.mollifier_widths[k]
            if k < len(problem.mollifier_widths)
            else 0
        )
        u_next, v, _ = newton_step(u, k_target, domain, width)
        flags.append(True)  # newton_step raised otherwise
        r_next = float(np.abs(residual(u_next, k_target).values[mask]).max())
        corrections.append(float(np.abs(v).max()))
        if r_next <= problem.tol:
            residuals.append(r_next)
            u = u_next
            converged = True
            break
        if r_next > 0.5 * r:
            floor = True
            if r_next < r:
                residuals.append(r_next)
                u = u_next
            if problem.tol == 0.0:
                converged = True  # ran to the floor as requested
            break
        residuals.append(r_next)
        u, r = u_next, r_next

    return IterationReport(
        residuals=residuals,
        corrections=corrections,
        converged=converged,
        floor_reached=floor,
        surface=u,
        signature_preserved=flags,
    )
