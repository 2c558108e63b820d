"""Differential-geometric kernels for the prescribed-curvature problem.

The curvature operator of a graph u is

    psi(u) = det(D2u) / (1 + |Du|^2)^((n+2)/2),

its linearization around u is

    L_u(v) = psi(u) * ( tr((D2u)^-1 D2v) - (n+2) Du.Dv / (1+|Du|^2) ),

and for n >= 3 the linearization is, up to the negative conformal factor
``conformal_factor``, the Laplace-Beltrami operator of the Lorentzian
metric ``lorentzian_metric``.  For n = 2 the same holds for the metric
m = D2u together with the first-order coefficients ``first_order_coeffs_n2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import derivatives
from .errors import DimensionError, NotLorentzian, SingularHessian, SingularMetric
from .grid import ScalarField, SymmetricMatrixField, VectorField
from .surfaces import GraphSurface

TAU_DET = 1e-10
TAU_EIG = 1e-8


class Signature(Enum):
    RIEMANNIAN = "Riemannian"
    LORENTZIAN = "Lorentzian"
    DEGENERATE = "Degenerate"
    OTHER_INDEFINITE = "OtherIndefinite"


def _as_surface(s) -> GraphSurface:
    if isinstance(s, GraphSurface):
        return s
    if isinstance(s, ScalarField):
        return GraphSurface.from_values(s.grid, s.values)
    raise TypeError(f"expected GraphSurface or ScalarField, got {type(s)}")


def gradient(s) -> VectorField:
    return _as_surface(s).gradient()


def hessian(s) -> SymmetricMatrixField:
    return _as_surface(s).hessian()


def classify_signature(H: SymmetricMatrixField, tau_eig: float = TAU_EIG) -> np.ndarray:
    """Per-point Signature classification via symmetric eigenvalues."""
    if tau_eig <= 0:
        raise ValueError("tau_eig must be positive")
    eig = np.linalg.eigvalsh(H.matrices())
    neg = (eig < -tau_eig).sum(axis=-1)
    pos = (eig > tau_eig).sum(axis=-1)
    degen = (np.abs(eig) <= tau_eig).any(axis=-1)
    n = H.grid.dim
    out = np.full(H.grid.shape, Signature.OTHER_INDEFINITE, dtype=object)
    out[(neg == 1) & (pos == n - 1)] = Signature.LORENTZIAN
    out[pos == n] = Signature.RIEMANNIAN
    out[degen] = Signature.DEGENERATE
    return out


def _det(full: np.ndarray) -> np.ndarray:
    return np.linalg.det(np.moveaxis(full, (0, 1), (-2, -1)))


def _inv(full: np.ndarray, det: np.ndarray, tau: float, err) -> np.ndarray:
    if np.any(np.abs(det) < tau):
        raise err(f"|det| fell below the floor {tau:g}")
    inv = np.linalg.inv(np.moveaxis(full, (0, 1), (-2, -1)))
    return np.moveaxis(inv, (-2, -1), (0, 1))


def psi(s) -> ScalarField:
    """Gauss curvature operator of the graph: det D2u / (1+|Du|^2)^((n+2)/2)."""
    s = _as_surface(s)
    n = s.grid.dim
    du = s.gradient_array()
    d2u = s.hessian_array()
    gsq = np.einsum("i...,i...->...", du, du)
    return ScalarField(s.grid, _det(d2u) / (1.0 + gsq) ** ((n + 2) / 2))


def apply_linearized(s, v: ScalarField, tau_det: float = TAU_DET) -> ScalarField:
    """L_u(v), the derivative of psi at u in direction v."""
    s = _as_surface(s)
    n = s.grid.dim
    h = s.grid.spacing
    du = s.gradient_array()
    d2u = s.hessian_array()
    det = _det(d2u)
    inv = _inv(d2u, det, tau_det, SingularHessian)
    dv = derivatives.grad(v.values, h)
    d2v = derivatives.hess(v.values, h)
    gsq = np.einsum("i...,i...->...", du, du)
    trace = np.einsum("ij...,ji...->...", inv, d2v)
    drift = np.einsum("i...,i...->...", du, dv) / (1.0 + gsq)
    psi_u = det / (1.0 + gsq) ** ((n + 2) / 2)
    return ScalarField(s.grid, psi_u * (trace - (n + 2) * drift))


def _require_lorentzian(H: SymmetricMatrixField, tau_eig: float):
    sig = classify_signature(H, tau_eig)
    if not np.all(sig == Signature.LORENTZIAN):
        bad = np.argwhere(sig != Signature.LORENTZIAN)[0]
        raise NotLorentzian(f"Hessian not Lorentzian at grid index {tuple(bad)}")


def lorentzian_metric(
    s, tau_det: float = TAU_DET, tau_eig: float = TAU_EIG
) -> SymmetricMatrixField:
    """g = |det D2u|^{1/(n-2)} (1+|Du|^2)^{-(n+2)/(n-2)} D2u, n >= 3."""
    s = _as_surface(s)
    n = s.grid.dim
    if n == 2:
        raise DimensionError("n=2 has no conformal metric; use first_order_coeffs_n2")
    d2u = s.hessian_array()
    det = _det(d2u)
    if np.any(np.abs(det) < tau_det):
        raise SingularHessian(f"|det D2u| fell below the floor {tau_det:g}")
    _require_lorentzian(SymmetricMatrixField.from_full(s.grid, d2u), tau_eig)
    du = s.gradient_array()
    gsq = np.einsum("i...,i...->...", du, du)
    scale = np.abs(det) ** (1.0 / (n - 2)) * (1.0 + gsq) ** (-(n + 2) / (n - 2))
    return SymmetricMatrixField.from_full(s.grid, scale * d2u)


def conformal_factor(
    s, tau_det: float = TAU_DET, tau_eig: float = TAU_EIG
) -> ScalarField:
    """f = -|det D2u|^{-(n-1)/(n-2)} (1+|Du|^2)^{n(n+2)/(2(n-2))} < 0, n >= 3."""
    s = _as_surface(s)
    n = s.grid.dim
    if n == 2:
        raise DimensionError("the conformal factor is defined for n >= 3")
    d2u = s.hessian_array()
    det = _det(d2u)
    if np.any(np.abs(det) < tau_det):
        raise SingularHessian(f"|det D2u| fell below the floor {tau_det:g}")
    _require_lorentzian(SymmetricMatrixField.from_full(s.grid, d2u), tau_eig)
    du = s.gradient_array()
    gsq = np.einsum("i...,i...->...", du, du)
    f = -np.abs(det) ** (-(n - 1) / (n - 2)) * (1.0 + gsq) ** (n * (n + 2) / (2 * (n - 2)))
    return ScalarField(s.grid, f)


def first_order_coeffs_n2(
    s, tau_det: float = TAU_DET, tau_eig: float = TAU_EIG
) -> VectorField:
    """b^j = -4 d^{ji} d_i u/(1+|Du|^2) + (1/2) m^{ji} tr(m^{-1} d_i m), n = 2."""
    s = _as_surface(s)
    if s.grid.dim != 2:
        raise DimensionError("first_order_coeffs_n2 requires n = 2")
    du = s.gradient_array()
    m = s.hessian_array()
    det = _det(m)
    minv = _inv(m, det, tau_det, SingularHessian)
    _require_lorentzian(SymmetricMatrixField.from_full(s.grid, m), tau_eig)
    dm = s.third_array()  # dm[i, j, k] = d_i m_{jk}
    gsq = np.einsum("i...,i...->...", du, du)
    b = -4.0 * du / (1.0 + gsq)
    tr = np.einsum("kl...,ilk...->i...", minv, dm)  # tr(m^{-1} d_i m)
    b = b + 0.5 * np.einsum("ji...,i...->j...", minv, tr)
    return VectorField(s.grid, b)


def box_coefficients(g: SymmetricMatrixField, tau_det: float = TAU_DET):
    """(inverse metric, first-order coefficients) of the Laplace-Beltrami op.

    box_g v = g^{ij} d_i d_j v + B^j d_j v with
    B^j = |det g|^{-1/2} d_i (g^{ij} |det g|^{1/2}), derivatives by FD.
    """
    full = g.full()
    det = _det(full)
    ginv = _inv(full, det, tau_det, SingularMetric)
    h = g.grid.spacing
    sq = np.sqrt(np.abs(det))
    d = g.grid.dim
    B = np.zeros((d,) + g.grid.shape)
    for j in range(d):
        for i in range(d):
            B[j] += derivatives.deriv(ginv[i, j] * sq, h, i)
    return ginv, B / sq


def apply_box(g: SymmetricMatrixField, v: ScalarField, tau_det: float = TAU_DET) -> ScalarField:
    """Laplace-Beltrami operator box_g applied to v."""
    ginv, B = box_coefficients(g, tau_det)
    h = g.grid.spacing
    d2v = derivatives.hess(v.values, h)
    dv = derivatives.grad(v.values, h)
    out = np.einsum("ij...,ij...->...", ginv, d2v) + np.einsum("j...,j...->...", B, dv)
    return ScalarField(g.grid, out)


def volume_density(g: SymmetricMatrixField, tau_det: float = TAU_DET) -> ScalarField:
    """sqrt(|det g|) pointwise."""
    det = _det(g.full())
    if np.any(np.abs(det) < tau_det):
        raise SingularMetric(f"|det g| fell below the floor {tau_det:g}")
    return ScalarField(g.grid, np.sqrt(np.abs(det)))


def cofactor_matrix(s) -> SymmetricMatrixField:
    """cof(D2u) = det(D2u) (D2u)^{-1}; its discrete divergence vanishes at O(h^2)."""
    s = _as_surface(s)
    d2u = s.hessian_array()
    det = _det(d2u)
    inv = _inv(d2u, det, TAU_DET, SingularHessian)
    return SymmetricMatrixField.from_full(s.grid, det * inv)


@dataclass(frozen=True)
class SignatureSummary:
    lorentzian_everywhere: bool
    counts: dict


def signature_summary(H: SymmetricMatrixField, tau_eig: float = TAU_EIG) -> SignatureSummary:
    sig = classify_signature(H, tau_eig)
    counts = {s.value: int(np.sum(sig == s)) for s in Signature}
    return SignatureSummary(bool(np.all(sig == Signature.LORENTZIAN)), counts)
