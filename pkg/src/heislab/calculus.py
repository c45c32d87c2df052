"""Cylinder functions and left-invariant differential calculus.

A cylinder function reads only a coordinate block of the horizontal part
plus the vertical coordinate: f(g) = F(P w, c).  Differentiating the group
law along g * exp(t X) for X = (A, a) gives the left-invariant derivative

    X~ f (w, c) = <grad_w F, A> + (a + 0.5*omega(w, A)) * dF/dc,

from which the horizontal gradient and the sub-Laplacian follow:

    (grad_H f)_j = dF/dw_j + 0.5*omega(w, e_j) * dF/dc          (j = 1..2n)
    L_H f       = sum_j [ d2F/dw_j2 + omega(w, e_j) * d2F/dw_j dc
                          + 0.25*omega(w, e_j)^2 * d2F/dc2 ].

Note the omega(w, e_j) coupling runs over all 2n directions even when F
only reads a sub-block, so gradients have full length 2n.  The same
formulas hold on the reduced group with theta in place of c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .group import GroupElement, LieVector, ReducedElement, wrap_angle
from .model import Projection, SymplecticForm, full_projection

__all__ = [
    "CylinderFunction",
    "Derivatives",
    "left_invariant_derivative",
    "second_invariant_derivative",
    "horizontal_gradient",
    "grad_norm_sq",
    "sub_laplacian",
    "compose_with_quotient",
    "compose_scalar",
    "multiply_functions",
    "make_registry_function",
    "registry_names",
    "REGISTRY_DEFAULT_SELECTION",
]

_EPS = float(np.finfo(float).eps)
_H_FIRST = _EPS ** (1.0 / 3.0)
_H_SECOND = _EPS ** 0.25

# tolerance of the construction-time periodicity probe
_PERIODICITY_TOL = 1e-10


@dataclass(frozen=True)
class Derivatives:
    """Value and partials of F at one point (projected coordinates)."""

    value: float
    grad_w: np.ndarray
    d_c: float
    hess_ww: np.ndarray
    hess_wc: np.ndarray
    d_cc: float


@dataclass(frozen=True)
class CylinderFunction:
    """F over a coordinate projection plus the vertical coordinate.

    F and the optional partials must be vectorized: wp has shape (..., 2m)
    (the projected coordinates in index order), v has shape (...), and every
    callable returns arrays with matching leading axes.

    derivative_mode "analytic" uses the supplied partials; "numeric" uses
    central differences with steps eps^(1/3)*(1+|x|) for first and
    eps^(1/4)*(1+|x|) for second derivatives.

    periodic=True declares 2*pi-periodicity in the vertical argument (checked
    at construction on a probe grid); only periodic functions may be read on
    the reduced group.
    """

    name: str
    projection: Projection
    F: Callable
    periodic: bool = False
    derivative_mode: str = "analytic"
    dF_dw: Optional[Callable] = None
    dF_dc: Optional[Callable] = None
    d2F_dww: Optional[Callable] = None
    d2F_dwc: Optional[Callable] = None
    d2F_dcc: Optional[Callable] = None

    def __post_init__(self):
        if self.derivative_mode not in ("analytic", "numeric"):
            raise ValueError("derivative_mode must be 'analytic' or 'numeric'")
        if self.periodic:
            self._check_periodicity()

    def _check_periodicity(self):
        rng = np.random.Generator(np.random.Philox(key=np.array([7, 11], dtype=np.uint64)))
        wp = rng.standard_normal((8, self.projection.size))
        th = rng.uniform(0.0, 2.0 * math.pi, size=8)
        a = np.asarray(self.F(wp, th), float)
        b = np.asarray(self.F(wp, th + 2.0 * math.pi), float)
        scale = 1.0 + np.max(np.abs(a))
        if np.max(np.abs(a - b)) > _PERIODICITY_TOL * scale:
            raise ValueError(f"{self.name}: F is not 2*pi-periodic in the vertical argument")

    # -- evaluation ---------------------------------------------------------

    def value(self, wp, v):
        return np.asarray(self.F(np.asarray(wp, float), np.asarray(v, float)), float)

    def first_derivs(self, wp, v):
        """(dF/dw (..., 2m), dF/dc (...)) at the given points."""
        wp = np.asarray(wp, float)
        v = np.asarray(v, float)
        if self.derivative_mode == "analytic":
            if self.dF_dw is None or self.dF_dc is None:
                raise ValueError(f"{self.name}: missing first partials in analytic mode")
            return np.asarray(self.dF_dw(wp, v), float), np.asarray(self.dF_dc(wp, v), float)
        return self._numeric_first(wp, v)

    def second_derivs(self, wp, v):
        """(d2F/dww (..., 2m, 2m), d2F/dwc (..., 2m), d2F/dcc (...))."""
        wp = np.asarray(wp, float)
        v = np.asarray(v, float)
        if self.derivative_mode == "analytic":
            if self.d2F_dww is None or self.d2F_dwc is None or self.d2F_dcc is None:
                raise ValueError(f"{self.name}: missing second partials in analytic mode")
            return (
                np.asarray(self.d2F_dww(wp, v), float),
                np.asarray(self.d2F_dwc(wp, v), float),
                np.asarray(self.d2F_dcc(wp, v), float),
            )
        return self._numeric_second(wp, v)

    def derivatives(self, wp, v) -> Derivatives:
        """Full bundle at a single point."""
        wp = np.asarray(wp, float)
        gw, gv = self.first_derivs(wp, v)
        hww, hwv, hvv = self.second_derivs(wp, v)
        return Derivatives(
            value=float(self.value(wp, v)),
            grad_w=np.asarray(gw, float),
            d_c=float(gv),
            hess_ww=np.asarray(hww, float),
            hess_wc=np.asarray(hwv, float),
            d_cc=float(hvv),
        )

    # -- central differences ------------------------------------------------

    def _numeric_first(self, wp, v):
        k = wp.shape[-1]
        gw = np.empty_like(wp)
        for j in range(k):
            h = _H_FIRST * (1.0 + np.abs(wp[..., j]))
            up = wp.copy()
            dn = wp.copy()
            up[..., j] += h
            dn[..., j] -= h
            gw[..., j] = (self.value(up, v) - self.value(dn, v)) / (2.0 * h)
        hv = _H_FIRST * (1.0 + np.abs(v))
        gv = (self.value(wp, v + hv) - self.value(wp, v - hv)) / (2.0 * hv)
        return gw, gv

    def _numeric_second(self, wp, v):
        k = wp.shape[-1]
        f0 = self.value(wp, v)

        def shift(j, amount):
            out = wp.copy()
            out[..., j] += amount
            return out

        hs = [_H_SECOND * (1.0 + np.abs(wp[..., j])) for j in range(k)]
        hww = np.empty(wp.shape + (k,))
        for i in range(k):
            hww[..., i, i] = (
                self.value(shift(i, hs[i]), v) - 2.0 * f0 + self.value(shift(i, -hs[i]), v)
            ) / hs[i] ** 2
            for j in range(i + 1, k):
                pp = shift(i, hs[i]); pp[..., j] += hs[j]
                pm = shift(i, hs[i]); pm[..., j] -= hs[j]
                mp = shift(i, -hs[i]); mp[..., j] += hs[j]
                mm = shift(i, -hs[i]); mm[..., j] -= hs[j]
                val = (
                    self.value(pp, v) - self.value(pm, v) - self.value(mp, v) + self.value(mm, v)
                ) / (4.0 * hs[i] * hs[j])
                hww[..., i, j] = val
                hww[..., j, i] = val
        hv = _H_SECOND * (1.0 + np.abs(v))
        hvv = (self.value(wp, v + hv) - 2.0 * f0 + self.value(wp, v - hv)) / hv ** 2
        hwv = np.empty_like(wp)
        for j in range(k):
            hwv[..., j] = (
                self.value(shift(j, hs[j]), v + hv)
                - self.value(shift(j, hs[j]), v - hv)
                - self.value(shift(j, -hs[j]), v + hv)
                + self.value(shift(j, -hs[j]), v - hv)
            ) / (4.0 * hs[j] * hv)
        return hww, hwv, hvv


# -- helpers ---------------------------------------------------------------


def _vertical_of(g) -> float:
    if isinstance(g, GroupElement):
        return g.c
    if isinstance(g, ReducedElement):
        return g.theta
    raise TypeError(f"not a group element: {type(g).__name__}")


def _check_compat(form: SymplecticForm, f: CylinderFunction, g) -> np.ndarray:
    ix = f.projection.zero_based
    if g.w.shape[0] != form.dim:
        raise ValueError("element dimension does not match the form")
    if ix.max() >= form.dim:
        raise ValueError("function projection exceeds the form dimension")
    return ix


# -- point operations -------------------------------------------------------


def left_invariant_derivative(
    form: SymplecticForm, f: CylinderFunction, X: LieVector, g
) -> float:
    """(d/dt)|_0 f(g * exp(t X)) = <grad_w F, A> + (a + 0.5*omega(w,A)) dF/dc."""
    ix = _check_compat(form, f, g)
    if X.A.shape[0] != form.dim:
        raise ValueError("Lie vector dimension mismatch")
    v = _vertical_of(g)
    gw, gv = f.first_derivs(g.w[ix], v)
    rate = X.a + 0.5 * form.pair(g.w, X.A)
    return float(np.dot(gw, X.A[ix]) + rate * gv)


def second_invariant_derivative(
    form: SymplecticForm, f: CylinderFunction, X: LieVector, g
) -> float:
    """(d/dt)^2|_0 f(g * exp(t X)).

    The curve t -> g * exp(tX) is affine in coordinates with vertical rate
    r = a + 0.5*omega(w, A), so the value is
    A^T Hww A + 2 r A^T Hwc + r^2 Hcc over the embedded Hessian.
    """
    ix = _check_compat(form, f, g)
    v = _vertical_of(g)
    hww, hwc, hcc = f.second_derivs(g.w[ix], v)
    Ap = X.A[ix]
    r = X.a + 0.5 * form.pair(g.w, X.A)
    return float(Ap @ hww @ Ap + 2.0 * r * np.dot(Ap, hwc) + r * r * hcc)


def horizontal_gradient(form: SymplecticForm, f: CylinderFunction, g) -> np.ndarray:
    """Vector of length 2n with entries (e_j,0)~ f at g."""
    ix = _check_compat(form, f, g)
    v = _vertical_of(g)
    gw, gv = f.first_derivs(g.w[ix], v)
    u = form.pair_with_basis(g.w)  # omega(w, e_j) over all j
    out = 0.5 * gv * u
    out[ix] += gw
    return out


def grad_norm_sq(form: SymplecticForm, f: CylinderFunction, g) -> float:
    grad = horizontal_gradient(form, f, g)
    return float(np.dot(grad, grad))


def sub_laplacian(form: SymplecticForm, f: CylinderFunction, g) -> float:
    """Sum over the 2n basis directions of the squared horizontal fields."""
    ix = _check_compat(form, f, g)
    v = _vertical_of(g)
    hww, hwc, hcc = f.second_derivs(g.w[ix], v)
    u = form.pair_with_basis(g.w)
    return float(
        np.trace(hww) + np.dot(u[ix], hwc) + 0.25 * np.dot(u, u) * hcc
    )


# -- batched evaluation over endpoint clouds --------------------------------


def value_batch(f: CylinderFunction, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    return f.value(w[:, f.projection.zero_based], v)


def grad_norm_sq_batch(
    form: SymplecticForm, f: CylinderFunction, w: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """||grad_H f||^2 at stacked points; w is (m, 2n), v is (m,).

    Components split into the projected block (with the dF/dw term) and the
    complement (pure vertical coupling):
    ||gw + 0.5 gv u_P||^2 + 0.25 gv^2 (||u||^2 - ||u_P||^2).
    """
    ix = f.projection.zero_based
    gw, gv = f.first_derivs(w[:, ix], v)
    u = form.pair_with_basis(w)
    up = u[:, ix]
    inner = gw + 0.5 * gv[:, None] * up
    full = np.einsum("ij,ij->i", inner, inner)
    tail = np.einsum("ij,ij->i", u, u) - np.einsum("ij,ij->i", up, up)
    return full + 0.25 * gv * gv * tail


def sub_laplacian_batch(
    form: SymplecticForm, f: CylinderFunction, w: np.ndarray, v: np.ndarray
) -> np.ndarray:
    ix = f.projection.zero_based
    hww, hwc, hcc = f.second_derivs(w[:, ix], v)
    u = form.pair_with_basis(w)
    up = u[:, ix]
    tr = np.trace(hww, axis1=-2, axis2=-1)
    return tr + np.einsum("ij,ij->i", up, hwc) + 0.25 * np.einsum("ij,ij->i", u, u) * hcc


# -- combinators ------------------------------------------------------------


def compose_with_quotient(f: CylinderFunction) -> CylinderFunction:
    """Lift a periodic function to the full group: (f o phi)(w, c) = F(w, wrap(c)).

    Because the lift wraps its vertical argument with the same wrap used for
    reduced endpoints, the per-sample identity (f o phi)(g) = f(phi(g)) holds
    bit for bit, and likewise for every derivative.  In numeric mode the
    wrapped seam c = 0 mod 2*pi is a measure-zero set where central
    differences straddle the jump; analytic partials are exact everywhere.
    """
    if not f.periodic:
        raise ValueError(f"{f.name}: only periodic functions factor through the quotient")

    def lift(call):
        if call is None:
            return None
        return lambda wp, v: call(wp, wrap_angle(np.asarray(v, float)))

    return replace(
        f,
        name=f.name + "_lifted",
        F=lift(f.F),
        dF_dw=lift(f.dF_dw),
        dF_dc=lift(f.dF_dc),
        d2F_dww=lift(f.d2F_dww),
        d2F_dwc=lift(f.d2F_dwc),
        d2F_dcc=lift(f.d2F_dcc),
        periodic=True,
    )


def compose_scalar(
    phi: Callable,
    dphi: Optional[Callable],
    d2phi: Optional[Callable],
    f: CylinderFunction,
    name: Optional[str] = None,
) -> CylinderFunction:
    """Post-compose with a smooth scalar map: g -> phi(f(g)).

    Chain rule: grad(phi o f) = phi'(f) grad f, so |phi'| <= 1 contracts the
    gradient norm pointwise.
    """
    if f.derivative_mode == "analytic" and (dphi is None or d2phi is None):
        raise ValueError("analytic composition needs dphi and d2phi")

    def F(wp, v):
        return phi(f.F(wp, v))

    # numeric mode differentiates the composite directly; drop stale partials
    kwargs = dict(dF_dw=None, dF_dc=None, d2F_dww=None, d2F_dwc=None, d2F_dcc=None)
    if f.derivative_mode == "analytic":
        base_F = f.F
        base_gw, base_gv = f.dF_dw, f.dF_dc
        base_hww, base_hwc, base_hcc = f.d2F_dww, f.d2F_dwc, f.d2F_dcc

        def dF_dw(wp, v):
            return dphi(base_F(wp, v))[..., None] * np.asarray(base_gw(wp, v), float)

        def dF_dc(wp, v):
            return dphi(base_F(wp, v)) * np.asarray(base_gv(wp, v), float)

        def d2F_dww(wp, v):
            val = base_F(wp, v)
            gw = np.asarray(base_gw(wp, v), float)
            d1 = np.asarray(dphi(val), float)
            d2 = np.asarray(d2phi(val), float)
            outer = gw[..., :, None] * gw[..., None, :]
            return d1[..., None, None] * np.asarray(base_hww(wp, v), float) + d2[..., None, None] * outer

        def d2F_dwc(wp, v):
            val = base_F(wp, v)
            gw = np.asarray(base_gw(wp, v), float)
            gv = np.asarray(base_gv(wp, v), float)
            d1 = np.asarray(dphi(val), float)
            d2 = np.asarray(d2phi(val), float)
            return d1[..., None] * np.asarray(base_hwc(wp, v), float) + d2[..., None] * gw * gv[..., None]

        def d2F_dcc(wp, v):
            val = base_F(wp, v)
            gv = np.asarray(base_gv(wp, v), float)
            return dphi(val) * np.asarray(base_hcc(wp, v), float) + d2phi(val) * gv * gv

        kwargs = dict(dF_dw=dF_dw, dF_dc=dF_dc, d2F_dww=d2F_dww, d2F_dwc=d2F_dwc, d2F_dcc=d2F_dcc)

    return replace(
        f,
        name=name or f"composed({f.name})",
        F=F,
        **kwargs,
    )


def multiply_functions(f1: CylinderFunction, f2: CylinderFunction) -> CylinderFunction:
    """Pointwise product with Leibniz partials; projections must coincide."""
    if f1.projection != f2.projection:
        raise ValueError("product requires identical projections")
    if f1.derivative_mode != "analytic" or f2.derivative_mode != "analytic":
        raise ValueError("product combinator needs analytic partials on both factors")

    def F(wp, v):
        return f1.F(wp, v) * f2.F(wp, v)

    def dF_dw(wp, v):
        return (
            np.asarray(f1.dF_dw(wp, v), float) * np.asarray(f2.F(wp, v), float)[..., None]
            + np.asarray(f1.F(wp, v), float)[..., None] * np.asarray(f2.dF_dw(wp, v), float)
        )

    def dF_dc(wp, v):
        return f1.dF_dc(wp, v) * f2.F(wp, v) + f1.F(wp, v) * f2.dF_dc(wp, v)

    def d2F_dww(wp, v):
        a, b = np.asarray(f1.F(wp, v), float), np.asarray(f2.F(wp, v), float)
        ga, gb = np.asarray(f1.dF_dw(wp, v), float), np.asarray(f2.dF_dw(wp, v), float)
        cross = ga[..., :, None] * gb[..., None, :]
        return (
            np.asarray(f1.d2F_dww(wp, v), float) * b[..., None, None]
            + cross
            + np.swapaxes(cross, -1, -2)
            + a[..., None, None] * np.asarray(f2.d2F_dww(wp, v), float)
        )

    def d2F_dwc(wp, v):
        a, b = np.asarray(f1.F(wp, v), float), np.asarray(f2.F(wp, v), float)
        ga, gb = np.asarray(f1.dF_dw(wp, v), float), np.asarray(f2.dF_dw(wp, v), float)
        va, vb = np.asarray(f1.dF_dc(wp, v), float), np.asarray(f2.dF_dc(wp, v), float)
        return (
            np.asarray(f1.d2F_dwc(wp, v), float) * b[..., None]
            + ga * vb[..., None]
            + gb * va[..., None]
            + a[..., None] * np.asarray(f2.d2F_dwc(wp, v), float)
        )

    def d2F_dcc(wp, v):
        return (
            f1.d2F_dcc(wp, v) * f2.F(wp, v)
            + 2.0 * f1.dF_dc(wp, v) * f2.dF_dc(wp, v)
            + f1.F(wp, v) * f2.d2F_dcc(wp, v)
        )

    return CylinderFunction(
        name=f"{f1.name}*{f2.name}",
        projection=f1.projection,
        F=F,
        periodic=f1.periodic and f2.periodic,
        derivative_mode="analytic",
        dF_dw=dF_dw,
        dF_dc=dF_dc,
        d2F_dww=d2F_dww,
        d2F_dwc=d2F_dwc,
        d2F_dcc=d2F_dcc,
    )


# -- named registry ----------------------------------------------------------

REGISTRY_DEFAULT_SELECTION = (
    "poly_radial",
    "vertical_sq",
    "exp_linear(0.5)",
    "cos_theta",
    "gauss_bump(1.0)",
)


def _zeros_like_wp(wp):
    return np.zeros(wp.shape)


def _zeros_scalar(wp, v):
    return np.zeros(np.broadcast(wp[..., 0], v).shape)


def _make_poly_radial(dim: int) -> CylinderFunction:
    proj = full_projection(dim)

    def hess(wp, v):
        eye = 2.0 * np.eye(wp.shape[-1])
        return np.broadcast_to(eye, wp.shape + (wp.shape[-1],)).copy()

    return CylinderFunction(
        name="poly_radial",
        projection=proj,
        F=lambda wp, v: np.einsum("...i,...i->...", wp, wp),
        periodic=True,  # no vertical dependence
        dF_dw=lambda wp, v: 2.0 * wp,
        dF_dc=_zeros_scalar,
        d2F_dww=hess,
        d2F_dwc=lambda wp, v: _zeros_like_wp(wp),
        d2F_dcc=_zeros_scalar,
    )


def _make_vertical_sq(dim: int) -> CylinderFunction:
    proj = Projection((1, 2))  # any even block works; F ignores wp

    def zero_hess(wp, v):
        k = wp.shape[-1]
        return np.zeros(wp.shape + (k,))

    return CylinderFunction(
        name="vertical_sq",
        projection=proj,
        F=lambda wp, v: np.asarray(v, float) ** 2,
        periodic=False,
        dF_dw=lambda wp, v: _zeros_like_wp(wp),
        dF_dc=lambda wp, v: 2.0 * np.asarray(v, float),
        d2F_dww=zero_hess,
        d2F_dwc=lambda wp, v: _zeros_like_wp(wp),
        d2F_dcc=lambda wp, v: np.full(np.shape(v), 2.0) if np.ndim(v) else 2.0,
    )


def _make_exp_linear(dim: int, lam: float = 0.5) -> CylinderFunction:
    lam = float(lam)
    proj = Projection((1, 2))

    def F(wp, v):
        return np.exp(lam * wp[..., 0])

    def dF_dw(wp, v):
        out = np.zeros(wp.shape)
        out[..., 0] = lam * F(wp, v)
        return out

    def d2F_dww(wp, v):
        k = wp.shape[-1]
        out = np.zeros(wp.shape + (k,))
        out[..., 0, 0] = lam * lam * F(wp, v)
        return out

    return CylinderFunction(
        name=f"exp_linear({lam:g})",
        projection=proj,
        F=F,
        periodic=True,
        dF_dw=dF_dw,
        dF_dc=_zeros_scalar,
        d2F_dww=d2F_dww,
        d2F_dwc=lambda wp, v: _zeros_like_wp(wp),
        d2F_dcc=_zeros_scalar,
    )


def _make_cos_theta(dim: int) -> CylinderFunction:
    proj = Projection((1, 2))

    def zero_hess(wp, v):
        k = wp.shape[-1]
        return np.zeros(wp.shape + (k,))

    return CylinderFunction(
        name="cos_theta",
        projection=proj,
        F=lambda wp, v: np.cos(np.asarray(v, float)),
        periodic=True,
        dF_dw=lambda wp, v: _zeros_like_wp(wp),
        dF_dc=lambda wp, v: -np.sin(np.asarray(v, float)),
        d2F_dww=zero_hess,
        d2F_dwc=lambda wp, v: _zeros_like_wp(wp),
        d2F_dcc=lambda wp, v: -np.cos(np.asarray(v, float)),
    )


def _make_gauss_bump(dim: int, sigma: float = 1.0) -> CylinderFunction:
    sigma = float(sigma)
    if sigma <= 0:
        raise ValueError("gauss_bump needs sigma > 0")
    proj = full_projection(dim)
    s2 = sigma * sigma

    def F(wp, v):
        r2 = np.einsum("...i,...i->...", wp, wp) + np.asarray(v, float) ** 2
        return np.exp(-r2 / (2.0 * s2))

    def dF_dw(wp, v):
        return -(wp / s2) * F(wp, v)[..., None]

    def dF_dc(wp, v):
        return -(np.asarray(v, float) / s2) * F(wp, v)

    def d2F_dww(wp, v):
        k = wp.shape[-1]
        f = F(wp, v)
        outer = wp[..., :, None] * wp[..., None, :] / (s2 * s2)
        return (outer - np.eye(k) / s2) * f[..., None, None]

    def d2F_dwc(wp, v):
        return (wp * np.asarray(v, float)[..., None] / (s2 * s2)) * F(wp, v)[..., None]

    def d2F_dcc(wp, v):
        vv = np.asarray(v, float)
        return (vv * vv / (s2 * s2) - 1.0 / s2) * F(wp, v)

    return CylinderFunction(
        name=f"gauss_bump({sigma:g})",
        projection=proj,
        F=F,
        periodic=False,
        dF_dw=dF_dw,
        dF_dc=dF_dc,
        d2F_dww=d2F_dww,
        d2F_dwc=d2F_dwc,
        d2F_dcc=d2F_dcc,
    )


_REGISTRY = {
    "poly_radial": (_make_poly_radial, 0),
    "vertical_sq": (_make_vertical_sq, 0),
    "exp_linear": (_make_exp_linear, 1),
    "cos_theta": (_make_cos_theta, 0),
    "gauss_bump": (_make_gauss_bump, 1),
}


def registry_names():
    return tuple(sorted(_REGISTRY))


def make_registry_function(selector: str, dim: int) -> CylinderFunction:
    """Build a named test function, e.g. "poly_radial" or "exp_linear(0.5)".

    dim is the full horizontal dimension 2n of the model the function will
    be evaluated on.
    """
    sel = selector.strip()
    args = ()
    if "(" in sel:
        if not sel.endswith(")"):
            raise ValueError(f"malformed function selector: {selector!r}")
        head, inner = sel[:-1].split("(", 1)
        sel = head.strip()
        inner = inner.strip()
        if inner:
            try:
                args = tuple(float(tok) for tok in inner.split(","))
            except ValueError:
                raise ValueError(f"malformed parameters in selector: {selector!r}") from None
    if sel not in _REGISTRY:
        raise ValueError(f"unknown function {sel!r}; known: {', '.join(registry_names())}")
    factory, nargs = _REGISTRY[sel]
    if len(args) > nargs:
        raise ValueError(f"{sel} takes at most {nargs} parameter(s)")
    if dim < 2 or dim % 2 != 0:
        raise ValueError("dim must be an even integer >= 2")
    return factory(dim, *args)
