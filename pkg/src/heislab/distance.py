"""Carnot-Caratheodory distance by direct transcription.

A horizontal path is a polygon in the horizontal space starting at the
origin; its lift gains vertical coordinate 0.5 * omega(sigma_{k-1},
delta sigma_k) per segment, which is exact for piecewise-linear paths.
The distance to (w, c) is the infimum of polygon length over paths whose
endpoint is w and whose accumulated area is c.  That is solved as an
equality-constrained minimization over the interior nodes with an
augmented-Lagrangian outer loop and L-BFGS-B inner solves, warm-started
through a coarse-to-fine node hierarchy.  Midpoint subdivision preserves
both length and area exactly, so refinement never worsens the incumbent.

Everything here is deterministic: the multistart initial guesses (straight
chord plus area-carrying circular detours in symplectically conjugate
planes) are constructed, not sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from .group import GroupElement, ReducedElement, TWO_PI, inverse, multiply
from .model import SymplecticForm

__all__ = [
    "HorizontalPath",
    "LiftedPath",
    "lift",
    "OptimizerOptions",
    "DistanceResult",
    "ReducedDistanceResult",
    "cc_distance",
    "cc_distance_reduced",
    "distance_between",
    "vertical_distance_reference",
    "fiber_lower_bound",
]


@dataclass(frozen=True)
class HorizontalPath:
    """Polygonal horizontal path; node 0 is the origin."""

    nodes: np.ndarray  # (K+1, 2n)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[0] < 2:
            raise ValueError("a path needs a (K+1, 2n) node array with K >= 1")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("path nodes must be finite")
        if np.any(nodes[0] != 0.0):
            raise ValueError("paths start at the origin of the horizontal space")
        object.__setattr__(self, "nodes", nodes)

    @property
    def segments(self) -> int:
        return self.nodes.shape[0] - 1

    def length(self) -> float:
        deltas = np.diff(self.nodes, axis=0)
        return float(np.sum(np.sqrt(np.einsum("kd,kd->k", deltas, deltas))))

    def subdivide(self) -> "HorizontalPath":
        """Insert segment midpoints; length and lifted area are unchanged."""
        nodes = self.nodes
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        out = np.empty((2 * self.segments + 1, nodes.shape[1]))
        out[0::2] = nodes
        out[1::2] = mids
        return HorizontalPath(out)

    def resample(self, segments: int) -> "HorizontalPath":
        """Linear re-interpolation onto a new uniform node index grid."""
        if segments < 1:
            raise ValueError("segments must be >= 1")
        old = np.linspace(0.0, 1.0, self.nodes.shape[0])
        new = np.linspace(0.0, 1.0, segments + 1)
        cols = [np.interp(new, old, self.nodes[:, j]) for j in range(self.nodes.shape[1])]
        return HorizontalPath(np.stack(cols, axis=1))


@dataclass(frozen=True)
class LiftedPath:
    """Horizontal nodes together with the accumulated vertical coordinate."""

    nodes: np.ndarray  # (K+1, 2n)
    vertical: np.ndarray  # (K+1,)

    @property
    def endpoint(self) -> GroupElement:
        return GroupElement(self.nodes[-1].copy(), float(self.vertical[-1]))


def _polygon_area(omega: np.ndarray, nodes: np.ndarray) -> float:
    return 0.5 * float(np.einsum("kd,kd->", nodes[:-1] @ omega, nodes[1:]))


def lift(form: SymplecticForm, path: HorizontalPath) -> LiftedPath:
    """Horizontal lift through the group identity (exact for polygons)."""
    nodes = path.nodes
    if nodes.shape[1] != form.dim:
        raise ValueError("path dimension does not match the form")
    incr = 0.5 * np.einsum("kd,kd->k", nodes[:-1] @ form.omega, nodes[1:])
    vertical = np.concatenate([[0.0], np.cumsum(incr)])
    return LiftedPath(nodes=nodes, vertical=vertical)


@dataclass(frozen=True)
class OptimizerOptions:
    """Budgets for the transcription solver; all defaults are deterministic."""

    coarse_segments: int = 16
    inner_maxiter_coarse: int = 120
    inner_maxiter: int = 250
    al_rounds: int = 10
    rho0: float = 1.0
    penalty_growth: float = 10.0
    c_tol_rel: float = 1e-6
    eps_smooth: float = 1e-12
    bulge_scales: Tuple[float, ...] = (1.0, 0.5)
    gtol: float = 1e-9
    ftol: float = 1e-13


@dataclass(frozen=True)
class DistanceResult:
    estimate: float
    path: HorizontalPath
    c_residual: float
    converged: bool

    def __iter__(self):
        return iter((self.estimate, self.path))


@dataclass(frozen=True)
class ReducedDistanceResult:
    estimate: float
    winning_k: int
    path: HorizontalPath
    c_residual: float
    converged: bool
    candidates: Tuple[Tuple[int, Optional[float]], ...] = field(default=())

    def __iter__(self):
        return iter((self.estimate, self.winning_k))


def _al_solve(omega, w_target, c_target, nodes0, opt, maxiter, mu0=0.0):
    """One augmented-Lagrangian run from a given node polygon.

    Returns (nodes, residual, converged, mu).  The inner problem minimizes
    smoothed length + mu*r + 0.5*rho*r^2 over the interior nodes, where
    r = area(nodes) - c_target; the multiplier and penalty follow the
    standard update (grow rho tenfold when |r| fails to shrink by 4x).
    """
    nodes0 = np.array(nodes0, dtype=float)
    segs, dim = nodes0.shape[0] - 1, nodes0.shape[1]
    first, last = nodes0[0].copy(), nodes0[-1].copy()
    eps = opt.eps_smooth
    tol = opt.c_tol_rel * (1.0 + abs(c_target))

    def assemble(x):
        nodes = np.empty((segs + 1, dim))
        nodes[0], nodes[-1] = first, last
        nodes[1:-1] = x.reshape(segs - 1, dim)
        return nodes

    mu, rho = mu0, opt.rho0
    x = nodes0[1:-1].ravel()
    r_prev = None
    converged = False
    for _ in range(opt.al_rounds):

        def objective(xv, mu=mu, rho=rho):
            nodes = assemble(xv)
            deltas = np.diff(nodes, axis=0)
            s = np.sqrt(np.einsum("kd,kd->k", deltas, deltas) + eps)
            r = _polygon_area(omega, nodes) - c_target
            val = float(np.sum(s)) + mu * r + 0.5 * rho * r * r
            unit = deltas / s[:, None]
            grad = unit[:-1] - unit[1:]
            grad = grad + (mu + rho * r) * (0.5 * (nodes[2:] - nodes[:-2]) @ omega.T)
            return val, grad.ravel()

        res = minimize(
            objective,
            x,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": maxiter, "ftol": opt.ftol, "gtol": opt.gtol},
        )
        x = res.x
        r = _polygon_area(omega, assemble(x)) - c_target
        if abs(r) <= tol:
            converged = True
            break
        mu += rho * r
        if r_prev is not None and abs(r) > 0.25 * abs(r_prev):
            rho *= opt.penalty_growth
        r_prev = r
    return assemble(x), r, converged, mu


def _straight_nodes(w_target, segments):
    frac = np.linspace(0.0, 1.0, segments + 1)
    return frac[:, None] * w_target[None, :]


def _conjugate_planes(omega):
    """Two (u, v) coordinate planes with extreme area efficiency |omega(u,v)|."""
    col_norms = np.linalg.norm(omega, axis=0)
    picks = []
    for i in (int(np.argmax(col_norms)), int(np.argmin(col_norms))):
        if i in picks:
            continue
        picks.append(i)
    planes = []
    for i in picks:
        u = np.zeros(omega.shape[0])
        u[i] = 1.0
        v = omega @ u
        norm = np.linalg.norm(v)
        v = v / norm
        pairing = float(u @ omega @ v)
        planes.append((u, v, pairing))
    return planes


def _circle_nodes(omega, w_target, c_target, segments, u, v, pairing, scale):
    """Straight chord plus a full circular detour carrying area ~ c_target."""
    radius = scale * math.sqrt(abs(c_target) / (math.pi * abs(pairing)))
    orient = 1.0 if c_target * pairing > 0 else -1.0
    phi = np.linspace(0.0, 2.0 * math.pi, segments + 1)
    detour = radius * (
        np.sin(phi)[:, None] * u[None, :] + orient * (1.0 - np.cos(phi))[:, None] * v[None, :]
    )
    detour[0] = 0.0
    detour[-1] = 0.0
    return _straight_nodes(w_target, segments) + detour


def _better(len_a, res_a, len_b, res_b, tol):
    """True when candidate a beats b: feasibility first, then length."""
    feas_a, feas_b = abs(res_a) <= tol, abs(res_b) <= tol
    if feas_a != feas_b:
        return feas_a
    if feas_a:
        return len_a < len_b
    return abs(res_a) < abs(res_b) or (res_a == res_b and len_a < len_b)


def _levels(segments, coarse):
    out = []
    k = min(coarse, segments)
    while k < segments:
        out.append(k)
        k *= 2
    out.append(segments)
    return out


def _true_length(nodes):
    deltas = np.diff(nodes, axis=0)
    return float(np.sum(np.sqrt(np.einsum("kd,kd->k", deltas, deltas))))


def _upsample(nodes, segments):
    path = HorizontalPath(nodes - nodes[0])
    while path.segments * 2 <= segments:
        path = path.subdivide()
    if path.segments != segments:
        path = path.resample(segments)
    return path.nodes + nodes[0]


def cc_distance(
    form: SymplecticForm,
    target: GroupElement,
    K: int = 64,
    opt: Optional[OptimizerOptions] = None,
) -> DistanceResult:
    """Distance from the identity to target, with the realizing polygon.

    Unpacks as (estimate, path); the full result also carries the area
    residual of the returned path and a convergence flag.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    opt = opt or OptimizerOptions()
    w = np.asarray(target.w, dtype=float)
    if w.shape != (form.dim,):
        raise ValueError("target dimension does not match the form")
    c_target = float(target.c)
    omega = form.omega

    if np.all(w == 0.0) and c_target == 0.0:
        path = HorizontalPath(np.zeros((K + 1, form.dim)))
        return DistanceResult(0.0, path, 0.0, True)

    tol = opt.c_tol_rel * (1.0 + abs(c_target))
    levels = _levels(K, opt.coarse_segments)
    k0 = levels[0]

    starts = [_straight_nodes(w, k0)]
    if abs(c_target) > 1e-14 * (1.0 + float(np.linalg.norm(w)) ** 2):
        for u, v, pairing in _conjugate_planes(omega):
            for scale in opt.bulge_scales:
                starts.append(_circle_nodes(omega, w, c_target, k0, u, v, pairing, scale))

    best = None  # (nodes, residual, mu)
    for nodes0 in starts:
        nodes, r, _, mu = _al_solve(omega, w, c_target, nodes0, opt, opt.inner_maxiter_coarse)
        if best is None or _better(_true_length(nodes), r, _true_length(best[0]), best[1], tol):
            best = (nodes, r, mu)

    nodes, r, mu = best
    for segs in levels[1:]:
        up = _upsample(nodes, segs)
        up_len, up_r = _true_length(up), r
        cand, cand_r, _, cand_mu = _al_solve(omega, w, c_target, up, opt, opt.inner_maxiter, mu0=mu)
        if _better(_true_length(cand), cand_r, up_len, up_r, tol):
            nodes, r, mu = cand, cand_r, cand_mu
        else:
            nodes = up

    # Final polish at full resolution if the constraint is not yet met.
    if abs(r) > tol:
        cand, cand_r, _, _ = _al_solve(omega, w, c_target, nodes, opt, opt.inner_maxiter, mu0=mu)
        if _better(_true_length(cand), cand_r, _true_length(nodes), r, tol):
            nodes, r = cand, cand_r

    path = HorizontalPath(nodes)
    return DistanceResult(_true_length(nodes), path, float(r), bool(abs(r) <= tol))


def fiber_lower_bound(form: SymplecticForm, w_norm: float, c: float) -> float:
    """Valid lower bound for the distance to (w, c).

    Any path to (w, c) closed by the straight chord back to the origin
    bounds a loop of length L = len + |w| whose omega-area is exactly c,
    and |c| <= sigma_max * L^2 / (4 pi) by the isoperimetric inequality for
    the minimal spanning surface.  Hence len >= sqrt(4 pi |c| / sigma_max)
    - |w|, and trivially len >= |w|.
    """
    iso = math.sqrt(4.0 * math.pi * abs(c) / form.sv_max) - w_norm
    return max(w_norm, iso, 0.0)


def cc_distance_reduced(
    form: SymplecticForm,
    target: ReducedElement,
    K: int = 64,
    k_window: int = 3,
    opt: Optional[OptimizerOptions] = None,
) -> ReducedDistanceResult:
    """Distance on the reduced group: minimum over fiber representatives.

    Each winding offset k in [-k_window, k_window] names the full-group
    target (w, theta + 2 pi k); candidates are solved in order of their
    lower bound and skipped once the bound cannot beat the incumbent, so
    typically only one to three transcription solves run.
    """
    if k_window < 0:
        raise ValueError("k_window must be >= 0")
    opt = opt or OptimizerOptions()
    w = np.asarray(target.w, dtype=float)
    w_norm = float(np.linalg.norm(w))

    cands = []
    for k in range(-k_window, k_window + 1):
        c_k = float(target.theta + TWO_PI * k)
        cands.append((fiber_lower_bound(form, w_norm, c_k), k, c_k))
    cands.sort(key=lambda item: (item[0], abs(item[1])))

    best: Optional[DistanceResult] = None
    best_k = 0
    evaluated = []
    for bound, k, c_k in cands:
        if best is not None and bound >= best.estimate:
            evaluated.append((k, None))
            continue
        res = cc_distance(form, GroupElement(w, c_k), K=K, opt=opt)
        evaluated.append((k, res.estimate))
        if best is None or _better(
            res.estimate,
            res.c_residual,
            best.estimate,
            best.c_residual,
            opt.c_tol_rel * (1.0 + abs(c_k)),
        ):
            best, best_k = res, k

    evaluated.sort(key=lambda item: item[0])
    return ReducedDistanceResult(
        estimate=best.estimate,
        winning_k=best_k,
        path=best.path,
        c_residual=best.c_residual,
        converged=best.converged,
        candidates=tuple(evaluated),
    )


def distance_between(
    form: SymplecticForm,
    g1: GroupElement,
    g2: GroupElement,
    K: int = 64,
    opt: Optional[OptimizerOptions] = None,
) -> DistanceResult:
    """Left-invariant distance d(g1, g2) = d(e, g1^{-1} g2)."""
    return cc_distance(form, multiply(form, inverse(form, g1), g2), K=K, opt=opt)


def vertical_distance_reference(form: SymplecticForm, c: float) -> float:
    """Smooth-geodesic distance to the purely vertical point (0, c).

    The optimal path is a circle of area |c| / sigma_max in the most
    area-efficient conjugate plane; its perimeter is 2 sqrt(pi |c| /
    sigma_max).  A K-segment polygon exceeds this by the regular-polygon
    isoperimetric gap (about +0.08% at K = 64).
    """
    return 2.0 * math.sqrt(math.pi * abs(c) / form.sv_max)
