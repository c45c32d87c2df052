"""Hypoelliptic Brownian motion and Monte-Carlo expectation machinery.

A path is N Gaussian increments dB_k ~ Normal(0, (t/N) I_{2n}); the endpoint
carries the horizontal sum and the discrete area integral

    w = sum_k dB_k,      c = 0.5 * sum_k omega(B_{k-1}, dB_k)

(left-point rule; the midpoint correction 0.5*omega(dB, dB) vanishes because
omega is skew).  Increments are sqrt(t/N) * Z with Z standard normal, so the
endpoint at time t is exactly (sqrt(t) * w_hat, t * c_hat) where (w_hat,
c_hat) is the unit-time endpoint of the same draws.  One simulated batch
therefore serves a whole t grid with common random numbers, which the
heat-equation residual requires.

Determinism contract: sample i draws from a Philox stream keyed by
(base_seed, i), so results are bit-identical regardless of execution order
or worker count; per-sample values land in index-addressed slots and are
reduced in a fixed order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .calculus import CylinderFunction, grad_norm_sq_batch, sub_laplacian_batch, value_batch
from .group import GroupElement, ReducedElement, quotient, wrap_angle
from .model import SymplecticForm

__all__ = [
    "PathConfig",
    "EndpointSample",
    "McEstimate",
    "EndpointBatch",
    "sample_unit_endpoints",
    "simulate_endpoint",
    "mc_expect",
    "heat_equation_report",
    "heat_equation_residual",
    "HeatCheckReport",
    "levy_area_char_function",
    "CharFunctionPoint",
    "endpoint_moments",
    "SPACE_FULL",
    "SPACE_REDUCED",
]

SPACE_FULL = "G"
SPACE_REDUCED = "Gtilde"
_SPACES = (SPACE_FULL, SPACE_REDUCED)


@dataclass(frozen=True)
class PathConfig:
    """Terminal time, step count, and the base seed of the run."""

    t: float = 1.0
    steps: int = 1000
    base_seed: int = 42

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValueError("t must be positive and finite")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not (0 <= self.base_seed < 2 ** 64):
            raise ValueError("base_seed must fit in 64 bits")


@dataclass(frozen=True)
class EndpointSample:
    g: GroupElement
    reduced: ReducedElement

    def __post_init__(self):
        q = quotient(self.g)
        if not (np.array_equal(q.w, self.reduced.w) and q.theta == self.reduced.theta):
            raise ValueError("reduced endpoint must equal the wrapped full endpoint")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("an estimate needs at least 2 samples")


def _stream(base_seed: int, sample_index: int) -> np.random.Generator:
    key = np.array([base_seed, sample_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class EndpointBatch:
    """Unit-time endpoints of m paths; rescale to any t on demand."""

    form: SymplecticForm
    steps: int
    base_seed: int
    w_hat: np.ndarray  # (m, 2n)
    c_hat: np.ndarray  # (m,)

    @property
    def m(self) -> int:
        return self.w_hat.shape[0]

    def w_at(self, t: float) -> np.ndarray:
        return math.sqrt(t) * self.w_hat

    def c_at(self, t: float) -> np.ndarray:
        return t * self.c_hat

    def theta_at(self, t: float) -> np.ndarray:
        return wrap_angle(self.c_at(t))

    def vertical_at(self, t: float, space: str) -> np.ndarray:
        if space == SPACE_FULL:
            return self.c_at(t)
        if space == SPACE_REDUCED:
            return self.theta_at(t)
        raise ValueError(f"unknown space {space!r}; expected one of {_SPACES}")


def _fill_chunk(omegas, steps, base_seed, lo, hi, w_hat, c_hats):
    dim = omegas[0].shape[0]
    zero_row = np.zeros((1, dim))
    for i in range(lo, hi):
        z = _stream(base_seed, i).standard_normal((steps, dim))
        s = np.cumsum(z, axis=0)
        s_prev = np.concatenate([zero_row, s[:-1]], axis=0)
        for k, om in enumerate(omegas):
            c_hats[k][i] = 0.5 * np.einsum("kj,kj->", s_prev @ om, z)
        w_hat[i] = s[-1]


def sample_unit_endpoints(
    forms: Sequence[SymplecticForm],
    steps: int,
    base_seed: int,
    m: int,
    workers: int = 1,
) -> list:
    """Simulate m unit-time endpoints, one area per supplied form.

    Forms share the same Gaussian draws (they only weight the area), so
    scanning several form families costs one set of normals.  Returns one
    EndpointBatch per form.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    dim = forms[0].dim
    for fm in forms:
        if fm.dim != dim:
            raise ValueError("all forms in one batch must share a dimension")
    omegas = [fm.omega for fm in forms]
    w_hat = np.empty((m, dim))
    c_hats = [np.empty(m) for _ in forms]

    workers = max(1, int(workers))
    if workers == 1 or m < 256:
        _fill_chunk(omegas, steps, base_seed, 0, m, w_hat, c_hats)
    else:
        bounds = np.linspace(0, m, workers * 4 + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(_fill_chunk, omegas, steps, base_seed, lo, hi, w_hat, c_hats)
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for fut in futs:
                fut.result()

    inv_sqrt_n = 1.0 / math.sqrt(steps)
    w_hat *= inv_sqrt_n
    out = []
    for fm, ch in zip(forms, c_hats):
        ch /= steps
        out.append(
            EndpointBatch(form=fm, steps=steps, base_seed=base_seed, w_hat=w_hat, c_hat=ch)
        )
    return out


def simulate_endpoint(form: SymplecticForm, cfg: PathConfig, sample_index: int) -> EndpointSample:
    """Endpoint of one path; bit-identical for identical (base_seed, index)."""
    if sample_index < 0:
        raise ValueError("sample_index must be >= 0")
    dim = form.dim
    z = _stream(cfg.base_seed, sample_index).standard_normal((cfg.steps, dim))
    s = np.cumsum(z, axis=0)
    s_prev = np.concatenate([np.zeros((1, dim)), s[:-1]], axis=0)
    c_hat = 0.5 * np.einsum("kj,kj->", s_prev @ form.omega, z) / cfg.steps
    w_hat = s[-1] / math.sqrt(cfg.steps)
    g = GroupElement(math.sqrt(cfg.t) * w_hat, cfg.t * c_hat)
    return EndpointSample(g=g, reduced=quotient(g))


def _mc_from_values(values: np.ndarray) -> McEstimate:
    m = values.shape[0]
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(m))
    return McEstimate(mean=mean, std_error=se, m=m)


def _require_finite(values: np.ndarray, what: str) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise RuntimeError(
            f"{what} produced {int(bad.sum())} non-finite values out of {values.size}; "
            "the observable is not integrable at these parameters"
        )


def _ensure_batch(
    form: SymplecticForm,
    cfg: PathConfig,
    m: int,
    workers: int,
    batch: Optional[EndpointBatch],
) -> EndpointBatch:
    if batch is not None:
        if batch.m < m:
            raise ValueError("supplied batch has fewer samples than requested")
        return batch
    return sample_unit_endpoints([form], cfg.steps, cfg.base_seed, m, workers)[0]


def mc_expect(
    form: SymplecticForm,
    cfg: PathConfig,
    f: CylinderFunction,
    m: int,
    space: str = SPACE_FULL,
    workers: int = 1,
    batch: Optional[EndpointBatch] = None,
) -> McEstimate:
    """Monte-Carlo mean of f over heat-kernel samples at time cfg.t.

    On the reduced group the vertical argument is wrapped before evaluation;
    combined with the wrapped lift this makes reduced-vs-lifted runs agree
    per sample, bit for bit.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    if space not in _SPACES:
        raise ValueError(f"unknown space {space!r}")
    if space == SPACE_REDUCED and not f.periodic:
        raise ValueError(f"{f.name}: reduced-group expectation needs a periodic function")
    b = _ensure_batch(form, cfg, m, workers, batch)
    vals = value_batch(f, b.w_at(cfg.t)[:m], b.vertical_at(cfg.t, space)[:m])
    _require_finite(vals, f.name)
    return _mc_from_values(vals)


@dataclass(frozen=True)
class HeatCheckReport:
    """Two-sided heat-equation check with common random numbers."""

    residual: float
    std_error: float
    ddt: McEstimate
    half_generator: McEstimate


def heat_equation_report(
    form: SymplecticForm,
    cfg: PathConfig,
    f: CylinderFunction,
    m: int,
    delta_t: float,
    workers: int = 1,
    batch: Optional[EndpointBatch] = None,
) -> HeatCheckReport:
    """Compare d/dt E[f] (central difference) with 0.5 E[L_H f].

    All three time points reuse the same unit-time draws, so the difference
    is computed per sample and its standard error reflects the correlated
    estimator actually used.
    """
    if not (0.0 < delta_t < cfg.t):
        raise ValueError("delta_t must lie in (0, t)")
    b = _ensure_batch(form, cfg, m, workers, batch)
    t0, tp, tm = cfg.t, cfg.t + delta_t, cfg.t - delta_t
    f_plus = value_batch(f, b.w_at(tp)[:m], b.c_at(tp)[:m])
    f_minus = value_batch(f, b.w_at(tm)[:m], b.c_at(tm)[:m])
    _require_finite(f_plus, f.name)
    _require_finite(f_minus, f.name)
    ddt_vals = (f_plus - f_minus) / (2.0 * delta_t)
    lap_vals = sub_laplacian_batch(form, f, b.w_at(t0)[:m], b.c_at(t0)[:m])
    _require_finite(lap_vals, f"L_H {f.name}")
    diff = ddt_vals - 0.5 * lap_vals
    est = _mc_from_values(diff)
    return HeatCheckReport(
        residual=abs(est.mean),
        std_error=est.std_error,
        ddt=_mc_from_values(ddt_vals),
        half_generator=_mc_from_values(0.5 * lap_vals),
    )


def heat_equation_residual(
    form: SymplecticForm,
    cfg: PathConfig,
    f: CylinderFunction,
    m: int,
    delta_t: float,
    workers: int = 1,
    batch: Optional[EndpointBatch] = None,
) -> float:
    return heat_equation_report(form, cfg, f, m, delta_t, workers, batch).residual


@dataclass(frozen=True)
class CharFunctionPoint:
    lam: float
    cos_mean: float
    cos_se: float
    sin_mean: float
    sin_se: float


def levy_area_char_function(
    form: SymplecticForm,
    cfg: PathConfig,
    m: int,
    lambdas: Sequence[float],
    workers: int = 1,
    batch: Optional[EndpointBatch] = None,
) -> list:
    """Empirical E[cos(lambda c_t)] per lambda; the sine channel is a
    symmetry diagnostic and should vanish within noise."""
    b = _ensure_batch(form, cfg, m, workers, batch)
    c = b.c_at(cfg.t)[:m]
    out = []
    for lam in lambdas:
        lam = float(lam)
        if lam == 0.0:
            out.append(CharFunctionPoint(0.0, 1.0, 0.0, 0.0, 0.0))
            continue
        cos_est = _mc_from_values(np.cos(lam * c))
        sin_est = _mc_from_values(np.sin(lam * c))
        out.append(
            CharFunctionPoint(lam, cos_est.mean, cos_est.std_error, sin_est.mean, sin_est.std_error)
        )
    return out


def endpoint_moments(batch: EndpointBatch, t: float, m: Optional[int] = None) -> dict:
    """Second moments used by the simulate diagnostics.

    Exact references for N steps: E[|w|^2] = 2n t and
    E[c^2] = (t^2/8) ||Omega||_F^2 (1 - 1/N)  (partial-sum isometry).
    """
    mm = batch.m if m is None else m
    w = batch.w_at(t)[:mm]
    c = batch.c_at(t)[:mm]
    return {
        "hnorm_sq": _mc_from_values(np.einsum("ij,ij->i", w, w)),
        "c_sq": _mc_from_values(c * c),
        "hnorm_sq_expected": batch.form.dim * t,
        "c_sq_expected_discrete": (t * t / 8.0)
        * batch.form.frobenius_sq()
        * (1.0 - 1.0 / batch.steps),
        "c_sq_expected_continuum": (t * t / 8.0) * batch.form.frobenius_sq(),
    }
