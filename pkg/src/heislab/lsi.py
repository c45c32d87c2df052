"""Log-Sobolev functionals under the heat-kernel measure.

For a function f and the time-t endpoint law, the two sides of the
inequality are estimated from one batch of endpoints:

    entropy  Ent(f^2) = E[f^2 log f^2] - E[f^2] log E[f^2]
    energy   E[ |grad_H f|^2 ]

and the ratio entropy/energy is compared against c_ref * t.  Standard
errors propagate through the nonlinearities by the delta method using the
sample covariance of the three underlying averages, which matters because
entropy and energy are computed from the same draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .calculus import (
    CylinderFunction,
    compose_with_quotient,
    grad_norm_sq_batch,
    make_registry_function,
    value_batch,
)
from .diffusion import (
    SPACE_FULL,
    SPACE_REDUCED,
    EndpointBatch,
    McEstimate,
    PathConfig,
    sample_unit_endpoints,
)
from .model import SymplecticForm, make_isotropic_form, make_nonisotropic_form

__all__ = [
    "DEFAULT_C_REF",
    "LsiReport",
    "entropy",
    "dirichlet_energy",
    "lsi_ratio",
    "FormFamily",
    "ISOTROPIC_FAMILY",
    "ASCENDING_WEIGHTS_FAMILY",
    "family_from_name",
    "ScanResult",
    "lsi_scan",
    "QuotientInvarianceReport",
    "quotient_invariance_report",
]

DEFAULT_C_REF = 4.0
_TINY = 1e-300
# The ratio is only quoted when the energy mean clears its own noise floor.
_ENERGY_SNR = 5.0

STATUS_OK = "ok"
STATUS_UNDEFINED = "ratio_undefined"
STATUS_ERROR = "error"


def _xlogx(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    mask = x > _TINY
    out[mask] = x[mask] * np.log(x[mask])
    return out


@dataclass(frozen=True)
class LsiReport:
    form_name: str
    f_name: str
    n: int
    t: float
    m: int
    entropy: float
    entropy_se: float
    energy: float
    energy_se: float
    ratio: Optional[float]
    ratio_se: Optional[float]
    c_ref: float
    bound: float
    passed: Optional[bool]
    status: str
    message: str = ""
    space: str = SPACE_FULL
    base_seed: int = 42

    def row(self) -> dict:
        """Flat mapping used by the CSV/JSON emitters."""
        return {
            "n": self.n,
            "t": self.t,
            "form": self.form_name,
            "f": self.f_name,
            "entropy": self.entropy,
            "entropy_se": self.entropy_se,
            "energy": self.energy,
            "energy_se": self.energy_se,
            "ratio": self.ratio,
            "ratio_se": self.ratio_se,
            "bound": self.bound,
            "pass": self.passed,
        }


def _moment_arrays(
    form: SymplecticForm,
    cfg: PathConfig,
    f: CylinderFunction,
    m: int,
    space: str,
    workers: int,
    batch: Optional[EndpointBatch],
):
    if m < 2:
        raise ValueError("m must be >= 2")
    if space == SPACE_REDUCED and not f.periodic:
        raise ValueError(f"{f.name}: reduced-space functionals need a periodic function")
    if batch is None:
        batch = sample_unit_endpoints([form], cfg.steps, cfg.base_seed, m, workers)[0]
    elif batch.m < m:
        raise ValueError("supplied batch has fewer samples than requested")
    w = batch.w_at(cfg.t)[:m]
    v = batch.vertical_at(cfg.t, space)[:m]
    vals = value_batch(f, w, v)
    if not np.all(np.isfinite(vals)):
        raise RuntimeError(f"{f.name}: non-finite values in the entropy sample")
    fsq = vals * vals
    ylog = _xlogx(fsq)
    gsq = grad_norm_sq_batch(form, f, w, v)
    if not np.all(np.isfinite(gsq)):
        raise RuntimeError(f"{f.name}: non-finite horizontal gradients")
    return ylog, fsq, gsq


def _entropy_from_moments(a: float, b: float) -> float:
    if b <= _TINY:
        return 0.0
    return a - b * math.log(b)


def entropy(
    form: SymplecticForm,
    cfg: PathConfig,
    f: CylinderFunction,
    m: int,
    space: str = SPACE_FULL,
    workers: int = 1,
    batch: Optional[EndpointBatch] = None,
) -> McEstimate:
    """Ent(f^2) with a delta-method standard error."""
    ylog, fsq, _ = _moment_arrays(form, cfg, f, m, space, workers, batch)
    a, b = float(np.mean(ylog)), float(np.mean(fsq))
    if b <= _TINY:
        raise ValueError(f"{f.name}: f vanishes on every sample; entropy is undefined")
    cov = np.cov(np.stack([ylog, fsq]), ddof=1)
    grad = np.array([1.0, -(1.0 + math.log(b)) if b > _TINY else 0.0])
    var = float(grad @ cov @ grad) / m
    return McEstimate(mean=_entropy_from_moments(a, b), std_error=math.sqrt(max(var, 0.0)), m=m)


def dirichlet_energy(
    form: SymplecticForm,
    cfg: PathConfig,
    f: CylinderFunction,
    m: int,
    space: str = SPACE_FULL,
    workers: int = 1,
    batch: Optional[EndpointBatch] = None,
) -> McEstimate:
    """E[|grad_H f|^2] with its standard error."""
    _, _, gsq = _moment_arrays(form, cfg, f, m, space, workers, batch)
    return McEstimate(
        mean=float(np.mean(gsq)),
        std_error=float(np.std(gsq, ddof=1) / math.sqrt(m)),
        m=m,
    )


def lsi_ratio(
    form: SymplecticForm,
    cfg: PathConfig,
    f: CylinderFunction,
    m: int,
    space: str = SPACE_FULL,
    c_ref: float = DEFAULT_C_REF,
    workers: int = 1,
    batch: Optional[EndpointBatch] = None,
    form_name: str = "custom",
) -> LsiReport:
    """Both sides of the inequality, their ratio, and the pass verdict.

    The verdict compares ratio against c_ref * t with a 3-standard-error
    allowance.  When the energy mean does not exceed 5 of its standard
    errors the ratio is statistically meaningless and is reported as
    undefined rather than as a huge noisy number.
    """
    ylog, fsq, gsq = _moment_arrays(form, cfg, f, m, space, workers, batch)
    a, b, c = float(np.mean(ylog)), float(np.mean(fsq)), float(np.mean(gsq))
    cov = np.cov(np.stack([ylog, fsq, gsq]), ddof=1)
    log_b = math.log(b) if b > _TINY else 0.0
    h = _entropy_from_moments(a, b)

    g_h = np.array([1.0, -(1.0 + log_b) if b > _TINY else 0.0, 0.0])
    h_se = math.sqrt(max(float(g_h @ cov @ g_h), 0.0) / m)
    c_se = math.sqrt(max(float(cov[2, 2]), 0.0) / m)

    bound = c_ref * cfg.t
    base = dict(
        form_name=form_name,
        f_name=f.name,
        n=form.n,
        t=cfg.t,
        m=m,
        entropy=h,
        entropy_se=h_se,
        energy=c,
        energy_se=c_se,
        c_ref=c_ref,
        bound=bound,
        space=space,
        base_seed=cfg.base_seed,
    )
    if not (c > _ENERGY_SNR * c_se and c > 0.0):
        return LsiReport(
            ratio=None,
            ratio_se=None,
            passed=None,
            status=STATUS_UNDEFINED,
            message="energy mean below its noise floor; ratio not quoted",
            **base,
        )
    ratio = h / c
    g_r = np.array([1.0 / c, (-(1.0 + log_b) if b > _TINY else 0.0) / c, -h / (c * c)])
    ratio_se = math.sqrt(max(float(g_r @ cov @ g_r), 0.0) / m)
    passed = ratio <= bound + 3.0 * ratio_se
    return LsiReport(ratio=ratio, ratio_se=ratio_se, passed=passed, status=STATUS_OK, **base)


@dataclass(frozen=True)
class FormFamily:
    """A named rule producing one symplectic form per dimension."""

    name: str
    builder: Callable[[int], SymplecticForm]

    def form(self, n: int) -> SymplecticForm:
        return self.builder(n)


ISOTROPIC_FAMILY = FormFamily("isotropic", make_isotropic_form)
ASCENDING_WEIGHTS_FAMILY = FormFamily(
    "ascending_weights", lambda n: make_nonisotropic_form(tuple(range(2, n + 2)))
)

_FAMILIES = {
    "isotropic": ISOTROPIC_FAMILY,
    "ascending_weights": ASCENDING_WEIGHTS_FAMILY,
}


def family_from_name(name: str) -> FormFamily:
    try:
        return _FAMILIES[name]
    except KeyError:
        raise ValueError(
            f"unknown form family {name!r}; expected one of {sorted(_FAMILIES)}"
        ) from None


@dataclass(frozen=True)
class ScanResult:
    """Grid of reports; iterates like a list and carries max summaries."""

    reports: tuple

    def __iter__(self):
        return iter(self.reports)

    def __len__(self):
        return len(self.reports)

    def __getitem__(self, idx):
        return self.reports[idx]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.reports if r.passed is not None)

    def failed(self) -> list:
        return [r for r in self.reports if r.passed is False]

    def max_ratio_by_dim(self, t: float) -> dict:
        """Per-dimension worst cell (largest defined ratio) at a fixed t."""
        out: dict = {}
        for r in self.reports:
            if r.t != t or r.ratio is None:
                continue
            if r.n not in out or r.ratio > out[r.n].ratio:
                out[r.n] = r
        return out

    def max_ratio_by_function(self, t: float) -> dict:
        """Per-function worst cell (largest defined ratio) at a fixed t."""
        out: dict = {}
        for r in self.reports:
            if r.t != t or r.ratio is None:
                continue
            if r.f_name not in out or r.ratio > out[r.f_name].ratio:
                out[r.f_name] = r
        return out

    def cells(self, **match) -> list:
        return [
            r for r in self.reports if all(getattr(r, k) == v for k, v in match.items())
        ]


def lsi_scan(
    form_family: Union[FormFamily, Sequence[FormFamily]],
    dims: Sequence[int],
    t_list: Sequence[float],
    f_registry: Sequence[str],
    m: int,
    steps: int = 1000,
    base_seed: int = 42,
    c_ref: float = DEFAULT_C_REF,
    space: str = SPACE_FULL,
    workers: int = 1,
) -> ScanResult:
    """Grid of lsi_ratio cells over (family, dimension, t, function).

    All families at one dimension share the same Gaussian draws (only the
    area weighting differs) and the whole t grid reuses them through exact
    Brownian scaling, so the scan cost is one batch per dimension.  A cell
    whose observable is not integrable is reported with status "error"
    instead of aborting the scan.
    """
    families = [form_family] if isinstance(form_family, FormFamily) else list(form_family)
    if not families:
        raise ValueError("need at least one form family")
    reports = []
    for n in dims:
        forms = [fam.form(n) for fam in families]
        batches = sample_unit_endpoints(forms, steps, base_seed, m, workers)
        for fam, form, batch in zip(families, forms, batches):
            for sel in f_registry:
                f = make_registry_function(sel, 2 * n)
                for t in t_list:
                    cfg = PathConfig(t=float(t), steps=steps, base_seed=base_seed)
                    try:
                        rep = lsi_ratio(
                            form,
                            cfg,
                            f,
                            m,
                            space=space,
                            c_ref=c_ref,
                            batch=batch,
                            form_name=fam.name,
                        )
                    except (RuntimeError, ValueError) as exc:
                        rep = LsiReport(
                            form_name=fam.name,
                            f_name=f.name,
                            n=n,
                            t=float(t),
                            m=m,
                            entropy=float("nan"),
                            entropy_se=float("nan"),
                            energy=float("nan"),
                            energy_se=float("nan"),
                            ratio=None,
                            ratio_se=None,
                            c_ref=c_ref,
                            bound=c_ref * float(t),
                            passed=None,
                            status=STATUS_ERROR,
                            message=str(exc),
                            space=space,
                            base_seed=base_seed,
                        )
                    reports.append(rep)
    return ScanResult(reports=tuple(reports))


@dataclass(frozen=True)
class QuotientInvarianceReport:
    """Compares reduced-space evaluation with the lifted full-space one.

    Both paths wrap the vertical coordinate through the same function, so
    values agree bit for bit; with analytic derivatives the gradients and
    every downstream estimate inherit that exact equality.
    """

    f_name: str
    m: int
    t: float
    value_max_abs_diff: float
    grad_sq_max_abs_diff: float
    mean_reduced: float
    mean_lifted: float
    l2_reduced: float
    l2_lifted: float
    entropy_reduced: float
    entropy_lifted: float
    energy_reduced: float
    energy_lifted: float
    values_bitwise_equal: bool
    grads_bitwise_equal: bool

    @property
    def bitwise_equal(self) -> bool:
        return (
            self.values_bitwise_equal
            and self.grads_bitwise_equal
            and self.mean_reduced == self.mean_lifted
            and self.l2_reduced == self.l2_lifted
            and self.entropy_reduced == self.entropy_lifted
            and self.energy_reduced == self.energy_lifted
        )


def quotient_invariance_report(
    form: SymplecticForm,
    cfg: PathConfig,
    f: CylinderFunction,
    m: int,
    workers: int = 1,
    batch: Optional[EndpointBatch] = None,
) -> QuotientInvarianceReport:
    """Evaluate f on wrapped endpoints vs its lift on raw endpoints."""
    if not f.periodic:
        raise ValueError(f"{f.name}: quotient comparison needs a periodic function")
    if batch is None:
        batch = sample_unit_endpoints([form], cfg.steps, cfg.base_seed, m, workers)[0]
    elif batch.m < m:
        raise ValueError("supplied batch has fewer samples than requested")
    lifted = compose_with_quotient(f)
    w = batch.w_at(cfg.t)[:m]
    c = batch.c_at(cfg.t)[:m]
    theta = batch.theta_at(cfg.t)[:m]

    vals_r = value_batch(f, w, theta)
    vals_l = value_batch(lifted, w, c)
    gsq_r = grad_norm_sq_batch(form, f, w, theta)
    gsq_l = grad_norm_sq_batch(form, lifted, w, c)

    fsq_r, fsq_l = vals_r * vals_r, vals_l * vals_l
    ent_r = _entropy_from_moments(float(np.mean(_xlogx(fsq_r))), float(np.mean(fsq_r)))
    ent_l = _entropy_from_moments(float(np.mean(_xlogx(fsq_l))), float(np.mean(fsq_l)))

    return QuotientInvarianceReport(
        f_name=f.name,
        m=m,
        t=cfg.t,
        value_max_abs_diff=float(np.max(np.abs(vals_r - vals_l))),
        grad_sq_max_abs_diff=float(np.max(np.abs(gsq_r - gsq_l))),
        mean_reduced=float(np.mean(vals_r)),
        mean_lifted=float(np.mean(vals_l)),
        l2_reduced=float(np.mean(fsq_r)),
        l2_lifted=float(np.mean(fsq_l)),
        entropy_reduced=ent_r,
        entropy_lifted=ent_l,
        energy_reduced=float(np.mean(gsq_r)),
        energy_lifted=float(np.mean(gsq_l)),
        values_bitwise_equal=bool(np.array_equal(vals_r, vals_l)),
        grads_bitwise_equal=bool(np.array_equal(gsq_r, gsq_l)),
    )
