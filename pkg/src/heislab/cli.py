"""Experiment harness: config-driven subcommands with reproducible artifacts.

Every subcommand writes `report.json`, `summary.csv`, and `manifest.json`
into its output directory (plus subcommand-specific extras).  Report and
summary bodies are byte-identical across reruns with the same config;
wall-clock information lives only in the manifest.  Exit codes: 0 success,
1 when at least one emitted row has pass=false, 2 on configuration errors.
"""

from __future__ import annotations

import importlib.metadata
import json
import math
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import click
import numpy as np
import scipy

from . import __version__
from .calculus import make_registry_function
from .config import (
    ConfigError,
    ExperimentConfig,
    build_form,
    canonical_text,
    parse_config,
)
from .diffusion import (
    SPACE_REDUCED,
    PathConfig,
    endpoint_moments,
    heat_equation_report,
    levy_area_char_function,
    sample_unit_endpoints,
)
from .distance import cc_distance, cc_distance_reduced, lift
from .group import GroupElement, ReducedElement, wrap_angle
from .lsi import family_from_name, lsi_scan, quotient_invariance_report
from .model import SymplecticForm

SCHEMA_VERSION = 1

HEAT_DEFAULT_FS = ("poly_radial", "vertical_sq", "gauss_bump(1.0)")
QUOTIENT_DEFAULT_FS = ("cos_theta",)


# ---------------------------------------------------------------------------
# formatting helpers (deterministic, repr-based)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _scrub(obj):
    """Make a structure JSON-safe: cast numpy scalars, map non-finite to null."""
    if isinstance(obj, dict):
        return {key: _scrub(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_scrub(val) for val in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        return val if math.isfinite(val) else None
    return obj


def _csv_text(echo_lines, header, rows) -> str:
    lines = [f"# {line}" for line in echo_lines]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(row[col]) for col in header))
    return "\n".join(lines) + "\n"


def _dat_text(echo_lines, columns, pairs) -> str:
    lines = [f"# {line}" for line in echo_lines]
    lines.append(f"# columns: {columns}")
    for x, y in pairs:
        lines.append(f"{_fmt(x)} {_fmt(y)}")
    return "\n".join(lines) + "\n"


@dataclass
class _Payload:
    results: dict
    header: list
    rows: list
    pass_values: list
    extra_files: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# subcommand implementations


def _run_simulate(cfg: ExperimentConfig, workers: int, dump_endpoints: bool) -> _Payload:
    _, form = build_form(cfg)
    batch = sample_unit_endpoints([form], cfg.steps, cfg.seed, cfg.m, workers)[0]
    rows = []
    for t in cfg.t:
        mom = endpoint_moments(batch, t)
        for metric, est, expected in (
            ("hnorm_sq", mom["hnorm_sq"], mom["hnorm_sq_expected"]),
            ("c_sq", mom["c_sq"], mom["c_sq_expected_discrete"]),
        ):
            gap = est.mean - expected
            z = gap / est.std_error if est.std_error > 0 else 0.0
            rows.append(
                {
                    "t": float(t),
                    "metric": metric,
                    "mean": est.mean,
                    "std_error": est.std_error,
                    "expected": float(expected),
                    "z": float(z),
                    "pass": abs(gap) <= 3.0 * est.std_error,
                }
            )
    payload = _Payload(
        results={"moments": rows, "m": cfg.m, "N": cfg.steps},
        header=["t", "metric", "mean", "std_error", "expected", "z", "pass"],
        rows=rows,
        pass_values=[row["pass"] for row in rows],
    )
    if dump_endpoints:
        t0 = cfg.t[0]
        w = batch.w_at(t0)
        c = batch.c_at(t0)
        theta = batch.theta_at(t0)
        head = ["sample"] + [f"w_{j + 1}" for j in range(form.dim)] + ["c", "theta"]
        dump_rows = [
            {
                "sample": i,
                **{f"w_{j + 1}": w[i, j] for j in range(form.dim)},
                "c": c[i],
                "theta": theta[i],
            }
            for i in range(batch.m)
        ]
        payload.extra_files["endpoints.csv"] = (head, dump_rows)
        payload.results["endpoints_csv_ref"] = "endpoints.csv"
        payload.results["endpoints_t"] = float(t0)
    return payload


def _run_heat_check(cfg: ExperimentConfig, workers: int) -> _Payload:
    if cfg.delta_t >= min(cfg.t):
        raise ConfigError([f"delta_t = {cfg.delta_t} must be smaller than every t in the grid"])
    _, form = build_form(cfg)
    batch = sample_unit_endpoints([form], cfg.steps, cfg.seed, cfg.m, workers)[0]
    rows = []
    for t in cfg.t:
        pcfg = PathConfig(t=float(t), steps=cfg.steps, base_seed=cfg.seed)
        for sel in cfg.f_or_default(HEAT_DEFAULT_FS):
            f = make_registry_function(sel, form.dim)
            rep = heat_equation_report(form, pcfg, f, cfg.m, cfg.delta_t, workers, batch)
            rows.append(
                {
                    "t": float(t),
                    "f": f.name,
                    "residual": rep.ddt.mean - rep.half_generator.mean,
                    "std_error": rep.std_error,
                    "ddt_mean": rep.ddt.mean,
                    "half_generator_mean": rep.half_generator.mean,
                    "pass": rep.residual <= 3.0 * rep.std_error,
                }
            )
    return _Payload(
        results={"heat_check": rows, "delta_t": cfg.delta_t, "m": cfg.m, "N": cfg.steps},
        header=["t", "f", "residual", "std_error", "ddt_mean", "half_generator_mean", "pass"],
        rows=rows,
        pass_values=[row["pass"] for row in rows],
    )


def _run_lsi_scan(cfg: ExperimentConfig, workers: int) -> _Payload:
    families = [family_from_name(name) for name in cfg.scan_forms]
    scan = lsi_scan(
        families,
        cfg.dims,
        cfg.t,
        cfg.f_or_default(),
        cfg.m,
        steps=cfg.steps,
        base_seed=cfg.seed,
        c_ref=cfg.c_ref,
        space=cfg.space,
        workers=workers,
    )
    rows = [rep.row() for rep in scan]
    json_rows = [asdict(rep) for rep in scan]
    summaries = {}
    extra = {}
    for idx, t in enumerate(cfg.t):
        by_dim = scan.max_ratio_by_dim(float(t))
        by_f = scan.max_ratio_by_function(float(t))
        summaries[repr(float(t))] = {
            "per_dimension_max": {str(n): r.row() for n, r in sorted(by_dim.items())},
            "per_form_max": {name: r.row() for name, r in sorted(by_f.items())},
        }
        pairs = [(n, by_dim[n].ratio) for n in sorted(by_dim)]
        extra[f"max_ratio_vs_n_t{idx}.dat"] = ("n max_ratio", pairs)
    return _Payload(
        results={"cells": json_rows, "summaries": summaries},
        header=[
            "n",
            "t",
            "form",
            "f",
            "entropy",
            "entropy_se",
            "energy",
            "energy_se",
            "ratio",
            "ratio_se",
            "bound",
            "pass",
        ],
        rows=rows,
        pass_values=[row["pass"] for row in rows],
        extra_files={name: ("dat", cols, pairs) for name, (cols, pairs) in extra.items()},
    )


def _run_quotient_check(cfg: ExperimentConfig, workers: int) -> _Payload:
    _, form = build_form(cfg)
    fs = []
    for sel in cfg.f_or_default(QUOTIENT_DEFAULT_FS):
        f = make_registry_function(sel, form.dim)
        if not f.periodic:
            raise ConfigError(
                [f"f = {sel} is not vertical-periodic; quotient-check needs periodic functions"]
            )
        fs.append(f)
    batch = sample_unit_endpoints([form], cfg.steps, cfg.seed, cfg.m, workers)[0]
    rows = []
    for t in cfg.t:
        pcfg = PathConfig(t=float(t), steps=cfg.steps, base_seed=cfg.seed)
        for f in fs:
            rep = quotient_invariance_report(form, pcfg, f, cfg.m, workers, batch)
            rows.append(
                {
                    "t": float(t),
                    "f": f.name,
                    "value_max_diff": rep.value_max_abs_diff,
                    "gradsq_max_diff": rep.grad_sq_max_abs_diff,
                    "l2_reduced": rep.l2_reduced,
                    "l2_lifted": rep.l2_lifted,
                    "entropy_reduced": rep.entropy_reduced,
                    "entropy_lifted": rep.entropy_lifted,
                    "energy_reduced": rep.energy_reduced,
                    "energy_lifted": rep.energy_lifted,
                    "pass": rep.bitwise_equal,
                }
            )
    return _Payload(
        results={"quotient_check": rows, "m": cfg.m, "N": cfg.steps},
        header=[
            "t",
            "f",
            "value_max_diff",
            "gradsq_max_diff",
            "l2_reduced",
            "l2_lifted",
            "entropy_reduced",
            "entropy_lifted",
            "energy_reduced",
            "energy_lifted",
            "pass",
        ],
        rows=rows,
        pass_values=[row["pass"] for row in rows],
    )


def _run_distance(cfg: ExperimentConfig) -> _Payload:
    _, form = build_form(cfg)
    w = np.asarray(cfg.target_w, dtype=float)
    if w.shape != (form.dim,):
        raise ConfigError(
            [f"target_w has {w.size} entries but the form needs {form.dim}"]
        )
    if cfg.space == SPACE_REDUCED:
        red = cc_distance_reduced(
            form,
            ReducedElement(w, float(wrap_angle(cfg.target_c))),
            K=cfg.K,
            k_window=cfg.k_window,
        )
        estimate, residual = red.estimate, red.c_residual
        winning_k: Optional[int] = red.winning_k
        path, converged = red.path, red.converged
        candidates = [
            {"k": k, "estimate": est} for k, est in red.candidates
        ]
    else:
        res = cc_distance(form, GroupElement(w, float(cfg.target_c)), K=cfg.K)
        estimate, residual = res.estimate, res.c_residual
        winning_k, path, converged = None, res.path, res.converged
        candidates = []

    lifted = lift(form, path)
    head = ["node"] + [f"w_{j + 1}" for j in range(form.dim)] + ["c"]
    path_rows = [
        {
            "node": k,
            **{f"w_{j + 1}": lifted.nodes[k, j] for j in range(form.dim)},
            "c": lifted.vertical[k],
        }
        for k in range(lifted.nodes.shape[0])
    ]
    results = {
        "estimate": estimate,
        "residual": residual,
        "winning_k": winning_k,
        "K": cfg.K,
        "path_csv_ref": "path.csv",
        "converged": converged,
    }
    if candidates:
        results["fiber_candidates"] = candidates
    row = {
        "estimate": estimate,
        "residual": residual,
        "winning_k": winning_k,
        "K": cfg.K,
        "converged": converged,
        "pass": converged,
    }
    plane_pairs = [(lifted.nodes[k, 0], lifted.nodes[k, 1]) for k in range(lifted.nodes.shape[0])]
    return _Payload(
        results=results,
        header=["estimate", "residual", "winning_k", "K", "converged", "pass"],
        rows=[row],
        pass_values=[row["pass"]],
        extra_files={
            "path.csv": (head, path_rows),
            "path_plane.dat": ("dat", "w_1 w_2", plane_pairs),
        },
    )


def _levy_reference(form: SymplecticForm, lam: float, t: float) -> float:
    pair_weights = np.linalg.svd(form.omega, compute_uv=False)[::2]
    return float(np.prod(1.0 / np.cosh(pair_weights * lam * t / 2.0)))


def _run_levy_cf(cfg: ExperimentConfig, workers: int) -> _Payload:
    _, form = build_form(cfg)
    batch = sample_unit_endpoints([form], cfg.steps, cfg.seed, cfg.m, workers)[0]
    rows = []
    extra = {}
    for idx, t in enumerate(cfg.t):
        pcfg = PathConfig(t=float(t), steps=cfg.steps, base_seed=cfg.seed)
        points = levy_area_char_function(form, pcfg, cfg.m, cfg.lambdas, workers, batch)
        curve = []
        for pt in points:
            ref = _levy_reference(form, pt.lam, float(t))
            # first-order allowance for the finite-step area variance deficit
            allowance = (pt.lam ** 2) * (float(t) ** 2) * form.frobenius_sq() / (16.0 * cfg.steps)
            ok = abs(pt.cos_mean - ref) <= 3.0 * pt.cos_se + allowance and abs(
                pt.sin_mean
            ) <= 3.0 * pt.sin_se + 1e-12
            rows.append(
                {
                    "t": float(t),
                    "lambda": pt.lam,
                    "cos_mean": pt.cos_mean,
                    "cos_se": pt.cos_se,
                    "sin_mean": pt.sin_mean,
                    "sin_se": pt.sin_se,
                    "reference": ref,
                    "pass": ok,
                }
            )
            curve.append((pt.lam, pt.cos_mean))
        extra[f"cf_curve_t{idx}.dat"] = ("dat", "lambda cos_mean", curve)
        extra[f"cf_reference_t{idx}.dat"] = (
            "dat",
            "lambda reference",
            [(pt.lam, _levy_reference(form, pt.lam, float(t))) for pt in points],
        )
    return _Payload(
        results={"char_function": rows, "m": cfg.m, "N": cfg.steps},
        header=["t", "lambda", "cos_mean", "cos_se", "sin_mean", "sin_se", "reference", "pass"],
        rows=rows,
        pass_values=[row["pass"] for row in rows],
        extra_files=extra,
    )


# ---------------------------------------------------------------------------
# dispatch and artifact writing

_SUBCOMMANDS = ("simulate", "heat-check", "lsi-scan", "quotient-check", "distance", "levy-cf")


def run(
    subcommand: str,
    cfg: ExperimentConfig,
    workers: int = 1,
    out: Optional[str] = None,
    dump_endpoints: bool = False,
) -> int:
    """Execute one subcommand and write its artifacts; returns the exit code."""
    started = time.perf_counter()
    if subcommand not in _SUBCOMMANDS:
        click.echo(f"unknown subcommand {subcommand!r}; expected one of {_SUBCOMMANDS}", err=True)
        return 2
    try:
        if subcommand == "simulate":
            payload = _run_simulate(cfg, workers, dump_endpoints)
        elif subcommand == "heat-check":
            payload = _run_heat_check(cfg, workers)
        elif subcommand == "lsi-scan":
            payload = _run_lsi_scan(cfg, workers)
        elif subcommand == "quotient-check":
            payload = _run_quotient_check(cfg, workers)
        elif subcommand == "distance":
            payload = _run_distance(cfg)
        else:
            payload = _run_levy_cf(cfg, workers)
    except ConfigError as exc:
        for msg in exc.errors:
            click.echo(f"config error: {msg}", err=True)
        return 2

    out_dir = out or cfg.out or f"{subcommand}-out"
    echo_lines = canonical_text(cfg).splitlines()
    overall = all(v is not False for v in payload.pass_values)
    report = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "config": echo_lines,
        "results": payload.results,
        "overall_pass": overall,
    }
    try:
        os.makedirs(out_dir, exist_ok=True)
        _write(out_dir, "report.json", json.dumps(_scrub(report), sort_keys=True, indent=2) + "\n")
        _write(out_dir, "summary.csv", _csv_text(echo_lines, payload.header, payload.rows))
        for name, spec in payload.extra_files.items():
            if spec[0] == "dat":
                _write(out_dir, name, _dat_text(echo_lines, spec[1], spec[2]))
            else:
                _write(out_dir, name, _csv_text(echo_lines, spec[0], spec[1]))
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "subcommand": subcommand,
            "config": echo_lines,
            "config_defaults": canonical_text(ExperimentConfig()).splitlines(),
            "seed": cfg.seed,
            "versions": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "click": importlib.metadata.version("click"),
                "package": __version__,
            },
            "wall_time_s": time.perf_counter() - started,
            "generated_unix": time.time(),
        }
        _write(out_dir, "manifest.json", json.dumps(_scrub(manifest), sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        click.echo(f"cannot write artifact {getattr(exc, 'filename', out_dir)!r}: {exc}", err=True)
        return 2
    click.echo(f"{subcommand}: {'ok' if overall else 'FAIL'} ({len(payload.rows)} rows) -> {out_dir}")
    return 0 if overall else 1


def _write(out_dir: str, name: str, text: str) -> None:
    with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# click wiring


def _load_config(config_path: Optional[str], overrides) -> ExperimentConfig:
    text = ""
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    for item in overrides:
        text += "\n" + item
    return parse_config(text)


def _common(fn):
    fn = click.option("--config", "config_path", default=None,
                      type=click.Path(exists=True, dir_okay=False),
                      help="Path to a key = value config file.")(fn)
    fn = click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                      help="Override one config key (repeatable; later wins).")(fn)
    fn = click.option("--workers", type=int, default=1, show_default=True,
                      help="Worker threads; results are identical for any count.")(fn)
    fn = click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False),
                      help="Output directory (default: <subcommand>-out).")(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="heislab")
def main():
    """Heisenberg-group diffusion laboratory: simulate, check, scan, measure."""


def _invoke(subcommand, config_path, overrides, workers, out_dir, dump_endpoints=False):
    try:
        cfg = _load_config(config_path, overrides)
    except ConfigError as exc:
        for msg in exc.errors:
            click.echo(f"config error: {msg}", err=True)
        sys.exit(2)
    sys.exit(run(subcommand, cfg, workers=workers, out=out_dir, dump_endpoints=dump_endpoints))


@main.command("simulate")
@_common
@click.option("--dump-endpoints", is_flag=True, help="Also write raw endpoints.csv.")
def _cmd_simulate(config_path, overrides, workers, out_dir, dump_endpoints):
    """Endpoint moments of the hypoelliptic diffusion vs exact references."""
    _invoke("simulate", config_path, overrides, workers, out_dir, dump_endpoints)


@main.command("heat-check")
@_common
def _cmd_heat_check(config_path, overrides, workers, out_dir):
    """Two-sided heat-equation residual d/dt E[f] - 0.5 E[L f]."""
    _invoke("heat-check", config_path, overrides, workers, out_dir)


@main.command("lsi-scan")
@_common
def _cmd_lsi_scan(config_path, overrides, workers, out_dir):
    """Entropy/energy ratio grid over dimensions, forms, times, functions."""
    _invoke("lsi-scan", config_path, overrides, workers, out_dir)


@main.command("quotient-check")
@_common
def _cmd_quotient_check(config_path, overrides, workers, out_dir):
    """Bitwise comparison of reduced-group vs lifted full-group functionals."""
    _invoke("quotient-check", config_path, overrides, workers, out_dir)


@main.command("distance")
@_common
def _cmd_distance(config_path, overrides, workers, out_dir):
    """Constrained-path distance to a configured target element."""
    _invoke("distance", config_path, overrides, workers, out_dir)


@main.command("levy-cf")
@_common
def _cmd_levy_cf(config_path, overrides, workers, out_dir):
    """Characteristic function of the vertical coordinate vs closed form."""
    _invoke("levy-cf", config_path, overrides, workers, out_dir)


if __name__ == "__main__":
    main()
