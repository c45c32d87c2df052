"""Experiment configuration: `key = value` lines, comments with `#`.

Every key has a default, so the empty document is a valid experiment
(n=1 isotropic, t=1, N=1000, m=200000, seed=42).  Unknown keys are
errors — silent typos are worse than strictness — and parsing collects
every problem in the document before raising, not just the first.

The resolved configuration (defaults filled in, n inferred from weights)
is echoed into every artifact in a canonical form: sorted `key = value`
lines that parse back to an equal configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional, Tuple

from .calculus import REGISTRY_DEFAULT_SELECTION, make_registry_function
from .diffusion import SPACE_FULL, SPACE_REDUCED
from .lsi import family_from_name
from .model import (
    Projection,
    SymplecticForm,
    check_hormander,
    full_projection,
    make_isotropic_form,
    make_nonisotropic_form,
    make_trace_class_form,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "canonical_text",
    "build_form",
    "build_projection",
]

_FORM_KINDS = ("isotropic", "nonisotropic", "trace_class")


class ConfigError(ValueError):
    """All configuration problems found in one document."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    form: str = "isotropic"
    weights: Optional[Tuple[float, ...]] = None
    n: int = 1
    projection: Optional[Tuple[int, ...]] = None
    t: Tuple[float, ...] = (1.0,)
    steps: int = 1000  # config key: N
    m: int = 200000
    seed: int = 42
    f: Tuple[str, ...] = ()  # empty means the subcommand's default selection
    c_ref: float = 4.0
    space: str = SPACE_FULL
    out: Optional[str] = None
    delta_t: float = 0.05
    K: int = 64
    k_window: int = 3
    lambdas: Tuple[float, ...] = (0.5, 1.0, 2.0)
    dims: Tuple[int, ...] = (1, 2, 3, 4)
    scan_forms: Tuple[str, ...] = ("isotropic", "ascending_weights")
    target_w: Tuple[float, ...] = (3.0, 4.0)
    target_c: float = 0.0

    @property
    def dim(self) -> int:
        return 2 * self.n

    def f_or_default(self, default: Tuple[str, ...] = REGISTRY_DEFAULT_SELECTION):
        return self.f if self.f else tuple(default)


# config key -> dataclass field (identity unless listed)
_KEY_TO_FIELD = {"N": "steps"}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}
_KEYS = tuple(sorted(_FIELD_TO_KEY.get(f.name, f.name) for f in fields(ExperimentConfig)))


def _parse_int(raw: str) -> int:
    return int(raw, 10)


def _parse_float(raw: str) -> float:
    value = float(raw)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError("must be finite")
    return value


def _split_list(raw: str):
    items = [item.strip() for item in raw.split(",")]
    if any(item == "" for item in items):
        raise ValueError("empty list element")
    return items

def _parse_float_list(raw: str) -> Tuple[float, ...]:
    return tuple(_parse_float(item) for item in _split_list(raw))


def _parse_int_list(raw: str) -> Tuple[int, ...]:
    return tuple(_parse_int(item) for item in _split_list(raw))


def _parse_str_list(raw: str) -> Tuple[str, ...]:
    return tuple(_split_list(raw))


# key -> (parser, allows_empty_value_as_unset)
_PARSERS = {
    "form": (str, False),
    "weights": (_parse_float_list, True),
    "n": (_parse_int, False),
    "projection": (_parse_int_list, True),
    "t": (_parse_float_list, False),
    "N": (_parse_int, False),
    "m": (_parse_int, False),
    "seed": (_parse_int, False),
    "f": (_parse_str_list, True),
    "c_ref": (_parse_float, False),
    "space": (str, False),
    "out": (str, True),
    "delta_t": (_parse_float, False),
    "K": (_parse_int, False),
    "k_window": (_parse_int, False),
    "lambdas": (_parse_float_list, False),
    "dims": (_parse_int_list, False),
    "scan_forms": (_parse_str_list, False),
    "target_w": (_parse_float_list, False),
    "target_c": (_parse_float, False),
}

_UNSET_DEFAULTS = {"weights": None, "projection": None, "out": None, "f": ()}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a configuration document.

    Raises ConfigError carrying one message per problem: unknown keys,
    malformed values, inconsistent n/weights, and a failed bracket-
    generation check for the configured projection.
    """
    errors = []
    raw: dict = {}
    explicit = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected `key = value`, got {stripped!r}")
            continue
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _PARSERS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        parser, allows_empty = _PARSERS[key]
        if value == "":
            if allows_empty:
                raw[key] = _UNSET_DEFAULTS[key]
                explicit.discard(key)
            else:
                errors.append(f"line {lineno}: key {key!r} needs a value")
            continue
        try:
            raw[key] = parser(value)
            explicit.add(key)
        except (ValueError, TypeError) as exc:
            errors.append(f"line {lineno}: bad value for {key!r}: {exc}")

    cfg_kwargs = {}
    for key, value in raw.items():
        cfg_kwargs[_KEY_TO_FIELD.get(key, key)] = value
    cfg = ExperimentConfig(**cfg_kwargs)

    errors.extend(_validate(cfg, explicit))
    if errors:
        raise ConfigError(errors)

    # Re-freeze with the inferred dimension so the echo shows resolved values.
    if cfg.weights is not None and "n" not in explicit:
        cfg = ExperimentConfig(**{**cfg_kwargs, "n": len(cfg.weights)})
    return cfg


def _validate(cfg: ExperimentConfig, explicit) -> list:
    errors = []
    if cfg.form not in _FORM_KINDS:
        errors.append(f"form must be one of {_FORM_KINDS}, got {cfg.form!r}")
    if cfg.form == "isotropic" and cfg.weights is not None:
        errors.append("weights apply only to form = nonisotropic | trace_class")
    if cfg.form in ("nonisotropic", "trace_class") and cfg.weights is None:
        errors.append(f"form = {cfg.form} requires the `weights` key")
    if cfg.weights is not None:
        if any(v <= 0 for v in cfg.weights):
            errors.append("weights must be positive")
        if "n" in explicit and cfg.n != len(cfg.weights):
            errors.append(
                f"n = {cfg.n} conflicts with {len(cfg.weights)} weights; drop one of the keys"
            )
    n_eff = len(cfg.weights) if (cfg.weights is not None and "n" not in explicit) else cfg.n
    if n_eff < 1:
        errors.append("n must be >= 1")
    if cfg.steps < 1:
        errors.append("N must be >= 1")
    if cfg.m < 2:
        errors.append("m must be >= 2")
    if not (0 <= cfg.seed < 2 ** 64):
        errors.append("seed must fit in 64 bits")
    if any(t <= 0 for t in cfg.t):
        errors.append("t values must be positive")
    if cfg.delta_t <= 0:
        errors.append("delta_t must be positive")
    if cfg.c_ref <= 0:
        errors.append("c_ref must be positive")
    if cfg.K < 2:
        errors.append("K must be >= 2")
    if cfg.k_window < 0:
        errors.append("k_window must be >= 0")
    if any(d < 1 for d in cfg.dims):
        errors.append("dims must be >= 1")
    if cfg.space not in (SPACE_FULL, SPACE_REDUCED):
        errors.append(f"space must be {SPACE_FULL} or {SPACE_REDUCED}, got {cfg.space!r}")
    for name in cfg.scan_forms:
        try:
            family_from_name(name)
        except ValueError as exc:
            errors.append(str(exc))
    for sel in cfg.f:
        try:
            make_registry_function(sel, 2 * max(n_eff, 1))
        except ValueError as exc:
            errors.append(f"bad f selector {sel!r}: {exc}")
    if not errors and cfg.form in _FORM_KINDS:
        form = None
        try:
            form = build_form(
                ExperimentConfig(form=cfg.form, weights=cfg.weights, n=n_eff)
            )[1]
        except ValueError as exc:
            errors.append(f"cannot build form: {exc}")
        if form is not None and cfg.projection is not None:
            try:
                proj = Projection(cfg.projection)
                if max(cfg.projection) > form.dim:
                    raise ValueError(
                        f"projection index {max(cfg.projection)} exceeds dimension {form.dim}"
                    )
                if not check_hormander(form, proj):
                    raise ValueError(
                        "projection fails the bracket-generation check; the restricted "
                        "form is identically zero"
                    )
            except ValueError as exc:
                errors.append(f"bad projection: {exc}")
    return errors


def build_form(cfg: ExperimentConfig):
    """Construct (model_or_None, SymplecticForm) from a validated config."""
    if cfg.form == "isotropic":
        return None, make_isotropic_form(cfg.n)
    if cfg.form == "nonisotropic":
        return None, make_nonisotropic_form(cfg.weights)
    if cfg.form == "trace_class":
        return make_trace_class_form(cfg.weights, cfg.n)
    raise ValueError(f"unknown form kind {cfg.form!r}")


def build_projection(cfg: ExperimentConfig, form: SymplecticForm) -> Projection:
    if cfg.projection is None:
        return full_projection(form.dim)
    return Projection(cfg.projection)


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    if isinstance(value, tuple):
        return ",".join(_format_value(item) for item in value)
    raise TypeError(f"cannot format {value!r}")


def canonical_text(cfg: ExperimentConfig) -> str:
    """Sorted `key = value` lines; parses back to an equal config."""
    lines = []
    for key in _KEYS:
        value = getattr(cfg, _KEY_TO_FIELD.get(key, key))
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"
