"""Flat key-value run configuration.

The config file format is one ``key = value`` pair per line; blank lines
and ``#`` comments are ignored.  Keys mirror the command-line options, and
explicit command-line values win over the file.  The schema is documented
in the README.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .calculus import default_spacing
from .gridio import load_image
from .phi import Family, PhiField

__all__ = ["ConfigError", "RunConfig", "parse_config_file", "build_phi_field"]


class ConfigError(ValueError):
    pass


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines into a string dict."""
    out = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            key = key.strip()
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            out[key] = value.strip()
    return out


_STR = ("command", "input", "input_u", "input_xi_x", "input_xi_y", "input_f",
        "output_u", "output_xi_x", "output_xi_y", "certificate", "metrics",
        "output", "family", "p_path", "a_path", "w_path", "snapshot_prefix",
        "young_map_out")
_FLOAT = ("p_const", "a_const", "w_const", "q", "h", "lam", "tau", "sigma",
          "theta", "gap_tol", "newton_tol", "tol_gap_rel", "tol_div_rel",
          "noise_sigma", "dt", "s_max")
_INT = ("height", "width", "max_iters", "newton_max", "check_every", "seed",
        "n_steps", "snapshot_every", "pixel_i", "pixel_j", "s_samples")

# config-file spelling for attributes whose name differs
_ALIASES = {"lambda": "lam"}


@dataclass
class RunConfig:
    """Everything a CLI command needs, with solver defaults baked in."""

    command: str = ""
    input: str = ""
    input_u: str = ""
    input_xi_x: str = ""
    input_xi_y: str = ""
    input_f: str = ""
    output_u: str = ""
    output_xi_x: str = ""
    output_xi_y: str = ""
    certificate: str = ""
    metrics: str = ""
    output: str = ""
    young_map_out: str = ""
    snapshot_prefix: str = ""
    family: str = Family.CLASSICAL_TV.value
    p_path: str = ""
    a_path: str = ""
    w_path: str = ""
    p_const: float | None = None
    a_const: float | None = None
    w_const: float | None = None
    q: float | None = None
    h: float | None = None
    height: int = 16
    width: int = 16
    lam: float = 0.1
    tau: float | None = None
    sigma: float | None = None
    theta: float = 1.0
    gap_tol: float = 1e-4
    newton_tol: float = 1e-12
    tol_gap_rel: float = 1e-4
    tol_div_rel: float = 1e-8
    noise_sigma: float = 0.0
    dt: float = 0.05
    s_max: float = 3.0
    max_iters: int = 20000
    newton_max: int = 50
    check_every: int = 10
    seed: int = 0
    n_steps: int = 10
    snapshot_every: int = 0
    pixel_i: int = 0
    pixel_j: int = 0
    s_samples: int = 64

    @classmethod
    def from_mappings(cls, *mappings) -> "RunConfig":
        """Later mappings override earlier ones; values may be strings."""
        known = {f.name for f in fields(cls)}
        merged = {}
        for mapping in mappings:
            for key, value in mapping.items():
                if value is None:
                    continue
                attr = _ALIASES.get(key, key)
                if attr not in known:
                    raise ConfigError(f"unknown configuration key {key!r}")
                merged[attr] = value
        cfg = cls()
        for attr, value in merged.items():
            if isinstance(value, str):
                value = _coerce(attr, value)
            setattr(cfg, attr, value)
        if cfg.noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be >= 0, got {cfg.noise_sigma}")
        return cfg


def _coerce(attr: str, text: str):
    try:
        if attr in _INT:
            return int(text)
        if attr in _FLOAT:
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {attr!r}: {text!r}") from None
    if attr in _STR:
        return text
    raise ConfigError(f"unknown configuration key {attr!r}")


def _load_param(cfg: RunConfig, path_attr: str, const_attr: str, shape, h, what: str):
    path = getattr(cfg, path_attr)
    const = getattr(cfg, const_attr)
    if path:
        grid = load_image(path, h=h)
        if shape is not None and grid.shape != shape:
            raise ConfigError(
                f"{what} grid {path} has shape {grid.shape}, expected {shape}")
        return grid.data
    if const is None:
        raise ConfigError(f"family {cfg.family!r} needs {path_attr} or {const_attr}")
    if shape is None:
        raise ConfigError(f"cannot size a constant {what} field without an input image")
    return np.full(shape, float(const))


_PARAM_ATTRS = {
    Family.VARIABLE_EXPONENT: ("p_path", "p_const", "exponent"),
    Family.DOUBLE_PHASE: ("a_path", "a_const", "weight"),
    Family.POWER_WEIGHTED: ("w_path", "w_const", "weight"),
}


def build_phi_field(cfg: RunConfig, shape=None, h=None) -> PhiField:
    """Construct the integrand from config keys, loading parameter grids as needed.

    ``shape``/``h`` normally come from the input image; without one, the
    geometry comes from a parameter grid file or the ``height``/``width`` keys.
    """
    family = Family(cfg.family)
    if family is Family.CLASSICAL_TV:
        if shape is None:
            shape = (cfg.height, cfg.width)
        hh = h if h is not None else (cfg.h if cfg.h is not None else default_spacing(shape))
        return PhiField.classical_tv(shape, hh)
    path_attr, const_attr, what = _PARAM_ATTRS[family]
    if shape is None and not getattr(cfg, path_attr):
        shape = (cfg.height, cfg.width)
    data = _load_param(cfg, path_attr, const_attr, shape, h, what)
    shape = data.shape if shape is None else shape
    hh = h if h is not None else (cfg.h if cfg.h is not None else default_spacing(shape))
    if family is Family.VARIABLE_EXPONENT:
        return PhiField.variable_exponent(data, hh)
    if family is Family.DOUBLE_PHASE:
        if cfg.q is None:
            raise ConfigError("double_phase needs q")
        return PhiField.double_phase(data, cfg.q, hh)
    return PhiField.power_weighted(data, hh)
