"""Experiment configuration and its flat ``key = value`` text format.

Grammar
-------
One setting per line, ``key = value``.  Blank lines and lines starting with
``#`` are ignored; text after an unquoted ``#`` is a comment.  List values
are comma separated.  Booleans are ``true``/``false``.  Unknown keys and
repeated keys are errors.  Per-frequency lists (``sigma``, ``gamma``,
``alpha``) either hold one value for every frequency or one per entry of
``omegas``.  ``sigma = auto`` (the default) uses 2.5 m for ``omega <= 1.5``
and 1.5 m above.

Example::

    side_length_m = 100
    samples_per_side = 100
    topographies = d1, d2
    omegas = 1, 2
    sigma = 2.5, 1.5
    seed = 0
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .spectral import InversionConfig
from .topography import PRESETS


@dataclass(frozen=True)
class ExperimentConfig:
    side_length_m: float = 100.0
    samples_per_side: int = 100
    refinement: int = 2
    topographies: tuple = ("d1", "d2")
    omegas: tuple = (1.0, 2.0)
    amplitude_m: float = 0.3
    g: float = 9.81
    noise_level: float = 0.1
    noise_kind: str = "complex"
    sigma: tuple = ()
    gamma: tuple = (0.001,)
    alpha: tuple = (0.1,)
    cutoff_margin: Optional[float] = 5.0
    edge_trim: Optional[int] = None
    sampled_kernel: bool = False
    compensate_attenuation: bool = False
    model: str = "simplified"
    solver_tol: float = 1e-10
    seed: int = 0
    output_dir: str = "results"

    def __post_init__(self):
        if self.samples_per_side < 8 or self.refinement < 1:
            raise ConfigError("samples_per_side must be >= 8 and refinement >= 1")
        if not self.side_length_m > 0:
            raise ConfigError("side_length_m must be positive")
        if not self.omegas or any(not w > 0 for w in self.omegas):
            raise ConfigError("omegas must be a nonempty list of positive values")
        for name in self.topographies:
            if name not in PRESETS:
                raise ConfigError(f"unknown topography {name!r}; choose from {sorted(PRESETS)}")
        if self.noise_kind not in ("complex", "real"):
            raise ConfigError("noise_kind must be 'complex' or 'real'")
        if self.model not in ("simplified", "full"):
            raise ConfigError("model must be 'simplified' or 'full'")
        if not self.noise_level >= 0:
            raise ConfigError("noise_level must be nonnegative")
        for name in ("sigma", "gamma", "alpha"):
            vals = getattr(self, name)
            if name == "sigma" and not vals:
                continue
            if len(vals) not in (1, len(self.omegas)):
                raise ConfigError(f"{name} needs 1 or {len(self.omegas)} values, got {len(vals)}")
        try:
            for i in range(len(self.omegas)):
                self.inversion(i)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def _per_omega(self, name, i):
        vals = getattr(self, name)
        if name == "sigma" and not vals:
            return auto_sigma(self.omegas[i])
        return vals[0] if len(vals) == 1 else vals[i]

    def inversion(self, i: int) -> InversionConfig:
        """Inversion settings for the ``i``-th frequency."""
        return InversionConfig(
            sigma=self._per_omega("sigma", i),
            gamma=self._per_omega("gamma", i),
            alpha=self._per_omega("alpha", i),
            cutoff_margin=self.cutoff_margin,
            edge_trim=self.edge_trim,
            sampled_kernel=self.sampled_kernel,
            compensate_attenuation=self.compensate_attenuation,
        )

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def auto_sigma(omega: float) -> float:
    return 2.5 if omega <= 1.5 else 1.5


def sub_seed(root: int, stage: str) -> int:
    """Stage seed: first 8 bytes of ``sha256("<root>:<stage>")`` as an unsigned integer."""
    digest = hashlib.sha256(f"{int(root)}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


# --- text format -----------------------------------------------------------

_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_LISTS = {"topographies": str, "omegas": float, "sigma": float, "gamma": float, "alpha": float}
_SCALARS = {
    "side_length_m": float, "samples_per_side": int, "refinement": int, "amplitude_m": float,
    "g": float, "noise_level": float, "noise_kind": str, "cutoff_margin": float,
    "edge_trim": int, "sampled_kernel": bool, "compensate_attenuation": bool, "model": str,
    "solver_tol": float, "seed": int, "output_dir": str,
}
_OPTIONAL = {"cutoff_margin", "edge_trim"}


def _parse_scalar(kind, text, key):
    text = text.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low not in ("true", "false"):
                raise ValueError(text)
            return low == "true"
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None


def parse_value(key: str, text: str):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    if key == "sigma" and text.strip().lower() == "auto":
        return ()
    if key in _LISTS:
        items = [s for s in (p.strip() for p in text.split(",")) if s]
        if not items:
            raise ConfigError(f"{key}: empty list")
        return tuple(_parse_scalar(_LISTS[key], s, key) for s in items)
    if key in _OPTIONAL and text.strip().lower() in ("", "none", "auto"):
        return None
    return _parse_scalar(_SCALARS[key], text, key)


def parse_config_text(text: str, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = parse_value(key, val)
    try:
        return replace(base or ExperimentConfig(), **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def _format(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v == ():
        return "auto"
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    if v is None:
        return "auto"
    return str(v)


def format_config(cfg: ExperimentConfig) -> str:
    """Serialize ``cfg`` so that :func:`parse_config_text` returns an equal object."""
    return "".join(f"{f.name} = {_format(getattr(cfg, f.name))}\n" for f in fields(cfg))
