"""Synthetic seabed topographies with compactly supported perturbations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dispersion import mild_slope_report
from .errors import MildSlopeError
from .grid import DepthMap, Grid, RealField
from .spectral import smooth_step

MAX_DELTA = 1.0 / 3.0
CHECK_OMEGA = 1.0


@dataclass(frozen=True)
class Bump:
    """Gaussian ``amplitude * exp(-r^2 / (2 width^2))`` tapered to zero between 2 and 3 widths.

    For ``ridge`` topographies ``(x, y)`` is a point on the ridge axis and
    ``angle`` (radians from the x1 axis) its direction; ``length`` is the
    half-length of the straight part.
    """

    x: float
    y: float
    amplitude: float
    width: float
    angle: float = 0.0
    length: float = 0.0


@dataclass(frozen=True)
class TopographySpec:
    kind: str = "flat"
    background_depth_m: float = 1.5
    bumps: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in ("flat", "gaussian-bumps", "ridge"):
            raise ValueError(f"unknown topography kind {self.kind!r}")
        if not self.background_depth_m > 0:
            raise ValueError("background depth must be positive")
        object.__setattr__(self, "bumps", tuple(b if isinstance(b, Bump) else Bump(*b) for b in self.bumps))
        for b in self.bumps:
            if not b.width > 0:
                raise ValueError("bump width must be positive")


def _taper(r, width):
    return 1.0 - smooth_step((r - 2.0 * width) / width)


def _elevation(spec: TopographySpec, x1, x2):
    h = np.zeros_like(x1)
    for b in spec.bumps:
        if spec.kind == "ridge":
            c, s = np.cos(b.angle), np.sin(b.angle)
            along = (x1 - b.x) * c + (x2 - b.y) * s
            across = -(x1 - b.x) * s + (x2 - b.y) * c
            excess = np.maximum(np.abs(along) - b.length, 0.0)
            r = np.hypot(across, excess)
        else:
            r = np.hypot(x1 - b.x, x2 - b.y)
        h += b.amplitude * np.exp(-r ** 2 / (2.0 * b.width ** 2)) * _taper(r, b.width)
    return h


def generate_topography(spec: TopographySpec, grid: Grid, check_omega: float = CHECK_OMEGA,
                        max_delta: float = MAX_DELTA) -> DepthMap:
    """Depth ``H0 - h(X)`` on ``grid``.

    Raises
    ------
    MildSlopeError
        If the mild-slope parameter at ``check_omega`` reaches ``max_delta``.
    ValueError
        If the perturbation reaches the grid frame or makes the depth nonpositive.
    """
    H0 = spec.background_depth_m
    x1, x2 = grid.coordinates()
    h = _elevation(spec, x1, x2) if spec.kind != "flat" else np.zeros(grid.shape)
    frame = np.concatenate([h[0], h[-1], h[:, 0], h[:, -1]])
    if np.any(frame != 0.0):
        raise ValueError("topography perturbation must vanish on the grid frame; move bumps inward")
    d = H0 - h
    if np.any(d <= 0):
        raise ValueError("bump amplitudes make the depth nonpositive")
    depth = DepthMap(RealField(grid, d), H0)
    report = mild_slope_report(depth, check_omega)
    if report.delta >= max_delta:
        raise MildSlopeError(
            f"mild-slope parameter {report.delta:.3g} >= {max_delta:.3g}; use wider or lower bumps"
        )
    return depth


PRESETS = {
    "d1": TopographySpec("gaussian-bumps", 1.5,
                         ((38.0, 40.0, 1.0, 8.0), (62.0, 58.0, 0.8, 8.0), (45.0, 65.0, 0.6, 7.0))),
    "d2": TopographySpec("gaussian-bumps", 2.5,
                         ((40.0, 45.0, 1.7, 12.0), (62.0, 60.0, 1.2, 10.0))),
    "gentle": TopographySpec("gaussian-bumps", 1.5, ((49.5, 49.5, 0.3, 16.4),)),
    "flat": TopographySpec("flat", 1.5),
}


def preset(name: str, background_depth_m=None) -> TopographySpec:
    try:
        spec = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown topography preset {name!r}; choose from {sorted(PRESETS)}") from None
    if background_depth_m is not None:
        spec = TopographySpec(spec.kind, float(background_depth_m), spec.bumps)
    return spec


def scaled(spec: TopographySpec, factor: float) -> TopographySpec:
    """Same shapes with every bump amplitude multiplied by ``factor``."""
    bumps = tuple(Bump(b.x, b.y, b.amplitude * factor, b.width, b.angle, b.length) for b in spec.bumps)
    return TopographySpec(spec.kind, spec.background_depth_m, bumps)
