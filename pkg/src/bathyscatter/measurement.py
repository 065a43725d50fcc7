"""Time snapshots of a harmonic wave field, noise injection and amplitude masks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError
from .grid import ComplexField, Grid, RealField

MIN_DETERMINANT = 1e-6


def snapshot(eta: ComplexField, omega: float, t: float) -> RealField:
    """Surface elevation ``Re{eta} cos(wt) - Im{eta} sin(wt)`` at time ``t``."""
    v = eta.values
    return RealField(eta.grid, v.real * np.cos(omega * t) - v.imag * np.sin(omega * t))


def recover_complex(z1: RealField, z2: RealField, t1: float, t2: float, omega: float) -> ComplexField:
    """Invert two snapshots at times ``t1``, ``t2`` back to the complex amplitude.

    Each node solves ``[[c1, -s1], [c2, -s2]] (Re, Im) = (z1, z2)`` whose
    determinant is ``sin(omega (t2 - t1))``.
    """
    if z1.grid != z2.grid:
        raise ValueError("snapshots live on different grids")
    c1, s1 = np.cos(omega * t1), np.sin(omega * t1)
    c2, s2 = np.cos(omega * t2), np.sin(omega * t2)
    det = c2 * s1 - c1 * s2
    if abs(det) < MIN_DETERMINANT:
        raise ConditioningError(
            f"snapshot times are nearly degenerate: |sin(omega*dt)| = {abs(det):.3e}"
        )
    a, b = z1.values, z2.values
    re = (-s2 * a + s1 * b) / det
    im = (-c2 * a + c1 * b) / det
    return ComplexField(z1.grid, re + 1j * im)


@dataclass(frozen=True, eq=False)
class Measurement:
    """Noisy measured field together with the achieved relative noise level."""

    field: ComplexField
    noise_level: float
    seed: int

    @property
    def grid(self) -> Grid:
        return self.field.grid


def _scaled_noise(shape, level, norm, seed, complex_noise=True):
    rng = np.random.default_rng(seed)
    if complex_noise:
        e = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    else:
        e = rng.standard_normal(shape)
    return e * (level * norm / np.linalg.norm(e))


def add_noise(m: ComplexField, level: float, seed: int) -> Measurement:
    """Add Gaussian noise scaled so that ``||eps|| / ||m|| == level``.

    Real and imaginary parts are drawn independently from
    ``numpy.random.default_rng(seed)``.
    """
    if not level >= 0:
        raise ValueError("noise level must be nonnegative")
    if level == 0:
        return Measurement(m, 0.0, int(seed))
    norm = np.linalg.norm(m.values)
    if norm == 0:
        raise ValueError("cannot scale relative noise on a zero field")
    eps = _scaled_noise(m.grid.shape, level, norm, seed)
    achieved = float(np.linalg.norm(eps) / norm)
    return Measurement(m.with_values(m.values + eps), achieved, int(seed))


def add_snapshot_noise(eta: ComplexField, omega: float, level: float, seed: int,
                       t1: float = 0.0, t2=None) -> Measurement:
    """Real-noise alternative: perturb two snapshots, then recover the complex field.

    The level is relative to the clean snapshots.  The reported noise level
    is the achieved relative error of the recovered complex field.
    """
    if t2 is None:
        t2 = t1 + np.pi / (2.0 * omega)
    z1, z2 = snapshot(eta, omega, t1), snapshot(eta, omega, t2)
    if level == 0:
        return Measurement(recover_complex(z1, z2, t1, t2, omega), 0.0, int(seed))
    ss = np.random.SeedSequence(seed).spawn(2)
    noisy = []
    for z, s in zip((z1, z2), ss):
        norm = np.linalg.norm(z.values)
        if norm == 0:
            raise ValueError("cannot scale relative noise on a zero snapshot")
        noisy.append(z.with_values(z.values + _scaled_noise(z.grid.shape, level, norm, s, False)))
    rec = recover_complex(noisy[0], noisy[1], t1, t2, omega)
    achieved = float(np.linalg.norm(rec.values - eta.values) / np.linalg.norm(eta.values))
    return Measurement(rec, achieved, int(seed))


@dataclass(frozen=True, eq=False)
class GammaMask:
    gamma: float
    mask: np.ndarray

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)


def gamma_mask(m, gamma: float) -> GammaMask:
    """Nodes where the measured amplitude is at least ``gamma``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    field = m.field if isinstance(m, Measurement) else m
    return GammaMask(float(gamma), np.abs(field.values) >= gamma)
