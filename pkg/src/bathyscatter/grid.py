"""Uniform square grids, immutable fields on them, DFT helpers and file I/O.

Index convention: a field on an ``N x N`` grid is stored as a C-ordered
array ``values[i2, i1]`` so that the flattened (row-major) vector has the
x1 index running fastest.  Node ``(i1, i2)`` sits at ``(i1 * h, i2 * h)``
with ``h = L / N``.  Every other module relies on this layout.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import FieldFormatError

MAGIC = b"BSCF1\n"
_HEADER = struct.Struct("<IdB")
KIND_REAL = 0
KIND_COMPLEX = 1


@dataclass(frozen=True)
class Grid:
    """Uniform discretization of the square ``[0, L) x [0, L)``."""

    side_length_m: float
    samples_per_side: int

    def __post_init__(self):
        if int(self.samples_per_side) != self.samples_per_side or self.samples_per_side < 8:
            raise ValueError(f"samples_per_side must be an integer >= 8, got {self.samples_per_side}")
        if not (np.isfinite(self.side_length_m) and self.side_length_m > 0):
            raise ValueError(f"side_length_m must be positive, got {self.side_length_m}")
        object.__setattr__(self, "samples_per_side", int(self.samples_per_side))
        object.__setattr__(self, "side_length_m", float(self.side_length_m))

    @property
    def n(self) -> int:
        return self.samples_per_side

    @property
    def spacing(self) -> float:
        return self.side_length_m / self.samples_per_side

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def axis(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X1, X2)`` node coordinates, each of shape ``(N, N)``."""
        x = self.axis()
        return np.meshgrid(x, x)

    def refined(self, factor: int) -> "Grid":
        return Grid(self.side_length_m, self.n * factor)


def _frozen(values, dtype):
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RealField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        if np.iscomplexobj(arr):
            raise TypeError("RealField values must be real")
        arr = _frozen(arr, np.float64).reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("RealField values must be finite")
        object.__setattr__(self, "values", arr)

    def with_values(self, values) -> "RealField":
        return RealField(self.grid, values)


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values, np.complex128).reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("ComplexField values must be finite")
        object.__setattr__(self, "values", arr)

    def with_values(self, values) -> "ComplexField":
        return ComplexField(self.grid, values)


Field = Union[RealField, ComplexField]


@dataclass(frozen=True, eq=False)
class DepthMap:
    """Positive depth field equal to the background depth on the grid frame."""

    base: RealField
    background_depth_m: float

    def __post_init__(self):
        v = self.base.values
        if not self.background_depth_m > 0:
            raise ValueError("background depth must be positive")
        if np.any(v <= 0):
            raise ValueError("depth must be positive everywhere")
        frame = np.concatenate([v[0], v[-1], v[:, 0], v[:, -1]])
        if np.any(frame != self.background_depth_m):
            raise ValueError("depth must equal the background depth on the grid frame")

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    @classmethod
    def flat(cls, grid: Grid, depth: float) -> "DepthMap":
        return cls(RealField(grid, np.full(grid.shape, float(depth))), float(depth))


def frame_mask(grid: Grid, width: int = 1) -> np.ndarray:
    """Boolean mask of the ``width`` outermost rings of nodes."""
    m = np.zeros(grid.shape, dtype=bool)
    if width > 0:
        m[:width, :] = m[-width:, :] = True
        m[:, :width] = m[:, -width:] = True
    return m


# --- discrete Fourier transform -------------------------------------------

def dft2_forward(f: Field) -> ComplexField:
    """Unnormalized 2D DFT."""
    return ComplexField(f.grid, np.fft.fft2(f.values))


def dft2_inverse(F: ComplexField) -> ComplexField:
    """Inverse of :func:`dft2_forward` (carries the ``1/N^2`` factor)."""
    return ComplexField(F.grid, np.fft.ifft2(F.values))


def frequency_indices(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Signed integer mode numbers ``(n1, n2)`` laid out like the DFT output."""
    n = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    return np.meshgrid(n, n)


# --- binary field format ----------------------------------------------------

def write_field(f: Field, path) -> None:
    """Write ``f`` in the little-endian BSCF1 format."""
    kind = KIND_COMPLEX if isinstance(f, ComplexField) else KIND_REAL
    if kind == KIND_COMPLEX:
        payload = np.ascontiguousarray(f.values).view(np.float64)
    else:
        payload = np.ascontiguousarray(f.values)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(f.grid.n, f.grid.side_length_m, kind))
        fh.write(payload.astype("<f8", copy=False).tobytes())


def read_field(path) -> Field:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC):
        raise FieldFormatError("truncated magic", len(data))
    if data[: len(MAGIC)] != MAGIC:
        for i, (a, b) in enumerate(zip(data, MAGIC)):
            if a != b:
                raise FieldFormatError("bad magic", i)
    off = len(MAGIC)
    if len(data) < off + _HEADER.size:
        raise FieldFormatError("truncated header", len(data))
    n, side, kind = _HEADER.unpack_from(data, off)
    if kind not in (KIND_REAL, KIND_COMPLEX):
        raise FieldFormatError(f"invalid kind byte {kind}", off + 12)
    off += _HEADER.size
    count = n * n * (2 if kind == KIND_COMPLEX else 1)
    need = off + 8 * count
    if len(data) < need:
        raise FieldFormatError(f"truncated payload: expected {need} bytes, got {len(data)}", len(data))
    if len(data) > need:
        raise FieldFormatError("trailing bytes after payload", need)
    try:
        grid = Grid(side, n)
    except ValueError as exc:
        raise FieldFormatError(f"invalid grid header: {exc}", len(MAGIC)) from None
    raw = np.frombuffer(data, dtype="<f8", count=count, offset=off).astype(np.float64)
    if kind == KIND_COMPLEX:
        return ComplexField(grid, raw.view(np.complex128).reshape(n, n))
    return RealField(grid, raw.reshape(n, n))


# --- text exports ----------------------------------------------------------

def export_pgm(f: RealField, path, vmin: float, vmax: float) -> None:
    """Plain PGM (P2) with 255 gray levels.

    Gray level is ``floor(255 * (v - vmin) / (vmax - vmin))`` clamped to
    ``[0, 255]``, so the midpoint maps to 127.  Image row ``r`` holds grid
    row ``i2 = r``.
    """
    if not vmax > vmin:
        raise ValueError(f"export_pgm needs max > min, got min={vmin}, max={vmax}")
    scaled = np.floor(255.0 * (f.values - vmin) / (vmax - vmin))
    levels = np.clip(scaled, 0, 255).astype(int)
    n = f.grid.n
    lines = ["P2", f"{n} {n}", "255"]
    lines += [" ".join(map(str, row)) for row in levels]
    Path(path).write_text("\n".join(lines) + "\n")


def export_csv(f: RealField, path) -> None:
    rows = (",".join("%.17g" % v for v in row) for row in f.values)
    Path(path).write_text("\n".join(rows) + "\n")
