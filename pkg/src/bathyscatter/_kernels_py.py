"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""
import numpy as np

EULER_GAMMA = 0.57721566490153286061
SERIES_LIMIT = 12.0
_SERIES_TERMS = 48
_ASYMPTOTIC_TERMS = 40


def _series(x):
    y = 0.25 * x * x
    term = np.ones_like(x)
    j0 = np.ones_like(x)
    tail = np.zeros_like(x)
    harmonic = 0.0
    for k in range(1, _SERIES_TERMS):
        term = -term * y / (k * k)
        harmonic += 1.0 / k
        j0 += term
        tail -= harmonic * term
    y0 = (2.0 / np.pi) * ((np.log(0.5 * x) + EULER_GAMMA) * j0 + tail)
    return j0 + 1j * y0


def _asymptotic(x):
    total = np.ones(x.shape, dtype=np.complex128)
    term = np.ones(x.shape, dtype=np.complex128)
    last = np.full(x.shape, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = term * (-1j) * (2 * k - 1) ** 2 / (8.0 * k * x)
        mag = np.abs(term)
        active &= (mag < last) & (mag > 1e-17)
        if not active.any():
            break
        total = np.where(active, total + term, total)
        last = np.where(active, mag, last)
    return np.sqrt(2.0 / (np.pi * x)) * np.exp(1j * (x - 0.25 * np.pi)) * total


def hankel1_0(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty(x.shape, dtype=np.complex128)
    small = x < SERIES_LIMIT
    if small.any():
        out[small] = _series(x[small])
    if (~small).any():
        out[~small] = _asymptotic(x[~small])
    return out


def dense_from_table(table):
    """Expand a Toeplitz offset table into the dense ``N^2 x N^2`` matrix.

    ``table[a, b]`` is the entry for node offsets ``|di2| = a``, ``|di1| = b``.
    """
    n = table.shape[0]
    idx = np.arange(n)
    d = np.abs(idx[:, None] - idx[None, :])
    # rows (i2, i1), cols (j2, j1)
    return table[d[:, None, :, None], d[None, :, None, :]].reshape(n * n, n * n)
