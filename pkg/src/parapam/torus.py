"""Fourier representation of real scalar fields on the torus [0, 2*pi)^2.

Fields are plain ``float64`` arrays of shape ``(n, n)``; entry ``[i, j]``
holds the value at ``(x1, x2) = (i*h, j*h)`` with ``h = 2*pi/n``.  The
Fourier convention is

    f(x) = sum_k fhat(k) exp(i k.x),   fhat(k) = n**-2 sum_x f(x) exp(-i k.x)

with integer wavevectors ``k`` in ``{-n/2, ..., n/2 - 1}^2``.  Internally the
real-to-complex layout of :func:`scipy.fft.rfft2` is used for all multiplier
work; :func:`forward_transform` exposes the full complex table.
"""
from __future__ import annotations

import functools
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft as sfft

TWO_PI = 2.0 * np.pi
PFLD_MAGIC = b"PFLD"


@dataclass(frozen=True)
class GridSpec:
    """Uniform n x n grid on the 2*pi-periodic torus."""

    n: int

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {n!r}")

    @property
    def length(self) -> float:
        return TWO_PI

    @property
    def h(self) -> float:
        return TWO_PI / self.n

    @property
    def points(self):
        x = np.arange(self.n) * self.h
        return np.meshgrid(x, x, indexing="ij")

    @functools.cached_property
    def k1(self):
        """First wavevector component on the rfft layout, shape (n, 1)."""
        return (sfft.fftfreq(self.n) * self.n)[:, None]

    @functools.cached_property
    def k2(self):
        """Second wavevector component on the rfft layout, shape (1, n//2+1)."""
        return (sfft.rfftfreq(self.n) * self.n)[None, :]

    @functools.cached_property
    def ksq(self):
        return self.k1**2 + self.k2**2

    @functools.cached_property
    def kabs(self):
        return np.sqrt(self.ksq)

    @functools.cached_property
    def dealias_mask(self):
        """True on modes kept by the two-thirds rule (|k_i| < n/3)."""
        cut = self.n / 3.0
        return (np.abs(self.k1) < cut) & (np.abs(self.k2) < cut)

    @functools.cached_property
    def hermitian_weight(self):
        """Multiplicity of each rfft entry in the full spectrum (1 or 2)."""
        w = np.full((self.n, self.n // 2 + 1), 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0
        return w


@functools.lru_cache(maxsize=None)
def grid_for(n: int) -> GridSpec:
    return GridSpec(int(n))


def grid_of(f) -> GridSpec:
    f = np.asarray(f)
    if f.ndim < 2 or f.shape[-1] != f.shape[-2]:
        raise ValueError(f"expected square field(s), got shape {f.shape}")
    return grid_for(f.shape[-1])


def check_field(f) -> np.ndarray:
    """Validate a real field and return it as a float64 array."""
    f = np.asarray(f, dtype=float)
    grid_of(f)
    if not np.all(np.isfinite(f)):
        raise ValueError("field contains non-finite values")
    return f


def same_grid(*fields) -> GridSpec:
    grids = {np.shape(f)[-1] for f in fields}
    if len(grids) != 1:
        raise ValueError(f"grid mismatch: sizes {sorted(grids)}")
    return grid_of(fields[0])


# -- transforms ---------------------------------------------------------------

def rfft(f) -> np.ndarray:
    """Normalized half-spectrum: coefficients in the ``exp(i k.x)`` convention."""
    f = np.asarray(f, dtype=float)
    return sfft.rfft2(f, norm="forward")


def irfft(fhat, n: int) -> np.ndarray:
    return sfft.irfft2(fhat, s=(n, n), norm="forward")


def forward_transform(f) -> np.ndarray:
    """Full complex coefficient table ``c[k1 mod n, k2 mod n]``."""
    f = check_field(f)
    return sfft.fft2(f, norm="forward")


def inverse_transform(coeffs) -> np.ndarray:
    """Inverse of :func:`forward_transform`; the imaginary residue is dropped."""
    coeffs = np.asarray(coeffs)
    return sfft.ifft2(coeffs, norm="forward").real


def wavenumbers(n: int):
    """Integer wavevector components matching :func:`forward_transform`."""
    k = sfft.fftfreq(n) * n
    return np.meshgrid(k, k, indexing="ij")


# -- multipliers --------------------------------------------------------------

def heat_symbol(t: float):
    """Symbol of the heat semigroup P_t."""
    if t < 0:
        raise ValueError("heat semigroup needs t >= 0")
    return lambda grid: np.exp(-t * grid.ksq)


def laplacian_symbol(grid: GridSpec):
    return -grid.ksq


def apply_multiplier(symbol, f) -> np.ndarray:
    """Apply a real-field-preserving Fourier multiplier.

    ``symbol`` is either an array on the rfft layout or a callable taking a
    :class:`GridSpec` and returning such an array.  Operates on the last two
    axes, so stacks of fields are accepted.
    """
    f = np.asarray(f, dtype=float)
    grid = grid_of(f)
    m = symbol(grid) if callable(symbol) else np.asarray(symbol)
    if not np.all(np.isfinite(m)):
        raise ValueError("multiplier symbol undefined at a resolved wavevector")
    return irfft(m * rfft(f), grid.n)


def heat(f, t: float) -> np.ndarray:
    return apply_multiplier(heat_symbol(t), f)


def laplacian(f) -> np.ndarray:
    return apply_multiplier(laplacian_symbol, f)


def inv_neg_laplacian_zero_mean(f) -> np.ndarray:
    """Zero-mean X with -Laplacian(X) = f - mean(f)."""
    f = np.asarray(f, dtype=float)
    grid = grid_of(f)
    fhat = rfft(f)
    ksq = grid.ksq.copy()
    ksq[0, 0] = 1.0
    xhat = fhat / ksq
    xhat[..., 0, 0] = 0.0
    return irfft(xhat, grid.n)


def gradient(f):
    """Spectral gradient (d/dx1, d/dx2); Nyquist modes are dropped."""
    f = np.asarray(f, dtype=float)
    grid = grid_of(f)
    fhat = rfft(f)
    nyq = ~((np.abs(grid.k1) == grid.n // 2) | (grid.k2 == grid.n // 2))
    d1 = irfft(1j * grid.k1 * nyq * fhat, grid.n)
    d2 = irfft(1j * grid.k2 * nyq * fhat, grid.n)
    return d1, d2


# -- products -----------------------------------------------------------------

def dealias(f) -> np.ndarray:
    """Truncate the modes removed by the two-thirds rule."""
    f = np.asarray(f, dtype=float)
    grid = grid_of(f)
    return irfft(rfft(f) * grid.dealias_mask, grid.n)


def product(f, g) -> np.ndarray:
    """Dealiased pointwise product: both factors and the result truncated."""
    grid = same_grid(f, g)
    mask = grid.dealias_mask
    fd = irfft(rfft(f) * mask, grid.n)
    gd = irfft(rfft(g) * mask, grid.n)
    return irfft(rfft(fd * gd) * mask, grid.n)


def spatial_mean(f) -> np.ndarray:
    return np.mean(f, axis=(-2, -1))


def parseval_energy(f) -> float:
    """Sum over all wavevectors of |fhat(k)|^2."""
    grid = grid_of(f)
    fhat = rfft(f)
    return float(np.sum(grid.hermitian_weight * np.abs(fhat) ** 2))


# -- PFLD snapshot files ------------------------------------------------------

def write_pfld(path, f) -> None:
    """Write a field as a 16-byte header followed by n*n little-endian float64."""
    f = check_field(f)
    n = f.shape[0]
    # magic, n, reserved, then one more zero word to fill the 16-byte header
    header = PFLD_MAGIC + struct.pack("<III", n, 0, 0)
    Path(path).write_bytes(header + np.ascontiguousarray(f, dtype="<f8").tobytes())


def read_pfld(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != PFLD_MAGIC:
        raise ValueError(f"{path}: not a PFLD file")
    n, _, _ = struct.unpack("<III", data[4:16])
    body = data[16:]
    if len(body) != 8 * n * n:
        raise ValueError(f"{path}: expected {8 * n * n} payload bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<f8").reshape(n, n).astype(float)
