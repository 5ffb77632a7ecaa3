"""Littlewood-Paley blocks, Hoelder-Besov norms and regularity estimation.

The partition is built from a smooth radial cutoff ``chi`` equal to 1 on
``|k| <= 3/4`` and 0 for ``|k| >= 4/3``.  The ball block is
``rho_{-1} = chi``, the annular blocks are ``chi(k/2^{j+1}) - chi(k/2^j)``
(supported in ``3/4 * 2^j <= |k| <= 8/3 * 2^j``), and the top block collects
everything above ``2^jmax``.  The sum telescopes to 1 at every wavevector of
the grid, so block reconstruction is exact up to rounding.
"""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass

import numpy as np

from . import torus
from .torus import GridSpec, grid_for, grid_of, irfft, rfft

log = logging.getLogger(__name__)

JMIN = -1
INNER, OUTER = 0.75, 4.0 / 3.0


class InconclusiveError(ValueError):
    """Raised when a field has too few active blocks for a slope fit."""


def _smooth_step(x):
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def chi(r):
    """C-infinity radial cutoff: 1 on [0, 3/4], 0 on [4/3, inf)."""
    return 1.0 - _smooth_step((np.asarray(r, dtype=float) - INNER) / (OUTER - INNER))


@dataclass(frozen=True)
class DyadicPartition:
    grid: GridSpec
    jmax: int
    symbols: np.ndarray  # (jmax + 2, n, n//2 + 1), index j + 1

    @property
    def jmin(self) -> int:
        return JMIN

    @property
    def indices(self):
        return range(JMIN, self.jmax + 1)

    def symbol(self, j: int) -> np.ndarray:
        if not JMIN <= j <= self.jmax:
            raise ValueError(f"block index {j} outside [{JMIN}, {self.jmax}]")
        return self.symbols[j + 1]


def jmax_for(n: int) -> int:
    """Largest j with 2^j <= n/3."""
    j = 0
    while 2 ** (j + 1) <= n / 3:
        j += 1
    return j


@functools.lru_cache(maxsize=None)
def partition(n: int) -> DyadicPartition:
    grid = grid_for(n)
    jmax = jmax_for(n)
    kabs = grid.kabs
    syms = [chi(kabs)]
    for j in range(0, jmax):
        syms.append(chi(kabs / 2 ** (j + 1)) - chi(kabs / 2**j))
    syms.append(1.0 - chi(kabs / 2**jmax))
    symbols = np.stack(syms)
    symbols.setflags(write=False)
    return DyadicPartition(grid, jmax, symbols)


def partition_of(f) -> DyadicPartition:
    return partition(grid_of(f).n)


def block(j: int, f) -> np.ndarray:
    """Littlewood-Paley block Delta_j f."""
    f = np.asarray(f, dtype=float)
    part = partition_of(f)
    return irfft(part.symbol(j) * rfft(f), part.grid.n)


def blocks(f, dealiased: bool = False) -> np.ndarray:
    """All blocks of ``f`` stacked on a leading axis (index ``j + 1``).

    With ``dealiased=True`` each block is also truncated by the two-thirds
    mask; this is the form fed into dealiased products.
    """
    f = np.asarray(f, dtype=float)
    part = partition_of(f)
    fhat = rfft(f)
    sym = part.symbols * part.grid.dealias_mask if dealiased else part.symbols
    if fhat.ndim == 2:
        return irfft(sym * fhat, part.grid.n)
    # stack of fields: (..., n, m) -> (J, ..., n, m)
    return irfft(sym.reshape(sym.shape[:1] + (1,) * (fhat.ndim - 2) + sym.shape[1:]) * fhat,
                 part.grid.n)


def low_pass(j: int, f) -> np.ndarray:
    """S_j f = sum of blocks i <= j - 1 (``S_{-1} = 0``)."""
    f = np.asarray(f, dtype=float)
    part = partition_of(f)
    if j <= JMIN:
        return np.zeros_like(f)
    sym = part.symbols[: j + 1].sum(axis=0) if j <= part.jmax + 1 else 1.0
    return irfft(sym * rfft(f), part.grid.n)


def block_sup_norms(f) -> np.ndarray:
    """``max |Delta_j f|`` for j = -1..jmax."""
    return np.abs(blocks(f)).max(axis=(-2, -1))


def holder_norm(f, gamma: float) -> float:
    """Besov C^gamma norm: max_j 2^{j*gamma} ||Delta_j f||_inf."""
    if not -2.0 < gamma < 2.0:
        raise ValueError(f"Hoelder exponent must lie in (-2, 2), got {gamma}")
    norms = block_sup_norms(f)
    j = np.arange(JMIN, JMIN + len(norms))
    return float(np.max(2.0 ** (j * gamma) * norms))


def holder_norms(fields, gamma: float) -> np.ndarray:
    """:func:`holder_norm` of each field in a stack."""
    fields = np.asarray(fields, dtype=float)
    norms = np.abs(blocks(fields)).max(axis=(-2, -1))  # (J, M)
    j = np.arange(JMIN, JMIN + norms.shape[0])[:, None]
    return np.max(2.0 ** (j * gamma) * norms, axis=0)


@dataclass
class RegularityFit:
    exponent: float
    js: np.ndarray
    log2_norms: np.ndarray
    intercept: float

    def rows(self):
        """CSV rows (j, log2 block norm) of the fitted window."""
        return [(int(j), float(v)) for j, v in zip(self.js, self.log2_norms)]


FLOOR = 1e-13


def fit_regularity(f) -> RegularityFit:
    """Least-squares fit of log2 ||Delta_j f||_inf over j in [2, jmax - 2].

    The two highest blocks are left out: they carry dealiasing and
    mollification damage.  Blocks below the noise floor are dropped.
    """
    part = partition_of(f)
    norms = block_sup_norms(f)
    js = np.arange(2, part.jmax - 1)
    vals = norms[js + 1]
    scale = max(float(norms.max()), 1.0)
    keep = vals > FLOOR * scale
    js, vals = js[keep], vals[keep]
    if len(js) < 4 or np.any(np.diff(js) != 1):
        raise InconclusiveError(
            f"inconclusive: {len(js)} active blocks in fit window (need 4 consecutive)")
    y = np.log2(vals)
    slope, intercept = np.polyfit(js, y, 1)
    return RegularityFit(-float(slope), js, y, float(intercept))


def regularity_estimate(f) -> float:
    """Empirical Hoelder exponent: minus the slope of log2 block norms."""
    return fit_regularity(f).exponent


# -- parabolic objects ----------------------------------------------------------

@dataclass
class Trajectory:
    """Uniformly spaced snapshots ``values[m]`` at ``times[m] = m * dt``."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3 or len(self.times) != len(self.values):
            raise ValueError("trajectory needs values of shape (M+1, n, n) matching times")
        if len(self.times) < 2:
            raise ValueError("trajectory needs at least 2 snapshots")
        steps = np.diff(self.times)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("trajectory times must be uniformly increasing")

    @classmethod
    def constant(cls, f, times):
        times = np.asarray(times, dtype=float)
        return cls(times, np.broadcast_to(f, (len(times),) + np.shape(f)).copy())

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    def __len__(self):
        return len(self.times)

    def map(self, fn):
        return Trajectory(self.times, fn(self.values))


MAX_ALL_PAIRS = 256


def time_holder_seminorm(u: Trajectory, alpha: float) -> float:
    """max_{s<t} ||u_t - u_s||_inf / |t - s|^{alpha/2}.

    All pairs up to 256 intervals; beyond that only index gaps that are
    powers of two.
    """
    vals, times = u.values, u.times
    m = len(times)
    gaps = range(1, m) if m - 1 <= MAX_ALL_PAIRS else [2**q for q in range(int(np.log2(m - 1)) + 1)]
    best = 0.0
    for gap in gaps:
        diff = np.abs(vals[gap:] - vals[:-gap]).max(axis=(-2, -1))
        dt = times[gap:] - times[:-gap]
        best = max(best, float(np.max(diff / dt ** (alpha / 2))))
    return best


def parabolic_norm(u: Trajectory, alpha: float) -> float:
    """sup_t ||u_t||_{C^alpha} + time-Hoelder seminorm of order alpha/2 in L^inf."""
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"parabolic exponent must lie in (0, 2), got {alpha}")
    space = float(np.max(holder_norms(u.values, alpha)))
    return space + time_holder_seminorm(u, alpha)


def check_exponents(alpha: float, beta: float) -> None:
    """Enforce 2/3 < alpha < 1 and max(2/3, alpha/2) < beta < alpha."""
    if not 2.0 / 3.0 < alpha < 1.0:
        raise ValueError(f"exponent constraint violated: need 2/3 < alpha < 1, got alpha={alpha}")
    lo = max(2.0 / 3.0, alpha / 2.0)
    if not lo < beta < alpha:
        raise ValueError(
            f"exponent constraint violated: need beta in (2/3 v alpha/2, alpha) = ({lo:.4g}, {alpha}),"
            f" got beta={beta}")


@dataclass
class HeatBoundReport:
    times: np.ndarray
    smoothing_ratio: np.ndarray
    drift_ratio: np.ndarray

    @property
    def max_smoothing_ratio(self) -> float:
        return float(self.smoothing_ratio.max())

    @property
    def max_drift_ratio(self) -> float:
        return float(self.drift_ratio.max())


def heat_initial_bound_check(u0, T, alpha: float, beta: float) -> HeatBoundReport:
    """Sweep the two initial-layer bounds for u0^T = P_T u0.

    Returns, for each T, ``||u0^T||_{C^{2 beta}} T^{(2beta-alpha)/2} / ||u0||_{C^alpha}``
    and ``||u0^T - u0||_inf / (T^{alpha/2} ||u0||_{C^alpha})``.  ``T`` may be a
    scalar or a sweep.  A constant u0 reports zeros.
    """
    check_exponents(alpha, beta)
    u0 = torus.check_field(u0)
    times = np.atleast_1d(np.asarray(T, dtype=float))
    if np.any(times <= 0):
        raise ValueError("T must be positive")
    # a constant field has no content beyond the mean
    if np.ptp(u0) == 0.0:
        zeros = np.zeros_like(times)
        return HeatBoundReport(times, zeros, zeros.copy())
    base = holder_norm(u0, alpha)
    smooth, drift = [], []
    for t in times:
        uT = torus.heat(u0, t)
        smooth.append(holder_norm(uT - np.mean(uT), 2 * beta) * t ** ((2 * beta - alpha) / 2) / base)
        drift.append(np.abs(uT - u0).max() / (t ** (alpha / 2) * base))
    return HeatBoundReport(times, np.array(smooth), np.array(drift))
