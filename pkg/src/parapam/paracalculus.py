"""Paraproducts, resonant products and commutator defects.

Every product here is dealiased: factors are truncated by the two-thirds
mask before multiplication and the result is truncated again.  Because the
Littlewood-Paley partition sums to one exactly, the Bony pieces add up to
``torus.product(f, g)`` to rounding precision.  Operators accept stacks of
fields (leading axes) wherever that makes sense.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import littlewood_paley as lp
from . import torus
from .littlewood_paley import Trajectory
from .torus import irfft, rfft


def _truncate(f):
    grid = torus.grid_of(f)
    return irfft(rfft(f) * grid.dealias_mask, grid.n)


def _low_parts(fb):
    """Stack of S_{j-1} f for j = -1..jmax from the stacked blocks ``fb``.

    S_{j-1} = sum_{i <= j-2} Delta_i, so entries j = -1, 0 are zero.
    """
    low = np.zeros_like(fb)
    low[2:] = np.cumsum(fb, axis=0)[:-2]
    return low


def paraproduct(f, g) -> np.ndarray:
    """Pi_f g = sum_{j >= 1} S_{j-1} f * Delta_j g."""
    torus.same_grid(f, g)
    fb = lp.blocks(f, dealiased=True)
    gb = lp.blocks(g, dealiased=True)
    low = _low_parts(fb)
    return _truncate(np.einsum("j...,j...->...", low[2:], gb[2:]))


def resonant(f, g) -> np.ndarray:
    """Pi(f, g) = sum_{|i-j| <= 1} Delta_i f * Delta_j g."""
    torus.same_grid(f, g)
    fb = lp.blocks(f, dealiased=True)
    gb = lp.blocks(g, dealiased=True)
    out = np.einsum("j...,j...->...", fb, gb)
    out += np.einsum("j...,j...->...", fb[1:], gb[:-1])
    out += np.einsum("j...,j...->...", fb[:-1], gb[1:])
    return _truncate(out)


@dataclass(frozen=True)
class BonyDecomposition:
    para_fg: np.ndarray
    para_gf: np.ndarray
    resonant: np.ndarray

    def total(self) -> np.ndarray:
        return self.para_fg + self.para_gf + self.resonant


def bony(f, g) -> BonyDecomposition:
    return BonyDecomposition(paraproduct(f, g), paraproduct(g, f), resonant(f, g))


# -- time-smoothed paraproduct --------------------------------------------------

def averaging_kernel(r):
    """phi(r) = 30 r^2 (1-r)^2 on [0, 1]; unit mass."""
    r = np.asarray(r, dtype=float)
    return np.where((r >= 0) & (r <= 1), 30.0 * r**2 * (1.0 - r) ** 2, 0.0)


KERNEL_NODES = 1025


def time_average_weights(times, tau: float) -> np.ndarray:
    """Matrix W with (Q h)(t_m) = sum_l W[m, l] h(t_l).

    (Q h)(t) = int_0^1 phi(r) h(max(t - tau r, 0)) dr, trapezoid rule in r,
    linear interpolation of h between snapshots, h(s) = h(0) for s < 0.
    """
    times = np.asarray(times, dtype=float)
    m = len(times)
    dt = times[1] - times[0]
    r = np.linspace(0.0, 1.0, KERNEL_NODES)
    w = averaging_kernel(r) * (r[1] - r[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    w /= w.sum()
    s = np.maximum(times[:, None] - tau * r[None, :], 0.0) / dt
    lo = np.minimum(np.floor(s).astype(int), m - 2)
    frac = s - lo
    W = np.zeros((m, m))
    rows = np.broadcast_to(np.arange(m)[:, None], s.shape)
    np.add.at(W, (rows, lo), w * (1.0 - frac))
    np.add.at(W, (rows, lo + 1), w * frac)
    return W


@functools.lru_cache(maxsize=64)
def _cached_weights(m: int, dt: float, tau: float) -> np.ndarray:
    W = time_average_weights(np.arange(m) * dt, tau)
    W.setflags(write=False)
    return W


def modified_paraproduct(fT: Trajectory, g) -> Trajectory:
    """(Pi-bar_f g)(t) = sum_{j >= 1} (Q_j S_{j-1} f)(t) * Delta_j g.

    Q_j averages causally over the time scale 2^{-2j}.
    """
    if len(fT) == 0:
        raise ValueError("empty trajectory")
    torus.same_grid(fT.values[0], g)
    part = lp.partition(fT.n)
    gb = lp.blocks(g, dealiased=True)
    fhat = rfft(fT.values)
    mask = part.grid.dealias_mask
    out = np.zeros_like(fT.values)
    for j in range(1, part.jmax + 1):
        low_sym = part.symbols[:j].sum(axis=0)  # S_{j-1}: blocks i <= j-2
        low = irfft(low_sym * mask * fhat, part.grid.n)
        W = _cached_weights(len(fT), fT.dt, 2.0 ** (-2 * j))
        out += np.tensordot(W, low, axes=(1, 0)) * gb[j + 1]
    return Trajectory(fT.times, _truncate(out))


# -- correctors and commutators ---------------------------------------------------

def corrector(a, b, xi) -> np.ndarray:
    """C(a, b, xi) = Pi(Pi_a b, xi) - a Pi(b, xi)."""
    torus.same_grid(a, b, xi)
    return resonant(paraproduct(a, b), xi) - torus.product(a, resonant(b, xi))


def commutator_para_para(f, g, a, b) -> np.ndarray:
    """Pi(Pi_f a, Pi_g b) - f g Pi(a, b)."""
    torus.same_grid(f, g, a, b)
    fg = torus.product(f, g)
    return resonant(paraproduct(f, a), paraproduct(g, b)) - torus.product(fg, resonant(a, b))


def para_swap_defect(f, g, h) -> np.ndarray:
    """f Pi_g h - Pi_{fg} h."""
    torus.same_grid(f, g, h)
    return torus.product(f, paraproduct(g, h)) - paraproduct(torus.product(f, g), h)


def intertwine_defect(u_prime: Trajectory, X, a0T) -> Trajectory:
    """L0(Pi-bar_{u'} X) - Pi_{a0T u'}(-Laplacian X), with L0 = d/dt - a0T Laplacian.

    The time derivative uses centered differences (one-sided at the ends).
    """
    if len(u_prime) < 3:
        raise ValueError("intertwine_defect needs at least 3 snapshots")
    P = modified_paraproduct(u_prime, X)
    dP = np.gradient(P.values, u_prime.dt, axis=0)
    L0 = dP - torus.product(a0T, torus.laplacian(P.values))
    neg_lap_X = -torus.laplacian(X)
    coeff = torus.product(a0T, u_prime.values)
    return Trajectory(u_prime.times, L0 - paraproduct(coeff, neg_lap_X))
