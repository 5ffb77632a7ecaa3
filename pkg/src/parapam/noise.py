"""Space white noise, heat mollification and the enhanced noise.

Seed discipline: a realization is ``numpy.random.Generator(PCG64(SeedSequence(seed)))``
drawing ``standard_normal((n, n))`` in row-major order, scaled by ``1/h`` and
mean-corrected.  Ensembles use distinct integer seeds, one stream each.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import torus
from .paracalculus import resonant
from .torus import GridSpec, grid_for


@dataclass(frozen=True)
class NoiseRealization:
    seed: int
    grid: GridSpec
    xi: np.ndarray


@dataclass(frozen=True)
class EnhancedNoise:
    eps: float
    xi_eps: np.ndarray
    X_eps: np.ndarray
    resonant_ren: np.ndarray
    c_eps: float

    @property
    def resonant_raw(self) -> np.ndarray:
        return self.resonant_ren + self.c_eps

    @classmethod
    def from_forcing(cls, zeta, eps: float = 0.0, c_eps: float = 0.0):
        """Deterministic stand-in: a smooth forcing used in place of the noise."""
        zeta = torus.check_field(zeta)
        X = torus.inv_neg_laplacian_zero_mean(zeta)
        return cls(eps, zeta, X, resonant(X, zeta) - c_eps, c_eps)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def sample_white_noise(seed: int, grid) -> NoiseRealization:
    """I.i.d. N(0, 1/h^2) grid values with the spatial mean removed exactly.

    The variance makes h^2-weighted pairings with grid test functions match
    the L^2(T^2) covariance; each Fourier coefficient has variance 1/(2 pi)^2.
    """
    grid = grid if isinstance(grid, GridSpec) else grid_for(grid)
    values = rng_for(seed).standard_normal((grid.n, grid.n)) / grid.h
    values -= values.mean()
    return NoiseRealization(int(seed), grid, values)


def pairing(xi, phi) -> float:
    """Discrete L^2 pairing <xi, phi> = h^2 sum xi * phi."""
    h = torus.grid_of(xi).h
    return float(h * h * np.sum(xi * phi))


def _check_eps(eps: float) -> None:
    if not eps > 0:
        raise ValueError(f"mollification parameter must be positive, got {eps}")


def mollify(xi, eps: float) -> np.ndarray:
    """xi^eps = P_eps xi."""
    _check_eps(eps)
    return torus.heat(xi, eps)


@functools.lru_cache(maxsize=256)
def renorm_constant(eps: float, grid) -> float:
    """E[mean Pi(X^eps, xi^eps)] under the white-noise covariance.

    Sum over the modes retained by the dealiased product of
    w_res(k) exp(-2 eps |k|^2) / ((2 pi)^2 |k|^2); the resonant weight w_res
    is computed from the actual partition.
    """
    from .littlewood_paley import partition

    _check_eps(eps)
    n = grid.n if isinstance(grid, GridSpec) else int(grid)
    part = partition(n)
    g = part.grid
    rho = part.symbols
    w_res = (rho * rho).sum(axis=0) + 2.0 * (rho[1:] * rho[:-1]).sum(axis=0)
    ksq = g.ksq.copy()
    ksq[0, 0] = 1.0
    terms = w_res * np.exp(-2.0 * eps * g.ksq) / ksq
    terms[0, 0] = 0.0
    terms = terms * g.dealias_mask * g.hermitian_weight
    return float(terms.sum() / (2.0 * np.pi) ** 2)


def enhance(noise, eps: float) -> EnhancedNoise:
    """Assemble (xi^eps, X^eps, Pi(X^eps, xi^eps) - c^eps, c^eps).

    ``noise`` is a :class:`NoiseRealization` or a raw field.
    """
    xi = noise.xi if isinstance(noise, NoiseRealization) else torus.check_field(noise)
    grid = torus.grid_of(xi)
    xi_eps = mollify(xi, eps)
    X_eps = torus.inv_neg_laplacian_zero_mean(xi_eps)
    c = renorm_constant(float(eps), grid.n)
    return EnhancedNoise(float(eps), xi_eps, X_eps, resonant(X_eps, xi_eps) - c, c)


def enhanced_noise(seed: int, n: int, eps: float) -> EnhancedNoise:
    """Pure function of (seed, n, eps)."""
    return enhance(sample_white_noise(seed, n), eps)


def gaussian_field(n: int, s: float, seed: int) -> np.ndarray:
    """Zero-mean Gaussian field with E|fhat(k)|^2 = |k|^{-2-2s}.

    Such a field has Hoelder-Besov regularity s (up to a logarithm).
    """
    grid = grid_for(n)
    xi = sample_white_noise(seed, grid).xi
    kabs = grid.kabs.copy()
    kabs[0, 0] = 1.0
    sym = 2.0 * np.pi * kabs ** (-1.0 - s)
    sym[0, 0] = 0.0
    return torus.apply_multiplier(sym, xi)
