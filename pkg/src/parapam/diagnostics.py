"""Paracontrolled decomposition u = Pi-bar_{u'} X + u# of numerical solutions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import torus
from .littlewood_paley import Trajectory, check_exponents, holder_norms, parabolic_norm
from .noise import EnhancedNoise
from .paracalculus import modified_paraproduct
from .solver import ModelCoefficients


@dataclass
class GubinelliPair:
    u: Trajectory
    u_prime: Trajectory
    u_sharp: Trajectory
    alpha: float
    beta: float

    def __post_init__(self):
        check_exponents(self.alpha, self.beta)

    @property
    def T(self) -> float:
        return self.u.T


@dataclass
class DiagnosticsReport:
    triple_norm: float
    prime_norm: float
    sharp_norm: float
    weighted_sharp: float
    raw_u_2beta: float

    @property
    def sharp_over_raw(self) -> float:
        if self.raw_u_2beta == 0.0:
            return 1.0 if self.weighted_sharp == 0.0 else np.inf
        return self.weighted_sharp / self.raw_u_2beta


def gubinelli_derivative(u: Trajectory, coeffs: ModelCoefficients) -> Trajectory:
    """u' = g(u) / a(u), the self-consistent solution of the fixed-point relation."""
    return u.map(lambda v: coeffs.g(v) / coeffs.a(v))


def decompose(u: Trajectory, enhanced: EnhancedNoise, coeffs: ModelCoefficients,
              alpha: float, beta: float) -> GubinelliPair:
    check_exponents(alpha, beta)
    up = gubinelli_derivative(u, coeffs)
    X = torus.inv_neg_laplacian_zero_mean(enhanced.xi_eps)
    para = modified_paraproduct(up, X)
    return GubinelliPair(u, up, Trajectory(u.times, u.values - para.values), alpha, beta)


def weighted_sup(u: Trajectory, alpha: float, beta: float) -> float:
    """sup over snapshots t > 0 of t^{(2beta-alpha)/2} ||u(t)||_{C^{2beta}}."""
    t = u.times[1:]
    norms = holder_norms(u.values[1:], 2 * beta)
    return float(np.max(t ** ((2 * beta - alpha) / 2) * norms))


def report(pair: GubinelliPair) -> DiagnosticsReport:
    prime = parabolic_norm(pair.u_prime, pair.beta)
    sharp = parabolic_norm(pair.u_sharp, pair.alpha)
    wsharp = weighted_sup(pair.u_sharp, pair.alpha, pair.beta)
    raw = weighted_sup(pair.u, pair.alpha, pair.beta)
    return DiagnosticsReport(prime + sharp + wsharp, prime, sharp, wsharp, raw)
