"""Time stepping for the renormalized quasilinear gPAM equation

    du/dt - a(u) Lap u = g(u) xi_eps - c_eps [g'g/a - a' g^2/a^2](u)

and for the transformed scalar equation dv/dt - Lap b(v) = f(v) xi_eps - ...
obtained with v = A(u), A' = 1/a, b = A^{-1}, f = (g/a) o b.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate as sint
from scipy.interpolate import CubicHermiteSpline

from . import torus
from .littlewood_paley import Trajectory
from .noise import EnhancedNoise
from .torus import irfft, rfft

log = logging.getLogger(__name__)


class BlowUpError(RuntimeError):
    """Non-finite values appeared; ``last_time`` is the last finite snapshot time."""

    def __init__(self, last_time: float, message: str = ""):
        super().__init__(message or f"numerical blow-up after t={last_time:.6g}")
        self.last_time = last_time


@dataclass(frozen=True)
class ModelCoefficients:
    name: str
    a: Callable
    a_prime: Callable
    g: Callable
    g_prime: Callable
    a_min: float
    a_max: float
    constant_a: bool = False

    def check(self, u_sample=None, delta: float = 1e-4, tol: float = 1e-6) -> None:
        """Central-difference derivative check and ellipticity check."""
        u = np.linspace(-10, 10, 401) if u_sample is None else np.asarray(u_sample, dtype=float)
        for fn, dfn, label in ((self.a, self.a_prime, "a"), (self.g, self.g_prime, "g")):
            fd = (fn(u + delta) - fn(u - delta)) / (2 * delta)
            err = np.max(np.abs(np.broadcast_to(dfn(u), u.shape) - fd))
            if err > tol:
                raise ValueError(f"{label}' inconsistent with {label}: max error {err:.3g}")
        av = np.broadcast_to(self.a(u), u.shape)
        if av.min() < self.a_min - 1e-12 or av.max() > self.a_max + 1e-12:
            raise ValueError(f"a leaves [{self.a_min}, {self.a_max}] on the sample")


def _const(c):
    return lambda u: np.full(np.shape(u), float(c))


def constant_model(a: float = 1.0, g: float = 1.0) -> ModelCoefficients:
    return ModelCoefficients("const", _const(a), _const(0.0), _const(g), _const(0.0),
                             float(a), float(a), constant_a=True)


def sin_cos_model() -> ModelCoefficients:
    """a(u) = 2 + sin u, g(u) = cos u."""
    return ModelCoefficients("sin-cos", lambda u: 2.0 + np.sin(u), np.cos,
                             np.cos, lambda u: -np.sin(u), 1.0, 3.0)


def rational_model() -> ModelCoefficients:
    """a(u) = 1 + 1/(1+u^2), g(u) = 1/(1+u^2)."""
    def g(u):
        return 1.0 / (1.0 + np.asarray(u) ** 2)

    def gp(u):
        u = np.asarray(u)
        return -2.0 * u / (1.0 + u**2) ** 2

    return ModelCoefficients("rational", lambda u: 1.0 + g(u), gp, g, gp, 1.0, 2.0)


MODELS = {
    "const": constant_model,
    "sin-cos": sin_cos_model,
    "rational": rational_model,
}


def model(name: str) -> ModelCoefficients:
    try:
        return MODELS[name]()
    except KeyError:
        raise ValueError(f"unknown coefficient model {name!r}; choose from {sorted(MODELS)}") from None


SCHEMES = ("imex", "explicit-rk4")


@dataclass(frozen=True)
class SolverConfig:
    n: int
    T: float
    dt: float
    eps: float = 0.0
    renormalize: bool = True
    scheme: str = "imex"
    stride: int = 1

    def validate(self, coeffs: Optional[ModelCoefficients] = None) -> None:
        torus.grid_for(self.n)
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.scheme == "explicit-rk4" and coeffs is not None:
            h = torus.grid_for(self.n).h
            limit = h * h / (4.0 * coeffs.a_max)
            if self.dt > limit:
                raise ValueError(f"explicit-rk4 needs dt <= h^2/(4 a_max) = {limit:.4g}, got {self.dt}")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))


def default_dt(eps: float, n: int, a_max: float) -> float:
    """min(eps/8, 0.9 h^2 / (4 a_max))."""
    h = torus.grid_for(n).h
    return min(eps / 8.0, 0.9 * h * h / (4.0 * a_max))


def counterterm(u, coeffs: ModelCoefficients, c_eps: float) -> np.ndarray:
    """c_eps * [g'(u) g(u)/a(u) - a'(u) g(u)^2 / a(u)^2]."""
    a = coeffs.a(u)
    g = coeffs.g(u)
    return c_eps * (coeffs.g_prime(u) * g / a - coeffs.a_prime(u) * g * g / (a * a))


class _Spectral:
    """Precomputed symbols for one grid."""

    def __init__(self, n: int):
        self.grid = torus.grid_for(n)
        self.n = n
        self.ksq = self.grid.ksq
        self.mask = self.grid.dealias_mask

    def trunc_phys(self, f):
        return irfft(rfft(f) * self.mask, self.n)

    def product(self, f, g_trunc):
        """Dealiased product where the second factor is already truncated."""
        return self.trunc_phys(f) * g_trunc


def _source_fn(source):
    if source is None:
        return None
    if callable(source):
        return source
    fixed = torus.check_field(source)
    return lambda t: fixed


def _run(u0, rhs_explicit, implicit_coeff: float, cfg: SolverConfig, to_output=None):
    """Generic stepping loop in the evolved variable.

    ``rhs_explicit(w, what, t)`` returns the dealiased explicit tendency as a
    spectral array.  IMEX: (1 + dt c |k|^2) w_new = w + dt (rhs - c |k|^2 w)
    with the stabilizer c folded into ``rhs``.
    """
    sp = _Spectral(cfg.n)
    steps = cfg.steps
    if not np.isclose(steps * cfg.dt, cfg.T, rtol=1e-9, atol=0):
        raise ValueError(f"T={cfg.T} is not a whole number of steps dt={cfg.dt}")
    w = torus.check_field(u0).copy()
    what = rfft(w)
    out_fn = to_output or (lambda x: x)
    times = [0.0]
    snaps = [out_fn(w).copy()]
    implicit = 1.0 / (1.0 + cfg.dt * implicit_coeff * sp.ksq)
    dt = cfg.dt
    # non-finite values are caught right after each step and reported as blow-up
    with np.errstate(invalid="ignore", over="ignore"):
        for step in range(1, steps + 1):
            t = (step - 1) * dt
            if cfg.scheme == "imex":
                what = implicit * (what + dt * rhs_explicit(w, what, t))
            else:
                k1 = rhs_explicit(w, what, t)
                y = what + 0.5 * dt * k1
                k2 = rhs_explicit(irfft(y, cfg.n), y, t + 0.5 * dt)
                y = what + 0.5 * dt * k2
                k3 = rhs_explicit(irfft(y, cfg.n), y, t + 0.5 * dt)
                y = what + dt * k3
                k4 = rhs_explicit(irfft(y, cfg.n), y, t + dt)
                what = what + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            w = irfft(what, cfg.n)
            if not np.all(np.isfinite(w)):
                raise BlowUpError(times[-1])
            if step % cfg.stride == 0 or step == steps:
                times.append(step * dt)
                snaps.append(out_fn(w).copy())
    times = np.asarray(times)
    if len(times) > 2 and not np.allclose(np.diff(times), times[1] - times[0]):
        raise ValueError("stride must divide the number of steps")
    return Trajectory(times, np.asarray(snaps))


def integrate(u0, enhanced: EnhancedNoise, coeffs: ModelCoefficients, cfg: SolverConfig,
              source=None) -> Trajectory:
    """Integrate the regularized equation; returns snapshots every ``stride`` steps.

    IMEX step with stabilizer a_max:

        (1 + dt a_max |k|^2) u_new = u + dt [(a(u) - a_max) Lap u + g(u) xi - ct(u) + source]

    ``source`` is an optional extra forcing (field or callable of t) used by
    manufactured-solution checks.  With ``cfg.renormalize`` false the
    counterterm is dropped.
    """
    cfg.validate(coeffs)
    sp = _Spectral(cfg.n)
    xi = sp.trunc_phys(enhanced.xi_eps)
    c_eps = enhanced.c_eps if cfg.renormalize else 0.0
    stab = coeffs.a_max if cfg.scheme == "imex" else 0.0
    src = _source_fn(source)

    def rhs(u, uhat, t):
        lap = irfft(-sp.ksq * sp.mask * uhat, cfg.n)
        a = coeffs.a(u)
        diffusion = sp.product(a - stab, lap) if not coeffs.constant_a else (a - stab) * lap
        forcing = sp.product(coeffs.g(u), xi)
        total = diffusion + forcing
        if c_eps:
            total = total - counterterm(u, coeffs, c_eps)
        if src is not None:
            total = total + src(t)
        return rfft(total) * sp.mask

    return _run(u0, rhs, stab, cfg)


# -- transformed equation ------------------------------------------------------------

@dataclass
class Transform:
    """Tabulated A (primitive of 1/a from 0), its inverse b and f = (g/a) o b."""

    coeffs: ModelCoefficients
    u_nodes: np.ndarray
    v_nodes: np.ndarray
    tol: float = 1e-12
    _A: CubicHermiteSpline = field(init=False, repr=False)
    _b: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self):
        a_nodes = self.coeffs.a(self.u_nodes)
        self._A = CubicHermiteSpline(self.u_nodes, self.v_nodes, 1.0 / a_nodes)
        self._b = CubicHermiteSpline(self.v_nodes, self.u_nodes, a_nodes)

    def A(self, u):
        if self.coeffs.constant_a:
            return np.asarray(u, dtype=float) / self.coeffs.a_max
        u = np.asarray(u, dtype=float)
        self._check_range(u, self.u_nodes, "u")
        return self._A(u)

    def b(self, v):
        """Inverse of A: Hermite initial guess, then safeguarded Newton steps."""
        if self.coeffs.constant_a:
            return np.asarray(v, dtype=float) * self.coeffs.a_max
        v = np.asarray(v, dtype=float)
        self._check_range(v, self.v_nodes, "v")
        u = self._b(v)
        # bracket from the monotone table
        idx = np.clip(np.searchsorted(self.v_nodes, v), 1, len(self.v_nodes) - 1)
        lo, hi = self.u_nodes[idx - 1], self.u_nodes[idx]
        for _ in range(4):
            resid = self._A(u) - v
            if np.max(np.abs(resid), initial=0.0) <= self.tol:
                break
            u_new = u - resid * self.coeffs.a(u)
            u = np.where((u_new >= lo) & (u_new <= hi), u_new, 0.5 * (lo + hi))
        return u

    def f(self, v):
        u = self.b(v)
        return self.coeffs.g(u) / self.coeffs.a(u)

    def transformed_counterterm(self, v, c_eps: float):
        """Counterterm of the u-equation divided by a, evaluated at u = b(v)."""
        u = self.b(v)
        return counterterm(u, self.coeffs, c_eps) / self.coeffs.a(u)

    @staticmethod
    def _check_range(x, nodes, label):
        if x.size and (x.min() < nodes[0] or x.max() > nodes[-1]):
            raise ValueError(f"{label} outside tabulated range [{nodes[0]:.3g}, {nodes[-1]:.3g}]")


def transform_tables(coeffs: ModelCoefficients, u_range: float = 20.0, spacing: float = 2e-3,
                     tol: float = 1e-12) -> Transform:
    """Tabulate A(u) = int_0^u ds / a(s) by Gauss-Legendre panels.

    Panels of width ``spacing`` with 8 nodes each integrate the smooth 1/a
    far below ``tol``; A is then interpolated by cubic Hermite splines.
    """
    if coeffs.a_min <= 0:
        raise ValueError("transform needs a >= a_min > 0")
    m = int(round(u_range / spacing))
    u_nodes = np.linspace(-u_range, u_range, 2 * m + 1)
    x, w = np.polynomial.legendre.leggauss(8)
    left, right = u_nodes[:-1], u_nodes[1:]
    mid, half = 0.5 * (left + right), 0.5 * (right - left)
    pts = mid[:, None] + half[:, None] * x[None, :]
    panels = (half[:, None] * w[None, :] / coeffs.a(pts)).sum(axis=1)
    if not np.all(np.isfinite(panels)) or np.any(panels <= 0):
        raise ValueError("quadrature of 1/a failed")
    cum = np.concatenate([[0.0], np.cumsum(panels)])
    v_nodes = cum - cum[m]  # A(0) = 0
    check, _ = sint.quad(lambda s: 1.0 / coeffs.a(s), 0.0, u_nodes[-1], epsabs=1e-13, epsrel=1e-13)
    if abs(check - v_nodes[-1]) > 1e-9 * max(1.0, abs(check)):
        raise ValueError("quadrature of 1/a failed the adaptive cross-check")
    return Transform(coeffs, u_nodes, v_nodes, tol)


def integrate_transformed(u0, enhanced: EnhancedNoise, coeffs: ModelCoefficients, cfg: SolverConfig,
                          source=None, transform: Optional[Transform] = None) -> Trajectory:
    """Solve dv/dt - Lap b(v) = f(v) xi - ct(b(v))/a(b(v)) [+ source/a], return u = b(v).

    IMEX with implicit a_max Lap v; the remainder Lap b(v) - a_max Lap v is
    explicit.
    """
    cfg.validate(coeffs)
    tr = transform or transform_tables(coeffs)
    sp = _Spectral(cfg.n)
    xi = sp.trunc_phys(enhanced.xi_eps)
    c_eps = enhanced.c_eps if cfg.renormalize else 0.0
    stab = coeffs.a_max if cfg.scheme == "imex" else 0.0
    src = _source_fn(source)

    def rhs(v, vhat, t):
        u = tr.b(v)
        bhat = rfft(u) * sp.mask
        total_hat = -sp.ksq * (bhat - stab * vhat) * sp.mask
        total = tr.f(v)
        total = sp.product(total, xi)
        if c_eps:
            total = total - tr.transformed_counterterm(v, c_eps)
        if src is not None:
            total = total + src(t) / coeffs.a(u)
        return total_hat + rfft(total) * sp.mask

    return _run(tr.A(torus.check_field(u0)), rhs, stab, cfg, to_output=tr.b)
