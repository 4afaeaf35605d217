"""Inhomogeneous broadening: Gaussian ensembles, quadrature and Monte Carlo.

Two deterministic rules are available:

``"product"``
    Gauss-Hermite product quadrature over (delta13, delta12). This is what
    :func:`discretize` returns as explicit :class:`CenterClass` entries, which
    is the form the coupled-mode oracle consumes.

``"hybrid"`` (default for ensemble averages)
    Gauss-Hermite along delta13 and the exact Gaussian average along delta12.
    For fixed delta13 every term is ``a + b / (delta12 - p)`` with a pole
    ``p`` in the upper half plane, and the Gaussian mean of ``1/(X - p)`` is
    a Faddeeva function. This removes the near-real Raman poles that make a
    product rule converge very slowly when sigma12 is much larger than the
    pump-dressed linewidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import roots_hermitenorm, wofz

from . import kernels
from .model import (CenterClass, ClassArrays, DomainError, OperatingPoint, SusceptibilityTriplet,
                    _finite, _nonneg, _positive, susceptibilities_grid)

RULES = ("hybrid", "product")
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)


@dataclass(frozen=True)
class GaussianEnsemble:
    """Uncorrelated Gaussian spread of optical and spin detunings.

    ``base`` supplies couplings, linewidths and pump Rabi frequency shared by
    every node; its detunings and weight are ignored.
    """

    mean13: float
    mean12: float
    sigma13: float
    sigma12: float
    n_total: float
    base: CenterClass
    nodes13: int = 32
    nodes12: int = 32
    rule: str = "hybrid"

    def __post_init__(self):
        _finite(self.mean13, "mean13")
        _finite(self.mean12, "mean12")
        _nonneg(self.sigma13, "sigma13")
        _nonneg(self.sigma12, "sigma12")
        _positive(self.n_total, "n_total")
        for name in ("nodes13", "nodes12"):
            n = getattr(self, name)
            if int(n) != n or n < 1:
                raise DomainError(f"{name} must be a positive integer, got {n!r}", name)
        if self.rule not in RULES:
            raise DomainError(f"unknown quadrature rule {self.rule!r}", "rule")

    @classmethod
    def from_fwhm(cls, mean13, mean12, fwhm13, fwhm12, n_total, base, **kw) -> "GaussianEnsemble":
        return cls(mean13, mean12, fwhm13 / FWHM_PER_SIGMA, fwhm12 / FWHM_PER_SIGMA, n_total, base, **kw)

    def with_(self, **changes) -> "GaussianEnsemble":
        return replace(self, **changes)

    @property
    def homogeneous(self) -> bool:
        return self.sigma13 == 0.0 and self.sigma12 == 0.0


@lru_cache(maxsize=64)
def _unit_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Probabilists' Gauss-Hermite nodes and weights normalised to sum 1."""
    if n == 1:
        return np.zeros(1), np.ones(1)
    x, w = roots_hermitenorm(n)
    # enforce exact mirror symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    w = w / math.fsum(w)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_nodes(mean: float, sigma: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and unit-sum weights for a Gaussian of the given mean and width."""
    if n < 1:
        raise DomainError("node count must be >= 1", "nodes")
    if sigma == 0.0:
        return np.array([mean], dtype=float), np.ones(1)
    x, w = _unit_rule(int(n))
    return mean + sigma * x, w.copy()


def discretize_arrays(spec: GaussianEnsemble) -> ClassArrays:
    d13, w13 = gauss_nodes(spec.mean13, spec.sigma13, spec.nodes13)
    d12, w12 = gauss_nodes(spec.mean12, spec.sigma12, spec.nodes12)
    D13, D12 = np.meshgrid(d13, d12, indexing="ij")
    W = np.outer(w13, w12).ravel()
    W *= spec.n_total / math.fsum(W)
    n = W.shape[0]
    b = spec.base
    full = lambda v: np.full(n, float(v))
    return ClassArrays(full(b.g13), full(b.g12), full(b.gamma13), full(b.gamma12),
                       D13.ravel().copy(), D12.ravel().copy(), full(b.omega_p), W)


def discretize(spec: GaussianEnsemble) -> list[CenterClass]:
    """Product Gauss-Hermite classes; weights sum to ``n_total``."""
    return discretize_arrays(spec).to_classes()


def gaussian_inverse_mean(p, mean: float, sigma: float):
    """``E[1/(X - p)]`` for ``X ~ N(mean, sigma^2)`` and ``Im p != 0``."""
    p = np.asarray(p, dtype=complex)
    if sigma == 0.0:
        return 1.0 / (mean - p)
    z = (p - mean) / (math.sqrt(2.0) * sigma)
    upper = z.imag > 0
    zz = np.where(upper, z, np.conj(z))
    val = 1j * _SQRT_HALF_PI / sigma * wofz(zz)
    return np.where(upper, val, np.conj(val))


def _hybrid_grid(spec: GaussianEnsemble, omega: np.ndarray, delta: np.ndarray):
    b = spec.base
    d13, w13 = gauss_nodes(spec.mean13, spec.sigma13, spec.nodes13)
    out_a = np.empty(omega.shape, dtype=complex)
    out_c = np.empty(omega.shape, dtype=complex)
    out_ac = np.empty(omega.shape, dtype=complex)
    step = max(1, (1 << 20) // d13.shape[0])
    op2 = b.omega_p ** 2
    for s in range(0, omega.shape[0], step):
        sl = slice(s, s + step)
        om = omega[sl, None]
        A = (om + delta[sl, None] - d13[None, :]) + 0.5j * b.gamma13
        p = om + 0.5j * b.gamma12 - op2 / A
        inv = gaussian_inverse_mean(p, spec.mean12, spec.sigma12)
        ta = b.g13 ** 2 / A - b.g13 ** 2 * op2 / (A * A) * inv
        tc = -(b.g12 ** 2) * inv
        tac = -b.g12 * b.g13 * b.omega_p / A * inv
        out_a[sl] = ta @ w13
        out_c[sl] = tc @ w13
        out_ac[sl] = tac @ w13
    n = spec.n_total
    return out_a * n, out_c * n, out_ac * n


def average_susceptibilities_grid(spec: GaussianEnsemble, omega, delta):
    """Ensemble-averaged susceptibilities over broadcast arrays of (omega, delta)."""
    omega, delta = np.broadcast_arrays(np.asarray(omega, float), np.asarray(delta, float))
    shape = omega.shape
    om = np.ascontiguousarray(omega.ravel())
    de = np.ascontiguousarray(delta.ravel())
    if spec.rule == "product" or spec.sigma12 == 0.0:
        xa, xc, xac = susceptibilities_grid(discretize_arrays(spec), om, de)
    else:
        xa, xc, xac = _hybrid_grid(spec, om, de)
    return xa.reshape(shape), xc.reshape(shape), xac.reshape(shape)


def average_susceptibilities(spec: GaussianEnsemble, point: OperatingPoint) -> SusceptibilityTriplet:
    xa, xc, xac = average_susceptibilities_grid(spec, np.array([point.omega]), np.array([point.delta]))
    return SusceptibilityTriplet(complex(xa[0]), complex(xc[0]), complex(xac[0]))


@dataclass(frozen=True)
class MonteCarloResult:
    mean: SusceptibilityTriplet
    stderr: np.ndarray  # shape (3,) complex: re/im standard errors of xi_a, xi_c, xi_ac
    n_samples: int
    seed: int

    def z_scores(self, other: SusceptibilityTriplet) -> np.ndarray:
        """Per-component deviation in units of standard error, ``(re, im)`` for each xi."""
        diff = other.as_array() - self.mean.as_array()
        se = self.stderr
        with np.errstate(divide="ignore", invalid="ignore"):
            zr = np.where(se.real > 0, np.abs(diff.real) / se.real, np.where(diff.real == 0, 0.0, np.inf))
            zi = np.where(se.imag > 0, np.abs(diff.imag) / se.imag, np.where(diff.imag == 0, 0.0, np.inf))
        return np.stack([zr, zi], axis=1)


def monte_carlo_susceptibilities(spec: GaussianEnsemble, point: OperatingPoint,
                                 n_samples: int = 1_000_000, seed: int = 0) -> MonteCarloResult:
    """Sample-mean estimate of the ensemble susceptibilities.

    Uses numpy's ``default_rng(seed)`` (PCG64); delta13 samples are drawn
    first, then delta12, so a given seed always yields the same estimate.
    """
    if n_samples < 2:
        raise DomainError("need at least 2 Monte Carlo samples", "n_samples")
    rng = np.random.default_rng(seed)
    d13 = spec.mean13 + spec.sigma13 * rng.standard_normal(n_samples)
    d12 = spec.mean12 + spec.sigma12 * rng.standard_normal(n_samples)
    b = spec.base
    mean, m2 = kernels.sample_stats(b.g13, b.g12, b.gamma13, b.gamma12, b.omega_p,
                                    d13, d12, point.omega, point.delta)
    se = np.sqrt(m2 / (n_samples - 1) / n_samples)
    n = spec.n_total
    triplet = SusceptibilityTriplet(complex(mean[0], mean[1]) * n, complex(mean[2], mean[3]) * n,
                                    complex(mean[4], mean[5]) * n)
    stderr = np.array([complex(se[0], se[1]), complex(se[2], se[3]), complex(se[4], se[5])]) * n
    return MonteCarloResult(triplet, stderr, int(n_samples), int(seed))


@dataclass(frozen=True)
class ConvergenceResult:
    converged: bool
    recommended_nodes: int
    history: tuple  # (nodes, max relative change to the doubled order)
    rule: str


def _with_order(spec: GaussianEnsemble, n: int) -> GaussianEnsemble:
    if spec.rule == "hybrid":
        return spec.with_(nodes13=n)
    return spec.with_(nodes13=n, nodes12=n)


def convergence_check(spec: GaussianEnsemble, point: OperatingPoint, tolerance: float,
                      max_nodes: int = 512) -> ConvergenceResult:
    """Double the quadrature order until order ``n`` and ``2n`` agree.

    Agreement means ``|xi_n - xi_2n| <= tolerance * |xi_2n|`` for all three
    susceptibilities (a pair that is exactly zero at both orders counts as
    agreeing). Returns the smallest such ``n``; ``converged`` is False when
    ``2n`` would exceed ``max_nodes``.
    """
    tolerance = _positive(tolerance, "tolerance")
    if spec.homogeneous:
        return ConvergenceResult(True, 1, ((1, 0.0),), spec.rule)
    history = []
    n = 1
    prev = average_susceptibilities(_with_order(spec, n), point).as_array()
    while 2 * n <= max_nodes:
        cur = average_susceptibilities(_with_order(spec, 2 * n), point).as_array()
        scale = np.abs(cur)
        diff = np.abs(cur - prev)
        rel = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), np.where(diff > 0, np.inf, 0.0))
        worst = float(rel.max())
        history.append((n, worst))
        if worst <= tolerance:
            return ConvergenceResult(True, n, tuple(history), spec.rule)
        n *= 2
        prev = cur
    return ConvergenceResult(False, n, tuple(history), spec.rule)
