"""Domain types and ensemble susceptibilities for three-level centre ensembles.

All rates are ordinary frequencies in Hz. An ensemble is a list of
:class:`CenterClass` entries; each class stands for ``weight`` identical
centres, so a weight can be a real quadrature weight rather than a count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import kernels

Rate = float


class DomainError(ValueError):
    """A physical parameter is outside the domain of the model."""

    def __init__(self, message: str, parameter: str | None = None):
        super().__init__(message)
        self.parameter = parameter


class PassivityWarning(RuntimeWarning):
    pass


def _finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}", name)
    return value


def _nonneg(value: float, name: str) -> float:
    value = _finite(value, name)
    if value < 0.0:
        raise DomainError(f"{name} must be >= 0, got {value!r}", name)
    return value


def _positive(value: float, name: str) -> float:
    value = _finite(value, name)
    if value <= 0.0:
        raise DomainError(f"{name} must be > 0, got {value!r}", name)
    return value


@dataclass(frozen=True)
class CenterClass:
    """One homogeneous sub-ensemble of three-level centres.

    ``delta13``/``delta12`` are the optical and spin transition detunings from
    the bare optical and microwave cavity frequencies. ``omega_p`` is the pump
    Rabi frequency seen by this class and ``weight`` the effective number of
    centres it represents.
    """

    g13: Rate
    g12: Rate
    gamma13: Rate
    gamma12: Rate
    delta13: Rate = 0.0
    delta12: Rate = 0.0
    omega_p: Rate = 0.0
    weight: float = 1.0

    def __post_init__(self):
        for name in ("g13", "g12", "omega_p", "weight"):
            _nonneg(getattr(self, name), name)
        for name in ("gamma13", "gamma12"):
            _positive(getattr(self, name), name)
        for name in ("delta13", "delta12"):
            _finite(getattr(self, name), name)

    def with_(self, **changes) -> "CenterClass":
        return replace(self, **changes)


@dataclass(frozen=True)
class CavityMode:
    """Bare cavity mode: absolute frequency plus external and intrinsic loss.

    ``kappa_in`` is the intrinsic loss not caused by the centres. Centre and
    pump-induced contributions are added when a loss budget is assembled.
    """

    omega_bare: float
    kappa_ex: Rate
    kappa_in: Rate = 0.0

    def __post_init__(self):
        _nonneg(self.omega_bare, "omega_bare")
        _nonneg(self.kappa_ex, "kappa_ex")
        _nonneg(self.kappa_in, "kappa_in")

    @property
    def kappa(self) -> Rate:
        return self.kappa_ex + self.kappa_in

    def with_(self, **changes) -> "CavityMode":
        return replace(self, **changes)


@dataclass(frozen=True)
class OperatingPoint:
    """Signal detunings and intracavity pump photon number.

    ``omega`` is the microwave signal offset from the bare microwave cavity,
    ``delta`` the pump offset from the bare cavity difference frequency.
    """

    omega: Rate = 0.0
    delta: Rate = 0.0
    n_pump: float = 0.0

    def __post_init__(self):
        _finite(self.omega, "omega")
        _finite(self.delta, "delta")
        _nonneg(self.n_pump, "n_pump")


@dataclass(frozen=True)
class SusceptibilityTriplet:
    xi_a: complex
    xi_c: complex
    xi_ac: complex

    def scaled(self, factor: float) -> "SusceptibilityTriplet":
        return SusceptibilityTriplet(self.xi_a * factor, self.xi_c * factor, self.xi_ac * factor)

    def as_array(self) -> np.ndarray:
        return np.array([self.xi_a, self.xi_c, self.xi_ac], dtype=complex)

    @property
    def kappa_a_center(self) -> Rate:
        return 2.0 * abs(self.xi_a.imag)

    @property
    def kappa_c_center(self) -> Rate:
        return 2.0 * abs(self.xi_c.imag)

    def is_passive(self, rtol: float = 1e-12) -> bool:
        return (self.xi_a.imag <= rtol * abs(self.xi_a)) and (self.xi_c.imag <= rtol * abs(self.xi_c))


def complex_detuning(delta: float, gamma: float) -> complex:
    """Return ``delta - i*gamma/2``, the complex transition detuning."""
    delta = _finite(delta, "delta")
    gamma = _positive(gamma, "gamma")
    return complex(delta, -0.5 * gamma)


@dataclass(frozen=True)
class ClassArrays:
    """Column-wise view of a class list, the layout the kernels consume."""

    g13: np.ndarray
    g12: np.ndarray
    gamma13: np.ndarray
    gamma12: np.ndarray
    delta13: np.ndarray
    delta12: np.ndarray
    omega_p: np.ndarray
    weight: np.ndarray

    def __len__(self) -> int:
        return self.g13.shape[0]

    def columns(self) -> tuple[np.ndarray, ...]:
        return (self.g13, self.g12, self.gamma13, self.gamma12,
                self.delta13, self.delta12, self.omega_p, self.weight)

    def with_omega_p(self, omega_p: np.ndarray) -> "ClassArrays":
        return replace(self, omega_p=np.ascontiguousarray(omega_p, dtype=float))

    def with_weight(self, weight: np.ndarray) -> "ClassArrays":
        return replace(self, weight=np.ascontiguousarray(weight, dtype=float))

    def to_classes(self) -> list[CenterClass]:
        return [CenterClass(*(float(c[k]) for c in self.columns())) for k in range(len(self))]


def pack_classes(classes: Iterable[CenterClass] | ClassArrays) -> ClassArrays:
    if isinstance(classes, ClassArrays):
        return classes
    classes = list(classes)
    cols = []
    for name in ("g13", "g12", "gamma13", "gamma12", "delta13", "delta12", "omega_p", "weight"):
        cols.append(np.ascontiguousarray([getattr(c, name) for c in classes], dtype=float))
    return ClassArrays(*cols)


def _check_arrays(arr: ClassArrays) -> None:
    if len(arr) == 0:
        return
    if np.any(arr.gamma13 <= 0) or np.any(arr.gamma12 <= 0):
        raise DomainError("all class linewidths must be > 0", "gamma")
    for col, name in zip(arr.columns(), ("g13", "g12", "gamma13", "gamma12",
                                          "delta13", "delta12", "omega_p", "weight")):
        if not np.all(np.isfinite(col)):
            raise DomainError(f"non-finite {name} in class list", name)
    if np.any(arr.weight < 0):
        raise DomainError("class weights must be >= 0", "weight")


def susceptibilities(classes: Sequence[CenterClass] | ClassArrays, point: OperatingPoint) -> SusceptibilityTriplet:
    """Weighted ensemble sums for the optical, microwave and cross susceptibilities.

    Each class contributes ``weight * g13**2 (w - D12) / den``,
    ``weight * g12**2 (w + Delta - D13) / den`` and
    ``weight * g12 g13 Omega_p / den`` with
    ``den = (w + Delta - D13)(w - D12) - Omega_p**2`` and complex detunings
    ``D1i = delta1i - i gamma1i / 2``. An empty list gives zeros.
    """
    arr = pack_classes(classes)
    if len(arr) == 0:
        return SusceptibilityTriplet(0j, 0j, 0j)
    _check_arrays(arr)
    xa, xc, xac = kernels.class_sums(arr.columns(), np.array([point.omega]), np.array([point.delta]))
    out = SusceptibilityTriplet(complex(xa[0]), complex(xc[0]), complex(xac[0]))
    if not out.is_passive(rtol=1e-9):
        warnings.warn(f"non-passive susceptibilities {out}", PassivityWarning, stacklevel=2)
    return out


def susceptibilities_grid(classes, omega, delta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised :func:`susceptibilities` over matching arrays of ``omega`` and ``delta``."""
    arr = pack_classes(classes)
    omega = np.asarray(omega, dtype=float)
    delta = np.asarray(delta, dtype=float)
    omega, delta = np.broadcast_arrays(omega, delta)
    shape = omega.shape
    if len(arr) == 0:
        z = np.zeros(shape, dtype=complex)
        return z, z.copy(), z.copy()
    _check_arrays(arr)
    xa, xc, xac = kernels.class_sums(arr.columns(), omega.ravel(), delta.ravel())
    return xa.reshape(shape), xc.reshape(shape), xac.reshape(shape)


def lorentzian_sums(classes, point: OperatingPoint) -> tuple[complex, complex]:
    """Pump-off single-transition sums ``sum w g**2 / (x - D)`` for both modes."""
    arr = pack_classes(classes)
    x = point.omega + point.delta
    d13 = arr.delta13 - 0.5j * arr.gamma13
    d12 = arr.delta12 - 0.5j * arr.gamma12
    xa = np.sum(arr.weight * arr.g13 ** 2 / (x - d13))
    xc = np.sum(arr.weight * arr.g12 ** 2 / (point.omega - d12))
    return complex(xa), complex(xc)
