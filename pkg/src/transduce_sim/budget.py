"""Coupling rates from physical dipoles and the pump-dependent loss budget.

Geometry and material inputs are SI (m, m^3, J, C m, J/T). Returned rates are
ordinary frequencies in Hz: the textbook expressions give angular rates,
which are divided by 2*pi here.

The quasiparticle density and the optical nonlinear loss are substitute
models with exposed parameters (see :data:`QP_MODELS` and
:class:`OpticalLossPolynomial`); they reproduce trends, not calibrated
magnitudes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

from .constants import EPSILON_0, HBAR, K_B, MU_0, PLANCK, TWO_PI
from .model import DomainError, SusceptibilityTriplet, _finite, _nonneg, _positive
from .response import LossBudget


class ConfigurationError(ValueError):
    """A model identifier or model parameter set is not recognised."""


class RangeWarning(UserWarning):
    pass


# ----------------------------------------------------------------------------
# geometry and couplings
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometrySpec:
    v_optical: float  # m^3
    v_microwave: float  # m^3, inductive line only
    fill_a: float = 1.0
    fill_b: float = 1.0
    fill_c: float = 1.0
    d_om: float = 1.0e-6  # m
    eps_r: float = 11.7

    def __post_init__(self):
        _positive(self.v_optical, "v_optical")
        _positive(self.v_microwave, "v_microwave")
        for name in ("fill_a", "fill_b", "fill_c"):
            v = _finite(getattr(self, name), name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}", name)
        _nonneg(self.d_om, "d_om")
        _positive(self.eps_r, "eps_r")

    @property
    def fill_abc(self) -> float:
        return math.sqrt(self.fill_a * self.fill_b * self.fill_c)


@dataclass(frozen=True)
class DipoleSpec:
    d13: float  # C m
    d23: float  # C m
    mu12: float  # J/T

    def __post_init__(self):
        for name in ("d13", "d23", "mu12"):
            _nonneg(getattr(self, name), name)


def _electric_zpf(freq: float, fill: float, geom: GeometrySpec) -> float:
    """sqrt(hbar w F / (eps0 eps_r V)) in V/m for one photon."""
    return math.sqrt(HBAR * TWO_PI * freq * fill / (EPSILON_0 * geom.eps_r * geom.v_optical))


def _magnetic_zpf(freq: float, fill: float, geom: GeometrySpec) -> float:
    """sqrt(hbar w F mu0 / V) in T for one photon."""
    return math.sqrt(HBAR * TWO_PI * freq * fill * MU_0 / geom.v_optical)


def coupling_from_dipole(dipoles: DipoleSpec, geometry: GeometrySpec, f_a: float, f_c: float) -> tuple[float, float]:
    """Single-centre couplings ``(g13, g12)`` in Hz for mode frequencies ``f_a``, ``f_c``."""
    _positive(f_a, "f_a")
    _positive(f_c, "f_c")
    g13 = dipoles.d13 * _electric_zpf(f_a, geometry.fill_a, geometry) / HBAR / TWO_PI
    g12 = dipoles.mu12 * _magnetic_zpf(f_c, geometry.fill_c, geometry) / HBAR / TWO_PI
    return g13, g12


def dipole_from_coupling(g13: float, g12: float, geometry: GeometrySpec, f_a: float, f_c: float) -> tuple[float, float]:
    """Inverse of :func:`coupling_from_dipole`: ``(d13, mu12)`` for target couplings."""
    d13 = _nonneg(g13, "g13") * TWO_PI * HBAR / _electric_zpf(_positive(f_a, "f_a"), geometry.fill_a, geometry)
    mu12 = _nonneg(g12, "g12") * TWO_PI * HBAR / _magnetic_zpf(_positive(f_c, "f_c"), geometry.fill_c, geometry)
    return d13, mu12


def pump_rabi(dipoles: DipoleSpec, geometry: GeometrySpec, f_p: float, n_p: float) -> float:
    """Pump Rabi frequency in Hz for ``n_p`` intracavity pump photons."""
    n_p = _nonneg(n_p, "n_p")
    return dipoles.d23 * math.sqrt(n_p) * _electric_zpf(_positive(f_p, "f_p"), geometry.fill_b, geometry) / HBAR / TWO_PI


@dataclass(frozen=True)
class PumpCalibration:
    """Square-root law through one measured pair ``(omega_p_ref, n_ref)``."""

    omega_p_ref: float
    n_ref: float

    def __post_init__(self):
        _nonneg(self.omega_p_ref, "omega_p_ref")
        _positive(self.n_ref, "n_ref")

    def rabi(self, n_p: float) -> float:
        return self.omega_p_ref * math.sqrt(_nonneg(n_p, "n_p") / self.n_ref)

    def photons(self, omega_p: float) -> float:
        """Inverse of :meth:`rabi`."""
        if self.omega_p_ref == 0:
            raise DomainError("calibration has zero Rabi frequency", "omega_p_ref")
        return self.n_ref * (_nonneg(omega_p, "omega_p") / self.omega_p_ref) ** 2


# ----------------------------------------------------------------------------
# pump leakage and quasiparticles
# ----------------------------------------------------------------------------

def pump_leakage(n_p: float, f_p: float, kappa_b_sc: float) -> float:
    """Power (W) dumped into the superconductor: ``hbar * 2 pi f_p * n_p * kappa_b_sc``."""
    return HBAR * TWO_PI * _nonneg(f_p, "f_p") * _nonneg(n_p, "n_p") * _nonneg(kappa_b_sc, "kappa_b_sc")


def thermal_qp_density(n0: float, gap: float, temperature: float) -> float:
    """``2 n0 sqrt(2 pi kT gap) exp(-gap/kT)`` in m^-3."""
    if temperature <= 0:
        return 0.0
    kt = K_B * temperature
    return 2.0 * n0 * math.sqrt(2.0 * math.pi * kt * gap) * math.exp(-gap / kt)


def _qp_steady_state(sc: "SuperconductorSpec", p_leak: float, v_m: float) -> float:
    eta_pb = sc.qp_params.get("eta_pb", 0.6)
    r_rec = sc.qp_params.get("r_rec", 1.0e-15)
    if r_rec <= 0:
        raise ConfigurationError("r_rec must be > 0")
    n_th = thermal_qp_density(sc.n0, sc.gap, sc.temperature)
    gen = eta_pb * p_leak / (sc.gap * v_m)
    return math.sqrt(n_th * n_th + gen / r_rec)


def _qp_thermal(sc: "SuperconductorSpec", p_leak: float, v_m: float) -> float:
    return thermal_qp_density(sc.n0, sc.gap, sc.temperature)


def _qp_fixed(sc: "SuperconductorSpec", p_leak: float, v_m: float) -> float:
    if "n_qp" not in sc.qp_params:
        raise ConfigurationError("qp_model 'fixed' needs parameter n_qp")
    return float(sc.qp_params["n_qp"])


QP_MODELS: dict[str, Callable] = {
    "steady_state": _qp_steady_state,
    "thermal": _qp_thermal,
    "fixed": _qp_fixed,
}


def _f_unity(temperature: float, f_c: float) -> float:
    return 1.0


TEMPERATURE_FACTORS: dict[str, Callable[[float, float], float]] = {"unity": _f_unity}


@dataclass(frozen=True)
class SuperconductorSpec:
    """Film parameters for pump-induced microwave loss.

    ``n0`` is the single-spin density of states in states/(J m^3) and ``gap``
    the superconducting gap in J. ``qp_params`` are model-specific; the
    default ``steady_state`` model uses ``eta_pb`` (pair-breaking efficiency)
    and ``r_rec`` (recombination constant, m^3/s).
    """

    alpha_ki: float
    n0: float
    gap: float
    kappa_b_sc: float
    temperature: float = 0.02
    qp_model: str = "steady_state"
    qp_params: dict = field(default_factory=dict)
    f_model: str = "unity"

    def __post_init__(self):
        a = _finite(self.alpha_ki, "alpha_ki")
        if not 0.0 <= a <= 1.0:
            raise DomainError("alpha_ki must lie in [0, 1]", "alpha_ki")
        _positive(self.n0, "n0")
        _positive(self.gap, "gap")
        _nonneg(self.kappa_b_sc, "kappa_b_sc")
        _nonneg(self.temperature, "temperature")

    def qp_density(self, p_leak: float, v_m: float) -> float:
        try:
            model = QP_MODELS[self.qp_model]
        except KeyError:
            raise ConfigurationError(f"unknown qp_model {self.qp_model!r}; known: {sorted(QP_MODELS)}") from None
        return model(self, _nonneg(p_leak, "p_leak"), _positive(v_m, "v_m"))

    def f_factor(self, f_c: float) -> float:
        try:
            return TEMPERATURE_FACTORS[self.f_model](self.temperature, f_c)
        except KeyError:
            raise ConfigurationError(f"unknown f_model {self.f_model!r}") from None


def qp_loss_from_density(sc: SuperconductorSpec, f_c: float, n_qp: float) -> float:
    """Microwave loss (Hz) for a given quasiparticle density (m^-3)."""
    f_c = _positive(f_c, "f_c")
    return (f_c * sc.alpha_ki / math.pi * n_qp / (sc.n0 * sc.gap)
            * math.sqrt(2.0 * sc.gap / (PLANCK * f_c)) * sc.f_factor(f_c))


def qp_loss(sc: SuperconductorSpec, f_c: float, p_leak: float, v_m: float) -> float:
    """Quasiparticle-induced microwave loss (Hz) at leaked pump power ``p_leak`` (W)."""
    return qp_loss_from_density(sc, f_c, sc.qp_density(p_leak, v_m))


# ----------------------------------------------------------------------------
# optical loss models
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class EvanescentLoss:
    value: float
    warning: str | None = None


@dataclass(frozen=True)
class ExponentialLossFit:
    """``kappa(d) = kappa0 * exp(-d / length)`` fitted over ``[d_min, d_max]`` (m)."""

    kappa0: float
    length: float
    d_min: float
    d_max: float

    def __post_init__(self):
        _nonneg(self.kappa0, "kappa0")
        _positive(self.length, "length")
        if not self.d_max > self.d_min:
            raise DomainError("fit range must have d_max > d_min", "d_max")

    @classmethod
    def from_decade_span(cls, kappa_at_min: float, d_min: float = 0.2e-6, d_max: float = 1.4e-6,
                         decades: float = 10.0) -> "ExponentialLossFit":
        length = (d_max - d_min) / (decades * math.log(10.0))
        return cls(kappa_at_min * math.exp(d_min / length), length, d_min, d_max)

    def __call__(self, d: float) -> float:
        return self.kappa0 * math.exp(-d / self.length)


def evanescent_pump_loss(d_om: float, fit: ExponentialLossFit) -> EvanescentLoss:
    """Loss into the superconductor at separation ``d_om``; flags extrapolation."""
    d_om = _nonneg(d_om, "d_om")
    msg = None
    if not fit.d_min <= d_om <= fit.d_max:
        msg = f"d_om = {d_om:.3e} m outside fitted range [{fit.d_min:.3e}, {fit.d_max:.3e}] m"
        warnings.warn(msg, RangeWarning, stacklevel=2)
    return EvanescentLoss(fit(d_om), msg)


@dataclass(frozen=True)
class OpticalLossPolynomial:
    """Pump-dependent nonlinear optical loss ``k0 + c1 N_p + c2 N_p^2`` (Hz)."""

    k0: float = 0.0
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        for name in ("k0", "c1", "c2"):
            _nonneg(getattr(self, name), name)

    def __call__(self, n_p: float) -> float:
        return self.k0 + self.c1 * n_p + self.c2 * n_p * n_p


@dataclass(frozen=True)
class LossModel:
    """Everything needed to turn a pump photon number into loss lines."""

    geometry: GeometrySpec
    superconductor: SuperconductorSpec | None = None
    optical_sc_fit: ExponentialLossFit | None = None
    optical_nonlinear: OpticalLossPolynomial = field(default_factory=OpticalLossPolynomial)
    f_pump: float = 230.6e12
    f_microwave: float = 8.0e9

    def lines(self, n_p: float) -> dict:
        n_p = _nonneg(n_p, "n_p")
        out = {"kappa_a_sc": 0.0, "kappa_a_nl": self.optical_nonlinear(n_p),
               "p_leak": 0.0, "n_qp": 0.0, "kappa_c_qp": 0.0}
        if self.optical_sc_fit is not None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RangeWarning)
                out["kappa_a_sc"] = evanescent_pump_loss(self.geometry.d_om, self.optical_sc_fit).value
        if self.superconductor is not None:
            sc = self.superconductor
            p = pump_leakage(n_p, self.f_pump, sc.kappa_b_sc)
            n_qp = sc.qp_density(p, self.geometry.v_microwave)
            out.update(p_leak=p, n_qp=n_qp, kappa_c_qp=qp_loss_from_density(sc, self.f_microwave, n_qp))
        return out


def assemble_budget(kappa_a_ex: float, kappa_a_in: float, kappa_c_ex: float, kappa_c_in: float,
                    xi: SusceptibilityTriplet, n_p: float = 0.0, loss_model: LossModel | None = None) -> LossBudget:
    """Itemised budget: intrinsic baselines, pump-driven lines and centre loss."""
    details = {}
    ka_in = _nonneg(kappa_a_in, "kappa_a_in")
    kc_qp = 0.0
    if loss_model is not None:
        lines = loss_model.lines(n_p)
        details.update(lines)
        details["kappa_a_in_base"] = ka_in
        ka_in = ka_in + lines["kappa_a_sc"] + lines["kappa_a_nl"]
        kc_qp = lines["kappa_c_qp"]
    return LossBudget(kappa_a_ex, ka_in, 2.0 * abs(xi.xi_a.imag), kappa_c_ex, kappa_c_in,
                      2.0 * abs(xi.xi_c.imag), kc_qp, details)


def strong_pump_center_loss(n_a: float, g13: float, g12: float, gamma13: float, gamma12: float,
                            omega_p: float) -> tuple[float, float]:
    """Approximate centre loss ``(N g13^2 gamma12 / Op^2, N g12^2 gamma13 / Op^2)``."""
    omega_p = _positive(omega_p, "omega_p")
    op2 = omega_p * omega_p
    return n_a * g13 * g13 * gamma12 / op2, n_a * g12 * g12 * gamma13 / op2
