"""Conversion efficiency, cooperativity, added noise and the matching condition.

Two efficiency routes are provided on purpose. :func:`efficiency` evaluates the
full closed form with centre loss entering through the susceptibilities,
while :func:`efficiency_decomposition` uses ``eta_in * eta_a * eta_c`` with
centre loss folded into the totals. Both are reported side by side in
:class:`ResponseReport` so callers can cross-check them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .constants import HBAR, K_B, TWO_PI
from .model import CavityMode, DomainError, OperatingPoint, SusceptibilityTriplet, _nonneg, _positive


@dataclass(frozen=True)
class LossBudget:
    """Itemised loss lines for both signal modes (all in Hz).

    ``kappa_a_in`` / ``kappa_c_in`` are intrinsic, non-centre losses excluding
    the pump-induced quasiparticle term, which is kept as ``kappa_c_qp``.
    ``details`` holds optional sub-items (for example the split of
    ``kappa_a_in`` into superconductor absorption and nonlinear loss).
    """

    kappa_a_ex: float
    kappa_a_in: float
    kappa_a_center: float
    kappa_c_ex: float
    kappa_c_in: float
    kappa_c_center: float
    kappa_c_qp: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("kappa_a_ex", "kappa_a_in", "kappa_a_center",
                     "kappa_c_ex", "kappa_c_in", "kappa_c_center", "kappa_c_qp"):
            _nonneg(getattr(self, name), name)

    @property
    def kappa_a_total(self) -> float:
        return self.kappa_a_ex + self.kappa_a_in + self.kappa_a_center

    @property
    def kappa_c_total(self) -> float:
        return self.kappa_c_ex + self.kappa_c_in + self.kappa_c_qp + self.kappa_c_center

    @property
    def kappa_a_noncenter(self) -> float:
        """Optical loss entering the closed-form efficiency (centre loss excluded)."""
        return self.kappa_a_ex + self.kappa_a_in

    @property
    def kappa_c_noncenter(self) -> float:
        return self.kappa_c_ex + self.kappa_c_in + self.kappa_c_qp

    @property
    def kappa_c_intrinsic(self) -> float:
        """All microwave loss that is not the external port, used for noise."""
        return self.kappa_c_in + self.kappa_c_qp + self.kappa_c_center

    def cavities(self, omega_a: float = 0.0, omega_c: float = 0.0) -> tuple[CavityMode, CavityMode]:
        """Effective modes for :func:`efficiency`, with centre loss left out."""
        return (CavityMode(omega_a, self.kappa_a_ex, self.kappa_a_in),
                CavityMode(omega_c, self.kappa_c_ex, self.kappa_c_in + self.kappa_c_qp))

    def as_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "details"}
        out["kappa_a_total"] = self.kappa_a_total
        out["kappa_c_total"] = self.kappa_c_total
        out.update({f"detail_{k}": v for k, v in self.details.items()})
        return out


@dataclass(frozen=True)
class ResponseReport:
    xi: SusceptibilityTriplet
    cooperativity: float
    eta_total: float
    eta_internal: float
    eta_a: float
    eta_c: float
    eta_product: float
    n_mo: float
    n_om: float
    budget: LossBudget

    def summary(self) -> dict:
        return {
            "eta_total": self.eta_total,
            "eta_internal": self.eta_internal,
            "eta_a": self.eta_a,
            "eta_c": self.eta_c,
            "eta_product": self.eta_product,
            "cooperativity": self.cooperativity,
            "n_mo": self.n_mo,
            "n_om": self.n_om,
        }


# ----------------------------------------------------------------------------
# array-friendly formula cores
# ----------------------------------------------------------------------------

def eta_formula(xi_a, xi_c, xi_ac, kappa_a_ex, kappa_a, kappa_c_ex, kappa_c, omega, delta):
    """Closed-form bidirectional efficiency; broadcasts over numpy arrays."""
    x = omega + delta
    den = xi_ac * xi_ac + (0.5 * kappa_a - 1j * (x - xi_a)) * (0.5 * kappa_c - 1j * (omega - xi_c))
    num = kappa_a_ex * kappa_c_ex * np.abs(xi_ac) ** 2
    return num / np.abs(den) ** 2


def cooperativity_formula(xi_ac, kappa_a_total, kappa_c_total):
    return 4.0 * np.abs(xi_ac) ** 2 / (kappa_a_total * kappa_c_total)


def n_om_formula(xi_a, xi_ac, kappa_a, kappa_a_ex, kappa_c_in, omega, delta, n_th):
    x = omega + delta
    pref = np.abs(0.5 * kappa_a - 1j * (x - xi_a)) ** 2
    mag = np.abs(xi_ac) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = pref / mag * kappa_c_in / kappa_a_ex * n_th
    return np.where(mag > 0, out, np.inf)


# ----------------------------------------------------------------------------
# scalar operations
# ----------------------------------------------------------------------------

def _check_mode(cav: CavityMode, name: str) -> None:
    if cav.kappa < cav.kappa_ex:
        raise DomainError(f"{name}: total loss below external coupling", name)


def efficiency(xi: SusceptibilityTriplet, cav_a: CavityMode, cav_c: CavityMode, point: OperatingPoint) -> float:
    """Bidirectional conversion efficiency from the full closed form.

    ``cav_a.kappa`` and ``cav_c.kappa`` must exclude centre-induced loss,
    which enters through ``xi.xi_a`` and ``xi.xi_c``.
    """
    _check_mode(cav_a, "cav_a")
    _check_mode(cav_c, "cav_c")
    if xi.xi_ac == 0:
        return 0.0
    x = point.omega + point.delta
    den = xi.xi_ac ** 2 + (0.5 * cav_a.kappa - 1j * (x - xi.xi_a)) * (0.5 * cav_c.kappa - 1j * (point.omega - xi.xi_c))
    if den == 0:
        raise DomainError("efficiency denominator vanished", "kappa")
    return float(cav_a.kappa_ex * cav_c.kappa_ex * abs(xi.xi_ac) ** 2 / abs(den) ** 2)


def cooperativity(xi_ac: complex, kappa_a: float, kappa_c: float) -> float:
    """``C = 4 |xi_ac|^2 / (kappa_a kappa_c)``."""
    kappa_a = _positive(kappa_a, "kappa_a")
    kappa_c = _positive(kappa_c, "kappa_c")
    return float(4.0 * abs(xi_ac) ** 2 / (kappa_a * kappa_c))


def efficiency_decomposition(C: float, kappa_a_ex: float, kappa_a: float, kappa_c_ex: float, kappa_c: float):
    """Return ``(eta_internal, eta_a, eta_c, eta_total)`` for totals that include centre loss."""
    C = _nonneg(C, "C")
    kappa_a = _positive(kappa_a, "kappa_a")
    kappa_c = _positive(kappa_c, "kappa_c")
    if kappa_a_ex > kappa_a * (1 + 1e-12) or kappa_c_ex > kappa_c * (1 + 1e-12):
        raise DomainError("external coupling exceeds total loss", "kappa_ex")
    eta_in = 4.0 * C / (C + 1.0) ** 2
    eta_a = kappa_a_ex / kappa_a
    eta_c = kappa_c_ex / kappa_c
    return eta_in, eta_a, eta_c, eta_in * eta_a * eta_c


def added_noise(xi: SusceptibilityTriplet, kappa_a: float, kappa_a_ex: float, kappa_c_ex: float,
                kappa_c_in: float, point: OperatingPoint, n_th: float) -> tuple[float, float]:
    """Input-referred added noise ``(n_mo, n_om)`` from microwave thermal noise.

    ``kappa_a`` excludes optical centre loss (it enters via ``xi.xi_a``);
    ``kappa_c_in`` is every non-port microwave loss, centre-induced loss
    included. ``n_om`` is ``inf`` when ``xi_ac`` vanishes.
    """
    n_th = _nonneg(n_th, "n_th")
    kappa_c_ex = _positive(kappa_c_ex, "kappa_c_ex")
    kappa_a_ex = _positive(kappa_a_ex, "kappa_a_ex")
    kappa_c_in = _nonneg(kappa_c_in, "kappa_c_in")
    n_mo = kappa_c_in / kappa_c_ex * n_th
    if n_th == 0.0:
        return 0.0, 0.0
    n_om = float(n_om_formula(xi.xi_a, xi.xi_ac, kappa_a, kappa_a_ex, kappa_c_in, point.omega, point.delta, n_th))
    return float(n_mo), n_om


def matching_pump_rabi(n_a: float, g12: float, g13: float, kappa_a: float, kappa_c: float) -> float:
    """Pump Rabi frequency giving ``C = 1`` at zero detunings in the strong-pump limit."""
    n_a = _positive(n_a, "n_a")
    g12 = _positive(g12, "g12")
    g13 = _positive(g13, "g13")
    kappa_a = _positive(kappa_a, "kappa_a")
    kappa_c = _positive(kappa_c, "kappa_c")
    return 2.0 * n_a * g12 * g13 / math.sqrt(kappa_a * kappa_c)


def thermal_occupation(omega_c: float, temperature: float) -> float:
    """Bose occupation of a mode at ``omega_c`` (Hz, ordinary frequency)."""
    omega_c = _positive(omega_c, "omega_c")
    temperature = _finite_temperature(temperature)
    x = HBAR * TWO_PI * omega_c / (K_B * temperature)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def _finite_temperature(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t <= 0.0:
        raise DomainError(f"temperature must be > 0 K, got {t!r}", "temperature")
    return t


def build_report(xi: SusceptibilityTriplet, budget: LossBudget, point: OperatingPoint, n_th: float) -> ResponseReport:
    """Evaluate every response quantity for one operating point."""
    ka_nc = budget.kappa_a_noncenter
    kc_nc = budget.kappa_c_noncenter
    eta = 0.0 if xi.xi_ac == 0 else float(eta_formula(
        xi.xi_a, xi.xi_c, xi.xi_ac, budget.kappa_a_ex, ka_nc, budget.kappa_c_ex, kc_nc, point.omega, point.delta))
    ka_t = budget.kappa_a_total
    kc_t = budget.kappa_c_total
    C = cooperativity(xi.xi_ac, ka_t, kc_t)
    eta_in, eta_a, eta_c, eta_prod = efficiency_decomposition(C, budget.kappa_a_ex, ka_t, budget.kappa_c_ex, kc_t)
    if budget.kappa_c_ex > 0 and budget.kappa_a_ex > 0:
        n_mo, n_om = added_noise(xi, ka_nc, budget.kappa_a_ex, budget.kappa_c_ex,
                                 budget.kappa_c_intrinsic, point, n_th)
    else:
        n_mo, n_om = math.inf, math.inf
    return ResponseReport(xi, C, eta, eta_in, eta_a, eta_c, eta_prod, n_mo, n_om, budget)
