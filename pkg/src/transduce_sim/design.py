"""Matched-design solving and density versus pump-photon sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import GaussianEnsemble
from .model import DomainError, OperatingPoint, SusceptibilityTriplet
from .response import matching_pump_rabi
from .system import TransducerSystem

FREE_VARIABLES = ("omega_p", "n_a", "kappa_a_ex", "kappa_c_ex")


@dataclass(frozen=True)
class DesignResult:
    free: str
    value: float
    success: bool
    exact_cooperativity: float
    system: TransducerSystem | None
    message: str = ""


def _exact_c(system: TransducerSystem, n_pump: float) -> float:
    return system.evaluate(OperatingPoint(0.0, 0.0, n_pump)).cooperativity


def solve_matched_design(system: TransducerSystem, free: str, n_pump: float | None = None) -> DesignResult:
    """Solve the strong-pump matching condition for one free parameter.

    The condition is ``Omega_p = 2 N g12 g13 / sqrt(kappa_a kappa_c)`` at zero
    detunings, with ``kappa`` the non-centre losses at ``n_pump`` (defaults to
    the system's reference photon number). The returned system has the solved
    value substituted, and ``exact_cooperativity`` is evaluated from the full
    susceptibilities there.
    """
    if free not in FREE_VARIABLES:
        raise DomainError(f"free variable must be one of {FREE_VARIABLES}, got {free!r}", "free")
    if n_pump is None:
        n_pump = system.n_pump_ref or 0.0
    ref = system.reference_class
    n_a = system.n_total
    op = system.omega_p_at(n_pump)
    ka, kc = system.noncenter_losses(n_pump)
    g = ref.g12 * ref.g13

    def fail(msg):
        return DesignResult(free, math.nan, False, math.nan, None, msg)

    if free == "omega_p":
        value = matching_pump_rabi(n_a, ref.g12, ref.g13, ka, kc)
        # store the reference-level Rabi frequency so that n_pump maps back onto it
        new = system.with_omega_p(value / system.pump_scale(n_pump))
    elif free == "n_a":
        if op <= 0:
            return fail("pump Rabi frequency is zero; no density gives C = 1")
        value = op * math.sqrt(ka * kc) / (2.0 * g)
        new = system.with_density(value)
    elif free == "kappa_a_ex":
        if op <= 0:
            return fail("pump Rabi frequency is zero")
        need = (2.0 * n_a * g / op) ** 2 / kc
        value = need - (ka - system.cav_a.kappa_ex)
        if value <= 0:
            return fail("intrinsic optical loss alone exceeds the matched total")
        new = system.with_(cav_a=system.cav_a.with_(kappa_ex=value))
    else:
        if op <= 0:
            return fail("pump Rabi frequency is zero")
        need = (2.0 * n_a * g / op) ** 2 / ka
        value = need - (kc - system.cav_c.kappa_ex)
        if value <= 0:
            return fail("intrinsic microwave loss alone exceeds the matched total")
        new = system.with_(cav_c=system.cav_c.with_(kappa_ex=value))
    if not (math.isfinite(value) and value > 0):
        return fail("no positive solution")
    return DesignResult(free, float(value), True, _exact_c(new, n_pump), new)


# ----------------------------------------------------------------------------
# density / pump sweep
# ----------------------------------------------------------------------------

DENSITY_COLUMNS = ("n_pump", "sigma13_hz", "omega_p_hz", "n_a", "rho_per_m3", "eta_total", "eta_product",
                   "eta_internal", "eta_a", "eta_c", "cooperativity", "n_mo", "n_om",
                   "kappa_c_qp_hz", "kappa_a_in_hz", "error")


def matched_density(xi_unit: SusceptibilityTriplet, kappa_a: float, kappa_c: float) -> float:
    """Centre number giving exactly ``C = 1`` with centre loss in the totals.

    ``xi_unit`` holds susceptibilities per unit centre number. Solves
    ``4 N^2 |xi_ac|^2 = (kappa_a + N l_a)(kappa_c + N l_c)``; returns NaN when
    centre loss grows as fast as the coupling so that no density matches.
    """
    la = 2.0 * abs(xi_unit.xi_a.imag)
    lc = 2.0 * abs(xi_unit.xi_c.imag)
    X = abs(xi_unit.xi_ac) ** 2
    a = 4.0 * X - la * lc
    b = -(kappa_a * lc + kappa_c * la)
    c = -kappa_a * kappa_c
    if a <= 0:
        return math.nan
    # b <= 0 and c < 0, so the positive root has no cancellation
    return (-b + math.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)


@dataclass
class DensityTable:
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])


def density_pump_sweep(system: TransducerSystem, n_pumps, sigma13_list, sigma12: float | None = None,
                       volume: float | None = None) -> DensityTable:
    """Matched-density efficiency and noise over pump photon numbers and optical IB.

    For each ``(N_p, sigma13)`` the centre number is chosen for ``C = 1`` at
    zero detunings (:func:`matched_density`) and the full inhomogeneous
    response is evaluated there. Failures are recorded in the ``error`` column.
    ``volume`` (m^3) converts centre number to density.
    """
    if system.n_pump_ref is None:
        raise DomainError("density sweep needs a pump calibration (n_pump_ref)", "n_pump_ref")
    if volume is None and system.loss_model is not None:
        volume = system.loss_model.geometry.v_optical
    ens = system.ensemble
    if isinstance(ens, GaussianEnsemble):
        base_ens = ens
    else:
        base_ens = GaussianEnsemble(0.0, 0.0, 0.0, 0.0, system.n_total, system.reference_class)
    if sigma12 is not None:
        base_ens = base_ens.with_(sigma12=sigma12)
    table = DensityTable()
    for n_p in n_pumps:
        for s13 in sigma13_list:
            row = {k: math.nan for k in DENSITY_COLUMNS}
            row.update(n_pump=float(n_p), sigma13_hz=float(s13), error="")
            try:
                trial = system.with_(ensemble=base_ens.with_(sigma13=float(s13), n_total=1.0))
                point = OperatingPoint(0.0, 0.0, float(n_p))
                row["omega_p_hz"] = trial.omega_p_at(n_p)
                xi1 = trial.xi(point)
                ka, kc = trial.noncenter_losses(n_p)
                n_a = matched_density(xi1, ka, kc)
                if not math.isfinite(n_a):
                    raise DomainError("no centre density reaches C = 1", "n_a")
                rep = trial.with_density(n_a).evaluate(point)
                row.update(n_a=n_a, rho_per_m3=n_a / volume if volume else math.nan,
                           eta_total=rep.eta_total, eta_product=rep.eta_product, eta_internal=rep.eta_internal,
                           eta_a=rep.eta_a, eta_c=rep.eta_c, cooperativity=rep.cooperativity,
                           n_mo=rep.n_mo, n_om=rep.n_om, kappa_c_qp_hz=rep.budget.kappa_c_qp,
                           kappa_a_in_hz=rep.budget.kappa_a_in)
            except (DomainError, ValueError, ZeroDivisionError) as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
            table.rows.append(row)
    return table


def density_scan(system: TransducerSystem, n_totals, n_pump: float) -> DensityTable:
    """Response at zero detunings versus centre number at fixed pump."""
    table = DensityTable()
    point = OperatingPoint(0.0, 0.0, float(n_pump))
    for n in n_totals:
        rep = system.with_density(float(n)).evaluate(point)
        row = {"n_a": float(n)}
        row.update(rep.summary())
        table.rows.append(row)
    return table


# ----------------------------------------------------------------------------
# cooperativity enhancement diagnostic
# ----------------------------------------------------------------------------

def enhancement_report(n_a: float, g12: float, g13: float, gamma12: float, gamma13: float, omega_p: float,
                       detuning_factor: float = 4.0) -> dict:
    """Candidate expressions for the strong- versus weak-coupling cooperativity gain.

    * ``squared_ratio``: ``(g12 g13 N / Omega_p^2 - 1)^2``.
    * ``exact_ratio``: ``|xi_ac(0)|^2 / |xi_ac(weak)|^2`` with the weak-coupling
      detunings ``delta_1i = detuning_factor * g_1i sqrt(N)``, both from the
      full complex-detuning expression at ``omega = delta = 0``.
    * ``prose_ratio``: the same ratio using the real-denominator forms
      ``gamma12 gamma13 - Omega_p^2`` and ``delta12 delta13 - Omega_p^2``.

    The expressions disagree with one another; all are reported.
    """
    op2 = omega_p * omega_p
    d12 = detuning_factor * g12 * math.sqrt(n_a)
    d13 = detuning_factor * g13 * math.sqrt(n_a)
    num = n_a * g12 * g13 * omega_p
    strong = num / ((0.5j * gamma13) * (0.5j * gamma12) - op2)
    weak = num / ((-(d13 - 0.5j * gamma13)) * (-(d12 - 0.5j * gamma12)) - op2)
    prose_strong = num / (gamma12 * gamma13 - op2)
    prose_weak = num / (d12 * d13 - op2)
    return {
        "squared_ratio": (g12 * g13 * n_a / op2 - 1.0) ** 2,
        "exact_ratio": abs(strong) ** 2 / abs(weak) ** 2,
        "prose_ratio": abs(prose_strong) ** 2 / abs(prose_weak) ** 2,
        "detuning_factor": detuning_factor,
    }
