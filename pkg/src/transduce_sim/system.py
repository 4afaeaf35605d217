"""A complete converter description that can be evaluated at operating points."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import response as rsp
from .budget import LossModel, assemble_budget
from .ensemble import GaussianEnsemble, average_susceptibilities_grid
from .model import (CavityMode, CenterClass, ClassArrays, DomainError, OperatingPoint, SusceptibilityTriplet,
                    pack_classes, susceptibilities_grid)


@dataclass(frozen=True)
class TransducerSystem:
    """Centres, the two signal cavities, pump scaling, loss model and bath.

    ``ensemble`` is either explicit classes or a :class:`GaussianEnsemble`.
    When ``n_pump_ref`` is set, the configured ``omega_p`` values are taken to
    hold at that photon number and scale as ``sqrt(n_pump / n_pump_ref)``;
    otherwise ``OperatingPoint.n_pump`` only feeds the loss model.
    """

    ensemble: GaussianEnsemble | ClassArrays
    cav_a: CavityMode
    cav_c: CavityMode
    n_pump_ref: float | None = None
    loss_model: LossModel | None = None
    temperature: float = 0.02

    def __post_init__(self):
        if not isinstance(self.ensemble, GaussianEnsemble):
            object.__setattr__(self, "ensemble", pack_classes(self.ensemble))
        if self.n_pump_ref is not None and not self.n_pump_ref > 0:
            raise DomainError("n_pump_ref must be > 0", "n_pump_ref")

    # -- construction helpers -------------------------------------------------
    @classmethod
    def homogeneous(cls, base: CenterClass, n_a: float, cav_a: CavityMode, cav_c: CavityMode, **kw):
        return cls(pack_classes([base.with_(weight=n_a)]), cav_a, cav_c, **kw)

    def with_(self, **changes) -> "TransducerSystem":
        return replace(self, **changes)

    @property
    def is_gaussian(self) -> bool:
        return isinstance(self.ensemble, GaussianEnsemble)

    @property
    def n_total(self) -> float:
        if self.is_gaussian:
            return self.ensemble.n_total
        return float(np.sum(self.ensemble.weight))

    @property
    def reference_class(self) -> CenterClass:
        """Representative class (first class, or the Gaussian template)."""
        if self.is_gaussian:
            return self.ensemble.base
        return self.ensemble.to_classes()[0]

    def with_density(self, n_total: float) -> "TransducerSystem":
        """Rescale the total centre number, keeping the distribution shape."""
        if self.is_gaussian:
            return self.with_(ensemble=self.ensemble.with_(n_total=n_total))
        cur = self.n_total
        if cur <= 0:
            raise DomainError("cannot rescale an empty ensemble", "n_total")
        return self.with_(ensemble=self.ensemble.with_weight(self.ensemble.weight * (n_total / cur)))

    def with_omega_p(self, omega_p: float) -> "TransducerSystem":
        """Set the reference pump Rabi frequency of every class."""
        if self.is_gaussian:
            return self.with_(ensemble=self.ensemble.with_(base=self.ensemble.base.with_(omega_p=omega_p)))
        return self.with_(ensemble=self.ensemble.with_omega_p(np.full(len(self.ensemble), float(omega_p))))

    # -- pump -----------------------------------------------------------------
    def pump_scale(self, n_pump: float) -> float:
        if self.n_pump_ref is None:
            return 1.0
        return math.sqrt(n_pump / self.n_pump_ref)

    def omega_p_at(self, n_pump: float) -> float:
        return self.reference_class.omega_p * self.pump_scale(n_pump)

    def _scaled_ensemble(self, n_pump: float):
        s = self.pump_scale(n_pump)
        if s == 1.0:
            return self.ensemble
        if self.is_gaussian:
            b = self.ensemble.base
            return self.ensemble.with_(base=b.with_(omega_p=b.omega_p * s))
        return self.ensemble.with_omega_p(self.ensemble.omega_p * s)

    def classes_at(self, n_pump: float) -> ClassArrays:
        """Explicit classes at a pump level (Gaussian ensembles use the product rule)."""
        from .ensemble import discretize_arrays
        ens = self._scaled_ensemble(n_pump)
        return discretize_arrays(ens) if self.is_gaussian else ens

    # -- evaluation -----------------------------------------------------------
    def xi_grid(self, omega, delta, n_pump: float = 0.0):
        ens = self._scaled_ensemble(n_pump)
        if self.is_gaussian:
            return average_susceptibilities_grid(ens, omega, delta)
        return susceptibilities_grid(ens, omega, delta)

    def xi(self, point: OperatingPoint) -> SusceptibilityTriplet:
        xa, xc, xac = self.xi_grid(np.array([point.omega]), np.array([point.delta]), point.n_pump)
        return SusceptibilityTriplet(complex(xa[0]), complex(xc[0]), complex(xac[0]))

    def n_th(self) -> float:
        if self.temperature <= 0:
            return 0.0
        return rsp.thermal_occupation(self.cav_c.omega_bare, self.temperature)

    def budget(self, point: OperatingPoint, xi: SusceptibilityTriplet | None = None) -> rsp.LossBudget:
        xi = self.xi(point) if xi is None else xi
        return assemble_budget(self.cav_a.kappa_ex, self.cav_a.kappa_in, self.cav_c.kappa_ex, self.cav_c.kappa_in,
                               xi, point.n_pump, self.loss_model)

    def noncenter_losses(self, n_pump: float) -> tuple[float, float]:
        """Optical and microwave loss excluding centres, ``(kappa_a, kappa_c)``."""
        b = assemble_budget(self.cav_a.kappa_ex, self.cav_a.kappa_in, self.cav_c.kappa_ex, self.cav_c.kappa_in,
                            SusceptibilityTriplet(0j, 0j, 0j), n_pump, self.loss_model)
        return b.kappa_a_noncenter, b.kappa_c_noncenter

    def evaluate(self, point: OperatingPoint) -> rsp.ResponseReport:
        xi = self.xi(point)
        return rsp.build_report(xi, self.budget(point, xi), point, self.n_th())

    def evaluate_grid(self, omega, delta, n_pump: float = 0.0) -> dict[str, np.ndarray]:
        """Vectorised response over broadcast ``omega``/``delta`` arrays."""
        omega, delta = np.broadcast_arrays(np.asarray(omega, float), np.asarray(delta, float))
        xa, xc, xac = self.xi_grid(omega, delta, n_pump)
        ka_nc, kc_nc = self.noncenter_losses(n_pump)
        ka_in_nc = ka_nc - self.cav_a.kappa_ex
        kc_in_nc = kc_nc - self.cav_c.kappa_ex
        kae, kce = self.cav_a.kappa_ex, self.cav_c.kappa_ex
        eta = rsp.eta_formula(xa, xc, xac, kae, ka_nc, kce, kc_nc, omega, delta)
        ka_t = ka_nc + 2.0 * np.abs(xa.imag)
        kc_t = kc_nc + 2.0 * np.abs(xc.imag)
        C = rsp.cooperativity_formula(xac, ka_t, kc_t)
        eta_in = 4.0 * C / (C + 1.0) ** 2
        n_th = self.n_th()
        kc_intr = kc_in_nc + 2.0 * np.abs(xc.imag)
        n_mo = kc_intr / kce * n_th if kce > 0 else np.full(omega.shape, np.inf)
        n_om = rsp.n_om_formula(xa, xac, ka_nc, kae, kc_intr, omega, delta, n_th) if kae > 0 else np.full(omega.shape, np.inf)
        return {
            "eta": eta, "cooperativity": C, "eta_internal": eta_in,
            "eta_a": kae / ka_t, "eta_c": kce / kc_t,
            "n_mo": np.broadcast_to(n_mo, omega.shape), "n_om": n_om,
            "xi_a": xa, "xi_c": xc, "xi_ac": xac,
            "kappa_a_in": np.full(omega.shape, ka_in_nc),
        }
