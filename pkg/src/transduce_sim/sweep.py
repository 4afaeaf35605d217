"""Rectangular (omega, delta) sweeps of the full response."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DomainError, OperatingPoint
from .system import TransducerSystem

SWEEP_FIELDS = ("eta", "eta_internal", "eta_a", "eta_c", "cooperativity", "n_mo", "n_om")


@dataclass(frozen=True)
class SweepGrid:
    """Response summaries on a uniform grid; arrays are indexed ``[i_omega, j_delta]``."""

    omega_axis: np.ndarray
    delta_axis: np.ndarray
    values: dict
    errors: np.ndarray  # object array of str, "" for healthy cells
    n_pump: float = 0.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.omega_axis.shape[0], self.delta_axis.shape[0]

    def argmax(self, field: str = "eta") -> tuple[int, int]:
        """Index of the maximum; ties resolve to the lowest (omega, delta)."""
        v = np.where(self.errors == "", self.values[field], -np.inf)
        return tuple(int(k) for k in np.unravel_index(int(np.argmax(v)), v.shape))

    def nearest_index(self, omega: float, delta: float) -> tuple[int, int]:
        """Grid node whose cell contains ``(omega, delta)``."""
        return int(np.argmin(np.abs(self.omega_axis - omega))), int(np.argmin(np.abs(self.delta_axis - delta)))

    def rows(self) -> list[dict]:
        out = []
        for i, w in enumerate(self.omega_axis):
            for j, d in enumerate(self.delta_axis):
                row = {"omega_hz": float(w), "delta_hz": float(d)}
                row.update({k: float(self.values[k][i, j]) for k in SWEEP_FIELDS})
                row["error"] = str(self.errors[i, j])
                out.append(row)
        return out


def uniform_axis(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 2:
        raise DomainError("sweep resolution must be >= 2 per axis", "resolution")
    if not hi > lo:
        raise DomainError("sweep range must be increasing", "range")
    return np.linspace(lo, hi, int(n))


def sweep(system: TransducerSystem, omega_range: tuple[float, float], delta_range: tuple[float, float],
          resolution: tuple[int, int] | int, n_pump: float = 0.0) -> SweepGrid:
    """Evaluate the response on a uniform grid; failures are recorded per cell."""
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    w = uniform_axis(*omega_range, resolution[0])
    d = uniform_axis(*delta_range, resolution[1])
    W, D = np.meshgrid(w, d, indexing="ij")
    errors = np.full(W.shape, "", dtype=object)
    try:
        res = system.evaluate_grid(W, D, n_pump)
        values = {k: np.array(res[k], dtype=float) for k in SWEEP_FIELDS}
    except (DomainError, FloatingPointError, ZeroDivisionError):
        values = {k: np.full(W.shape, np.nan) for k in SWEEP_FIELDS}
        for i in range(W.shape[0]):
            for j in range(W.shape[1]):
                try:
                    s = system.evaluate(OperatingPoint(W[i, j], D[i, j], n_pump)).summary()
                    for k in SWEEP_FIELDS:
                        values[k][i, j] = s["eta_total" if k == "eta" else k]
                except (DomainError, FloatingPointError, ZeroDivisionError) as exc:
                    errors[i, j] = f"{type(exc).__name__}: {exc}"
    bad = ~np.isfinite(values["eta"])
    errors[bad & (errors == "")] = "non-finite efficiency"
    return SweepGrid(w, d, values, errors, float(n_pump))
