"""Operating-point search: coarse grid seed plus Nelder-Mead refinement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize as so

from .model import OperatingPoint
from .sweep import sweep
from .system import TransducerSystem


@dataclass(frozen=True)
class OptimumResult:
    omega: float
    delta: float
    eta: float
    coarse_omega: float
    coarse_delta: float
    coarse_eta: float
    degenerate: bool
    refined: bool
    n_evaluations: int


def optimize_operating_point(system: TransducerSystem, omega_range: tuple[float, float],
                             delta_range: tuple[float, float], n_coarse: int = 41, n_pump: float = 0.0,
                             xatol: float = 1e-6, fatol: float = 1e-12, max_iter: int = 400) -> OptimumResult:
    """Maximise the efficiency over a rectangular window.

    The coarse grid maximum (ties to the lowest ``(omega, delta)``) seeds a
    Nelder-Mead search in coordinates scaled by the grid spacing. The search
    is confined to the window, and the refined point is only accepted when it
    beats the seed by more than ``fatol``, so the result is never worse than the coarse grid.
    """
    grid = sweep(system, omega_range, delta_range, n_coarse, n_pump)
    eta = np.where(grid.errors == "", grid.values["eta"], -np.inf)
    i, j = grid.argmax()
    w0, d0, e0 = float(grid.omega_axis[i]), float(grid.delta_axis[j]), float(eta[i, j])
    if not np.any(eta > 0):
        wc = 0.5 * (omega_range[0] + omega_range[1])
        dc = 0.5 * (delta_range[0] + delta_range[1])
        return OptimumResult(wc, dc, 0.0, wc, dc, 0.0, True, False, grid.omega_axis.size * grid.delta_axis.size)

    hw = grid.omega_axis[1] - grid.omega_axis[0]
    hd = grid.delta_axis[1] - grid.delta_axis[0]
    lo = np.array([omega_range[0], delta_range[0]])
    hi = np.array([omega_range[1], delta_range[1]])
    count = [0]

    def objective(z):
        p = np.array([w0 + z[0] * hw, d0 + z[1] * hd])
        if np.any(p < lo) or np.any(p > hi):
            return 1.0
        count[0] += 1
        return -system.evaluate(OperatingPoint(p[0], p[1], n_pump)).eta_total

    simplex = np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]])
    res = so.minimize(objective, np.zeros(2), method="Nelder-Mead",
                      options={"xatol": xatol, "fatol": fatol, "maxiter": max_iter, "initial_simplex": simplex})
    w1, d1, e1 = w0 + res.x[0] * hw, d0 + res.x[1] * hd, -float(res.fun)
    n_eval = grid.omega_axis.size * grid.delta_axis.size + count[0]
    if e1 > e0 + fatol:
        return OptimumResult(float(w1), float(d1), e1, w0, d0, e0, False, True, n_eval)
    return OptimumResult(w0, d0, e0, w0, d0, e0, False, False, n_eval)
