"""Independent steady-state check of the closed-form response.

The linearised equations of motion for the two cavity amplitudes and the
polarisations of every class are assembled directly, in the frame where the
microwave signal sits at ``omega`` and the optical signal at ``omega + delta``
(the pump phase factor is removed by this choice of frame)::

    da/dt    = (i x - ka/2) a   - i sum_k sqrt(w_k) g13_k s13_k + sqrt(ka_ex) a_in
    dc/dt    = (i w - kc/2) c   - i sum_k sqrt(w_k) g12_k s12_k + sqrt(kc_ex) c_in
    ds13/dt  = (i (x - d13) - y13/2) s13 - i sqrt(w) g13 a - i Op e^{i phi} s12
    ds12/dt  = (i (w - d12) - y12/2) s12 - i sqrt(w) g12 c - i Op e^{-i phi} s13

with ``x = omega + delta``. A class of weight ``w`` acts as one collective
polarisation with coupling ``sqrt(w) g``. Outputs follow
``out = in - sqrt(kappa_ex) * <mode>``.

No susceptibility formula is used here, so agreement with
:func:`transduce_sim.response.eta_formula` is a genuine cross-check.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import kernels
from .model import CavityMode, ClassArrays, DomainError, OperatingPoint, pack_classes

DEBUG_ENV = "TRANSDUCE_SIM_DEBUG"
PORTS = ("microwave", "optical")
_REFINE_STEPS = 2


def _debug_enabled() -> bool:
    return os.environ.get(DEBUG_ENV, "").strip().lower() in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class LinearSystem:
    """``dy/dt = matrix @ y + drive[:, port]`` with ``y = (a, c, s13_1..K, s12_1..K)``."""

    matrix: np.ndarray
    drive: np.ndarray  # columns: microwave port, optical port (unit input amplitude)
    n_classes: int
    kappa_a_ex: float
    kappa_c_ex: float

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def port_column(self, port: str) -> int:
        if port not in PORTS:
            raise DomainError(f"unknown port {port!r}; use one of {PORTS}", "port")
        return PORTS.index(port)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


def assemble(classes, cav_a: CavityMode, cav_c: CavityMode, point: OperatingPoint,
             pump_phase: float = 0.0) -> LinearSystem:
    """Build the coupled-mode Jacobian and the unit drive vectors."""
    arr: ClassArrays = pack_classes(classes)
    K = len(arr)
    n = 2 + 2 * K
    x = point.omega + point.delta
    J = np.zeros((n, n), dtype=complex)
    J[0, 0] = 1j * x - 0.5 * cav_a.kappa
    J[1, 1] = 1j * point.omega - 0.5 * cav_c.kappa
    if K:
        i13 = np.arange(2, 2 + K)
        i12 = np.arange(2 + K, 2 + 2 * K)
        sw = np.sqrt(arr.weight)
        J[0, i13] = -1j * sw * arr.g13
        J[i13, 0] = -1j * sw * arr.g13
        J[1, i12] = -1j * sw * arr.g12
        J[i12, 1] = -1j * sw * arr.g12
        J[i13, i13] = 1j * (x - arr.delta13) - 0.5 * arr.gamma13
        J[i12, i12] = 1j * (point.omega - arr.delta12) - 0.5 * arr.gamma12
        ph = np.exp(1j * pump_phase)
        J[i13, i12] = -1j * arr.omega_p * ph
        J[i12, i13] = -1j * arr.omega_p * np.conj(ph)
    B = np.zeros((n, 2), dtype=complex)
    B[1, 0] = math.sqrt(cav_c.kappa_ex)
    B[0, 1] = math.sqrt(cav_a.kappa_ex)
    return LinearSystem(J, B, K, cav_a.kappa_ex, cav_c.kappa_ex)


def _solve(system: LinearSystem, rhs: np.ndarray) -> np.ndarray:
    """Equilibrated LU solve with two steps of extended-precision refinement."""
    A = system.matrix
    diag = np.abs(np.diag(A))
    if np.any(diag == 0):
        raise DomainError("zero damping on the diagonal; system is not dissipative", "kappa")
    d = 1.0 / np.sqrt(diag)
    As = A * d[:, None] * d[None, :]
    bs = rhs * d[:, None]
    with warnings.catch_warnings():
        # singularity is reported below with a condition number
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(As, check_finite=True)
    pivots = np.abs(np.diag(lu))
    X = sla.lu_solve((lu, piv), bs)
    if pivots.min() == 0 or not np.all(np.isfinite(X)):
        cond = np.linalg.cond(As)
        raise DomainError(f"coupled-mode matrix is singular (condition number {cond:.3e})", "matrix")
    A_ext = As.astype(np.clongdouble)
    b_ext = bs.astype(np.clongdouble)
    for _ in range(_REFINE_STEPS):
        r = (b_ext - A_ext @ X.astype(np.clongdouble)).astype(complex)
        X = X + sla.lu_solve((lu, piv), r)
    return X * d[:, None]


def check_stability(system: LinearSystem) -> float:
    """Largest real part of the Jacobian spectrum; raises when it is not negative."""
    lam = system.eigenvalues()
    worst = float(lam.real.max())
    if worst >= 0:
        raise DomainError(f"coupled-mode system is not stable (max Re lambda = {worst:.3e})", "matrix")
    return worst


def steady_state(system: LinearSystem, port: str = "microwave", debug: bool | None = None) -> np.ndarray:
    """Steady amplitudes for unit input on ``port``."""
    col = system.port_column(port)
    if debug if debug is not None else _debug_enabled():
        check_stability(system)
    return _solve(system, -system.drive[:, col:col + 1])[:, 0]


def efficiency_from_state(system: LinearSystem, y: np.ndarray, port: str) -> float:
    """``|S|^2`` into the opposite port for unit input on ``port``."""
    if port == "microwave":
        return float(system.kappa_a_ex * abs(y[0]) ** 2)
    return float(system.kappa_c_ex * abs(y[1]) ** 2)


def steady_state_efficiency(classes, cav_a: CavityMode, cav_c: CavityMode, point: OperatingPoint,
                            port: str = "microwave", pump_phase: float = 0.0, debug: bool | None = None) -> float:
    """Conversion efficiency from the coupled-mode steady state.

    ``cav_a``/``cav_c`` carry all non-centre losses; centre loss arises from
    the polarisation damping.
    """
    system = assemble(classes, cav_a, cav_c, point, pump_phase)
    if system.n_classes == 0:
        system.port_column(port)
        return 0.0
    y = steady_state(system, port, debug)
    return efficiency_from_state(system, y, port)


# ----------------------------------------------------------------------------
# seeded random draws
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Draw:
    classes: ClassArrays
    cav_a: CavityMode
    cav_c: CavityMode
    point: OperatingPoint


def random_physical_draw(rng: np.random.Generator, max_classes: int = 32) -> Draw:
    """One random but physical parameter set spanning T- and Er-like scales.

    Magnitudes are log-uniform; detunings are Gaussian with log-uniform
    widths. Draw order is fixed so a seeded generator is reproducible.
    """
    K = int(rng.integers(1, max_classes + 1))

    def lg(lo, hi, n=K):
        return 10.0 ** rng.uniform(lo, hi, n)

    g13 = lg(4, 7)
    g12 = lg(1, 3.5)
    ga13 = lg(3, 7)
    ga12 = lg(0, 4)
    d13 = rng.normal(0, 1, K) * lg(4, 8)
    d12 = rng.normal(0, 1, K) * lg(2, 6)
    op = lg(5, 7.5)
    w = lg(3, 7)
    kae = 10.0 ** rng.uniform(8, 9.7)
    ka = kae * (1 + 10.0 ** rng.uniform(-3, 0))
    kce = 10.0 ** rng.uniform(5, 6.5)
    kc = kce * (1 + 10.0 ** rng.uniform(-3, 0))
    om = rng.normal() * 10.0 ** rng.uniform(2, 6)
    de = rng.normal() * 10.0 ** rng.uniform(3, 9)
    classes = ClassArrays(g13, g12, ga13, ga12, d13, d12, op, w)
    return Draw(classes, CavityMode(0.0, kae, ka - kae), CavityMode(0.0, kce, kc - kce), OperatingPoint(om, de))


@dataclass(frozen=True)
class AgreementReport:
    n_draws: int
    seed: int
    max_rel_closed_form: float
    max_rel_reciprocity: float
    worst_draw: int


def oracle_agreement(n_draws: int = 1000, seed: int = 20240601, max_classes: int = 32) -> AgreementReport:
    """Compare the closed form against the oracle over seeded random draws."""
    from .model import susceptibilities
    from .response import eta_formula

    rng = np.random.default_rng(seed)
    worst = worst_r = 0.0
    worst_i = -1
    for i in range(n_draws):
        d = random_physical_draw(rng, max_classes)
        xi = susceptibilities(d.classes, d.point)
        eta = float(eta_formula(xi.xi_a, xi.xi_c, xi.xi_ac, d.cav_a.kappa_ex, d.cav_a.kappa,
                                d.cav_c.kappa_ex, d.cav_c.kappa, d.point.omega, d.point.delta))
        system = assemble(d.classes, d.cav_a, d.cav_c, d.point)
        e_mw = efficiency_from_state(system, steady_state(system, "microwave"), "microwave")
        e_op = efficiency_from_state(system, steady_state(system, "optical"), "optical")
        rel = abs(e_mw - eta) / eta
        rel_r = abs(e_op - e_mw) / e_mw
        if rel > worst:
            worst, worst_i = rel, i
        worst_r = max(worst_r, rel_r)
    return AgreementReport(n_draws, seed, worst, worst_r, worst_i)


# ----------------------------------------------------------------------------
# time-domain ring-up
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class TransientResult:
    t: np.ndarray
    y: np.ndarray  # (len(t), size); rows after a failure are NaN
    success: bool
    status: str
    steps: int
    t_last: float
    y_last: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return self.y[:, 0]

    @property
    def c(self) -> np.ndarray:
        return self.y[:, 1]


_STATUS = {0: "ok", 1: "max_steps exceeded", 2: "step size underflow"}


def slowest_decay_rate(system: LinearSystem) -> float:
    """``min |Re lambda|`` of the Jacobian; amplitude ring-up time is its inverse."""
    return float(np.abs(system.eigenvalues().real).min())


def transient_ring_up(classes, cav_a: CavityMode, cav_c: CavityMode, point: OperatingPoint,
                      duration: float, port: str = "microwave", amplitude: complex = 1.0,
                      n_out: int = 101, rtol: float = 1e-9, atol: float = 1e-15,
                      max_steps: int = 20_000_000, h0: float | None = None) -> TransientResult:
    """Integrate from vacuum under a constant drive of ``amplitude`` on ``port``.

    Uses an adaptive Dormand-Prince 5(4) scheme; ``rtol``/``atol`` act on
    the amplitude components. On step-control failure the result carries
    ``success=False`` plus the last accepted state and time.
    """
    if not duration > 0:
        raise DomainError("duration must be > 0", "duration")
    system = assemble(classes, cav_a, cav_c, point)
    col = system.port_column(port)
    b = system.drive[:, col] * amplitude
    y0 = np.zeros(system.size, dtype=complex)
    t_out = np.linspace(0.0, duration, n_out)
    if h0 is None:
        h0 = 0.01 / max(float(np.abs(system.matrix).max()), 1.0)
    h_min = duration * 1e-18
    ys, status, steps, t_last, _, y_last = kernels.dopri5_linear(
        system.matrix, b, y0, t_out, rtol, atol, h0, h_min, max_steps)
    return TransientResult(t_out, ys, status == 0, _STATUS.get(status, str(status)), steps, t_last, y_last)
