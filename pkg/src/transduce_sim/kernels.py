"""Numerical hot loops.

Every public function here dispatches to a numba-compiled kernel or to a
vectorised numpy equivalent depending on :data:`transduce_sim._backend.USE_NUMBA`.
Both paths evaluate the same formulas; they differ only in summation order
(Neumaier-compensated serial sums versus numpy's pairwise sums), so results
agree to a few ulps and each path is deterministic on its own.
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import USE_NUMBA, njit, njit_parallel, prange

_CHUNK_ELEMENTS = 1 << 21


# ----------------------------------------------------------------------------
# class sums
# ----------------------------------------------------------------------------

@njit
def _neumaier(s, c, v):
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


@njit_parallel
def _class_sums_numba(g13, g12, ga13, ga12, d13, d12, op, w, omega, delta, xa, xc, xac):
    n_points = omega.shape[0]
    n_cls = g13.shape[0]
    for p in prange(n_points):
        om = omega[p]
        x = om + delta[p]
        ar = 0.0; arc = 0.0; ai = 0.0; aic = 0.0
        cr = 0.0; crc = 0.0; ci = 0.0; cic = 0.0
        kr = 0.0; krc = 0.0; ki = 0.0; kic = 0.0
        for k in range(n_cls):
            wk = w[k]
            if wk == 0.0:
                continue
            a13 = complex(x - d13[k], 0.5 * ga13[k])
            a12 = complex(om - d12[k], 0.5 * ga12[k])
            den = a13 * a12 - op[k] * op[k]
            inv = wk / den
            ta = g13[k] * g13[k] * a12 * inv
            tc = g12[k] * g12[k] * a13 * inv
            tk = g12[k] * g13[k] * op[k] * inv
            ar, arc = _neumaier(ar, arc, ta.real)
            ai, aic = _neumaier(ai, aic, ta.imag)
            cr, crc = _neumaier(cr, crc, tc.real)
            ci, cic = _neumaier(ci, cic, tc.imag)
            kr, krc = _neumaier(kr, krc, tk.real)
            ki, kic = _neumaier(ki, kic, tk.imag)
        xa[p] = complex(ar + arc, ai + aic)
        xc[p] = complex(cr + crc, ci + cic)
        xac[p] = complex(kr + krc, ki + kic)


def _class_sums_numpy(g13, g12, ga13, ga12, d13, d12, op, w, omega, delta, xa, xc, xac):
    n_cls = g13.shape[0]
    step = max(1, _CHUNK_ELEMENTS // max(n_cls, 1))
    half13 = 0.5j * ga13
    half12 = 0.5j * ga12
    op2 = op * op
    g13sq = g13 * g13
    g12sq = g12 * g12
    g1213 = g12 * g13 * op
    for start in range(0, omega.shape[0], step):
        sl = slice(start, start + step)
        om = omega[sl, None]
        a13 = (om + delta[sl, None] - d13) + half13
        a12 = (om - d12) + half12
        inv = w / (a13 * a12 - op2)
        xa[sl] = np.sum(g13sq * a12 * inv, axis=1)
        xc[sl] = np.sum(g12sq * a13 * inv, axis=1)
        xac[sl] = np.sum(g1213 * inv, axis=1)


def class_sums(columns, omega: np.ndarray, delta: np.ndarray):
    """Return ``(xi_a, xi_c, xi_ac)`` arrays for each (omega, delta) pair.

    ``columns`` is the 8-tuple ``(g13, g12, gamma13, gamma12, delta13, delta12,
    omega_p, weight)`` of equal-length float arrays.
    """
    cols = tuple(np.ascontiguousarray(c, dtype=np.float64) for c in columns)
    omega = np.ascontiguousarray(omega, dtype=np.float64)
    delta = np.ascontiguousarray(delta, dtype=np.float64)
    n = omega.shape[0]
    xa = np.empty(n, dtype=np.complex128)
    xc = np.empty(n, dtype=np.complex128)
    xac = np.empty(n, dtype=np.complex128)
    impl = _class_sums_numba if USE_NUMBA else _class_sums_numpy
    impl(*cols, omega, delta, xa, xc, xac)
    return xa, xc, xac


# ----------------------------------------------------------------------------
# per-sample statistics for Monte Carlo averaging
# ----------------------------------------------------------------------------

@njit
def _sample_stats_numba(g13, g12, ga13, ga12, op, d13, d12, omega, delta, out_mean, out_m2):
    # Welford on six real channels: (re, im) of xi_a, xi_c, xi_ac terms.
    x = omega + delta
    vals = np.empty(6)
    mean = np.zeros(6)
    m2 = np.zeros(6)
    n = d13.shape[0]
    for i in range(n):
        a13 = complex(x - d13[i], 0.5 * ga13)
        a12 = complex(omega - d12[i], 0.5 * ga12)
        inv = 1.0 / (a13 * a12 - op * op)
        ta = g13 * g13 * a12 * inv
        tc = g12 * g12 * a13 * inv
        tk = g12 * g13 * op * inv
        vals[0] = ta.real; vals[1] = ta.imag
        vals[2] = tc.real; vals[3] = tc.imag
        vals[4] = tk.real; vals[5] = tk.imag
        for j in range(6):
            d = vals[j] - mean[j]
            mean[j] += d / (i + 1)
            m2[j] += d * (vals[j] - mean[j])
    for j in range(6):
        out_mean[j] = mean[j]
        out_m2[j] = m2[j]


def _sample_stats_numpy(g13, g12, ga13, ga12, op, d13, d12, omega, delta, out_mean, out_m2):
    x = omega + delta
    a13 = (x - d13) + 0.5j * ga13
    a12 = (omega - d12) + 0.5j * ga12
    inv = 1.0 / (a13 * a12 - op * op)
    terms = (g13 * g13 * a12 * inv, g12 * g12 * a13 * inv, g12 * g13 * op * inv)
    for j, t in enumerate(terms):
        for part, offset in ((t.real, 0), (t.imag, 1)):
            m = part.mean()
            out_mean[2 * j + offset] = m
            out_m2[2 * j + offset] = np.sum((part - m) ** 2)


def sample_stats(g13, g12, gamma13, gamma12, omega_p, d13, d12, omega, delta):
    """Mean and sum of squared deviations of the per-centre susceptibility terms.

    Returns two length-6 arrays ordered ``(Re a, Im a, Re c, Im c, Re ac, Im ac)``.
    """
    d13 = np.ascontiguousarray(d13, dtype=np.float64)
    d12 = np.ascontiguousarray(d12, dtype=np.float64)
    mean = np.empty(6)
    m2 = np.empty(6)
    impl = _sample_stats_numba if USE_NUMBA else _sample_stats_numpy
    impl(float(g13), float(g12), float(gamma13), float(gamma12), float(omega_p),
         d13, d12, float(omega), float(delta), mean, m2)
    return mean, m2


# ----------------------------------------------------------------------------
# Dormand-Prince 5(4) for dy/dt = J y + b
# ----------------------------------------------------------------------------

_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0

if USE_NUMBA:
    @njit
    def _rhs(J, b, y, out):
        n = y.shape[0]
        for i in range(n):
            acc = b[i]
            for j in range(n):
                acc += J[i, j] * y[j]
            out[i] = acc
else:
    def _rhs(J, b, y, out):
        np.add(J @ y, b, out=out)


@njit
def _dopri5(J, b, y0, t_out, rtol, atol, h0, h_min, max_steps, ys):
    n = y0.shape[0]
    y = y0.copy()
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty(n, dtype=np.complex128)
    k3 = np.empty(n, dtype=np.complex128)
    k4 = np.empty(n, dtype=np.complex128)
    k5 = np.empty(n, dtype=np.complex128)
    k6 = np.empty(n, dtype=np.complex128)
    k7 = np.empty(n, dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    ynew = np.empty(n, dtype=np.complex128)
    _rhs(J, b, y, k1)
    t = t_out[0]
    for i in range(n):
        ys[0, i] = y[i]
    h = h0
    steps = 0
    status = 0
    n_out = t_out.shape[0]
    k_out = 1
    while k_out < n_out:
        target = t_out[k_out]
        last = False
        if t + h >= target:
            h = target - t
            last = True
        for i in range(n):
            tmp[i] = y[i] + h * (_A21 * k1[i])
        _rhs(J, b, tmp, k2)
        for i in range(n):
            tmp[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        _rhs(J, b, tmp, k3)
        for i in range(n):
            tmp[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _rhs(J, b, tmp, k4)
        for i in range(n):
            tmp[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
        _rhs(J, b, tmp, k5)
        for i in range(n):
            tmp[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
        _rhs(J, b, tmp, k6)
        for i in range(n):
            ynew[i] = y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
        _rhs(J, b, ynew, k7)
        err = 0.0
        for i in range(n):
            e = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            r = abs(e) / sc
            err += r * r
        err = math.sqrt(err / n)
        steps += 1
        if err <= 1.0:
            t = target if last else t + h
            for i in range(n):
                y[i] = ynew[i]
                k1[i] = k7[i]
            if last:
                for i in range(n):
                    ys[k_out, i] = y[i]
                k_out += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h = h * fac
        if h < h_min:
            status = 2
            break
        if steps >= max_steps:
            status = 1
            break
    return status, steps, t, k_out, y


def dopri5_linear(J, b, y0, t_out, rtol, atol, h0, h_min, max_steps):
    """Integrate ``dy/dt = J y + b`` with adaptive Dormand-Prince steps.

    Steps are clipped so that every time in ``t_out`` is hit exactly. Returns
    ``(ys, status, steps, t_last, n_written, y_last)``; ``status`` is 0 on
    success, 1 when ``max_steps`` ran out and 2 when the step fell below
    ``h_min``.
    """
    J = np.ascontiguousarray(J, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    y0 = np.ascontiguousarray(y0, dtype=np.complex128)
    t_out = np.ascontiguousarray(t_out, dtype=np.float64)
    ys = np.full((t_out.shape[0], y0.shape[0]), np.nan + 0j, dtype=np.complex128)
    status, steps, t_last, n_written, y_last = _dopri5(
        J, b, y0, t_out, float(rtol), float(atol), float(h0), float(h_min), int(max_steps), ys)
    return ys, int(status), int(steps), float(t_last), int(n_written), y_last
