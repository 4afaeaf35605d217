import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transduce_sim.model import CavityMode, DomainError, OperatingPoint, SusceptibilityTriplet, susceptibilities
from transduce_sim.oracle import steady_state_efficiency
from transduce_sim.response import (LossBudget, added_noise, build_report, cooperativity, efficiency,
                                    efficiency_decomposition, eta_formula, matching_pump_rabi, thermal_occupation)


def test_efficiency_examples():
    a, c = CavityMode(0, 2e9), CavityMode(0, 8e5)
    assert efficiency(SusceptibilityTriplet(0j, 0j, 0j), a, c, OperatingPoint()) == 0.0
    xac = math.sqrt(2e9 * 8e5 / 4)
    assert efficiency(SusceptibilityTriplet(0j, 0j, xac), a, c, OperatingPoint()) == pytest.approx(1.0, rel=1e-15)


def test_efficiency_matches_oracle_t_center(t_class):
    a, c = CavityMode(0, 2e9), CavityMode(0, 8e5)
    cls = [t_class.with_(weight=1e6)]
    xi = susceptibilities(cls, OperatingPoint())
    eta = efficiency(xi, a, c, OperatingPoint())
    assert eta == pytest.approx(steady_state_efficiency(cls, a, c, OperatingPoint()), rel=1e-9)


def test_efficiency_rejects_inconsistent_mode():
    bad = CavityMode.__new__(CavityMode)
    object.__setattr__(bad, "omega_bare", 0.0)
    object.__setattr__(bad, "kappa_ex", 1.0)
    object.__setattr__(bad, "kappa_in", -0.5)
    with pytest.raises(DomainError):
        efficiency(SusceptibilityTriplet(0j, 0j, 1 + 0j), bad, CavityMode(0, 1.0), OperatingPoint())


def test_cooperativity_examples():
    assert cooperativity(2e7, 2e9, 8e5) == pytest.approx(1.0, rel=1e-15)
    assert cooperativity(0j, 2e9, 8e5) == 0.0
    assert cooperativity(4e7, 2e9, 8e5) == pytest.approx(4.0, rel=1e-15)
    with pytest.raises(DomainError):
        cooperativity(1.0, 0.0, 1.0)


def test_decomposition_examples():
    assert efficiency_decomposition(1.0, 1, 2, 1, 2)[0] == 1.0
    assert efficiency_decomposition(3.0, 1, 2, 1, 2)[0] == pytest.approx(0.75, abs=1e-16)
    assert efficiency_decomposition(1.0, 5, 5, 3, 3)[3] == 1.0
    with pytest.raises(DomainError):
        efficiency_decomposition(1.0, 1, 0, 1, 1)


def test_noise_examples():
    xi = SusceptibilityTriplet(0j, 0j, 1e7 + 0j)
    n_mo, _ = added_noise(xi, 2e9, 2e9, 4e5, 1e5, OperatingPoint(), 0.1)
    assert n_mo == pytest.approx(0.025, rel=1e-15)
    assert added_noise(xi, 2e9, 2e9, 4e5, 1e5, OperatingPoint(), 0.0) == (0.0, 0.0)
    _, n_om = added_noise(SusceptibilityTriplet(0j, 0j, 0j), 2e9, 2e9, 4e5, 1e5, OperatingPoint(), 0.1)
    assert n_om == math.inf


def test_noise_lines_cross_at_matching():
    ka, kc = 2e9, 8e5
    kc_in = 2e3
    xac = math.sqrt(ka * (kc + kc_in) / 4)
    n_mo, n_om = added_noise(SusceptibilityTriplet(0j, 0j, xac), ka, ka, kc, kc_in, OperatingPoint(), 0.3)
    # equality holds up to the kappa_c_ex / kappa_c_total over-coupling factor
    assert n_om == pytest.approx(n_mo * kc / (kc + kc_in), rel=1e-12)


def test_matching_pump_rabi_examples():
    assert matching_pump_rabi(1e6, 40.0, 2e6, 2e9, 8e5) == pytest.approx(4e6, rel=1e-12)
    assert matching_pump_rabi(1e7, 300.0, 3e4, 2e9, 8e5) == pytest.approx(4.5e6, rel=1e-12)
    assert matching_pump_rabi(2e6, 40.0, 2e6, 2e9, 8e5) == pytest.approx(8e6, rel=1e-12)
    with pytest.raises(DomainError):
        matching_pump_rabi(1e6, 40.0, 2e6, 0.0, 8e5)


def test_thermal_occupation_examples():
    assert thermal_occupation(5e9, 0.020) == pytest.approx(6.1e-6, rel=0.02)
    assert thermal_occupation(5e9, 0.240) == pytest.approx(0.58, rel=0.01)
    assert thermal_occupation(5e9, 1e-6) == 0.0
    with pytest.raises(DomainError):
        thermal_occupation(5e9, 0.0)


def test_report_invariants(t_class):
    xi = susceptibilities([t_class.with_(weight=1e6)], OperatingPoint())
    b = LossBudget(2e9, 1e6, xi.kappa_a_center, 8e5, 1e3, xi.kappa_c_center, 2e3)
    rep = build_report(xi, b, OperatingPoint(), 1e-3)
    assert rep.eta_total <= rep.eta_internal
    assert rep.eta_total <= rep.eta_a * rep.eta_c * (1 + 1e-12)
    assert b.kappa_a_total == pytest.approx(b.kappa_a_ex + b.kappa_a_in + b.kappa_a_center)
    assert b.kappa_c_total == pytest.approx(b.kappa_c_ex + b.kappa_c_in + b.kappa_c_qp + b.kappa_c_center)


finite = st.floats(-1e9, 1e9)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1e8, 1e10), st.floats(1e5, 1e7),
       st.floats(0, 1), st.floats(0, 1))
def test_eta_peaks_at_c_equal_one(c1, c2, ka, kc, fa, fc):
    kae, kce = ka * (1 - 0.5 * fa), kc * (1 - 0.5 * fc)
    eta = lambda C: float(eta_formula(0j, 0j, math.sqrt(C * ka * kc / 4), kae, ka, kce, kc, 0.0, 0.0))
    assert eta(1.0) >= eta(c1) * (1 - 1e-12)
    assert eta(1.0) >= eta(c2) * (1 - 1e-12)


@settings(max_examples=200, deadline=None)
@given(finite, st.floats(-1e9, 0), finite, st.floats(-1e6, 0), finite, st.floats(-1e7, 1e7),
       st.floats(1e8, 1e10), st.floats(1e5, 1e7), st.floats(0, 1e9), st.floats(0, 1e7))
def test_monotone_in_intrinsic_loss(ar, ai, cr, ci, xr, w, kae, kce, da, dc):
    xa, xc, xac = complex(ar, ai), complex(cr, ci), complex(xr, 1e5)
    base = eta_formula(xa, xc, xac, kae, kae, kce, kce, w, 0.0)
    more_a = eta_formula(xa, xc, xac, kae, kae + da, kce, kce, w, 0.0)
    more_c = eta_formula(xa, xc, xac, kae, kae, kce, kce + dc, w, 0.0)
    assert more_a <= base * (1 + 1e-12)
    assert more_c <= base * (1 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e9), st.floats(0, 1e6), st.floats(1e5, 1e8), st.floats(1e8, 1e10), st.floats(0, 1e9),
       st.floats(1e5, 1e7), st.floats(0, 1e6))
def test_decomposition_consistency(la, lc, xac, kae, kai, kce, kci):
    xi_a, xi_c = complex(0, -0.5 * la), complex(0, -0.5 * lc)
    eta = float(eta_formula(xi_a, xi_c, xac, kae, kae + kai, kce, kce + kci, 0.0, 0.0))
    ka_t, kc_t = kae + kai + la, kce + kci + lc
    C = cooperativity(xac, ka_t, kc_t)
    prod = efficiency_decomposition(C, kae, ka_t, kce, kc_t)[3]
    assert eta == pytest.approx(prod, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e9, 0), st.floats(-1e6, 0), finite, finite, st.floats(1e8, 1e10), st.floats(1e5, 1e7))
def test_conjugating_cross_term_at_resonance(ai, ci, xr, xi, ka, kc):
    # at omega = delta = 0 with lossy self-terms the remaining factor is real,
    # so xi_ac and its conjugate give the same efficiency
    xa, xc, xac = complex(0, ai), complex(0, ci), complex(xr, xi)
    e1 = eta_formula(xa, xc, xac, ka, ka, kc, kc, 0.0, 0.0)
    e2 = eta_formula(xa, xc, np.conj(xac), ka, ka, kc, kc, 0.0, 0.0)
    assert e1 == pytest.approx(e2, rel=1e-12, abs=1e-300)
