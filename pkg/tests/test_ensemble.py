import math

import numpy as np
import pytest

from transduce_sim.ensemble import (GaussianEnsemble, average_susceptibilities, convergence_check, discretize,
                                    discretize_arrays, gauss_nodes, gaussian_inverse_mean,
                                    monte_carlo_susceptibilities)
from transduce_sim.model import DomainError, OperatingPoint, susceptibilities


@pytest.fixture
def fig4_spec(t_class):
    return GaussianEnsemble(0.0, 0.0, 30e6, 100e3, 1e6, t_class)


def test_degenerate_spec_is_single_class(t_class):
    cls = discretize(GaussianEnsemble(2e6, -3.0, 0.0, 0.0, 1e6, t_class))
    assert len(cls) == 1
    assert (cls[0].delta13, cls[0].delta12, cls[0].weight) == (2e6, -3.0, 1e6)


@pytest.mark.parametrize("n13,n12", [(1, 1), (3, 5), (32, 32), (17, 64)])
def test_weights_sum_to_total(t_class, n13, n12):
    arr = discretize_arrays(GaussianEnsemble(1e6, 2e3, 3e7, 1e5, 1.234e6, t_class, n13, n12))
    assert len(arr) == n13 * n12
    assert math.fsum(arr.weight) == pytest.approx(1.234e6, rel=1e-12)


def test_node_symmetry():
    x, w = gauss_nodes(0.0, 1.0, 33)
    np.testing.assert_array_equal(x, -x[::-1])
    np.testing.assert_array_equal(w, w[::-1])
    with pytest.raises(DomainError):
        gauss_nodes(0.0, 1.0, 0)
    with pytest.raises(DomainError):
        GaussianEnsemble(0, 0, 1, 1, 1.0, None, nodes13=0)


def test_inverse_mean_against_quadrature():
    from scipy.integrate import quad
    from scipy.stats import norm
    for p in (3.0 + 0.7j, -1.0 - 0.2j):
        f = lambda x, part: part(1.0 / (x - p)) * norm.pdf(x, 1.0, 2.0)
        ref = complex(*(quad(f, -40, 40, args=(part,), points=[p.real], limit=400, epsabs=1e-14)[0]
                        for part in (np.real, np.imag)))
        assert complex(gaussian_inverse_mean(p, 1.0, 2.0)) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("rule", ["hybrid", "product"])
def test_zero_mean_antisymmetry(fig4_spec, rule):
    xi = average_susceptibilities(fig4_spec.with_(rule=rule), OperatingPoint())
    assert abs(xi.xi_a.real) < 1e-9 * abs(xi.xi_a.imag)
    assert abs(xi.xi_c.real) < 1e-9 * abs(xi.xi_c.imag)


def test_product_rule_equals_explicit_classes(fig4_spec):
    spec = fig4_spec.with_(rule="product", nodes13=8, nodes12=6)
    p = OperatingPoint(1e3, 2e7)
    a = average_susceptibilities(spec, p).as_array()
    b = susceptibilities(discretize(spec), p).as_array()
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_hybrid_matches_monte_carlo(fig4_spec):
    p = OperatingPoint()
    mc = monte_carlo_susceptibilities(fig4_spec, p, 200_000, seed=7)
    z = mc.z_scores(average_susceptibilities(fig4_spec, p))
    assert z.max() < 4.0


def test_monte_carlo_is_seeded(fig4_spec):
    a = monte_carlo_susceptibilities(fig4_spec, OperatingPoint(), 10_000, seed=3)
    b = monte_carlo_susceptibilities(fig4_spec, OperatingPoint(), 10_000, seed=3)
    assert a.mean == b.mean
    np.testing.assert_array_equal(a.stderr, b.stderr)


def test_pump_scan_trend(fig4_spec, t_class):
    # inhomogeneity suppresses |xi_ac| until the pump exceeds the widths
    ratios = []
    for op in (1e5, 1e6, 4e6, 2e7, 1e8):
        spec = fig4_spec.with_(base=t_class.with_(omega_p=op))
        hom = susceptibilities([t_class.with_(omega_p=op, weight=1e6)], OperatingPoint())
        ratios.append(abs(average_susceptibilities(spec, OperatingPoint()).xi_ac) / abs(hom.xi_ac))
    assert ratios[0] < 0.5
    assert abs(ratios[-1] - 1.0) < 0.05
    assert ratios[0] < ratios[1] < ratios[2]


def test_convergence_zero_width(t_class):
    res = convergence_check(GaussianEnsemble(0, 0, 0, 0, 1e6, t_class), OperatingPoint(), 1e-6)
    assert res.converged and res.recommended_nodes == 1


@pytest.mark.slow
def test_convergence_order_regression(fig4_spec):
    res = convergence_check(fig4_spec, OperatingPoint(), 1e-6)
    assert res.converged
    assert res.recommended_nodes == 256
    n, change = res.history[-1]
    assert change <= 1e-6


@pytest.mark.slow
def test_strong_pump_converges_earlier(fig4_spec, t_class):
    strong = convergence_check(fig4_spec, OperatingPoint(), 1e-6)
    weak = convergence_check(fig4_spec.with_(base=t_class.with_(omega_p=0.17e6)), OperatingPoint(), 1e-6)
    assert strong.converged
    weak_order = weak.recommended_nodes if weak.converged else math.inf
    assert strong.recommended_nodes < weak_order


def test_convergence_cap_signals_failure(fig4_spec):
    res = convergence_check(fig4_spec, OperatingPoint(), 1e-12, max_nodes=8)
    assert not res.converged
    assert len(res.history) == 3
