import math

import numpy as np
import pytest

from transduce_sim.config import load_config
from transduce_sim.contours import ContourWindow, trace_contours
from transduce_sim.design import density_pump_sweep, enhancement_report, solve_matched_design
from transduce_sim.model import DomainError, OperatingPoint
from transduce_sim.optimize import optimize_operating_point
from transduce_sim.sweep import sweep

NP = 50.0  # calibrated pump photon number of the bundled T-centre configs


@pytest.fixture(scope="module")
def fig2b():
    return load_config("tcenter_fig2b").system


@pytest.fixture(scope="module")
def fig2c():
    return load_config("tcenter_fig2c").system


@pytest.fixture(scope="module")
def contour_set(fig2c):
    win = ContourWindow(-200e9, 200e9, -4e6, 4e6, 800, 800)
    return trace_contours(fig2c, win, 1e-8, NP)


# ---------------------------------------------------------------- sweep

def test_sweep_pump_off_is_zero(t_system):
    g = sweep(t_system.with_omega_p(0.0), (-1e5, 1e5), (-1e9, 1e9), 3, NP)
    assert g.shape == (3, 3)
    assert np.all(g.values["eta"] == 0.0)
    assert np.all(g.errors == "")


def test_sweep_is_deterministic(fig2c):
    a = sweep(fig2c, (-1e5, 1e5), (-4e9, 4e9), (31, 29), NP)
    b = sweep(fig2c, (-1e5, 1e5), (-4e9, 4e9), (31, 29), NP)
    for k in a.values:
        np.testing.assert_array_equal(a.values[k], b.values[k])
    assert a.rows() == b.rows()


def test_sweep_rejects_bad_resolution(fig2c):
    with pytest.raises(DomainError):
        sweep(fig2c, (-1e5, 1e5), (-4e9, 4e9), 1, NP)


def test_sweep_matched_maximum_at_origin(fig2c):
    g = sweep(fig2c, (-1e5, 1e5), (-4e9, 4e9), 201, NP)
    assert g.argmax() == g.nearest_index(0.0, 0.0)


def test_sweep_undercoupled_origin_not_maximal(fig2b):
    g = sweep(fig2b, (-1e5, 1e5), (-4e9, 4e9), 201, NP)
    i0, j0 = g.nearest_index(0.0, 0.0)
    assert g.values["eta"][i0, j0] < g.values["eta"].max()


# ------------------------------------------------------------- contours

def _residuals(system, verts, fam):
    d, w = verts[:, 0], verts[:, 1]
    xa, xc, _ = system.xi_grid(w, d, NP)
    if fam == "optical":
        return np.abs(w + d - xa.real) / (np.abs(w) + np.abs(d) + np.abs(xa.real))
    return np.abs(w - xc.real) / (np.abs(w) + np.abs(xc.real))


def test_contour_vertices_on_conditions(fig2c, contour_set):
    for fam in ("optical", "microwave"):
        v = contour_set.vertices(fam)
        assert len(v) > 100
        assert _residuals(fig2c, v, fam).max() < 1e-8


def test_contour_intersections(contour_set):
    pts = contour_set.intersections
    assert len(pts) == 5
    kinds = sorted(p.kind for p in pts)
    assert kinds == ["cross"] * 4 + ["origin"]
    crosses = [p for p in pts if p.kind == "cross"]
    # the crosses come in point-mirror pairs
    for p in crosses:
        assert any(abs(p.delta + q.delta) < 1e-6 * abs(p.delta) and abs(p.omega + q.omega) < 1e-6 * abs(p.omega)
                   for q in crosses)


def test_microwave_asymptote(fig2c):
    ref = fig2c.reference_class
    big = 100 * math.sqrt(fig2c.n_total) * ref.g13
    target = math.sqrt(fig2c.n_total) * ref.g12
    win = ContourWindow(big * 0.999, big * 1.001, -2 * target, 2 * target, 8, 400, 0.0, 0.0)
    cs = trace_contours(fig2c, win, 1e-8, NP)
    w = cs.vertices("microwave")[:, 1]
    assert np.any(np.abs(np.abs(w) - target) < 0.05 * target)


def test_optical_asymptote(fig2c):
    ref = fig2c.reference_class
    target = math.sqrt(fig2c.n_total) * ref.g13
    big = 100 * math.sqrt(fig2c.n_total) * ref.g12
    win = ContourWindow(-2 * target - big, 2 * target - big, big * 0.999, big * 1.001, 400, 8, 0.0, 0.0)
    cs = trace_contours(fig2c, win, 1e-8, NP)
    v = cs.vertices("optical")
    s = np.abs(v[:, 0] + v[:, 1])
    assert np.any(np.abs(s - target) < 0.05 * target)


def test_empty_window_gives_empty_contours(fig2c):
    win = ContourWindow(1e12, 2e12, 1e9, 2e9, 8, 8, 0.0, 0.0)
    cs = trace_contours(fig2c, win, 1e-8, NP)
    assert cs.microwave_branches == [] and cs.intersections == []


# --------------------------------------------------------------- design

def test_solve_density(t_system):
    res = solve_matched_design(t_system.with_(ensemble=t_system.ensemble), "n_a")
    assert res.success
    assert res.value == pytest.approx(1e6, rel=1e-3)
    assert 0.95 <= res.exact_cooperativity <= 1.05


def test_solve_er_pump():
    cfg = load_config("ercenter_table1")
    res = solve_matched_design(cfg.system, "omega_p")
    assert res.success
    assert res.value == pytest.approx(4.5e6, rel=1e-3)
    assert 0.95 <= res.exact_cooperativity <= 1.05


@pytest.mark.parametrize("free", ["omega_p", "n_a", "kappa_a_ex", "kappa_c_ex"])
def test_design_residual_table1(free):
    for name in ("tcenter_table1", "ercenter_table1"):
        res = solve_matched_design(load_config(name).system, free)
        assert res.success, res.message
        assert 0.95 <= res.exact_cooperativity <= 1.05


def test_design_failure_is_signalled(t_system):
    res = solve_matched_design(t_system.with_omega_p(0.0), "n_a")
    assert not res.success and math.isnan(res.value)
    with pytest.raises(DomainError):
        solve_matched_design(t_system, "gamma13")


def test_density_sweep_zero_width_matches_homogeneous():
    cfg = load_config("tcenter_fig4", ["centers.sigma13='0 Hz'", "centers.sigma12='0 Hz'"])
    tab = density_pump_sweep(cfg.system, [50.0], [0.0], sigma12=0.0)
    row = tab.rows[0]
    assert row["error"] == ""
    assert row["cooperativity"] == pytest.approx(1.0, rel=1e-9)


@pytest.mark.slow
def test_density_sweep_shapes():
    cfg = load_config("tcenter_fig4")
    n_p = np.geomspace(10, 1e5, 13)
    tab = density_pump_sweep(cfg.system, n_p, [0.0, 1e9])
    rows = tab.rows
    narrow = np.array([r["eta_total"] for r in rows if r["sigma13_hz"] == 0.0])
    wide = np.array([r["eta_total"] for r in rows if r["sigma13_hz"] == 1e9])
    assert np.all(np.isfinite(narrow))
    # a wide line cannot be matched at weak pump; those points carry an error instead
    failed = [r for r in rows if r["error"]]
    assert failed and all(r["sigma13_hz"] == 1e9 and r["n_pump"] < 200 for r in failed)
    k = int(np.argmax(narrow))
    assert 0 < k < len(narrow) - 1
    assert narrow[-1] < narrow[k]
    assert int(np.nanargmax(wide)) >= k


def test_enhancement_report_keys(t_class):
    rep = enhancement_report(1e6, t_class.g12, t_class.g13, t_class.gamma12, t_class.gamma13, 4e6)
    assert rep["squared_ratio"] == pytest.approx((40 * 2e6 * 1e6 / 16e12 - 1) ** 2)
    assert all(math.isfinite(v) for v in rep.values() if isinstance(v, float))


# ------------------------------------------------------------- optimize

def test_optimum_at_origin(fig2c):
    res = optimize_operating_point(fig2c, (-1e5, 1e5), (-4e9, 4e9), 41, NP)
    assert not res.degenerate
    assert abs(res.omega) < 1e-3 * 1e5 and abs(res.delta) < 1e-3 * 4e9
    assert res.eta >= res.coarse_eta


def test_optimum_pump_off_degenerate(fig2c):
    res = optimize_operating_point(fig2c.with_omega_p(0.0), (-1e5, 3e5), (-4e9, 4e9), 11, NP)
    assert res.degenerate and res.eta == 0.0
    assert (res.omega, res.delta) == (1e5, 0.0)


def test_optimum_not_worse_than_grid(fig2b):
    res = optimize_operating_point(fig2b, (-1e5, 1e5), (-4e9, 4e9), 21, NP)
    assert res.eta >= res.coarse_eta
    g = sweep(fig2b, (-1e5, 1e5), (-4e9, 4e9), 21, NP)
    assert res.coarse_eta == g.values["eta"].max()
