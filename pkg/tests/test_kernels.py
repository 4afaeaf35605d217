import json
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from transduce_sim import kernels
from transduce_sim._backend import backend_name
from transduce_sim.model import pack_classes

SCRIPT = textwrap.dedent("""
    import json, numpy as np
    from transduce_sim import kernels
    from transduce_sim._backend import backend_name
    rng = np.random.default_rng(5)
    K = 300
    cols = (10**rng.uniform(4, 7, K), 10**rng.uniform(1, 3, K), 10**rng.uniform(3, 7, K), 10**rng.uniform(0, 4, K),
            rng.normal(0, 1e7, K), rng.normal(0, 1e4, K), 10**rng.uniform(5, 7, K), 10**rng.uniform(2, 5, K))
    w = rng.normal(0, 1e5, 50); d = rng.normal(0, 1e8, 50)
    xa, xc, xac = kernels.class_sums(cols, w, d)
    m, m2 = kernels.sample_stats(2e6, 40., 1e6, 1., 4e6, rng.normal(0, 3e7, 5000), rng.normal(0, 1e5, 5000), 0., 0.)
    J = np.array([[-1+2j, 0.3], [0.1j, -2+0j]]); b = np.array([1+0j, 0.5j])
    ys, st, steps, tl, nw, yl = kernels.dopri5_linear(J, b, np.zeros(2, complex), np.linspace(0, 5, 6), 1e-10, 1e-14, 1e-3, 1e-15, 10**6)
    out = {"backend": backend_name(), "x": [v.tolist() for v in (xa.real, xa.imag, xc.real, xc.imag, xac.real, xac.imag)],
           "m": m.tolist(), "m2": m2.tolist(), "ys": [ys.real.tolist(), ys.imag.tolist()], "status": int(st)}
    print(json.dumps(out))
""")


def _run(backend):
    env = dict(os.environ, TRANSDUCE_SIM_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


@pytest.mark.slow
def test_backends_agree():
    a, b = _run("numba"), _run("numpy")
    assert a["backend"] == "numba" and b["backend"] == "numpy"
    np.testing.assert_allclose(np.array(a["x"]), np.array(b["x"]), rtol=1e-11, atol=0)
    np.testing.assert_allclose(a["m"], b["m"], rtol=1e-10)
    np.testing.assert_allclose(a["m2"], b["m2"], rtol=1e-8)
    np.testing.assert_allclose(np.array(a["ys"]), np.array(b["ys"]), rtol=1e-9, atol=1e-13)
    assert a["status"] == b["status"] == 0


def test_bad_backend_flag_rejected():
    env = dict(os.environ, TRANSDUCE_SIM_BACKEND="cuda")
    res = subprocess.run([sys.executable, "-c", "import transduce_sim.kernels"], env=env, capture_output=True, text=True)
    assert res.returncode != 0 and "TRANSDUCE_SIM_BACKEND" in res.stderr


def test_class_sums_deterministic(t_class):
    arr = pack_classes([t_class.with_(delta13=d, weight=1e4) for d in np.linspace(-1e8, 1e8, 101)])
    w = np.linspace(-1e5, 1e5, 7)
    d = np.linspace(-1e9, 1e9, 7)
    r1 = kernels.class_sums(arr.columns(), w, d)
    r2 = kernels.class_sums(arr.columns(), w, d)
    for u, v in zip(r1, r2):
        np.testing.assert_array_equal(u, v)
    assert backend_name() in ("numba", "numpy")


def test_dopri5_exponential():
    J = np.array([[-2.0 + 0j]])
    ys, status, steps, t_last, n_w, y_last = kernels.dopri5_linear(
        J, np.array([0j]), np.array([1.0 + 0j]), np.linspace(0, 3, 4), 1e-11, 1e-15, 1e-3, 1e-15, 10**6)
    assert status == 0
    np.testing.assert_allclose(ys[:, 0].real, np.exp(-2.0 * np.arange(4)), rtol=1e-8)
