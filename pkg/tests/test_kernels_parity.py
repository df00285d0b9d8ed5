import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from noregret import _pykernels as py
from noregret._backend import BACKEND

ck = pytest.importorskip("noregret._kernels")

finite = st.floats(-50, 50, allow_nan=False)


def test_backend_follows_switch():
    forced = os.environ.get("NOREGRET_PURE_PYTHON", "") not in ("", "0")
    assert BACKEND == ("python" if forced else "compiled")


def test_pure_python_switch():
    env = dict(os.environ, NOREGRET_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import noregret; print(noregret.BACKEND)"],
                         capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"


@given(arrays(float, st.integers(1, 12), elements=finite))
def test_logit_and_projection(y):
    np.testing.assert_allclose(ck.logit(y), py.logit(y), atol=1e-15, rtol=0)
    np.testing.assert_allclose(ck.project_simplex(y), py.project_simplex(y), atol=1e-13, rtol=0)
    assert ck.logsumexp(y) == pytest.approx(py.logsumexp(y), rel=1e-14, abs=1e-14)


@given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=finite))
def test_row_kernels(Y):
    np.testing.assert_allclose(ck.logit_rows(Y), py.logit_rows(Y), atol=1e-15, rtol=0)
    np.testing.assert_allclose(ck.logsumexp_rows(Y), py.logsumexp_rows(Y), rtol=1e-14, atol=1e-14)
    np.testing.assert_allclose(ck.project_simplex_rows(Y), py.project_simplex_rows(Y), atol=1e-13, rtol=0)


def test_badoiu_clarkson_same_iterates():
    rng = np.random.default_rng(1)
    P = rng.normal(size=(40, 3))
    c1, r1 = ck.badoiu_clarkson(P, 500)
    c2, r2 = py.badoiu_clarkson(P, 500)
    np.testing.assert_allclose(c1, c2, atol=1e-12)
    assert r1 == pytest.approx(r2, rel=1e-12)


@pytest.mark.parametrize("mode", [py.MODE_ENTROPY, py.MODE_EUCLIDEAN_SIMPLEX])
def test_run_kernels(mode):
    rng = np.random.default_rng(2)
    d, n = 5, 200
    P = rng.uniform(-1, 1, (n, d))
    etas = 0.7 / np.sqrt(np.arange(1, n + 2))
    center = np.full(d, 1 / d)
    np.testing.assert_allclose(ck.dual_averaging_run(P, etas, mode, center),
                               py.dual_averaging_run(P, etas, mode, center), atol=1e-13, rtol=0)
    X1, P1 = ck.best_response_run(d, n, 1.0, etas, mode, center)
    X2, P2 = py.best_response_run(d, n, 1.0, etas, mode, center)
    assert np.array_equal(P1, P2)
    np.testing.assert_allclose(X1, X2, atol=1e-13, rtol=0)
