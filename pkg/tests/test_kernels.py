"""Compiled and pure kernels agree with each other and with brute force."""

import numpy as np
import pytest

from varprod import kernels
from varprod.kernels import _ref

try:
    from varprod.kernels import _core
except ImportError:
    _core = None

BACKENDS = [_ref] if _core is None else [_ref, _core]


def brute_acvf(y, hmax):
    n = len(y)
    ybar = sum(y) / n
    out = []
    for h in range(hmax + 1):
        acc = 0.0
        for t in range(n - h):
            acc += (y[t] - ybar) * (y[t + h] - ybar)
        out.append(acc / n)
    return np.array(out)


def brute_recursion(phi, z, burnin, x0=(0.0, 0.0)):
    x = np.array(x0, dtype=float)
    rows = []
    for t in range(z.shape[0]):
        x = phi @ x + z[t]
        if t >= burnin:
            rows.append(x.copy())
    return np.array(rows)


@pytest.fixture
def gen():
    return np.random.default_rng(99)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.split(".")[-1])
class TestAgainstBruteForce:
    def test_recursion(self, impl, gen):
        phi = np.array([[0.6, 0.2], [-0.1, 0.4]])
        z = gen.standard_normal((200, 2))
        got = impl.var1_recursion(0.6, 0.2, -0.1, 0.4, z, 50, 1.0, -2.0)
        want = brute_recursion(phi, z, 50, (1.0, -2.0))
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)

    def test_acvf(self, impl, gen):
        y = gen.standard_normal(300)
        got = impl.acvf_biased(y, 12)
        np.testing.assert_allclose(got, brute_acvf(y, 12), rtol=0, atol=1e-12)

    def test_ccvf_matches_acvf_on_same_series(self, impl, gen):
        y = gen.standard_normal(250)
        np.testing.assert_allclose(
            impl.ccvf_biased(y, y, 8), impl.acvf_biased(y, 8), rtol=0, atol=1e-14
        )

    def test_batch_matches_single(self, impl, gen):
        z = gen.standard_normal((7, 120, 2))
        batch = impl.var1_recursion_batch(0.5, 0.1, 0.0, -0.3, z, 20)
        for r in range(7):
            single = impl.var1_recursion(0.5, 0.1, 0.0, -0.3,
                                         np.ascontiguousarray(z[r]), 20)
            np.testing.assert_allclose(batch[r], single, rtol=0, atol=1e-12)

    def test_acvf_batch_matches_single(self, impl, gen):
        ys = gen.standard_normal((5, 200))
        batch = impl.acvf_biased_batch(ys, 6)
        for r in range(5):
            np.testing.assert_allclose(
                batch[r], impl.acvf_biased(np.ascontiguousarray(ys[r]), 6),
                rtol=0, atol=1e-13,
            )


@pytest.mark.skipif(_core is None, reason="compiled extension not built")
class TestBackendsAgree:
    def test_recursion_bitwise_close(self, gen):
        z = gen.standard_normal((500, 2))
        a = _ref.var1_recursion(0.7, -0.2, 0.05, 0.6, z, 100)
        b = _core.var1_recursion(0.7, -0.2, 0.05, 0.6, z, 100)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)

    def test_acvf_close(self, gen):
        y = gen.standard_normal(2000)
        np.testing.assert_allclose(
            _ref.acvf_biased(y, 20), _core.acvf_biased(y, 20), rtol=0, atol=1e-11
        )

    def test_selected_backend_exported(self):
        assert kernels.BACKEND in ("compiled", "python")
        assert callable(kernels.var1_recursion)
