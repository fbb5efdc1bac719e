"""Compiled and pure-Python kernels must agree; both are checked against direct formulas."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csiregion import kernels

from conftest import random_channel
from oracles import dl_rate_direct, ul_rate_direct

BACKENDS = [kernels.python] + ([kernels.compiled] if kernels.compiled is not None else [])
IDS = [b.__name__.rsplit(".", 1)[-1] for b in BACKENDS]


def problem(seed, n, k):
    rng = np.random.default_rng(seed)
    h = random_channel(rng, n, k)
    return h, rng.uniform(0, 0.3, (n, k)), rng.uniform(0, 0.3, (n, k)), rng.uniform(0, 1, k)


def test_compiled_backend_available():
    assert kernels.compiled is not None, "extension not built; run pip install -e ."
    assert kernels.BACKEND_NAME in ("compiled", "python")


@pytest.mark.parametrize("backend", BACKENDS, ids=IDS)
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 5), k=st.integers(1, 5))
def test_rates_match_direct_formulas(backend, seed, n, k):
    h, e2, eb, p = problem(seed, n, k)
    assert backend.ul_rate(h, e2, 0.1, p) == pytest.approx(ul_rate_direct(h, e2, 0.1, p), abs=1e-9)
    assert backend.dl_rate(h, e2, eb, 0.1, p) == pytest.approx(dl_rate_direct(h, e2, eb, 0.1, p), abs=1e-9)


@pytest.mark.skipif(kernels.compiled is None, reason="extension not built")
@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("n, k", [(1, 1), (2, 2), (4, 4), (3, 5), (6, 2)])
def test_optimizers_agree_across_backends(seed, n, k):
    h, e2, eb, _ = problem(seed, n, k)
    a = kernels.python.ul_optimize(h, e2, 0.1, 1.0)
    b = kernels.compiled.ul_optimize(h, e2, 0.1, 1.0)
    assert a[0] == pytest.approx(b[0], abs=1e-9)
    a = kernels.python.dl_optimize(h, e2, eb, 0.1, 1.0)
    b = kernels.compiled.dl_optimize(h, e2, eb, 0.1, 1.0)
    assert a[0] == pytest.approx(b[0], abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS, ids=IDS)
def test_batch_equals_loop(backend):
    rng = np.random.default_rng(3)
    h = np.stack([random_channel(rng, 3, 3) for _ in range(4)])
    e2 = np.full((3, 3), 0.05)
    rates, powers = backend.ul_optimize_batch(h, e2, 0.1, 1.0)
    for r in range(4):
        single = backend.ul_optimize(h[r], e2, 0.1, 1.0)
        assert rates[r] == single[0] and np.array_equal(powers[r], single[1])
    rates, powers = backend.dl_optimize_batch(h, e2, e2, 0.1, 1.0)
    for r in range(4):
        assert rates[r] == backend.dl_optimize(h[r], e2, e2, 0.1, 1.0)[0]


@pytest.mark.parametrize("backend", BACKENDS, ids=IDS)
def test_power_constraints(backend):
    h, e2, eb, _ = problem(5, 4, 4)
    _, p = backend.ul_optimize(h, e2, 0.1, 2.0)
    assert np.all((p >= 0) & (p <= 2.0))
    _, p = backend.dl_optimize(h, e2, eb, 0.1, 2.0)
    assert np.all(p >= 0) and p.sum() <= 2.0 + 1e-12


@pytest.mark.parametrize("backend", BACKENDS, ids=IDS)
def test_line_search_never_below_full_power(backend):
    h, e2, _, _ = problem(9, 4, 4)
    e2 = e2 * 3
    full = backend.ul_rate(h, e2, 0.1, np.ones(4))
    assert backend.ul_optimize(h, e2, 0.1, 1.0)[0] >= full - 1e-12


def test_line_max_finds_interior_peak():
    x, fx = kernels.python.line_max(lambda t: -(t - 0.3141) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3141, abs=1e-6) and fx == pytest.approx(0.0, abs=1e-12)
    x, _ = kernels.python.line_max(lambda t: t, 0.0, 2.0)
    assert x == 2.0
