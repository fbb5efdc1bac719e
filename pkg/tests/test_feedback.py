import math

import numpy as np
import pytest

from csiregion.channel import ChannelProfile
from csiregion.errors import InvalidArgument
from csiregion.estimation import MsePerSymbol, estimation_mse
from csiregion.feedback import (FeedbackConfig, FeedbackModel, conditional_covariance, csit_mse,
                                csit_noise_ratio, decorrelation_basis, predicted_covariance,
                                previous_feedback_gain, quantization_noise, quantization_scale, sigma_dl_bs,
                                steady_state_equivalent_bits)
from csiregion.numerics import hermitian_eig
from csiregion.pilots import PilotPattern, lattice_pattern


@pytest.fixture
def pattern(geom):
    return lattice_pattern(geom, 7, 6, (3, 2))


def single_pilot(geom):
    return PilotPattern(geom, ((7, 6),), "one")


def test_config_validation():
    with pytest.raises(InvalidArgument):
        FeedbackConfig(n_b=-1)
    with pytest.raises(InvalidArgument):
        FeedbackConfig(mode="other")
    with pytest.raises(InvalidArgument):
        FeedbackConfig(n_rank=0)


@pytest.mark.parametrize("n_b, scale", [(0, 1.0), (4, 1.0), (6, 0.5), (8, 0.25), (3, 1.0)])
def test_quantization_scale(n_b, scale):
    assert quantization_scale(n_b, 2) == scale


def test_previous_feedback_gain():
    assert previous_feedback_gain(8, 2) == pytest.approx(math.sqrt(0.75), abs=1e-12)
    assert previous_feedback_gain(4, 2) == 0.0


class TestPredictedCovariance:
    def test_static_scalar(self, geom, static_profile):
        phi = predicted_covariance(static_profile, geom, single_pilot(geom), 0.1, 5)
        assert np.allclose(phi, np.full((168, 168), 1 / 1.1))

    def test_diagonal_matches_mse(self, geom, pattern):
        p = ChannelProfile.from_kmh(10)
        phi = predicted_covariance(p, geom, pattern, 0.1, 5)
        mse = estimation_mse(p, geom, pattern, 0.1, 5)
        assert np.allclose(np.real(np.diag(phi)), 1 - mse.values, atol=1e-9)


class TestDecorrelationBasis:
    def test_rank_one(self):
        phi = np.ones((6, 6))
        v = decorrelation_basis(phi, 2)
        assert np.allclose(v[:, 0], np.ones(6) / np.sqrt(6))
        assert np.allclose(v.conj().T @ v, np.eye(2), atol=1e-10)
        assert abs(np.vdot(v[:, 1], phi @ v[:, 1])) < 1e-10

    def test_trace_matches_top_eigenvalues(self, geom, pattern):
        phi = predicted_covariance(ChannelProfile.from_kmh(30), geom, pattern, 0.1, 5)
        v = decorrelation_basis(phi, 3)
        lam = hermitian_eig(phi).eigenvalues
        assert np.trace(v.conj().T @ phi @ v).real == pytest.approx(lam[:3].sum(), rel=1e-10)

    def test_bad_rank(self):
        with pytest.raises(InvalidArgument):
            decorrelation_basis(np.eye(3), 4)


def test_quantization_noise_scale(geom, pattern):
    phi = predicted_covariance(ChannelProfile.from_kmh(10), geom, pattern, 0.1, 5)
    v = decorrelation_basis(phi, 2)
    proj = v @ v.conj().T
    assert np.allclose(quantization_noise(phi, v, 0, 2), proj @ phi @ proj)
    assert np.allclose(quantization_noise(phi, v, 6, 2), 0.5 * proj @ phi @ proj)


class TestCsitMse:
    def test_scalar_case(self, geom, static_profile):
        m = csit_mse(static_profile, geom, single_pilot(geom), 0.1, FeedbackConfig(n_b=4, n_rank=1))
        assert np.allclose(m.values, 1 - 0.75 / 1.1, atol=1e-9)
        assert m.max == pytest.approx(0.3182, abs=1e-4)

    def test_large_budget_limit(self, geom, pattern):
        p = ChannelProfile.from_kmh(10)
        phi = predicted_covariance(p, geom, pattern, 0.1, 5)
        v = decorrelation_basis(phi, 2)
        proj = v @ v.conj().T
        m = csit_mse(p, geom, pattern, 0.1, FeedbackConfig(n_b=200))
        assert np.allclose(m.values, 1 - np.real(np.diag(proj @ phi @ proj)), atol=1e-9)

    @pytest.mark.parametrize("v_kmh, n_b", [(1, 0), (10, 6), (60, 12), (100, 24)])
    @pytest.mark.parametrize("mode", ["redundant", "successive"])
    def test_never_below_prediction_mse(self, geom, pattern, v_kmh, n_b, mode):
        p = ChannelProfile.from_kmh(v_kmh)
        csit = csit_mse(p, geom, pattern, 0.1, FeedbackConfig(n_b=n_b, mode=mode))
        pred = estimation_mse(p, geom, pattern, 0.1, 5)
        assert np.all(csit.values >= pred.values - 1e-9)

    def test_model_reuse_is_exact(self, geom, pattern):
        p = ChannelProfile.from_kmh(10)
        model = FeedbackModel(p, geom, pattern, 0.1, 5, 2)
        for mode in ("redundant", "successive"):
            fb = FeedbackConfig(n_b=10, mode=mode)
            assert np.array_equal(csit_mse(p, geom, pattern, 0.1, fb).values,
                                  csit_mse(p, geom, pattern, 0.1, fb, model=model).values)


class TestConditional:
    def test_uninformative_previous_feedback(self, geom, pattern):
        p = ChannelProfile.from_kmh(10)
        phi = predicted_covariance(p, geom, pattern, 0.1, 5)
        assert np.allclose(conditional_covariance(p, geom, pattern, 0.1, 5, 4, 2), phi, atol=1e-12)

    @pytest.mark.parametrize("v_kmh", [1, 10, 100])
    def test_trace_reduction(self, geom, pattern, v_kmh):
        p = ChannelProfile.from_kmh(v_kmh)
        phi = predicted_covariance(p, geom, pattern, 0.1, 5)
        cond = conditional_covariance(p, geom, pattern, 0.1, 5, 8, 2)
        assert np.trace(cond).real < np.trace(phi).real - 1e-9
        lam = hermitian_eig(cond).eigenvalues
        assert lam.min() >= -1e-12

    def test_negative_budget(self, geom, pattern):
        with pytest.raises(InvalidArgument):
            conditional_covariance(ChannelProfile(), geom, pattern, 0.1, 5, -1, 2)


class TestSteadyState:
    def test_zero_budget(self, geom, pattern):
        ss = steady_state_equivalent_bits(ChannelProfile.from_kmh(10), geom, pattern, 0.1,
                                          FeedbackConfig(n_b=0, mode="successive"))
        assert ss.n_b_equivalent == 0.0 and not ss.degenerate

    @pytest.mark.parametrize("v_kmh, n_b", [(1, 8), (10, 8), (10, 12), (100, 10)])
    def test_residual(self, geom, pattern, v_kmh, n_b):
        p = ChannelProfile.from_kmh(v_kmh)
        fb = FeedbackConfig(n_b=n_b, mode="successive")
        model = FeedbackModel(p, geom, pattern, 0.1, 5, 2)
        ss = steady_state_equivalent_bits(p, geom, pattern, 0.1, fb, model=model)
        assert not ss.degenerate
        g = np.max(model.successive_mse(ss.n_b_equivalent, n_b)) - np.max(model.redundant_mse(ss.n_b_equivalent))
        assert abs(g) <= 1e-6
        assert ss.n_b_equivalent >= n_b

    def test_static_channel_gains(self, geom, pattern):
        p = ChannelProfile(velocity=0.0)
        succ = csit_mse(p, geom, pattern, 0.1, FeedbackConfig(n_b=8, mode="successive"))
        red = csit_mse(p, geom, pattern, 0.1, FeedbackConfig(n_b=8, mode="redundant"))
        assert succ.max <= red.max + 1e-12


class TestNoiseRatio:
    def test_examples(self):
        assert csit_noise_ratio(0.2, 0.2, 1.0) == 0.0
        assert csit_noise_ratio(0.5, 0.2, 1.0) == pytest.approx(0.375)
        assert csit_noise_ratio(0.1, 0.2, 1.0) == 0.0
        assert csit_noise_ratio(MsePerSymbol(np.array([0.5])), MsePerSymbol(np.array([0.2])), 1.0) == pytest.approx(0.375)

    def test_no_feedback_ceiling(self, geom, pattern):
        assert sigma_dl_bs(ChannelProfile.from_kmh(100), geom, pattern, 0.1, FeedbackConfig(n_b=0)) == pytest.approx(1.0)

    @pytest.mark.parametrize("mode", ["redundant", "successive"])
    def test_nonincreasing_in_budget(self, geom, pattern, mode):
        p = ChannelProfile.from_kmh(10)
        vals = [sigma_dl_bs(p, geom, pattern, 0.1, FeedbackConfig(n_b=n, mode=mode)) for n in range(0, 25, 4)]
        assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


def test_steady_state_without_gain_falls_back_to_redundant(geom):
    # fast channel: conditioning on the 1-TTI-old feedback never lowers the
    # max MSE, so the fixed point sits below the bracket
    from csiregion.region import optimized_catalog
    p = ChannelProfile.from_kmh(100)
    pat = next(x for x in optimized_catalog(geom, p, 0.1) if x.id == "rect-t13-f5-o0.0")
    model = FeedbackModel(p, geom, pat, 0.1, 5, 2)
    for n_b in (16.0, 18.0):
        ss = steady_state_equivalent_bits(p, geom, pat, 0.1, FeedbackConfig(n_b=n_b, mode="successive"),
                                          model=model)
        assert ss.degenerate and ss.n_b_equivalent == n_b
        np.testing.assert_allclose(ss.mse.values, np.clip(model.redundant_mse(n_b), 0, None))
