import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csiregion.channel import ChannelProfile, prb_covariance, sample_prb_pair
from csiregion.errors import InvalidArgument, UnusableLink
from csiregion.estimation import (MsePerSymbol, cramer_rao_noise, estimation_mse, mmse_filter, noise_ratio,
                                  prediction_filter)
from csiregion.pilots import PilotPattern, lattice_pattern, selection_matrix


def full_pattern(geom):
    return lattice_pattern(geom, 1, 1)


def single_pilot(geom):
    return PilotPattern(geom, ((7, 6),), "one")


class TestMmseFilter:
    def test_full_pilots_noiseless_is_identity(self, geom):
        phi = prb_covariance(geom, ChannelProfile.from_kmh(200, tau_max_us=5.0), 0)
        s = selection_matrix(full_pattern(geom))
        phi_reg = phi + 1e-3 * np.eye(geom.size)  # full rank
        g = mmse_filter(phi_reg, phi_reg, s, 0.0)
        assert np.allclose(g, np.eye(geom.size), atol=1e-8)

    def test_huge_noise_kills_filter(self, geom):
        p = ChannelProfile.from_kmh(10)
        g = prediction_filter(p, geom, lattice_pattern(geom, 7, 6), 1e9, 0)
        assert np.linalg.norm(g) < 1e-7

    def test_shape(self, geom):
        pat = lattice_pattern(geom, 4, 3)
        g = prediction_filter(ChannelProfile.from_kmh(10), geom, pat, 0.1, 2)
        assert g.shape == (geom.size, pat.n_ppos)

    def test_static_predictor(self, geom, static_profile):
        g = prediction_filter(static_profile, geom, single_pilot(geom), 0.1, 5)
        assert np.allclose(g, 1 / 1.1)

    def test_matches_direct_inverse(self, geom):
        p = ChannelProfile.from_kmh(40)
        pat = lattice_pattern(geom, 7, 6)
        s = selection_matrix(pat)
        phi0 = prb_covariance(geom, p, 0)
        cross = prb_covariance(geom, p, 3).conj().T
        direct = cross @ s.T @ np.linalg.inv(s @ phi0 @ s.T + 0.1 * np.eye(pat.n_ppos))
        assert np.allclose(prediction_filter(p, geom, pat, 0.1, 3), direct, atol=1e-10)

    def test_dimension_mismatch(self, geom):
        with pytest.raises(InvalidArgument):
            mmse_filter(np.eye(3), np.eye(4), np.eye(3), 0.1)


class TestEstimationMse:
    def test_full_pilots_noiseless(self, geom):
        p = ChannelProfile.from_kmh(3)
        m = estimation_mse(p, geom, full_pattern(geom), 1e-12)
        assert m.max < 1e-9

    def test_scalar_case(self, geom, static_profile):
        m = estimation_mse(static_profile, geom, single_pilot(geom), 0.1)
        assert np.allclose(m.values, 1 - 1 / 1.1, atol=1e-12)
        assert noise_ratio(m, 1.0) == pytest.approx(0.1, abs=1e-9)

    def test_static_independent_of_lag(self, geom, static_profile):
        pat = lattice_pattern(geom, 7, 6)
        a = estimation_mse(static_profile, geom, pat, 0.1, 0)
        b = estimation_mse(static_profile, geom, pat, 0.1, 5)
        assert np.allclose(a.values, b.values)

    def test_nested_patterns_never_worse(self, geom):
        p = ChannelProfile.from_kmh(60)
        coarse = estimation_mse(p, geom, lattice_pattern(geom, 6, 6), 0.1)
        fine = estimation_mse(p, geom, lattice_pattern(geom, 3, 3), 0.1)
        assert np.all(fine.values <= coarse.values + 1e-12)

    def test_direct_formula(self, geom):
        p = ChannelProfile.from_kmh(10)
        pat = lattice_pattern(geom, 7, 6)
        s = selection_matrix(pat)
        phi0 = prb_covariance(geom, p, 0)
        phid = prb_covariance(geom, p, 5)
        inv = np.linalg.inv(s @ phi0 @ s.T + 0.1 * np.eye(pat.n_ppos))
        direct = 1 - np.real(np.diag(phid.conj().T @ s.T @ inv @ s @ phid))
        assert np.allclose(estimation_mse(p, geom, pat, 0.1, 5).values, direct, atol=1e-12)

    def test_values_in_range(self, geom):
        m = estimation_mse(ChannelProfile.from_kmh(300), geom, lattice_pattern(geom, 14, 12), 0.1, 5)
        assert np.all((m.values >= 0) & (m.values <= 1 + 1e-12))

    def test_empirical_mse_small_sample(self, geom):
        # cheap version of the acceptance check: 4000 samples, 8% tolerance
        p = ChannelProfile.from_kmh(10)
        pat = lattice_pattern(geom, 7, 6)
        g = prediction_filter(p, geom, pat, 0.1, 0)
        h, _ = sample_prb_pair(geom, p, 0, 4000, 11)
        rng = np.random.default_rng(12)
        noise = np.sqrt(0.05) * (rng.standard_normal((4000, pat.n_ppos)) + 1j * rng.standard_normal((4000, pat.n_ppos)))
        est = (h[:, list(pat.indices)] + noise) @ g.T
        emp = np.mean(np.abs(h - est) ** 2, axis=0)
        assert np.allclose(emp, estimation_mse(p, geom, pat, 0.1).values, rtol=0.08)


class TestNoiseRatio:
    def test_values(self):
        assert noise_ratio(MsePerSymbol(np.zeros(3)), 1.0) == 0.0
        assert noise_ratio(MsePerSymbol(np.array([0.5, 0.1])), 1.0) == pytest.approx(1.0)
        assert noise_ratio(MsePerSymbol(np.array([0.090909])), 1.0) == pytest.approx(0.1, abs=1e-5)

    def test_mean_reduction(self):
        assert noise_ratio(MsePerSymbol(np.array([0.5, 0.0])), 1.0, reduce="mean") == pytest.approx(1 / 3)

    def test_unusable(self):
        with pytest.raises(UnusableLink):
            noise_ratio(MsePerSymbol(np.array([1.0])), 1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 0.98), st.floats(0, 0.98))
    def test_strictly_increasing(self, a, b):
        if a == b:
            return
        ra = noise_ratio(MsePerSymbol(np.array([a])), 1.0)
        rb = noise_ratio(MsePerSymbol(np.array([b])), 1.0)
        assert (ra < rb) == (a < b)


def test_cramer_rao():
    assert cramer_rao_noise(0.1, 4) == pytest.approx(0.025)
    with pytest.raises(InvalidArgument):
        cramer_rao_noise(0.1, 0)
