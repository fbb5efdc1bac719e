"""WSSUS channel statistics over one PRB and channel-realization sampling."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument
from .numerics import bessel_j0, sample_correlated, sinc_unnormalized

SPEED_OF_LIGHT = 299_792_458.0
KMH = 1.0 / 3.6


@dataclass(frozen=True)
class PrbGeometry:
    """OFDM tile over which estimation and feedback operate (LTE defaults)."""

    n_symbols: int = 14
    n_subcarriers: int = 12
    symbol_rate: float = 14_000.0
    subcarrier_spacing: float = 15_000.0

    def __post_init__(self):
        if self.n_symbols < 1 or self.n_subcarriers < 1:
            raise InvalidArgument("PRB dimensions must be positive")
        if self.symbol_rate <= 0 or self.subcarrier_spacing <= 0:
            raise InvalidArgument("symbol rate and subcarrier spacing must be positive")

    @property
    def size(self) -> int:
        return self.n_symbols * self.n_subcarriers

    def index(self, symbol: int, subcarrier: int) -> int:
        """Stacked (symbol-major) position of a resource element."""
        return symbol * self.n_subcarriers + subcarrier


@dataclass(frozen=True)
class ChannelProfile:
    """Fading statistics of one link. ``velocity`` in m/s, ``max_delay_spread`` in s."""

    carrier_freq: float = 2.6e9
    velocity: float = 0.0
    max_delay_spread: float = 1e-6
    coeff_variance: float = 1.0

    def __post_init__(self):
        if self.carrier_freq <= 0 or self.coeff_variance <= 0:
            raise InvalidArgument("carrier frequency and coefficient variance must be positive")
        if self.velocity < 0 or self.max_delay_spread < 0:
            raise InvalidArgument("velocity and delay spread must be nonnegative")

    @classmethod
    def from_kmh(cls, velocity_kmh: float, *, carrier_freq: float = 2.6e9,
                 tau_max_us: float = 1.0, coeff_variance: float = 1.0) -> "ChannelProfile":
        return cls(carrier_freq=carrier_freq, velocity=velocity_kmh * KMH,
                   max_delay_spread=tau_max_us * 1e-6, coeff_variance=coeff_variance)

    @property
    def doppler(self) -> float:
        return self.carrier_freq * self.velocity / SPEED_OF_LIGHT

    @property
    def velocity_kmh(self) -> float:
        return self.velocity / KMH


@dataclass(frozen=True)
class ChannelRealization:
    h_ul: np.ndarray
    h_dl: np.ndarray


def temporal_correlation(geom: PrbGeometry, profile: ChannelProfile, block_lag: int) -> np.ndarray:
    """Bessel time-correlation matrix between a PRB and the one ``block_lag`` TTIs later.

    Entry (i, j) is ``J0(2 pi f_D (block_lag * N_s + j - i) / f_s)``. Negative
    lags are only accepted through :func:`signed_temporal_correlation`.
    """
    if block_lag < 0:
        raise InvalidArgument("block lag must be nonnegative")
    return signed_temporal_correlation(geom, profile, block_lag)


def signed_temporal_correlation(geom: PrbGeometry, profile: ChannelProfile, block_lag: int) -> np.ndarray:
    n = geom.n_symbols
    i, j = np.indices((n, n))
    lag = block_lag * n + j - i
    return bessel_j0(2.0 * np.pi * profile.doppler * lag / geom.symbol_rate)


def spectral_correlation(geom: PrbGeometry, profile: ChannelProfile) -> np.ndarray:
    """Toeplitz frequency-correlation matrix, lag d entry ``si(2 pi tau_max dF d)``."""
    n = geom.n_subcarriers
    i, j = np.indices((n, n))
    return sinc_unnormalized(2.0 * np.pi * profile.max_delay_spread * geom.subcarrier_spacing * (j - i))


@lru_cache(maxsize=256)
def _prb_covariance_cached(geom: PrbGeometry, profile: ChannelProfile, lag: int) -> np.ndarray:
    out = profile.coeff_variance * np.kron(signed_temporal_correlation(geom, profile, lag),
                                           spectral_correlation(geom, profile))
    out.setflags(write=False)
    return out


def prb_covariance(geom: PrbGeometry, profile: ChannelProfile, lag: int, *, allow_negative: bool = False) -> np.ndarray:
    """Covariance ``E{|h|^2} (Pi_T(lag) kron Pi_F)`` of stacked PRB channel vectors.

    The returned array is read-only and shared between callers.
    """
    if lag < 0 and not allow_negative:
        raise InvalidArgument("lag must be nonnegative")
    return _prb_covariance_cached(geom, profile, int(lag))


def _complex_gaussian(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_flat_channels(n_bs: int, k: int, count: int, seed: int, *,
                         coeff_variance: float = 1.0) -> list[ChannelRealization]:
    """I.i.d. Rayleigh UL/DL channel matrices (``n_bs x k``), a pure function of ``seed``."""
    if n_bs < 1 or k < 1:
        raise InvalidArgument("antenna and terminal counts must be positive")
    if count < 0:
        raise InvalidArgument("count must be nonnegative")
    ul, dl = sample_flat_arrays(n_bs, k, count, seed, coeff_variance=coeff_variance)
    return [ChannelRealization(ul[r], dl[r]) for r in range(count)]


def sample_flat_arrays(n_bs: int, k: int, count: int, seed: int, *,
                       coeff_variance: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Same draw as :func:`sample_flat_channels` but stacked as ``(count, n_bs, k)`` arrays."""
    rng = np.random.default_rng(seed)
    ul = _complex_gaussian(rng, (count, n_bs, k), coeff_variance)
    dl = _complex_gaussian(rng, (count, n_bs, k), coeff_variance)
    return ul, dl


def joint_pair_covariance(geom: PrbGeometry, profile: ChannelProfile, lag: int) -> np.ndarray:
    """2L x 2L covariance of ``(h[t], h[t+lag])``.

    With ``Phi(lag) = E{h[t] h[t+lag]^H}`` the off-diagonal blocks are
    ``Phi(lag)`` and its conjugate transpose.
    """
    phi0 = prb_covariance(geom, profile, 0)
    cross = prb_covariance(geom, profile, lag)
    return np.block([[phi0, cross], [cross.conj().T, phi0]])


def sample_prb_pair(geom: PrbGeometry, profile: ChannelProfile, lag: int, count: int,
                    seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``count`` pairs ``(h[t], h[t+lag])`` of stacked PRB channels.

    Returns two ``(count, L)`` arrays.
    """
    if lag < 0:
        raise InvalidArgument("lag must be nonnegative")
    n = geom.size
    if lag == 0:
        h = sample_correlated(prb_covariance(geom, profile, 0), count, seed)
        return h, h.copy()
    joint = sample_correlated(joint_pair_covariance(geom, profile, lag), count, seed)
    return joint[:, :n], joint[:, n:]
