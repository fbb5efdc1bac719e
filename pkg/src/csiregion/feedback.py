"""Rank-reduced CSI feedback: quantization noise, transmitter-side MSE and sigma^2_DL,BS.

Two schemes are modelled. *Redundant* feedback quantizes each TTI's
channel prediction on its own. *Successive* feedback quantizes only the
innovation of the prediction given the estimate fed back one TTI earlier;
its steady state is found by matching it to an equivalent redundant
budget ``N_b'``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from .channel import ChannelProfile, PrbGeometry, prb_covariance
from .errors import InvalidArgument, UnusableLink
from .estimation import MsePerSymbol, _pilot_gram, _prediction_terms, estimation_mse
from .numerics import PSD_CLIP_TOL, EigenDecomposition, hermitian_eig, hermitian_pinv
from .pilots import PilotPattern

FeedbackMode = Literal["redundant", "successive"]

#: Upper end of the steady-state bracket (bits).
MAX_EQUIVALENT_BITS = 64.0


@dataclass(frozen=True)
class FeedbackConfig:
    n_b: float = 0.0
    n_rank: int = 2
    delay: int = 5
    mode: FeedbackMode = "redundant"

    def __post_init__(self):
        if not math.isfinite(self.n_b) or self.n_b < 0:
            raise InvalidArgument("N_b must be finite and nonnegative")
        if self.n_rank < 1:
            raise InvalidArgument("N_rank must be >= 1")
        if self.delay < 0:
            raise InvalidArgument("feedback delay must be nonnegative")
        if self.mode not in ("redundant", "successive"):
            raise InvalidArgument(f"unknown feedback mode {self.mode!r}")


@dataclass(frozen=True)
class CsiQuality:
    sigma_ul_bs: float
    sigma_dl_ut: float
    sigma_dl_bs: float

    def __post_init__(self):
        for name in ("sigma_ul_bs", "sigma_dl_ut", "sigma_dl_bs"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InvalidArgument(f"{name} must be finite and >= 0, got {v}")


def quantization_scale(n_b: float, n_rank: int) -> float:
    """Residual power fraction ``2^-max(0, N_b/N_rank - 2)`` of a quantized Gaussian component."""
    return 2.0 ** (-max(0.0, n_b / n_rank - 2.0))


def previous_feedback_gain(n_b_prev: float, n_rank: int) -> float:
    """Amplitude ``beta`` of the earlier feedback's useful part."""
    return math.sqrt(1.0 - quantization_scale(n_b_prev, n_rank))


def _clip(a: np.ndarray) -> np.ndarray:
    dec = hermitian_eig(0.5 * (a + a.conj().T))
    lam = np.clip(dec.eigenvalues, 0.0, None)
    return EigenDecomposition(lam, dec.eigenvectors).reconstruct()


def predicted_covariance(profile: ChannelProfile, geom: PrbGeometry, pattern: PilotPattern,
                         sigma2_p: float, lag: int) -> np.ndarray:
    """Covariance of the MMSE channel prediction ``lag`` TTIs ahead, clipped PSD."""
    _, cross, s, g = _prediction_terms(profile, geom, pattern, sigma2_p, lag)
    return _clip(g @ s @ cross.conj().T)


def decorrelation_basis(phi: np.ndarray, n_rank: int) -> np.ndarray:
    """Eigenvectors of the ``n_rank`` strongest eigenvalues (orthonormal columns)."""
    if not 1 <= n_rank <= phi.shape[0]:
        raise InvalidArgument("N_rank must lie in [1, L]")
    return hermitian_eig(phi).eigenvectors[:, :n_rank]


def _projected(phi: np.ndarray, v: np.ndarray) -> np.ndarray:
    p = v @ v.conj().T
    return p @ phi @ p


def quantization_noise(phi: np.ndarray, v: np.ndarray, n_b: float, n_rank: int) -> np.ndarray:
    return quantization_scale(n_b, n_rank) * _projected(phi, v)


def _diag(a: np.ndarray) -> np.ndarray:
    return np.real(np.diagonal(a))


def _redundant_mse_from(phi: np.ndarray, dec: EigenDecomposition, n_b: float, n_rank: int,
                        coeff_variance: float) -> np.ndarray:
    # diag(V V^H Phi V V^H) = sum_r lam_r |u_r|^2 for eigenvectors of Phi
    u = dec.eigenvectors[:, :n_rank]
    kept = (np.abs(u) ** 2) @ dec.eigenvalues[:n_rank]
    return coeff_variance - (1.0 - quantization_scale(n_b, n_rank)) * kept


class FeedbackModel:
    """Precomputed prediction statistics for one (profile, pattern, delay, rank).

    Holds the predicted covariance and its eigendecomposition, which fix
    the redundant-feedback MSE for every budget. For successive feedback
    ``Phi_c(beta) = Phi - beta^2 Q``: the correction is quadratic in the
    previous-feedback gain, so ``Q`` is formed once (on first use) and
    reused during the steady-state search.
    """

    def __init__(self, profile, geom, pattern, sigma2_p, lag, n_rank):
        phi0, cross, s, g = _prediction_terms(profile, geom, pattern, sigma2_p, lag)
        self.coeff_variance = profile.coeff_variance
        self.n_rank = n_rank
        self.lag = lag
        self._terms = (geom, profile, s, g, sigma2_p)
        self.phi = _clip(g @ s @ cross.conj().T)
        self.dec = hermitian_eig(self.phi)
        if not 1 <= n_rank <= self.phi.shape[0]:
            raise InvalidArgument("N_rank must lie in [1, L]")

    @cached_property
    def q(self) -> np.ndarray:
        geom, profile, s, g, sigma2_p = self._terms
        v = self.dec.eigenvectors[:, :self.n_rank]
        proj = v @ v.conj().T
        # pilots one TTI apart, same noise term as the single-TTI Gram matrix
        phi_prev = prb_covariance(geom, profile, -1, allow_negative=True)
        link = s @ phi_prev @ s.conj().T + sigma2_p * np.eye(s.shape[0])
        cross_prev = g @ link @ g.conj().T @ proj
        fed_back = proj @ self.phi @ proj
        q = cross_prev @ hermitian_pinv(fed_back, PSD_CLIP_TOL) @ cross_prev.conj().T
        return 0.5 * (q + q.conj().T)

    def conditional(self, n_b_prev: float) -> np.ndarray:
        beta2 = 1.0 - quantization_scale(n_b_prev, self.n_rank)
        return _clip(self.phi - beta2 * self.q)

    def redundant_mse(self, n_b: float) -> np.ndarray:
        return _redundant_mse_from(self.phi, self.dec, n_b, self.n_rank, self.coeff_variance)

    def successive_mse(self, n_b_prev: float, n_b: float) -> np.ndarray:
        cond = self.conditional(n_b_prev)
        dec = hermitian_eig(cond)
        # part known from earlier feedback + quantized innovation
        known = _diag(self.phi) - _diag(cond)
        innov = -_redundant_mse_from(cond, dec, n_b, self.n_rank, 0.0)
        return self.coeff_variance - known - innov


def conditional_covariance(profile: ChannelProfile, geom: PrbGeometry, pattern: PilotPattern,
                           sigma2_p: float, lag: int, n_b_prev: float, n_rank: int) -> np.ndarray:
    """Covariance of the channel prediction given the estimate fed back one TTI earlier."""
    if n_b_prev < 0:
        raise InvalidArgument("N_b' must be nonnegative")
    return FeedbackModel(profile, geom, pattern, sigma2_p, lag, n_rank).conditional(n_b_prev)


@dataclass(frozen=True)
class SteadyState:
    n_b_equivalent: float
    mse: MsePerSymbol
    degenerate: bool = False


def steady_state_equivalent_bits(profile: ChannelProfile, geom: PrbGeometry, pattern: PilotPattern,
                                 sigma2_p: float, fb: FeedbackConfig, *, tol: float = 1e-6,
                                 model: FeedbackModel | None = None) -> SteadyState:
    """Bits ``N_b'`` of unconditioned feedback that successive feedback with ``fb.n_b`` sustains.

    Solves ``max MSE_succ(N_b', N_b) = max MSE_red(N_b')`` by bisection on
    ``[N_b, 64]``. Without a sign change the fixed point lies outside the
    bracket and the nearer endpoint is returned, flagged ``degenerate``:
    ``N_b`` when the residual is positive throughout (conditioning never
    helps, so the scheme is no better than redundant feedback) and 64
    when it is negative throughout.
    """
    m = model or FeedbackModel(profile, geom, pattern, sigma2_p, fb.delay, fb.n_rank)
    scale = profile.coeff_variance

    def g(nbp: float) -> float:
        return float(np.max(m.successive_mse(nbp, fb.n_b)) - np.max(m.redundant_mse(nbp)))

    lo, hi = float(fb.n_b), MAX_EQUIVALENT_BITS
    glo = g(lo)
    if abs(glo) <= tol * scale:
        return SteadyState(lo, MsePerSymbol(np.clip(m.redundant_mse(lo), 0.0, None), fb.delay))
    ghi = g(hi)
    if glo * ghi > 0:
        end = lo if glo > 0 else hi
        return SteadyState(end, MsePerSymbol(np.clip(m.redundant_mse(end), 0.0, None), fb.delay), degenerate=True)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0:
            lo = hi = mid
            break
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return SteadyState(root, MsePerSymbol(np.clip(m.redundant_mse(root), 0.0, None), fb.delay))


def csit_mse(profile: ChannelProfile, geom: PrbGeometry, pattern: PilotPattern, sigma2_p: float,
             fb: FeedbackConfig, n_b_prev: float | None = None, *,
             model: FeedbackModel | None = None) -> MsePerSymbol:
    """Per-resource-element MSE of the channel known at the BS after feedback.

    Redundant mode ignores ``n_b_prev``. In successive mode ``n_b_prev`` is
    the budget of the previous (unconditioned) feedback; ``None`` means the
    steady-state value. ``model`` may carry precomputed statistics for the
    same profile, pattern, delay and rank.
    """
    m = model or FeedbackModel(profile, geom, pattern, sigma2_p, fb.delay, fb.n_rank)
    if fb.mode == "redundant":
        return MsePerSymbol(np.clip(m.redundant_mse(fb.n_b), 0.0, None), fb.delay)
    if n_b_prev is None:
        return steady_state_equivalent_bits(profile, geom, pattern, sigma2_p, fb, model=m).mse
    return MsePerSymbol(np.clip(m.successive_mse(n_b_prev, fb.n_b), 0.0, None), fb.delay)


def csit_noise_ratio(mse_csit: MsePerSymbol | float, mse_csir: MsePerSymbol | float,
                     coeff_variance: float) -> float:
    """``sigma^2_DL,BS``: extra transmitter-side error relative to the receiver side, clamped at 0."""
    t = mse_csit.max if isinstance(mse_csit, MsePerSymbol) else float(mse_csit)
    r = mse_csir.max if isinstance(mse_csir, MsePerSymbol) else float(mse_csir)
    denom = coeff_variance - r
    if denom <= 0:
        raise UnusableLink("receiver-side MSE reaches the channel variance")
    return max(0.0, (t - r) / denom)


def sigma_dl_bs(profile: ChannelProfile, geom: PrbGeometry, pattern: PilotPattern, sigma2_p: float,
                fb: FeedbackConfig, *, model: FeedbackModel | None = None,
                csir: MsePerSymbol | None = None) -> float:
    """Transmitter-side noise ratio for a DL pilot pattern and feedback configuration."""
    if csir is None:
        csir = estimation_mse(profile, geom, pattern, sigma2_p, 0)
    csit = csit_mse(profile, geom, pattern, sigma2_p, fb, model=model)
    return csit_noise_ratio(csit, csir, profile.coeff_variance)
