"""MMSE channel estimation/prediction over one PRB and its reduction to scalar noise ratios.

Covariance convention: ``Phi(d) = E{h[t] h[t+d]^H}``. The cross-covariance
between a PRB ``d`` TTIs ahead and the observed PRB is therefore
``Phi(d)^H``; for ``d = 0`` the two coincide.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelProfile, PrbGeometry, prb_covariance
from .errors import InvalidArgument, NumericFailure, UnusableLink
from .pilots import PilotPattern, selection_matrix


@dataclass(frozen=True)
class MsePerSymbol:
    values: np.ndarray
    lag: int = 0

    @property
    def max(self) -> float:
        return float(np.max(self.values))

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))


def _pilot_gram(phi0: np.ndarray, s: np.ndarray, sigma2_p: float) -> np.ndarray:
    return s @ phi0 @ s.conj().T + sigma2_p * np.eye(s.shape[0])


def mmse_filter(phi0: np.ndarray, cross: np.ndarray, s: np.ndarray, sigma2_p: float) -> np.ndarray:
    """Linear MMSE filter ``cross S^H (S Phi0 S^H + sigma_p^2 I)^-1``.

    ``cross`` is the covariance between the target vector and the full PRB
    the pilots were taken from: ``Phi0`` for estimation, ``Phi(d)^H`` for
    prediction ``d`` TTIs ahead.
    """
    if sigma2_p < 0:
        raise InvalidArgument("pilot noise variance must be nonnegative")
    if phi0.shape != cross.shape or s.shape[1] != phi0.shape[0]:
        raise InvalidArgument("inconsistent matrix dimensions")
    gram = _pilot_gram(phi0, s, sigma2_p)
    rhs = (cross @ s.conj().T).conj().T
    try:
        cho = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure("pilot Gram matrix is singular") from exc
    # gram is Hermitian: filter^H = gram^-1 (cross S^H)^H
    y = np.linalg.solve(cho, rhs)
    return np.linalg.solve(cho.conj().T, y).conj().T


def _prediction_terms(profile: ChannelProfile, geom: PrbGeometry, pattern: PilotPattern,
                      sigma2_p: float, lag: int):
    if lag < 0:
        raise InvalidArgument("lag must be nonnegative")
    phi0 = prb_covariance(geom, profile, 0)
    cross = prb_covariance(geom, profile, lag).conj().T
    s = selection_matrix(pattern)
    g = mmse_filter(phi0, cross, s, sigma2_p)
    return phi0, cross, s, g


def prediction_filter(profile: ChannelProfile, geom: PrbGeometry, pattern: PilotPattern,
                      sigma2_p: float, lag: int) -> np.ndarray:
    """Filter mapping received pilots of one PRB to a channel estimate ``lag`` TTIs later."""
    return _prediction_terms(profile, geom, pattern, sigma2_p, lag)[3]


def estimation_mse(profile: ChannelProfile, geom: PrbGeometry, pattern: PilotPattern,
                   sigma2_p: float, lag: int = 0) -> MsePerSymbol:
    """Per-resource-element MSE of the MMSE estimate (``lag = 0``) or prediction."""
    _, cross, s, g = _prediction_terms(profile, geom, pattern, sigma2_p, lag)
    # diag(G S cross^H) is real up to rounding
    explained = np.real(np.einsum("ij,ji->i", g, s @ cross.conj().T))
    vals = np.clip(profile.coeff_variance - explained, 0.0, None)
    return MsePerSymbol(vals, lag)


def noise_ratio(mse: MsePerSymbol, coeff_variance: float, reduce: str = "max") -> float:
    """Relative estimation-noise power ``m / (E{|h|^2} - m)`` of the representative MSE ``m``.

    ``reduce="max"`` uses the worst resource element; ``"mean"`` is
    available for sensitivity studies.
    """
    m = mse.max if reduce == "max" else mse.mean
    if m >= coeff_variance:
        raise UnusableLink(f"MSE {m:.4g} reaches the channel variance")
    return m / (coeff_variance - m)


def cramer_rao_noise(sigma2: float, n_pilots: int, pilot_power: float = 1.0) -> float:
    """Shortcut estimate ``sigma^2 / (N_pilots p_pilots)`` for comparison with the MMSE route."""
    if n_pilots < 1 or pilot_power <= 0:
        raise InvalidArgument("need at least one pilot with positive power")
    return sigma2 / (n_pilots * pilot_power)
