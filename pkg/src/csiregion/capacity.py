"""Gross sum-rate lower bounds with imperfect CSI.

Uplink: multiple-access channel with receiver-side estimation noise folded
into an effective channel. Downlink: broadcast channel evaluated through
its dual uplink under a sum-power constraint, with terminal-side and
BS-side CSI noise. TDM with random beamforming is the no-CSIT fallback.

Rates are in bits per channel access.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import kernels
from .errors import InvalidArgument


@dataclass(frozen=True)
class LinkBudget:
    """Noise powers and power constraints of both link directions."""

    sigma2_ul: float = 0.1
    sigma2_dl: float = 0.1
    sigma2_p: float = 0.1
    p_max_ul: float = 1.0
    p_tot_dl: float = 1.0

    def __post_init__(self):
        for name in ("sigma2_ul", "sigma2_dl", "sigma2_p"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidArgument(f"{name} must be finite and > 0, got {v}")
        for name in ("p_max_ul", "p_tot_dl"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidArgument(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class EffectiveUplink:
    h_eff: np.ndarray
    e_bar: np.ndarray

    @property
    def e2(self) -> np.ndarray:
        return self.e_bar ** 2


@dataclass(frozen=True)
class EffectiveDownlink:
    h_eff: np.ndarray
    e_ut: np.ndarray
    e_bs: np.ndarray


@dataclass(frozen=True)
class TdmEffective:
    """Per-terminal effective scalar channel after random beamforming."""

    h_eff: np.ndarray
    sigma2_tdm: np.ndarray


@dataclass(frozen=True)
class PowerAllocation:
    powers: np.ndarray
    kind: Literal["ul", "dl"] = "ul"

    @property
    def total(self) -> float:
        return float(np.sum(self.powers))


def _check_variance(*values: float) -> None:
    for v in values:
        if not (math.isfinite(v) and v >= 0):
            raise InvalidArgument(f"variances must be finite and >= 0, got {v}")


def _check_channel(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or 0 in h.shape:
        raise InvalidArgument("channel must be a nonempty N_BS x K matrix")
    return h


# --- deterministic scale factors --------------------------------------------

def ul_scale(coeff_variance: float, sigma2_ul_bs: float) -> tuple[float, float]:
    """Effective-channel amplitude scale and ``|e_bar|^2`` for the uplink."""
    _check_variance(sigma2_ul_bs)
    e = coeff_variance
    return 1.0 / math.sqrt(1.0 + sigma2_ul_bs / e), e * sigma2_ul_bs / (e + sigma2_ul_bs)


def dl_scale(coeff_variance: float, sigma2_ut: float, sigma2_bs: float) -> tuple[float, float, float]:
    """Downlink amplitude scale, ``|e_bar_UT|^2`` and ``|e_bar_BS|^2``.

    The BS-side term keeps the squared channel variance in its numerator.
    """
    _check_variance(sigma2_ut, sigma2_bs)
    e = coeff_variance
    scale = math.sqrt(max(0.0, e - sigma2_bs) / (e + sigma2_ut))
    return scale, e * sigma2_ut / (e + sigma2_ut), sigma2_bs * e * e / (e + sigma2_ut)


def tdm_scale(coeff_variance: float, sigma2_ut_tdm: float, p_tot: float) -> tuple[float, float]:
    """Amplitude factor of the random-beamforming channel and its noise term ``sigma^2_TDM``.

    ``p_tot * coeff_variance`` is the per-terminal received power
    ``(P/N_BS) E{h^H h}`` of the all-ones precoder.
    """
    _check_variance(sigma2_ut_tdm)
    a = p_tot * coeff_variance
    if a + sigma2_ut_tdm <= 0:
        return 0.0, 0.0
    return math.sqrt(a / (a + sigma2_ut_tdm)), sigma2_ut_tdm / (a + sigma2_ut_tdm)


# --- uplink ------------------------------------------------------------------

def ul_effective_params(h_ul: np.ndarray, coeff_variance: float, sigma2_ul_bs: float) -> EffectiveUplink:
    h = _check_channel(h_ul)
    scale, e2 = ul_scale(coeff_variance, sigma2_ul_bs)
    return EffectiveUplink(h * scale, np.full(h.shape, math.sqrt(e2)))


def ul_sum_rate(eff: EffectiveUplink, sigma2_ul: float, p_max: float) -> tuple[float, PowerAllocation]:
    """Optimized uplink sum rate under per-terminal power caps.

    Coordinate ascent from full power; the rate is never below the
    full-power value.
    """
    rate, p = kernels.ul_optimize(np.ascontiguousarray(eff.h_eff), np.ascontiguousarray(eff.e2),
                                  float(sigma2_ul), float(p_max))
    return max(0.0, float(rate)), PowerAllocation(np.asarray(p), "ul")


def ul_rate_at(eff: EffectiveUplink, sigma2_ul: float, powers: np.ndarray) -> float:
    """Uplink rate for a fixed power vector."""
    return max(0.0, kernels.ul_rate(np.ascontiguousarray(eff.h_eff), np.ascontiguousarray(eff.e2),
                                    float(sigma2_ul), np.asarray(powers, dtype=float)))


# --- downlink, spatial multiplexing -------------------------------------------

def dl_effective_params(h_dl: np.ndarray, coeff_variance: float, sigma2_ut: float,
                        sigma2_bs: float) -> EffectiveDownlink:
    h = _check_channel(h_dl)
    scale, eut2, ebs2 = dl_scale(coeff_variance, sigma2_ut, sigma2_bs)
    return EffectiveDownlink(h * scale, np.full(h.shape, math.sqrt(eut2)), np.full(h.shape, math.sqrt(ebs2)))


def dl_sum_rate(eff: EffectiveDownlink, sigma2_dl: float, p_tot: float) -> tuple[float, PowerAllocation]:
    """Downlink sum rate via the dual uplink, maximized over dual powers with ``sum p <= p_tot``."""
    rate, p = kernels.dl_optimize(np.ascontiguousarray(eff.h_eff), np.ascontiguousarray(eff.e_ut ** 2),
                                  np.ascontiguousarray(eff.e_bs ** 2), float(sigma2_dl), float(p_tot))
    return max(0.0, float(rate)), PowerAllocation(np.asarray(p), "dl")


def dl_rate_at(eff: EffectiveDownlink, sigma2_dl: float, powers: np.ndarray) -> float:
    """Dual-uplink rate for a fixed dual power vector."""
    return max(0.0, kernels.dl_rate(np.ascontiguousarray(eff.h_eff), np.ascontiguousarray(eff.e_ut ** 2),
                                    np.ascontiguousarray(eff.e_bs ** 2), float(sigma2_dl),
                                    np.asarray(powers, dtype=float)))


# --- downlink, TDM --------------------------------------------------------------

def tdm_effective(h_dl: np.ndarray, coeff_variance: float, sigma2_ut_tdm: float, p_tot: float) -> TdmEffective:
    h = _check_channel(h_dl)
    n_bs = h.shape[0]
    amp, s2 = tdm_scale(coeff_variance, sigma2_ut_tdm, p_tot)
    # h_k^T 1: coherent sum over BS antennas for terminal k
    h_eff = math.sqrt(p_tot / n_bs) * h.sum(axis=0) * amp
    return TdmEffective(h_eff, np.full(h.shape[1], s2))


def tdm_sum_rate(h_dl: np.ndarray, sigma2_ut_tdm: float, sigma2_dl: float, p_tot: float,
                 coeff_variance: float = 1.0) -> float:
    """Average rate of serving one terminal at a time with an all-ones random beam."""
    eff = tdm_effective(h_dl, coeff_variance, sigma2_ut_tdm, p_tot)
    snr = np.abs(eff.h_eff) ** 2 / (eff.sigma2_tdm + sigma2_dl)
    return float(np.mean(np.log2(1.0 + snr)))


# --- Monte Carlo batches ----------------------------------------------------------

def ul_rates_batch(h_ul: np.ndarray, coeff_variance: float, sigma2_ul_bs: float,
                   budget: LinkBudget) -> np.ndarray:
    """Per-realization optimized UL rates for a stack ``(R, N_BS, K)`` of channels."""
    scale, e2 = ul_scale(coeff_variance, sigma2_ul_bs)
    h = np.ascontiguousarray(np.asarray(h_ul, dtype=complex) * scale)
    rates, _ = kernels.ul_optimize_batch(h, np.full(h.shape[1:], e2), budget.sigma2_ul, budget.p_max_ul)
    return np.clip(np.asarray(rates), 0.0, None)


def dl_rates_batch(h_dl: np.ndarray, coeff_variance: float, sigma2_ut: float, sigma2_bs: float,
                   budget: LinkBudget) -> np.ndarray:
    """Per-realization optimized spatial-multiplexing DL rates."""
    scale, eut2, ebs2 = dl_scale(coeff_variance, sigma2_ut, sigma2_bs)
    h = np.asarray(h_dl, dtype=complex)
    if scale == 0.0:
        # nothing controllable reaches the terminals
        return np.zeros(h.shape[0])
    h = np.ascontiguousarray(h * scale)
    shape = h.shape[1:]
    rates, _ = kernels.dl_optimize_batch(h, np.full(shape, eut2), np.full(shape, ebs2),
                                         budget.sigma2_dl, budget.p_tot_dl)
    return np.clip(np.asarray(rates), 0.0, None)


def tdm_rates_batch(h_dl: np.ndarray, coeff_variance: float, sigma2_ut_tdm: float,
                    budget: LinkBudget) -> np.ndarray:
    h = np.asarray(h_dl, dtype=complex)
    n_bs = h.shape[1]
    amp, s2 = tdm_scale(coeff_variance, sigma2_ut_tdm, budget.p_tot_dl)
    g = (budget.p_tot_dl / n_bs) * np.abs(h.sum(axis=1)) ** 2 * amp * amp
    return np.mean(np.log2(1.0 + g / (s2 + budget.sigma2_dl)), axis=1)
