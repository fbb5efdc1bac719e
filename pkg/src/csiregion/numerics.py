"""Small dense complex-matrix kernels and special functions.

Everything here works on plain numpy arrays; matrices never exceed one
PRB pair (a few hundred rows), so dense LAPACK calls are used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InvalidArgument, NumericFailure

#: Relative tolerance for the Hermitian check.
HERMITIAN_TOL = 1e-12
#: Eigenvalues above ``-PSD_CLIP_TOL * ||A||_2`` are clipped to zero.
PSD_CLIP_TOL = 1e-10


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order with matching orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def bessel_j0(x):
    """Zero-th order Bessel function of the first kind.

    Accepts scalars or arrays. Raises :class:`InvalidArgument` on NaN or inf.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument("bessel_j0 requires finite input")
    out = special.j0(arr)
    return float(out) if out.ndim == 0 else out


def sinc_unnormalized(x):
    """si(x) = sin(x)/x with si(0) = 1."""
    # np.sinc is the normalized sin(pi x)/(pi x)
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol * scale)


def _fix_phase(u: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column made real nonnegative;
    # first occurrence wins on ties so bases are reproducible
    idx = np.argmax(np.abs(u), axis=0)
    pivots = u[idx, np.arange(u.shape[1])]
    mags = np.abs(pivots)
    phase = np.where(mags > 0, pivots / np.where(mags > 0, mags, 1.0), 1.0)
    return u * phase.conj()


def hermitian_eig(a: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Ties keep LAPACK's ascending order reversed stably, i.e. the first
    occurring eigenvalue of a tied group stays first. Each eigenvector is
    phase-normalized so that its largest-magnitude entry is real and
    nonnegative.
    """
    a = np.asarray(a)
    if not is_hermitian(a):
        raise InvalidArgument("matrix is not Hermitian within tolerance")
    herm = 0.5 * (a + a.conj().T)
    try:
        w, v = np.linalg.eigh(herm)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericFailure(str(exc)) from exc
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order], _fix_phase(v[:, order]))


def clip_psd(a: np.ndarray, tol: float = PSD_CLIP_TOL) -> np.ndarray:
    """Project a Hermitian matrix onto the PSD cone by zeroing tiny negative eigenvalues.

    Eigenvalues below ``-tol * spectral_norm`` are rejected.
    """
    dec = hermitian_eig(a)
    lam = dec.eigenvalues
    norm = float(np.max(np.abs(lam), initial=0.0))
    if norm > 0 and lam[-1] < -tol * norm:
        raise InvalidArgument(f"matrix is indefinite: eigenvalue {lam[-1]:.3e} below clipping tolerance")
    lam = np.clip(lam, 0.0, None)
    return EigenDecomposition(lam, dec.eigenvectors).reconstruct()


def hermitian_solve(a: np.ndarray, b: np.ndarray, rcond: float = 0.0) -> np.ndarray:
    """Solve ``a x = b`` for Hermitian ``a`` through its eigendecomposition.

    With ``rcond > 0`` eigenvalues below ``rcond * max|eigenvalue|`` are
    treated as zero (pseudo-inverse). With ``rcond == 0`` a zero eigenvalue
    raises :class:`NumericFailure`.
    """
    dec = hermitian_eig(a)
    lam = dec.eigenvalues
    u = dec.eigenvectors
    top = float(np.max(np.abs(lam), initial=0.0))
    if rcond > 0:
        keep = np.abs(lam) > rcond * top
    else:
        keep = np.ones(lam.shape, dtype=bool)
        if top == 0 or np.min(np.abs(lam)) <= np.finfo(float).eps * top * lam.size:
            raise NumericFailure("singular Hermitian system")
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / lam[keep]
    return (u * inv) @ (u.conj().T @ b)


def hermitian_pinv(a: np.ndarray, rcond: float = PSD_CLIP_TOL) -> np.ndarray:
    """Thresholded pseudo-inverse of a Hermitian matrix."""
    return hermitian_solve(a, np.eye(a.shape[0], dtype=np.result_type(a, float)), rcond=rcond)


def sample_correlated(cov: np.ndarray, count: int, seed: int | np.random.Generator) -> np.ndarray:
    """Draw ``count`` zero-mean circularly-symmetric Gaussian vectors with covariance ``cov``.

    Returns an array of shape ``(count, n)``. Slightly negative eigenvalues
    (above the clipping tolerance) are set to zero; the draw is a pure
    function of ``seed``.
    """
    cov = np.asarray(cov)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise InvalidArgument("covariance must be square")
    if count < 0:
        raise InvalidArgument("count must be nonnegative")
    n = cov.shape[0]
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dec = hermitian_eig(cov)
    lam = dec.eigenvalues
    norm = float(np.max(np.abs(lam), initial=0.0))
    if norm > 0 and lam[-1] < -PSD_CLIP_TOL * norm:
        raise InvalidArgument(f"covariance eigenvalue {lam[-1]:.3e} below clipping tolerance")
    factor = dec.eigenvectors * np.sqrt(np.clip(lam, 0.0, None))
    z = (rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))) / np.sqrt(2.0)
    return z @ factor.T
