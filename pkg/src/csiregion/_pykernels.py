"""Pure-Python rate kernels; reference behaviour for the compiled backend.

All functions take *effective* channels (``N_BS x K``) and per-entry
estimation-noise powers ``e2 = |e_bar|^2`` of the same shape.
"""
from __future__ import annotations

import math

import numpy as np

LOG2 = math.log(2.0)
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
N_SCAN = 9
GOLDEN_XTOL = 1e-10


def ul_rate(h: np.ndarray, e2: np.ndarray, sigma2: float, p: np.ndarray) -> float:
    """``log2 |I + Phi^-1 H P H^H|`` with ``Phi = sigma^2 I + diag(e2 @ p)``."""
    phi = sigma2 + e2 @ p
    m = (h * p) @ h.conj().T
    m[np.diag_indices_from(m)] += phi
    sign, logdet = np.linalg.slogdet(m)
    return float((logdet - np.sum(np.log(phi))) / LOG2)


def dl_rate(h: np.ndarray, eut2: np.ndarray, ebs2: np.ndarray, sigma2: float, p: np.ndarray) -> float:
    """Dual-uplink sum rate: ``sum_k log2(1 + p_k h_k^H D_k^-1 h_k)``.

    ``D_k`` collects inter-terminal interference, the terminal-side CSI noise
    of all terminals, the BS-side CSI noise of the other terminals and
    receiver noise.
    """
    n, k = h.shape
    total = 0.0
    ut = eut2 @ p
    for i in range(k):
        if p[i] <= 0.0:
            continue
        mask = np.ones(k, dtype=bool)
        mask[i] = False
        hk = h[:, mask]
        d = (hk * p[mask]) @ hk.conj().T
        d[np.diag_indices(n)] += sigma2 + ut + ebs2[:, mask] @ p[mask]
        c = np.linalg.cholesky(d)
        y = np.linalg.solve(c, h[:, i])
        total += math.log1p(p[i] * float(np.real(np.vdot(y, y)))) / LOG2
    return total


def line_max(f, lo: float, hi: float) -> tuple[float, float]:
    """Maximize ``f`` on ``[lo, hi]``: coarse scan, then golden section around the best node."""
    if hi <= lo:
        return lo, f(lo)
    step = (hi - lo) / (N_SCAN - 1)
    xs = [lo + i * step for i in range(N_SCAN)]
    xs[-1] = hi
    fs = [f(x) for x in xs]
    b = 0
    for i in range(1, N_SCAN):
        if fs[i] > fs[b]:
            b = i
    a = xs[b - 1] if b > 0 else xs[0]
    c = xs[b + 1] if b < N_SCAN - 1 else xs[-1]
    x1 = c - INV_PHI * (c - a)
    x2 = a + INV_PHI * (c - a)
    f1, f2 = f(x1), f(x2)
    xtol = GOLDEN_XTOL * max(1.0, hi - lo)
    while c - a > xtol:
        if f1 >= f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - INV_PHI * (c - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (c - a)
            f2 = f(x2)
    xg, fg = (x1, f1) if f1 >= f2 else (x2, f2)
    if fg > fs[b]:
        return xg, fg
    return xs[b], fs[b]


def ul_optimize(h, e2, sigma2, pmax, tol=1e-7, max_sweeps=200):
    """Coordinate ascent over per-terminal powers in ``[0, pmax]`` from full power."""
    k = h.shape[1]
    p = np.full(k, float(pmax))
    best = ul_rate(h, e2, sigma2, p)
    for _ in range(max_sweeps):
        start = best
        for i in range(k):
            def f(t, i=i):
                q = p.copy()
                q[i] = t
                return ul_rate(h, e2, sigma2, q)
            x, fx = line_max(f, 0.0, float(pmax))
            if fx > best:
                p[i] = x
                best = fx
        if best - start < tol:
            break
    return best, p


def _dl_ascent(h, eut2, ebs2, sigma2, p, tol, max_sweeps):
    k = p.size
    best = dl_rate(h, eut2, ebs2, sigma2, p)
    for _ in range(max_sweeps):
        start = best
        for i in range(k):
            for j in range(i + 1, k):
                s = p[i] + p[j]

                def f(t, i=i, j=j, s=s):
                    q = p.copy()
                    q[i] = t
                    q[j] = s - t
                    return dl_rate(h, eut2, ebs2, sigma2, q)
                x, fx = line_max(f, 0.0, s)
                if fx > best:
                    p[i] = x
                    p[j] = s - x
                    best = fx
        if best - start < tol:
            break
    return best, p


def dl_optimize(h, eut2, ebs2, sigma2, ptot, tol=1e-7, max_sweeps=200):
    """Multi-start pairwise power transfers on the face ``sum p = ptot``.

    Scaling all dual powers up raises every SINR, so the maximum lies on
    that face; starts are the uniform split and each vertex.
    """
    k = h.shape[1]
    starts = [np.full(k, ptot / k)]
    for i in range(k):
        v = np.zeros(k)
        v[i] = ptot
        starts.append(v)
    best, best_p = -math.inf, starts[0]
    for p0 in starts:
        r, p = _dl_ascent(h, eut2, ebs2, sigma2, p0.copy(), tol, max_sweeps)
        if r > best:
            best, best_p = r, p
    return best, best_p


def ul_optimize_batch(h, e2, sigma2, pmax, tol=1e-7, max_sweeps=200):
    r = h.shape[0]
    rates = np.empty(r)
    powers = np.empty((r, h.shape[2]))
    for n in range(r):
        rates[n], powers[n] = ul_optimize(h[n], e2, sigma2, pmax, tol, max_sweeps)
    return rates, powers


def dl_optimize_batch(h, eut2, ebs2, sigma2, ptot, tol=1e-7, max_sweeps=200):
    r = h.shape[0]
    rates = np.empty(r)
    powers = np.empty((r, h.shape[2]))
    for n in range(r):
        rates[n], powers[n] = dl_optimize(h[n], eut2, ebs2, sigma2, ptot, tol, max_sweeps)
    return rates, powers
