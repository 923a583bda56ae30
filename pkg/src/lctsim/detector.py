"""Max-log MIMO bit-metric detection with an incremental recomputation cache.

For every data channel use the detector enumerates the full transmit-vector
table and emits, per bit, L = (min_{x: bit=1} ||y - Hx||^2 -
min_{x: bit=0} ||y - Hx||^2) / noise_var. The argmin vectors and their
residuals are cached so that LLRs under a rank-one channel perturbation
h * E_{r,c} can be recomputed exactly (argmins pinned) in O(N).
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from lctsim.modem import VectorAlphabet


@dataclass
class DetectionCache:
    """Per-bit argmin vectors, residuals, and the LLRs they produced.

    For bit i (detector order): ``x0[i]`` / ``x1[i]`` are the argmin
    transmit vectors over the bit-0 / bit-1 partitions, ``p[i]`` / ``q[i]``
    the residuals y - H_eff x against the channel the cache was built
    (and subsequently advanced) under.
    """

    x0: np.ndarray  # (N, n_tx) complex
    x1: np.ndarray
    p: np.ndarray  # (N, n_rx) complex
    q: np.ndarray
    base_llrs: np.ndarray  # (N,)
    noise_var: float


@numba.njit(cache=True)
def _detect_kernel(y, h, vectors, bit0, bit1, noise_var, llrs, x0, x1, p, q):
    n_rx, n_d = y.shape
    n_tx = h.shape[1]
    n_vec = vectors.shape[1]
    n_bpu = bit0.shape[0]
    half = bit0.shape[1]

    hv = np.empty((n_rx, n_vec), dtype=np.complex128)
    for r in range(n_rx):
        for v in range(n_vec):
            acc = 0.0 + 0.0j
            for c in range(n_tx):
                acc += h[r, c] * vectors[c, v]
            hv[r, v] = acc

    dist = np.empty(n_vec)
    for t in range(n_d):
        for v in range(n_vec):
            acc = 0.0
            for r in range(n_rx):
                d = y[r, t] - hv[r, v]
                acc += d.real * d.real + d.imag * d.imag
            dist[v] = acc
        for b in range(n_bpu):
            v0 = bit0[b, 0]
            d0 = dist[v0]
            for s in range(1, half):
                cand = bit0[b, s]
                if dist[cand] < d0:
                    d0 = dist[cand]
                    v0 = cand
            v1 = bit1[b, 0]
            d1 = dist[v1]
            for s in range(1, half):
                cand = bit1[b, s]
                if dist[cand] < d1:
                    d1 = dist[cand]
                    v1 = cand
            i = t * n_bpu + b
            llrs[i] = (d1 - d0) / noise_var
            for c in range(n_tx):
                x0[i, c] = vectors[c, v0]
                x1[i, c] = vectors[c, v1]
            for r in range(n_rx):
                p[i, r] = y[r, t] - hv[r, v0]
                q[i, r] = y[r, t] - hv[r, v1]


def max_log_detect(
    y_d: np.ndarray,
    h_est: np.ndarray,
    noise_var: float,
    va: VectorAlphabet,
) -> tuple[np.ndarray, DetectionCache]:
    """Bit LLRs for every data column plus the filled detection cache.

    Ties in the per-partition argmin go to the lowest vector index (the
    partitions are stored in increasing index order).
    """
    y_d = np.ascontiguousarray(y_d, dtype=np.complex128)
    h_est = np.ascontiguousarray(h_est, dtype=np.complex128)
    n_rx, n_d = y_d.shape
    if h_est.shape != (n_rx, va.n_tx):
        raise ValueError(f"channel shape {h_est.shape} != ({n_rx}, {va.n_tx})")
    n = n_d * va.n_bits_per_use
    llrs = np.empty(n)
    x0 = np.empty((n, va.n_tx), dtype=np.complex128)
    x1 = np.empty_like(x0)
    p = np.empty((n, n_rx), dtype=np.complex128)
    q = np.empty_like(p)
    _detect_kernel(
        y_d, h_est, va.vectors, va.bit0_sets, va.bit1_sets, noise_var, llrs, x0, x1, p, q
    )
    return llrs, DetectionCache(x0, x1, p, q, llrs.copy(), noise_var)


@numba.njit(cache=True)
def _approx_kernel(base, p, q, x0, x1, h, r, c, noise_var, out):
    n = base.shape[0]
    sigma2 = 0.5 * noise_var
    habs2 = h.real * h.real + h.imag * h.imag
    for i in range(n):
        cross = h * (p[i, r].conjugate() * x0[i, c] - q[i, r].conjugate() * x1[i, c])
        e0 = x0[i, c].real ** 2 + x0[i, c].imag ** 2
        e1 = x1[i, c].real ** 2 + x1[i, c].imag ** 2
        out[i] = base[i] + cross.real / sigma2 - habs2 * (e0 - e1) / noise_var


def approx_llrs(cache: DetectionCache, h: complex, row: int, col: int) -> np.ndarray:
    """LLRs under the perturbation h*E_{row,col}, argmins pinned to the cache.

    Exact (not approximate) given the pinned argmins; the only modeling
    assumption is that the true argmins do not move.
    """
    out = np.empty_like(cache.base_llrs)
    _approx_kernel(
        cache.base_llrs, cache.p, cache.q, cache.x0, cache.x1,
        complex(h), row, col, cache.noise_var, out,
    )
    return out


def advance_cache(cache: DetectionCache, h: complex, row: int, col: int) -> DetectionCache:
    """Fold an accepted perturbation into the cache (in place).

    Only row ``row`` of each residual changes since h*E_{row,col} has a
    single nonzero element; base LLRs become the pinned-argmin values.
    """
    h = complex(h)
    cache.base_llrs = approx_llrs(cache, h, row, col)
    cache.p[:, row] -= h * cache.x0[:, col]
    cache.q[:, row] -= h * cache.x1[:, col]
    return cache
