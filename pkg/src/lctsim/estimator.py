"""Pilot LMMSE estimation, the check-satisfaction metric, and its ascent.

The metric is the LLR of "every parity check is satisfied", accumulated
check by check: each row contributes its tanh-product satisfied-probability,
optionally feeds BP-style updates back into the per-bit conditional LLRs,
and multiplies into the running chain. Coordinate ascent maximizes that
metric over one channel-matrix entry at a time on a sign-symmetric grid
whose step is step_scale * sigma^2 / n_pilot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from lctsim.detector import _approx_kernel, _detect_kernel, max_log_detect
from lctsim.ldpc import ParityCheckMatrix
from lctsim.llrops import LLR_CLAMP
from lctsim.modem import VectorAlphabet


def lmmse(y_p: np.ndarray, x_p: np.ndarray, noise_var: float) -> np.ndarray:
    """Closed-form pilot estimate Y_p X_p^H (X_p X_p^H + noise_var I)^{-1}."""
    y_p = np.atleast_2d(np.asarray(y_p, dtype=np.complex128))
    x_p = np.atleast_2d(np.asarray(x_p, dtype=np.complex128))
    if y_p.shape[1] != x_p.shape[1]:
        raise ValueError(f"pilot length mismatch: {y_p.shape[1]} != {x_p.shape[1]}")
    n_tx = x_p.shape[0]
    gram = x_p @ x_p.conj().T + noise_var * np.eye(n_tx)
    rhs = y_p @ x_p.conj().T
    return np.linalg.solve(gram.T, rhs.T).T


@numba.njit(cache=True)
def _metric_kernel(llrs, indptr, indices, do_update, clamp, tc, pre, suf, upd, floor):
    # Works in the tanh domain: tc[j] = tanh(cond_j / 2), so each row's
    # satisfied-probability is (1 + prod tc) / 2 without transcendentals,
    # and the conditional update follows the tanh addition law. The chain
    # is carried as the pair (P, Q) = (P(all rows so far), 1 - P), which
    # stays cancellation-free on both ends; once Q dwarfs P the remaining
    # rows append exactly as log(p_row) terms.
    #
    # The running value never increases as rows accumulate, so it bounds
    # the result from above; once it drops below ``floor`` the final value
    # cannot reach it and the partial bound is returned early (grid-search
    # callers pass their incumbent as floor, which cannot change the
    # argmax or its tie-breaks).
    n = llrs.shape[0]
    half_clamp = 0.5 * clamp
    tclamp = math.tanh(half_clamp)
    for j in range(n):
        v = 0.5 * llrs[j]
        if v > half_clamp:
            v = half_clamp
        elif v < -half_clamp:
            v = -half_clamp
        tc[j] = math.tanh(v)
    m = indptr.shape[0] - 1
    p_all = 1.0
    q_all = 0.0
    tail = 0.0
    tail_base = 0.0
    in_tail = False
    f_floor = math.exp(floor) if floor > -7.0e2 else 0.0
    for i in range(m):
        s = indptr[i]
        w = indptr[i + 1] - s
        full = 1.0
        for t in range(w):
            full *= tc[indices[s + t]]
        if do_update:
            acc = 1.0
            for t in range(w):
                pre[t] = acc
                acc *= tc[indices[s + t]]
            acc = 1.0
            for t in range(w - 1, -1, -1):
                suf[t] = acc
                acc *= tc[indices[s + t]]
            for t in range(w):
                loo = pre[t] * suf[t]
                tcv = tc[indices[s + t]]
                nv = (tcv + loo) / (1.0 + tcv * loo)
                if nv > tclamp:
                    nv = tclamp
                elif nv < -tclamp:
                    nv = -tclamp
                upd[t] = nv
            for t in range(w):
                tc[indices[s + t]] = upd[t]
        pz = 0.5 * (1.0 + full)
        qz = 0.5 * (1.0 - full)
        if in_tail or q_all > 1e30 * p_all:
            if not in_tail:
                in_tail = True
                tail_base = math.log(p_all / q_all)
            tail += math.log(pz)
            if tail_base + tail < floor:
                return tail_base + tail
        else:
            q_all = q_all + p_all * qz
            p_all = p_all * pz
            if p_all < q_all * f_floor:
                return math.log(p_all / q_all)
    if in_tail:
        return tail_base + tail
    return math.log(p_all / q_all)


def check_metric(
    llrs,
    pcm: ParityCheckMatrix,
    update: bool = True,
    clamp: float = LLR_CLAMP,
    return_cond: bool = False,
):
    """LLR that all checks hold, given per-bit LLRs.

    ``update=True`` runs the conditional-LLR feedback after every row
    (bits outside the row keep their value); ``update=False`` scores each
    row against the raw inputs. Exact for codes whose rows share no
    columns; an approximation otherwise.
    """
    l = np.ascontiguousarray(llrs, dtype=np.float64)
    if l.shape != (pcm.n_cols,):
        raise ValueError(f"expected {pcm.n_cols} LLRs, got shape {l.shape}")
    tc = np.empty(pcm.n_cols)
    w = pcm.max_row_weight
    chain = _metric_kernel(
        l, pcm._indptr, pcm._indices, update, clamp,
        tc, np.empty(w), np.empty(w), np.empty(w), -np.inf,
    )
    if return_cond:
        return float(chain), 2.0 * np.arctanh(tc)
    return float(chain)


@dataclass(frozen=True)
class AscentParams:
    """Grid-search settings for the channel fine-tuning.

    variant selects the receiver flavor: "no_update" re-detects per
    candidate and scores rows without LLR feedback, "update" re-detects
    per candidate with feedback, "update_approx" detects once per outer
    iteration and recomputes candidate LLRs from the cache.
    """

    step_scale: float = 1.0
    grid_halfwidth: int = 4
    eps: float = 1e-9
    max_outer: int = 10
    variant: str = "update_approx"

    def __post_init__(self):
        if self.step_scale <= 0:
            raise ValueError("step_scale must be positive")
        if self.grid_halfwidth < 1:
            raise ValueError("grid_halfwidth must be >= 1")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.variant not in ("no_update", "update", "update_approx"):
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass
class AscentStats:
    """Outer-iteration count, metric evaluations, and per-iteration trace."""

    n_outer: int
    n_metric_evals: int
    metric_trace: list = field(default_factory=list)  # (start, end) per outer iteration
    converged: bool = False


@numba.njit(cache=True)
def _sweep_approx(
    x0, x1, p, q, base_llrs, noise_var, offsets, indptr, indices, do_update, clamp,
    ceiling, delta,
):
    n = base_llrs.shape[0]
    n_rx = p.shape[1]
    n_tx = x0.shape[1]
    wmax = 0
    for i in range(indptr.shape[0] - 1):
        w = indptr[i + 1] - indptr[i]
        if w > wmax:
            wmax = w
    tc = np.empty(n)
    pre = np.empty(wmax)
    suf = np.empty(wmax)
    upd = np.empty(wmax)
    cand = np.empty(n)

    inc = _metric_kernel(
        base_llrs, indptr, indices, do_update, clamp, tc, pre, suf, upd, -np.inf
    )
    start = inc
    n_evals = 1
    if inc >= ceiling:
        # every LLR is at the clamp and all checks agree: the metric sits at
        # its global maximum, so no candidate can strictly improve it
        return start, inc, n_evals
    n_off = offsets.shape[0]
    for r in range(n_rx):
        for c in range(n_tx):
            best_re = 0.0
            best_m = inc
            for oi in range(n_off):
                h = complex(offsets[oi], 0.0)
                _approx_kernel(base_llrs, p, q, x0, x1, h, r, c, noise_var, cand)
                mval = _metric_kernel(
                    cand, indptr, indices, do_update, clamp, tc, pre, suf, upd, best_m
                )
                n_evals += 1
                if mval > best_m:
                    best_m = mval
                    best_re = offsets[oi]
            best_h = complex(best_re, 0.0)
            for oi in range(n_off):
                h = complex(best_re, offsets[oi])
                _approx_kernel(base_llrs, p, q, x0, x1, h, r, c, noise_var, cand)
                mval = _metric_kernel(
                    cand, indptr, indices, do_update, clamp, tc, pre, suf, upd, best_m
                )
                n_evals += 1
                if mval > best_m:
                    best_m = mval
                    best_h = h
            if best_h != 0.0 + 0.0j:
                _approx_kernel(base_llrs, p, q, x0, x1, best_h, r, c, noise_var, cand)
                for i in range(n):
                    base_llrs[i] = cand[i]
                for i in range(n):
                    p[i, r] -= best_h * x0[i, c]
                    q[i, r] -= best_h * x1[i, c]
                delta[r, c] = best_h
                inc = best_m
    return start, inc, n_evals


@numba.njit(cache=True)
def _perturbed_llrs(y_d, hv, vectors, dist_other, bit0, bit1, h, r, c, noise_var, llrs):
    # Full re-detection under the current sweep channel plus h*E_{r,c},
    # reusing the unperturbed receive rows of the distance table.
    n_d = y_d.shape[1]
    n_vec = vectors.shape[1]
    n_bpu = bit0.shape[0]
    half = bit0.shape[1]
    dist = np.empty(n_vec)
    for t in range(n_d):
        for v in range(n_vec):
            d = y_d[r, t] - hv[r, v] - h * vectors[c, v]
            dist[v] = dist_other[t, v] + d.real * d.real + d.imag * d.imag
        for b in range(n_bpu):
            d0 = dist[bit0[b, 0]]
            for s in range(1, half):
                dv = dist[bit0[b, s]]
                if dv < d0:
                    d0 = dv
            d1 = dist[bit1[b, 0]]
            for s in range(1, half):
                dv = dist[bit1[b, s]]
                if dv < d1:
                    d1 = dv
            llrs[t * n_bpu + b] = (d1 - d0) / noise_var


@numba.njit(cache=True)
def _sweep_exact(
    y_d, h_base, vectors, bit0, bit1, noise_var, offsets, indptr, indices, do_update, clamp,
    ceiling, delta,
):
    n_rx, n_d = y_d.shape
    n_tx = h_base.shape[1]
    n_vec = vectors.shape[1]
    n_bpu = bit0.shape[0]
    n = n_d * n_bpu
    wmax = 0
    for i in range(indptr.shape[0] - 1):
        w = indptr[i + 1] - indptr[i]
        if w > wmax:
            wmax = w
    tc = np.empty(n)
    pre = np.empty(wmax)
    suf = np.empty(wmax)
    upd = np.empty(wmax)
    llrs = np.empty(n)
    sx0 = np.empty((n, n_tx), dtype=np.complex128)
    sx1 = np.empty((n, n_tx), dtype=np.complex128)
    sp = np.empty((n, n_rx), dtype=np.complex128)
    sq = np.empty((n, n_rx), dtype=np.complex128)
    hv = np.empty((n_rx, n_vec), dtype=np.complex128)
    dist_other = np.empty((n_d, n_vec))

    h_cur = h_base.copy()
    _detect_kernel(y_d, h_cur, vectors, bit0, bit1, noise_var, llrs, sx0, sx1, sp, sq)
    inc = _metric_kernel(
        llrs, indptr, indices, do_update, clamp, tc, pre, suf, upd, -np.inf
    )
    start = inc
    n_evals = 1
    if inc >= ceiling:
        return start, inc, n_evals
    n_off = offsets.shape[0]
    for r in range(n_rx):
        for c in range(n_tx):
            for rr in range(n_rx):
                for v in range(n_vec):
                    acc = 0.0 + 0.0j
                    for cc in range(n_tx):
                        acc += h_cur[rr, cc] * vectors[cc, v]
                    hv[rr, v] = acc
            for t in range(n_d):
                for v in range(n_vec):
                    acc2 = 0.0
                    for rr in range(n_rx):
                        if rr != r:
                            d = y_d[rr, t] - hv[rr, v]
                            acc2 += d.real * d.real + d.imag * d.imag
                    dist_other[t, v] = acc2
            best_re = 0.0
            best_m = inc
            for oi in range(n_off):
                h = complex(offsets[oi], 0.0)
                _perturbed_llrs(
                    y_d, hv, vectors, dist_other, bit0, bit1, h, r, c, noise_var, llrs
                )
                mval = _metric_kernel(
                    llrs, indptr, indices, do_update, clamp, tc, pre, suf, upd, best_m
                )
                n_evals += 1
                if mval > best_m:
                    best_m = mval
                    best_re = offsets[oi]
            best_h = complex(best_re, 0.0)
            for oi in range(n_off):
                h = complex(best_re, offsets[oi])
                _perturbed_llrs(
                    y_d, hv, vectors, dist_other, bit0, bit1, h, r, c, noise_var, llrs
                )
                mval = _metric_kernel(
                    llrs, indptr, indices, do_update, clamp, tc, pre, suf, upd, best_m
                )
                n_evals += 1
                if mval > best_m:
                    best_m = mval
                    best_h = h
            if best_h != 0.0 + 0.0j:
                h_cur[r, c] = h_cur[r, c] + best_h
                delta[r, c] = best_h
                inc = best_m
    return start, inc, n_evals


def _grid_offsets(step: float, halfwidth: int) -> np.ndarray:
    """Nonzero grid offsets in tie-break order: ascending |h|, negative first."""
    offs = step * np.arange(-halfwidth, halfwidth + 1, dtype=np.float64)
    order = np.lexsort((offs, np.abs(offs)))
    return offs[order][1:]


def coordinate_ascent(
    y_d: np.ndarray,
    h_hat: np.ndarray,
    pcm: ParityCheckMatrix,
    va: VectorAlphabet,
    noise_var: float,
    n_pilot: int,
    params: AscentParams = AscentParams(),
) -> tuple[np.ndarray, AscentStats]:
    """Fine-tune a channel estimate by maximizing the check-satisfaction LLR.

    Every outer iteration detects under the current estimate, then sweeps
    the matrix entries row-major. Per entry, real offsets on the grid are
    searched first, then imaginary offsets around the chosen real one; the
    incumbent h = 0 stays unless a candidate strictly beats it, so ties
    favor the smallest |h| and the metric never decreases within an
    iteration. Stops when ||delta||_F <= eps or after max_outer rounds.

    The caller is expected to run one final detection under the returned
    estimate and decode from those LLRs.
    """
    y_d = np.ascontiguousarray(y_d, dtype=np.complex128)
    h_t = np.array(h_hat, dtype=np.complex128)
    sigma2 = noise_var / 2.0
    step = params.step_scale * sigma2 / n_pilot
    offsets = _grid_offsets(step, params.grid_halfwidth)
    do_update = params.variant != "no_update"
    clamp = LLR_CLAMP
    # metric value when every LLR is clamped and all checks agree: the
    # global maximum, used to shortcut fully saturated frames
    ceiling = check_metric(np.full(pcm.n_cols, clamp), pcm, update=do_update, clamp=clamp)

    stats = AscentStats(n_outer=0, n_metric_evals=0)
    for outer in range(1, params.max_outer + 1):
        delta = np.zeros_like(h_t)
        if params.variant == "update_approx":
            _, cache = max_log_detect(y_d, h_t, noise_var, va)
            start, end, evals = _sweep_approx(
                cache.x0, cache.x1, cache.p, cache.q, cache.base_llrs,
                noise_var, offsets, pcm._indptr, pcm._indices, do_update, clamp,
                ceiling, delta,
            )
        else:
            start, end, evals = _sweep_exact(
                y_d, h_t, va.vectors, va.bit0_sets, va.bit1_sets,
                noise_var, offsets, pcm._indptr, pcm._indices, do_update, clamp,
                ceiling, delta,
            )
        h_t += delta
        stats.n_outer = outer
        stats.n_metric_evals += evals
        stats.metric_trace.append((start, end))
        if np.linalg.norm(delta) <= params.eps:
            stats.converged = True
            break
    return h_t, stats
