"""Binary LDPC codes: alist I/O, GF(2) systematic encoding, BP decoding.

The parity-check matrix is kept as row/column adjacency (supports). The
decoder is flooding belief propagation with the tanh-product check rule,
compiled with numba for the Monte Carlo harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np


class AlistError(ValueError):
    """Raised for malformed alist text; the message names the offending line."""


class ParityCheckMatrix:
    """Sparse binary parity-check matrix stored as per-row supports.

    Attributes:
        n_cols: code length N.
        n_rows: number of checks M = N - K.
        row_supports: list of int32 arrays, strictly increasing column
            indices of the ones in each row.
        col_supports: transpose adjacency (row indices per column).
        max_row_weight: largest row weight.
    """

    def __init__(self, n_cols: int, row_supports):
        self.n_cols = int(n_cols)
        self.n_rows = len(row_supports)
        self.row_supports = [np.asarray(r, dtype=np.int32) for r in row_supports]
        for i, row in enumerate(self.row_supports):
            if row.size == 0:
                raise ValueError(f"row {i} has no entries")
            if row[0] < 0 or row[-1] >= self.n_cols:
                raise ValueError(f"row {i}: column index out of range [0, {self.n_cols})")
            if np.any(np.diff(row) <= 0):
                raise ValueError(f"row {i}: column indices not strictly increasing")
        self.max_row_weight = max(r.size for r in self.row_supports)
        cols = [[] for _ in range(self.n_cols)]
        for i, row in enumerate(self.row_supports):
            for j in row:
                cols[j].append(i)
        self.col_supports = [np.asarray(c, dtype=np.int32) for c in cols]
        # CSR view (check-major) for the numba kernels.
        self._indptr = np.zeros(self.n_rows + 1, dtype=np.int64)
        self._indptr[1:] = np.cumsum([r.size for r in self.row_supports])
        self._indices = np.concatenate(self.row_supports).astype(np.int32)

    @property
    def n_info(self) -> int:
        return self.n_cols - self.n_rows

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        for i, row in enumerate(self.row_supports):
            h[i, row] = 1
        return h

    def relabel_columns(self, new_index: np.ndarray) -> "ParityCheckMatrix":
        """Rename column j to new_index[j] (a bijection on [0, N)).

        Used to express the checks in interleaved bit order so the
        ascent metric can consume detector-order LLRs directly.
        """
        new_index = np.asarray(new_index)
        if sorted(new_index.tolist()) != list(range(self.n_cols)):
            raise ValueError("new_index is not a permutation of the columns")
        remapped = [np.sort(new_index[row]) for row in self.row_supports]
        return ParityCheckMatrix(self.n_cols, remapped)


def load_parity_alist(text: str) -> ParityCheckMatrix:
    """Parse alist text (MacKay format, 1-based indices, 0-padded lists)."""
    lines = text.splitlines()

    def ints(lineno: int, expect: int | None = None) -> list[int]:
        if lineno >= len(lines):
            raise AlistError(f"line {lineno + 1}: unexpected end of file")
        try:
            vals = [int(tok) for tok in lines[lineno].split()]
        except ValueError:
            raise AlistError(f"line {lineno + 1}: non-integer token") from None
        if expect is not None and len(vals) != expect:
            raise AlistError(f"line {lineno + 1}: expected {expect} values, got {len(vals)}")
        return vals

    header = ints(0)
    if len(header) != 2 or header[0] <= 0 or header[1] <= 0:
        raise AlistError("line 1: malformed header, expected 'N M'")
    n_cols, n_rows = header
    max_degs = ints(1)
    if len(max_degs) != 2:
        raise AlistError("line 2: expected 'max_col_deg max_row_deg'")
    max_col_deg, max_row_deg = max_degs
    col_degs = ints(2, n_cols)
    row_degs = ints(3, n_rows)
    if max(col_degs) != max_col_deg:
        raise AlistError(f"line 3: column degrees do not match stated maximum {max_col_deg}")
    if max(row_degs) != max_row_deg:
        raise AlistError(f"line 4: row degrees do not match stated maximum {max_row_deg}")

    def index_list(lineno: int, degree: int, bound: int, what: str) -> np.ndarray:
        vals = ints(lineno)
        nonzero = [v for v in vals if v != 0]
        if any(v == 0 for v in vals[:degree]) or len(nonzero) != degree:
            raise AlistError(f"line {lineno + 1}: expected {degree} nonzero {what} indices")
        arr = np.asarray(nonzero, dtype=np.int64)
        if arr.min() < 1 or arr.max() > bound:
            raise AlistError(f"line {lineno + 1}: {what} index out of range 1..{bound}")
        return arr - 1

    col_lists = [
        index_list(4 + j, col_degs[j], n_rows, "row") for j in range(n_cols)
    ]
    row_lists = [
        index_list(4 + n_cols + i, row_degs[i], n_cols, "column") for i in range(n_rows)
    ]

    # Cross-check the two adjacency copies.
    from_cols: list[list[int]] = [[] for _ in range(n_rows)]
    for j, rows in enumerate(col_lists):
        for i in rows:
            from_cols[i].append(j)
    for i in range(n_rows):
        if sorted(from_cols[i]) != sorted(row_lists[i].tolist()):
            raise AlistError(
                f"line {4 + n_cols + i + 1}: row adjacency disagrees with column lists"
            )

    return ParityCheckMatrix(n_cols, [np.sort(r) for r in row_lists])


def to_alist(pcm: ParityCheckMatrix) -> str:
    """Emit alist text (1-based, padded with 0) for a parity-check matrix."""
    max_col_deg = max(c.size for c in pcm.col_supports)
    out = [f"{pcm.n_cols} {pcm.n_rows}", f"{max_col_deg} {pcm.max_row_weight}"]
    out.append(" ".join(str(c.size) for c in pcm.col_supports))
    out.append(" ".join(str(r.size) for r in pcm.row_supports))
    for c in pcm.col_supports:
        padded = list(c + 1) + [0] * (max_col_deg - c.size)
        out.append(" ".join(str(v) for v in padded))
    for r in pcm.row_supports:
        padded = list(r + 1) + [0] * (pcm.max_row_weight - r.size)
        out.append(" ".join(str(v) for v in padded))
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class SystematicEncoder:
    """Encoder derived from one-time GF(2) elimination with column pivoting.

    Codeword layout: info bits sit at ``info_cols`` (in original column
    order), parity bits at ``pivot_cols`` and equal ``parity_map @ u mod 2``.
    """

    n_cols: int
    info_cols: np.ndarray
    pivot_cols: np.ndarray
    parity_map: np.ndarray  # (M, K) uint8

    @property
    def n_info(self) -> int:
        return self.info_cols.size

    def encode(self, info_bits) -> np.ndarray:
        u = np.asarray(info_bits, dtype=np.uint8)
        if u.shape != (self.n_info,):
            raise ValueError(f"expected {self.n_info} info bits, got shape {u.shape}")
        c = np.zeros(self.n_cols, dtype=np.uint8)
        c[self.info_cols] = u
        c[self.pivot_cols] = (self.parity_map @ u) & 1
        return c

    def extract_info(self, bits) -> np.ndarray:
        return np.asarray(bits, dtype=np.uint8)[self.info_cols]


def build_encoder(pcm: ParityCheckMatrix) -> SystematicEncoder:
    """Reduce H to RREF over GF(2) and read off the parity equations.

    Raises ValueError when H is rank deficient, reporting the rank found.
    """
    h = pcm.to_dense()
    m, n = h.shape
    pivot_cols = []
    r = 0
    for col in range(n):
        if r == m:
            break
        hit = np.nonzero(h[r:, col])[0]
        if hit.size == 0:
            continue
        pr = r + hit[0]
        if pr != r:
            h[[r, pr]] = h[[pr, r]]
        others = np.nonzero(h[:, col])[0]
        others = others[others != r]
        if others.size:
            h[others] ^= h[r]
        pivot_cols.append(col)
        r += 1
    if r < m:
        raise ValueError(f"parity-check matrix is rank deficient: rank {r} < {m} rows")
    pivot_cols = np.asarray(pivot_cols, dtype=np.int64)
    info_cols = np.setdiff1d(np.arange(n), pivot_cols)
    return SystematicEncoder(n, info_cols, pivot_cols, h[:, info_cols].copy())


def syndrome_ok(pcm: ParityCheckMatrix, bits) -> bool:
    """True iff every check row XORs to zero."""
    b = np.asarray(bits)
    if b.shape != (pcm.n_cols,):
        raise ValueError(f"expected {pcm.n_cols} bits, got shape {b.shape}")
    b = b.astype(np.uint8)
    return all(int(b[row].sum()) % 2 == 0 for row in pcm.row_supports)


@dataclass(frozen=True)
class BpConfig:
    """Decoder settings: iteration cap and message clamp."""

    max_iters: int = 15
    llr_clamp: float = 30.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.llr_clamp <= 0:
            raise ValueError("llr_clamp must be positive")


@numba.njit(cache=True)
def _syndrome_kernel(hard, indptr, indices):
    for i in range(indptr.shape[0] - 1):
        acc = 0
        for e in range(indptr[i], indptr[i + 1]):
            acc ^= hard[indices[e]]
        if acc:
            return False
    return True


@numba.njit(cache=True)
def _bp_kernel(llrs, indptr, indices, max_iters, clamp, hard):
    n = llrs.shape[0]
    m = indptr.shape[0] - 1
    n_edges = indices.shape[0]

    for j in range(n):
        hard[j] = 1 if llrs[j] < 0.0 else 0
    if _syndrome_kernel(hard, indptr, indices):
        return True, 0

    v2c = np.empty(n_edges)
    c2v = np.empty(n_edges)
    tot = np.empty(n)
    wmax = 0
    for i in range(m):
        w = indptr[i + 1] - indptr[i]
        if w > wmax:
            wmax = w
    th = np.empty(wmax)
    pre = np.empty(wmax)
    suf = np.empty(wmax)

    for e in range(n_edges):
        v = llrs[indices[e]]
        if v > clamp:
            v = clamp
        elif v < -clamp:
            v = -clamp
        v2c[e] = v

    for it in range(1, max_iters + 1):
        # check-node update via leave-one-out tanh products
        for i in range(m):
            s = indptr[i]
            w = indptr[i + 1] - s
            for t in range(w):
                th[t] = math.tanh(0.5 * v2c[s + t])
            acc = 1.0
            for t in range(w):
                pre[t] = acc
                acc *= th[t]
            acc = 1.0
            for t in range(w - 1, -1, -1):
                suf[t] = acc
                acc *= th[t]
            for t in range(w):
                c2v[s + t] = 2.0 * math.atanh(pre[t] * suf[t])
        # variable-node update
        for j in range(n):
            tot[j] = llrs[j]
        for e in range(n_edges):
            tot[indices[e]] += c2v[e]
        for e in range(n_edges):
            v = tot[indices[e]] - c2v[e]
            if v > clamp:
                v = clamp
            elif v < -clamp:
                v = -clamp
            v2c[e] = v
        for j in range(n):
            hard[j] = 1 if tot[j] < 0.0 else 0
        if _syndrome_kernel(hard, indptr, indices):
            return True, it
    return False, max_iters


def bp_decode(pcm: ParityCheckMatrix, llrs, cfg: BpConfig = BpConfig()):
    """Flooding BP with the tanh-product check rule.

    Returns (hard_bits, converged, iters_used). Decoding exits on the first
    iteration whose hard decisions satisfy every check; a noiseless input
    returns in 0 message rounds. Ties (LLR exactly 0) decide bit 0.
    """
    l = np.ascontiguousarray(llrs, dtype=np.float64)
    if l.shape != (pcm.n_cols,):
        raise ValueError(f"expected {pcm.n_cols} LLRs, got shape {l.shape}")
    hard = np.empty(pcm.n_cols, dtype=np.uint8)
    converged, iters = _bp_kernel(
        l, pcm._indptr, pcm._indices, cfg.max_iters, cfg.llr_clamp, hard
    )
    return hard, bool(converged), int(iters)
