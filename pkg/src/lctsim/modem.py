"""Gray-labeled QPSK/16-QAM mapping, interleaving, and transmit-vector tables.

Bit-to-grid convention (pinned for reproducibility): channel use t, antenna
a carries bits [(t*n_tx + a)*k, (t*n_tx + a)*k + k), i.e. antenna-major
within a channel use. Symbol labels pack their k bits big-endian (first
bit is the most significant).

Label tables:
    QPSK  (b_I, b_Q) -> ((1 - 2 b_I) + 1j (1 - 2 b_Q)) / sqrt(2)
    16QAM (b0, b1, b2, b3) -> (level(b0, b1) + 1j level(b2, b3)) / sqrt(10)
          with Gray levels 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModulationScheme:
    """Unit-average-energy constellation with Gray bit labels.

    ``points[label]`` is the complex point whose bits are the big-endian
    binary expansion of ``label``.
    """

    name: str
    bits_per_symbol: int
    points: np.ndarray

    def __post_init__(self):
        if self.points.shape != (2**self.bits_per_symbol,):
            raise ValueError("alphabet size must be 2**bits_per_symbol")


def _qpsk_points() -> np.ndarray:
    pts = np.empty(4, dtype=np.complex128)
    for b_i in (0, 1):
        for b_q in (0, 1):
            pts[(b_i << 1) | b_q] = ((1 - 2 * b_i) + 1j * (1 - 2 * b_q)) / np.sqrt(2.0)
    return pts


_GRAY_LEVELS = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}


def _qam16_points() -> np.ndarray:
    pts = np.empty(16, dtype=np.complex128)
    for label in range(16):
        b0, b1, b2, b3 = (label >> 3) & 1, (label >> 2) & 1, (label >> 1) & 1, label & 1
        pts[label] = (_GRAY_LEVELS[(b0, b1)] + 1j * _GRAY_LEVELS[(b2, b3)]) / np.sqrt(10.0)
    return pts


QPSK = ModulationScheme("qpsk", 2, _qpsk_points())
QAM16 = ModulationScheme("qam16", 4, _qam16_points())

_SCHEMES = {"qpsk": QPSK, "qam16": QAM16}


def scheme_by_name(name: str) -> ModulationScheme:
    try:
        return _SCHEMES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown modulation {name!r}; choose from {sorted(_SCHEMES)}") from None


def modulate(bits, scheme: ModulationScheme, n_tx: int) -> np.ndarray:
    """Map a bit vector onto an (n_tx, n_uses) symbol grid."""
    b = np.asarray(bits, dtype=np.int64)
    k = scheme.bits_per_symbol
    if b.size % (k * n_tx) != 0:
        raise ValueError(f"bit count {b.size} not divisible by k*n_tx = {k * n_tx}")
    weights = 1 << np.arange(k - 1, -1, -1)
    labels = b.reshape(-1, k) @ weights
    return scheme.points[labels].reshape(-1, n_tx).T.copy()


def hard_demap(grid, scheme: ModulationScheme) -> np.ndarray:
    """Genie demapper: exact symbol lookup back to bits (inverse of modulate)."""
    sym = np.asarray(grid)
    n_tx = sym.shape[0]
    k = scheme.bits_per_symbol
    flat = sym.T.reshape(-1)
    labels = np.argmin(np.abs(flat[:, None] - scheme.points[None, :]), axis=1)
    bits = (labels[:, None] >> np.arange(k - 1, -1, -1)[None, :]) & 1
    return bits.reshape(-1).astype(np.uint8)


@dataclass(frozen=True)
class Interleaver:
    """Seeded random permutation applied to the coded bits before mapping."""

    permutation: np.ndarray
    seed: int

    def apply(self, v):
        v = np.asarray(v)
        return v[self.permutation]

    def invert(self, v):
        v = np.asarray(v)
        out = np.empty_like(v)
        out[self.permutation] = v
        return out


def make_interleaver(seed: int, n: int) -> Interleaver:
    if n < 1:
        raise ValueError("interleaver length must be >= 1")
    perm = np.random.default_rng(seed).permutation(n)
    return Interleaver(perm, seed)


@dataclass(frozen=True)
class VectorAlphabet:
    """All transmit vectors for one channel use, with per-bit partitions.

    ``vectors`` is (n_tx, n_vec) with vector v holding, on antenna a, the
    point whose label is digit a of v in base |alphabet| (antenna 0 most
    significant). Under big-endian labels this makes v the big-endian
    packing of the vector's k*n_tx bits, so index order is bit-string
    order. ``bit0_sets[b]`` / ``bit1_sets[b]`` list the vector indices
    whose b-th bit is 0 / 1; each splits the table exactly in half.
    """

    scheme: ModulationScheme
    n_tx: int
    vectors: np.ndarray
    bit0_sets: np.ndarray
    bit1_sets: np.ndarray

    @property
    def n_bits_per_use(self) -> int:
        return self.scheme.bits_per_symbol * self.n_tx


def build_vector_alphabet(
    scheme: ModulationScheme, n_tx: int, cap: int = 4096
) -> VectorAlphabet:
    """Enumerate alphabet**n_tx transmit vectors (guarded by ``cap``)."""
    q = scheme.points.size
    n_vec = q**n_tx
    if n_vec > cap:
        raise ValueError(f"vector table size {n_vec} exceeds cap {cap}")
    k = scheme.bits_per_symbol
    n_bits = k * n_tx
    idx = np.arange(n_vec)
    vectors = np.empty((n_tx, n_vec), dtype=np.complex128)
    for a in range(n_tx):
        digit = (idx // q ** (n_tx - 1 - a)) % q
        vectors[a] = scheme.points[digit]
    bit0 = np.empty((n_bits, n_vec // 2), dtype=np.int32)
    bit1 = np.empty((n_bits, n_vec // 2), dtype=np.int32)
    for b in range(n_bits):
        bit_of = (idx >> (n_bits - 1 - b)) & 1
        bit0[b] = idx[bit_of == 0]
        bit1[b] = idx[bit_of == 1]
    return VectorAlphabet(scheme, n_tx, vectors, bit0, bit1)
