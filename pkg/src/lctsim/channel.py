"""Rayleigh block fading, AWGN, SNR conversion, and pilot construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

from lctsim.modem import ModulationScheme


@dataclass(frozen=True)
class SystemConfig:
    """Frame geometry and noise level.

    ``noise_var`` is the total complex noise variance per entry (the paper
    convention writes it 2 sigma^2); per-dimension variance is half that.
    """

    n_tx: int
    n_rx: int
    n_pilot: int
    n_data: int
    noise_var: float
    es: float = 1.0

    def __post_init__(self):
        if min(self.n_tx, self.n_rx, self.n_pilot, self.n_data) < 1:
            raise ValueError("dimensions must be positive")
        if self.noise_var <= 0:
            raise ValueError("noise_var must be positive")

    @property
    def n_uses(self) -> int:
        return self.n_pilot + self.n_data


def snr_db_to_noise_var(snr_db: float, n_tx: int, n_rx: int, es: float = 1.0) -> float:
    """Total complex noise variance for SNR defined as es*n_tx / (noise_var*n_rx)."""
    return es * n_tx / (n_rx * 10.0 ** (snr_db / 10.0))


def sample_channel(rng: np.random.Generator, n_rx: int, n_tx: int) -> np.ndarray:
    """i.i.d. CN(0, 1) fading matrix (real/imag parts variance 1/2 each)."""
    re = rng.standard_normal((n_rx, n_tx))
    im = rng.standard_normal((n_rx, n_tx))
    return (re + 1j * im) / np.sqrt(2.0)


def transmit(
    x: np.ndarray,
    h: np.ndarray,
    noise_var: float,
    rng: np.random.Generator,
    add_noise: bool = True,
) -> np.ndarray:
    """Y = H X + Z with Z i.i.d. CN(0, noise_var); noise optional for debugging."""
    x = np.asarray(x)
    h = np.asarray(h)
    if h.shape[1] != x.shape[0]:
        raise ValueError(f"H columns {h.shape[1]} != X rows {x.shape[0]}")
    y = h @ x
    if add_noise:
        scale = np.sqrt(noise_var / 2.0)
        y = y + scale * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y


def make_pilots(n_pilot: int, n_tx: int, scheme: ModulationScheme | None = None) -> np.ndarray:
    """Deterministic unit-modulus pilot matrix (n_tx, n_pilot).

    Hadamard sign columns tiled onto the QPSK corner point (1+1j)/sqrt(2):
    whenever n_pilot is a multiple of n_tx the Gram matrix is exactly
    n_pilot * I, so the LMMSE error covariance is diagonal. Pilot energy
    per symbol is 1, matching the mean energy of the data alphabet.
    """
    if n_pilot < n_tx:
        raise ValueError(f"need n_pilot >= n_tx, got {n_pilot} < {n_tx}")
    if n_tx & (n_tx - 1):
        raise ValueError("sign-orthogonal pilots require a power-of-two antenna count")
    if scheme is not None:
        mean_energy = float(np.mean(np.abs(scheme.points) ** 2))
        if not np.isclose(mean_energy, 1.0):
            raise ValueError(f"data alphabet mean energy {mean_energy} != 1")
    signs = hadamard(n_tx)
    cols = np.tile(signs, (1, n_pilot // n_tx + 1))[:, :n_pilot]
    return cols * ((1.0 + 1.0j) / np.sqrt(2.0))
