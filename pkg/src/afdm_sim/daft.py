"""Discrete affine Fourier transform pair and frame configuration.

The transform is a unitary DFT sandwiched between two quadratic-phase
(chirp) diagonals.  With the first chirp rate tied to the Doppler spread
of the channel, a doubly selective channel collapses to a sparse banded
matrix in this domain, which is what the estimator and the detector
exploit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class AfdmConfig:
    """Static frame parameters shared by every stage of the link."""

    n_subcarriers: int        # frame length N
    alpha_max: int            # largest Doppler index, in bins of 1/N
    l_max: int                # largest delay index, in samples
    c1: Fraction              # first chirp rate; 2*N*c1 must be an integer
    c2: float                 # second chirp rate; any fixed irrational value
    bits_per_symbol: int = 2  # 2 -> QPSK

    def __post_init__(self) -> None:
        n = self.n_subcarriers
        if n <= 0:
            raise ValueError("n_subcarriers must be positive")
        if self.alpha_max < 0 or self.l_max < 0:
            raise ValueError("alpha_max and l_max must be nonnegative")
        footprint = (self.l_max + 1) * (2 * self.alpha_max + 1)
        if footprint > n:
            raise ValueError(
                f"delay-Doppler grid does not fit the frame: "
                f"(l_max+1)*(2*alpha_max+1) = {footprint} > N = {n}"
            )
        if self.bits_per_symbol <= 0:
            raise ValueError("bits_per_symbol must be positive")
        object.__setattr__(self, "c1", Fraction(self.c1))
        if (2 * n * self.c1).denominator != 1:
            raise ValueError(f"2*N*c1 must be an integer, got {2 * n * self.c1}")

    @property
    def doppler_span(self) -> int:
        """Number of Doppler bins, 2*alpha_max + 1."""
        return 2 * self.alpha_max + 1

    @property
    def delay_stride(self) -> int:
        """Grid offset step per unit of delay, the integer 2*N*c1."""
        return int(2 * self.n_subcarriers * self.c1)

    @property
    def grid_size(self) -> int:
        """Number of delay-Doppler hypotheses a channel path can occupy."""
        return (self.l_max + 1) * self.doppler_span


def default_params(n_subcarriers: int, alpha_max: int, l_max: int) -> AfdmConfig:
    """Build a config with the diversity-preserving chirp rates.

    The first chirp rate is (2*alpha_max+1)/(2N), the smallest value that
    keeps distinct delay-Doppler pairs on distinct cyclic diagonals.  The
    second rate only needs to be irrational-valued; a fixed golden-ratio
    fraction of the frame keeps runs reproducible.
    """
    if n_subcarriers <= 0:
        raise ValueError("n_subcarriers must be positive")
    c1 = Fraction(2 * alpha_max + 1, 2 * n_subcarriers)
    c2 = (math.sqrt(5.0) - 1.0) / 2.0 / (2.0 * n_subcarriers)
    return AfdmConfig(n_subcarriers, alpha_max, l_max, c1, c2)


def _chirp_diag(rate: float, n: int) -> np.ndarray:
    """Diagonal of the quadratic-phase modulation with the given chirp rate."""
    idx = np.arange(n, dtype=np.float64)
    return np.exp(-2j * np.pi * float(rate) * idx * idx)


def _require_frame(x: np.ndarray, cfg: AfdmConfig, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (cfg.n_subcarriers,):
        raise ValueError(
            f"{name} must be a length-{cfg.n_subcarriers} vector, got shape {x.shape}"
        )
    return x


def daft(r: np.ndarray, cfg: AfdmConfig) -> np.ndarray:
    """Forward transform of a time-domain frame into the chirp domain."""
    r = _require_frame(r, cfg, "r")
    n = cfg.n_subcarriers
    inner = np.fft.fft(_chirp_diag(cfg.c1, n) * r, norm="ortho")
    return _chirp_diag(cfg.c2, n) * inner


def idaft(x: np.ndarray, cfg: AfdmConfig) -> np.ndarray:
    """Inverse transform, synthesizing the time-domain frame."""
    x = _require_frame(x, cfg, "x")
    n = cfg.n_subcarriers
    inner = np.fft.ifft(np.conj(_chirp_diag(cfg.c2, n)) * x, norm="ortho")
    return np.conj(_chirp_diag(cfg.c1, n)) * inner


def daft_matrix(cfg: AfdmConfig) -> np.ndarray:
    """Dense forward-transform matrix; oracle path for the FFT route."""
    n = cfg.n_subcarriers
    grid = np.arange(n)
    dft = np.exp(-2j * np.pi * np.outer(grid, grid) / n) / math.sqrt(n)
    return _chirp_diag(cfg.c2, n)[:, None] * dft * _chirp_diag(cfg.c1, n)[None, :]
