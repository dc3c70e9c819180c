"""MMSE channel estimation from superimposed pilots.

The received frame is correlated against the response every grid
hypothesis would produce from the pilot frame alone.  Data symbols enter
as extra Gaussian noise whose variance follows from the channel prior,
and a threshold on the estimated gain magnitudes decides which
hypotheses are declared active.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import (
    SparseChannel,
    index_to_delay_doppler,
    merge_bands,
    subchannel_weights,
)
from .daft import AfdmConfig


@dataclass
class ChannelPrior:
    """Per-hypothesis gain variances used by the MMSE estimator."""

    variances: np.ndarray  # (grid_size,) all positive

    def __post_init__(self) -> None:
        self.variances = np.asarray(self.variances, dtype=float)
        if self.variances.ndim != 1:
            raise ValueError("variances must be a vector")
        if np.any(self.variances <= 0):
            raise ValueError("prior variances must be positive")

    @property
    def total(self) -> float:
        return float(self.variances.sum())

    @classmethod
    def uniform(cls, cfg: AfdmConfig) -> "ChannelPrior":
        """Unit total channel power spread evenly over the grid."""
        return cls(np.full(cfg.grid_size, 1.0 / cfg.grid_size))


def frame_response_matrix(frame: np.ndarray, cfg: AfdmConfig) -> np.ndarray:
    """Column t-1 is the response of grid hypothesis t to the given frame."""
    frame = np.asarray(frame, dtype=complex)
    if frame.shape != (cfg.n_subcarriers,):
        raise ValueError(
            f"frame must be a length-{cfg.n_subcarriers} vector, got shape {frame.shape}"
        )
    columns = []
    for t in range(1, cfg.grid_size + 1):
        delay, doppler = index_to_delay_doppler(t, cfg)
        offset, weights = subchannel_weights(delay, doppler, cfg)
        columns.append(weights * np.roll(frame, -offset))
    return np.column_stack(columns)


def effective_noise_variance(prior: ChannelPrior, data_power: float, noise_power: float) -> float:
    """Per-sample variance of data interference plus thermal noise."""
    if data_power < 0 or noise_power < 0:
        raise ValueError("powers must be nonnegative")
    return prior.total * data_power + noise_power


def mmse_estimate(
    y: np.ndarray,
    response: np.ndarray,
    prior: ChannelPrior,
    noise_var: float,
    gram: np.ndarray | None = None,
    method: str = "auto",
) -> np.ndarray:
    """Linear MMSE estimate of the grid gains from a pilot-bearing frame.

    Solves (R^H R + noise_var * C^-1) g = R^H y for the response matrix R
    and diagonal prior covariance C.  When R^H R is diagonal (equally
    spaced pilots) the solve reduces to a per-entry shrinkage, kept as a
    separate path and cross-checked against the general one in tests.
    """
    y = np.asarray(y, dtype=complex)
    response = np.asarray(response, dtype=complex)
    if response.ndim != 2 or response.shape[0] != y.shape[0]:
        raise ValueError("response must be an N x grid matrix matching y")
    if response.shape[1] != prior.variances.size:
        raise ValueError("prior size must match the response column count")
    if noise_var < 0:
        raise ValueError("noise_var must be nonnegative")
    if method not in ("auto", "diagonal", "general"):
        raise ValueError(f"unknown method {method!r}")

    correlated = response.conj().T @ y
    if gram is None:
        gram = response.conj().T @ response
    diag = np.real(np.diag(gram))
    off = gram - np.diag(np.diag(gram))
    is_diagonal = np.max(np.abs(off)) <= 1e-9 * max(np.max(diag), 1.0)
    if method == "diagonal" and not is_diagonal:
        raise ValueError("gram matrix is not diagonal")

    if method == "diagonal" or (method == "auto" and is_diagonal):
        denom = diag + noise_var / prior.variances
        if np.any(denom <= 0):
            raise ValueError("estimation system is singular")
        return correlated / denom

    system = gram + noise_var * np.diag(1.0 / prior.variances)
    try:
        factor = cho_factor(system)
    except np.linalg.LinAlgError as exc:
        raise ValueError("estimation system is singular") from exc
    return cho_solve(factor, correlated)


def default_threshold(noise_var: float, pilot_power: float) -> float:
    """Path-declaration threshold scaled to the estimate's noise level."""
    if pilot_power <= 0:
        raise ValueError("pilot_power must be positive")
    if noise_var < 0:
        raise ValueError("noise_var must be nonnegative")
    return 3.0 * np.sqrt(noise_var / pilot_power)


def threshold_paths(gains: np.ndarray, threshold: float) -> np.ndarray:
    """Boolean mask of grid entries whose gain magnitude clears the threshold."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    return np.abs(np.asarray(gains)) > threshold


@dataclass
class EstimationResult:
    """Gain estimates with the path declarations derived from them."""

    gains: np.ndarray       # (grid_size,) complex
    indicators: np.ndarray  # (grid_size,) bool
    threshold: float

    def __post_init__(self) -> None:
        self.gains = np.asarray(self.gains, dtype=complex)
        self.indicators = np.asarray(self.indicators, dtype=bool)
        if not np.array_equal(self.indicators, threshold_paths(self.gains, self.threshold)):
            raise ValueError("indicators must match thresholded gain magnitudes")

    @classmethod
    def from_estimate(cls, gains: np.ndarray, threshold: float) -> "EstimationResult":
        return cls(gains, threshold_paths(gains, threshold), threshold)


def assemble_effective_channel(
    gains: np.ndarray, indicators: np.ndarray, cfg: AfdmConfig
) -> SparseChannel:
    """Sparse channel matrix rebuilt from the declared grid hypotheses."""
    gains = np.asarray(gains, dtype=complex)
    indicators = np.asarray(indicators, dtype=bool)
    if gains.shape != (cfg.grid_size,) or indicators.shape != (cfg.grid_size,):
        raise ValueError(f"gains and indicators must have length {cfg.grid_size}")
    pairs = []
    for t0 in np.flatnonzero(indicators):
        delay, doppler = index_to_delay_doppler(int(t0) + 1, cfg)
        offset, weights = subchannel_weights(delay, doppler, cfg)
        pairs.append((offset, gains[t0] * weights))
    return merge_bands(pairs, cfg.n_subcarriers)
