"""Symbol mapping, pilot cancellation and message-passing detection.

Detection runs on the sparse chirp-domain channel: each received sample
sees at most one symbol per channel band, so the factor graph has
bounded degree and the interference each edge ignores is summarized as
a Gaussian.  An exhaustive minimum-distance oracle covers tiny frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import SparseChannel

# ============================================================
# alphabets and bit mapping
# ============================================================


@dataclass(frozen=True, eq=False)
class SymbolAlphabet:
    """Unit-energy constellation with Gray-coded positional bit labels."""

    points: np.ndarray
    bits_per_symbol: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", np.asarray(self.points, dtype=complex))
        if self.points.size != 2 ** self.bits_per_symbol:
            raise ValueError("alphabet size must be 2**bits_per_symbol")
        energy = float(np.mean(np.abs(self.points) ** 2))
        if abs(energy - 1.0) > 1e-9:
            raise ValueError(f"alphabet must have unit average energy, got {energy}")

    @classmethod
    def qpsk(cls) -> "SymbolAlphabet":
        # first bit selects the real sign, second the imaginary sign
        points = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)
        return cls(points, 2)

    @classmethod
    def bpsk(cls) -> "SymbolAlphabet":
        return cls(np.array([1.0 + 0.0j, -1.0 + 0.0j]), 1)


def bits_to_indices(bits: np.ndarray, alphabet: SymbolAlphabet) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    k = alphabet.bits_per_symbol
    if bits.ndim != 1 or bits.size % k:
        raise ValueError(f"bit count must be a multiple of {k}, got {bits.size}")
    weights = 1 << np.arange(k - 1, -1, -1)
    return bits.reshape(-1, k) @ weights


def bits_from_indices(indices: np.ndarray, alphabet: SymbolAlphabet) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    k = alphabet.bits_per_symbol
    shifts = np.arange(k - 1, -1, -1)
    return ((indices[:, None] >> shifts) & 1).reshape(-1)


def modulate_bits(bits: np.ndarray, alphabet: SymbolAlphabet, amplitude: float) -> np.ndarray:
    """Map bits onto amplitude-scaled constellation points."""
    return amplitude * alphabet.points[bits_to_indices(bits, alphabet)]


def demodulate_symbols(
    symbols: np.ndarray, alphabet: SymbolAlphabet, amplitude: float
) -> np.ndarray:
    """Nearest-point hard decisions back to bits."""
    symbols = np.asarray(symbols, dtype=complex)
    ref = amplitude * alphabet.points
    indices = np.argmin(np.abs(symbols[:, None] - ref[None, :]), axis=1)
    return bits_from_indices(indices, alphabet)


# ============================================================
# pilot cancellation
# ============================================================


def cancel_pilots(
    y: np.ndarray, channel: SparseChannel | np.ndarray, pilot_frame: np.ndarray
) -> np.ndarray:
    """Remove the estimated pilot image from the received frame."""
    y = np.asarray(y, dtype=complex)
    pilot_frame = np.asarray(pilot_frame, dtype=complex)
    if y.shape != pilot_frame.shape:
        raise ValueError(f"shape mismatch: {y.shape} vs {pilot_frame.shape}")
    if isinstance(channel, SparseChannel):
        return y - channel.apply(pilot_frame)
    channel = np.asarray(channel, dtype=complex)
    return y - channel @ pilot_frame


# ============================================================
# message-passing detection
# ============================================================


@dataclass
class DetectionResult:
    indices: np.ndarray     # (N,) alphabet indices of the hard decisions
    symbols: np.ndarray     # (N,) amplitude-scaled decision symbols
    posteriors: np.ndarray  # (N, |alphabet|) symbol probabilities
    converged: bool
    iterations: int


def _softmax(log_p: np.ndarray) -> np.ndarray:
    shifted = log_p - log_p.max(axis=-1, keepdims=True)
    p = np.exp(shifted)
    return p / p.sum(axis=-1, keepdims=True)


def mp_detect(
    y: np.ndarray,
    channel: SparseChannel | np.ndarray,
    alphabet: SymbolAlphabet,
    noise_power: float | np.ndarray,
    max_iters: int = 30,
    damping: float = 0.6,
    tol: float = 1e-4,
    scale: float = 1.0,
) -> DetectionResult:
    """Gaussian-approximation message passing on a cyclic-banded channel.

    Each observation treats all but one connected symbol as Gaussian
    interference whose mean and variance follow from the current symbol
    probabilities; probability messages flow back with damped updates.
    noise_power may be a scalar or a per-observation vector (rows hit by
    residual pilot interference carry more noise than the thermal floor).
    Non-convergence is not an error: the best iterate seen (highest mean
    symbol confidence) is returned with converged set to False.
    """
    if not isinstance(channel, SparseChannel):
        channel = SparseChannel.from_dense(np.asarray(channel, dtype=complex))
    y = np.asarray(y, dtype=complex)
    if y.shape != (channel.n,):
        raise ValueError(f"y must be a length-{channel.n} vector, got shape {y.shape}")
    noise_power = np.asarray(noise_power, dtype=float)
    if noise_power.ndim not in (0, 1) or (
        noise_power.ndim == 1 and noise_power.shape != (channel.n,)
    ):
        raise ValueError("noise_power must be a scalar or a length-N vector")
    if np.any(noise_power <= 0):
        raise ValueError("noise_power must be positive")
    if not 0 < damping <= 1:
        raise ValueError("damping must be in (0, 1]")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")

    points = scale * alphabet.points
    n_sym = points.size
    offsets = channel.offsets
    weights = channel.weights
    k_bands, n = weights.shape

    if k_bands == 0:
        posteriors = np.full((y.size, n_sym), 1.0 / n_sym)
        indices = np.zeros(y.size, dtype=np.int64)
        return DetectionResult(indices, points[indices], posteriors, True, 0)

    weight_sq = np.abs(weights) ** 2
    point_sq = np.abs(points) ** 2

    msg = np.full((k_bands, n, n_sym), 1.0 / n_sym)
    prev_post = np.full((n, n_sym), 1.0 / n_sym)
    best_post = prev_post
    best_score = -1.0
    converged = False
    iteration = 0

    for iteration in range(1, max_iters + 1):
        edge_mean = msg @ points
        edge_var = np.maximum(msg @ point_sq - np.abs(edge_mean) ** 2, 0.0)
        total_mean = np.sum(weights * edge_mean, axis=0)
        total_var = np.sum(weight_sq * edge_var, axis=0) + noise_power

        # leave-one-out interference statistics per edge
        other_mean = y - (total_mean - weights * edge_mean)
        other_var = np.maximum(total_var - weight_sq * edge_var, 1e-300)

        resid = other_mean[:, :, None] - weights[:, :, None] * points[None, None, :]
        log_lik = -np.abs(resid) ** 2 / other_var[:, :, None]

        # gather edge likelihoods at their symbol index
        at_symbol = np.empty_like(log_lik)
        for k in range(k_bands):
            at_symbol[k] = np.roll(log_lik[k], offsets[k], axis=0)
        total_log = at_symbol.sum(axis=0)
        posteriors = _softmax(total_log)

        fresh = _softmax(total_log[None, :, :] - at_symbol)
        for k in range(k_bands):
            fresh[k] = np.roll(fresh[k], -offsets[k], axis=0)
        msg = damping * fresh + (1.0 - damping) * msg

        score = float(posteriors.max(axis=1).mean())
        if score > best_score:
            best_score = score
            best_post = posteriors
        delta = float(np.abs(posteriors - prev_post).max())
        prev_post = posteriors
        if delta < tol:
            converged = True
            break

    indices = best_post.argmax(axis=1)
    return DetectionResult(indices, points[indices], best_post, converged, iteration)


# ============================================================
# exhaustive oracle
# ============================================================

_ENUM_BIT_LIMIT = 20
_ENUM_CHUNK = 1 << 16


def exact_map_oracle(
    y: np.ndarray,
    channel: SparseChannel | np.ndarray,
    alphabet: SymbolAlphabet,
    scale: float = 1.0,
) -> np.ndarray:
    """Exhaustive minimum-distance frame decision; tiny frames only.

    Returns the alphabet indices of the frame minimizing the residual
    energy over every possible transmitted frame.
    """
    if isinstance(channel, SparseChannel):
        matrix = channel.dense()
    else:
        matrix = np.asarray(channel, dtype=complex)
    y = np.asarray(y, dtype=complex)
    n = y.size
    if matrix.shape != (n, n):
        raise ValueError(f"channel must be {n} x {n}, got {matrix.shape}")
    if n * alphabet.bits_per_symbol > _ENUM_BIT_LIMIT:
        raise ValueError(
            f"frame of {n * alphabet.bits_per_symbol} bits exceeds the "
            f"{_ENUM_BIT_LIMIT}-bit enumeration limit"
        )

    points = scale * alphabet.points
    n_sym = points.size
    place = n_sym ** np.arange(n - 1, -1, -1, dtype=np.int64)
    total = n_sym ** n
    transpose = matrix.T.copy()

    best_cost = np.inf
    best = np.zeros(n, dtype=np.int64)
    for start in range(0, total, _ENUM_CHUNK):
        codes = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.int64)
        digits = (codes[:, None] // place) % n_sym
        frames = points[digits]
        costs = np.sum(np.abs(frames @ transpose - y) ** 2, axis=1)
        pick = int(np.argmin(costs))
        if costs[pick] < best_cost:
            best_cost = float(costs[pick])
            best = digits[pick]
    return best
