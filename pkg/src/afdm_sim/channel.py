"""Doubly selective channel synthesis and its chirp-domain image.

A channel is a small set of paths, each with a complex gain, an integer
delay and an integer Doppler index.  Applied in the time domain the
channel is a delayed, Doppler-shifted sum over a chirp-periodic prefix;
in the chirp domain every path occupies a single cyclic diagonal, so the
whole channel is a banded matrix stored here in sparse form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .daft import AfdmConfig, daft_matrix

# ============================================================
# channel realization
# ============================================================


@dataclass(frozen=True)
class ChannelPath:
    gain: complex
    delay: int    # samples, in [0, l_max]
    doppler: int  # bins of 1/N, in [-alpha_max, alpha_max]


@dataclass(frozen=True)
class ChannelRealization:
    """Immutable set of propagation paths with pairwise distinct delays."""

    paths: tuple[ChannelPath, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise ValueError("channel needs at least one path")
        delays = [p.delay for p in self.paths]
        if len(set(delays)) != len(delays):
            raise ValueError("path delays must be pairwise distinct")


def _check_bounds(delay: int, doppler: int, cfg: AfdmConfig) -> None:
    if not 0 <= delay <= cfg.l_max:
        raise ValueError(f"delay {delay} outside [0, {cfg.l_max}]")
    if abs(doppler) > cfg.alpha_max:
        raise ValueError(f"doppler {doppler} outside [-{cfg.alpha_max}, {cfg.alpha_max}]")


def _check_paths(ch: ChannelRealization, cfg: AfdmConfig) -> None:
    for p in ch.paths:
        _check_bounds(p.delay, p.doppler, cfg)


def sample_channel(rng: np.random.Generator, p: int, cfg: AfdmConfig) -> ChannelRealization:
    """Draw a random channel: unit total power split over p paths.

    Gains are i.i.d. circular Gaussian with variance 1/p, delays are a
    uniform choice of p distinct values, Doppler indices are uniform on
    the configured range.
    """
    if p < 1:
        raise ValueError("path count must be at least 1")
    if p > cfg.l_max + 1:
        raise ValueError(f"cannot place {p} distinct delays in [0, {cfg.l_max}]")
    delays = rng.choice(cfg.l_max + 1, size=p, replace=False)
    dopplers = rng.integers(-cfg.alpha_max, cfg.alpha_max + 1, size=p)
    scale = np.sqrt(1.0 / (2.0 * p))
    gains = scale * (rng.standard_normal(p) + 1j * rng.standard_normal(p))
    paths = tuple(
        ChannelPath(complex(g), int(l), int(a))
        for g, l, a in zip(gains, delays, dopplers)
    )
    return ChannelRealization(paths)


def apply_time_domain(
    s: np.ndarray,
    ch: ChannelRealization,
    cfg: AfdmConfig,
    noise_power: float = 0.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Pass a time-domain frame through the channel, sample by sample.

    Prepends a chirp-periodic prefix of l_max samples, applies each path
    as a delay plus a linear Doppler phase, strips the prefix again and
    adds circular Gaussian noise of the given per-sample power.
    """
    s = np.asarray(s, dtype=complex)
    n = cfg.n_subcarriers
    if s.shape != (n,):
        raise ValueError(f"s must be a length-{n} vector, got shape {s.shape}")
    _check_paths(ch, cfg)
    if noise_power < 0:
        raise ValueError("noise_power must be nonnegative")

    # prefix sample at time -q copies s[N-q] with the chirp-matched phase
    q = np.arange(cfg.l_max, 0, -1)
    prefix = s[n - q] * np.exp(-2j * np.pi * float(cfg.c1) * (n * n - 2.0 * n * q))
    extended = np.concatenate([prefix, s])

    t = np.arange(n)
    r = np.zeros(n, dtype=complex)
    for path in ch.paths:
        start = cfg.l_max - path.delay
        phase = np.exp(-2j * np.pi * (path.doppler / n) * t)
        r += path.gain * phase * extended[start:start + n]

    if noise_power > 0:
        if rng is None:
            raise ValueError("rng is required when noise_power > 0")
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        r = r + np.sqrt(noise_power / 2.0) * w
    return r


# ============================================================
# delay-Doppler grid indexing
# ============================================================


def index_to_delay_doppler(t: int, cfg: AfdmConfig) -> tuple[int, int]:
    """Map a grid index in [1, grid_size] to its (delay, doppler) pair."""
    if not 1 <= t <= cfg.grid_size:
        raise ValueError(f"grid index {t} outside [1, {cfg.grid_size}]")
    stride = cfg.delay_stride
    return (t - 1) // stride, (t - 1) % stride - cfg.alpha_max


def delay_doppler_to_index(delay: int, doppler: int, cfg: AfdmConfig) -> int:
    """Inverse of index_to_delay_doppler."""
    _check_bounds(delay, doppler, cfg)
    return delay * cfg.delay_stride + doppler + cfg.alpha_max + 1


def subchannel_offset(delay: int, doppler: int, cfg: AfdmConfig) -> int:
    """Cyclic diagonal occupied by a path, as a residue in [0, N)."""
    _check_bounds(delay, doppler, cfg)
    return (doppler + cfg.delay_stride * delay) % cfg.n_subcarriers


# ============================================================
# chirp-domain subchannel responses
# ============================================================


def subchannel_weights(delay: int, doppler: int, cfg: AfdmConfig) -> tuple[int, np.ndarray]:
    """Sparse unit-gain subchannel response as (offset, per-row phases).

    Row m of the response multiplies input entry (m + offset) mod N by
    weights[m]; the phase law must use the reduced column index, since
    the second chirp term is not invariant under index wrap-around.
    """
    n = cfg.n_subcarriers
    offset = subchannel_offset(delay, doppler, cfg)
    rows = np.arange(n)
    cols = (rows + offset) % n
    phase = (
        n * float(cfg.c1) * delay * delay
        - cols * delay
        + n * cfg.c2 * (cols * cols - rows * rows)
    )
    return offset, np.exp(2j * np.pi * phase / n)


def subchannel_matrix(delay: int, doppler: int, cfg: AfdmConfig) -> np.ndarray:
    """Dense unit-gain subchannel response, one nonzero per row and column."""
    n = cfg.n_subcarriers
    offset, weights = subchannel_weights(delay, doppler, cfg)
    out = np.zeros((n, n), dtype=complex)
    rows = np.arange(n)
    out[rows, (rows + offset) % n] = weights
    return out


def subchannel_matrix_from_factors(delay: int, doppler: int, cfg: AfdmConfig) -> np.ndarray:
    """Oracle route: assemble the same response from its physical factors.

    Forward transform x (prefix phase) x (Doppler phase) x (cyclic
    shift) x inverse transform, i.e. the channel as it actually acts on
    a frame, without the closed-form shortcut.
    """
    _check_bounds(delay, doppler, cfg)
    n = cfg.n_subcarriers
    idx = np.arange(n)
    fwd = daft_matrix(cfg)
    prefix_phase = np.where(
        idx < delay,
        np.exp(-2j * np.pi * float(cfg.c1) * (n * n - 2.0 * n * (delay - idx))),
        1.0 + 0.0j,
    )
    doppler_phase = np.exp(-2j * np.pi * (doppler / n) * idx)
    shift = np.roll(np.eye(n), delay, axis=0)
    inner = (prefix_phase * doppler_phase)[:, None] * shift
    return fwd @ inner @ fwd.conj().T


# ============================================================
# effective channel
# ============================================================


@dataclass
class SparseChannel:
    """Cyclic-banded matrix stored as one weight vector per diagonal.

    Row m of band k multiplies input entry (m + offsets[k]) mod N by
    weights[k, m].  An empty band set is the zero matrix.
    """

    offsets: np.ndarray  # (K,) int residues in [0, N)
    weights: np.ndarray  # (K, N) complex

    def __post_init__(self) -> None:
        self.offsets = np.asarray(self.offsets, dtype=np.int64)
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=complex))
        if self.offsets.size == 0:
            self.weights = self.weights.reshape(0, self.weights.shape[-1])
        if self.weights.shape[0] != self.offsets.size:
            raise ValueError("one weight row per offset required")
        if len(set(self.offsets.tolist())) != self.offsets.size:
            raise ValueError("offsets must be distinct")

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.n,):
            raise ValueError(f"x must be a length-{self.n} vector, got shape {x.shape}")
        out = np.zeros(self.n, dtype=complex)
        for offset, row in zip(self.offsets, self.weights):
            out += row * np.roll(x, -offset)
        return out

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=complex)
        rows = np.arange(self.n)
        for offset, row in zip(self.offsets, self.weights):
            out[rows, (rows + offset) % self.n] += row
        return out

    @classmethod
    def from_dense(cls, matrix: np.ndarray, tol: float = 0.0) -> "SparseChannel":
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("matrix must be square")
        n = matrix.shape[0]
        rows = np.arange(n)
        offsets, weights = [], []
        for offset in range(n):
            band = matrix[rows, (rows + offset) % n]
            if np.any(np.abs(band) > tol):
                offsets.append(offset)
                weights.append(band)
        if not offsets:
            return cls(np.zeros(0, dtype=np.int64), np.zeros((0, n), dtype=complex))
        return cls(np.array(offsets), np.array(weights))

    @classmethod
    def zero(cls, n: int) -> "SparseChannel":
        return cls(np.zeros(0, dtype=np.int64), np.zeros((0, n), dtype=complex))


def merge_bands(pairs: list[tuple[int, np.ndarray]], n: int) -> SparseChannel:
    """Sum weighted bands into a SparseChannel, merging repeated offsets."""
    acc: dict[int, np.ndarray] = {}
    for offset, weights in pairs:
        if offset in acc:
            acc[offset] = acc[offset] + weights
        else:
            acc[offset] = np.array(weights, dtype=complex)
    if not acc:
        return SparseChannel.zero(n)
    offsets = sorted(acc)
    return SparseChannel(np.array(offsets), np.array([acc[o] for o in offsets]))


def effective_channel(ch: ChannelRealization, cfg: AfdmConfig) -> SparseChannel:
    """Sparse chirp-domain channel matrix for a realization."""
    _check_paths(ch, cfg)
    pairs = []
    for path in ch.paths:
        offset, weights = subchannel_weights(path.delay, path.doppler, cfg)
        pairs.append((offset, path.gain * weights))
    return merge_bands(pairs, cfg.n_subcarriers)


def effective_matrix(ch: ChannelRealization, cfg: AfdmConfig) -> np.ndarray:
    """Dense chirp-domain channel matrix; oracle route for tests."""
    _check_paths(ch, cfg)
    out = np.zeros((cfg.n_subcarriers, cfg.n_subcarriers), dtype=complex)
    for path in ch.paths:
        out += path.gain * subchannel_matrix(path.delay, path.doppler, cfg)
    return out


def grid_gains(ch: ChannelRealization, cfg: AfdmConfig) -> np.ndarray:
    """True path gains embedded on the delay-Doppler grid, zeros elsewhere."""
    _check_paths(ch, cfg)
    out = np.zeros(cfg.grid_size, dtype=complex)
    for path in ch.paths:
        out[delay_doppler_to_index(path.delay, path.doppler, cfg) - 1] += path.gain
    return out
