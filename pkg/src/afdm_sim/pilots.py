"""Superimposed pilot grid construction.

Pilots are real positive spikes added on top of the data frame.  Spacing
them by one full channel footprint keeps every pilot's image in the
received frame disjoint from the others, which is what makes the
estimator's correlator columns orthogonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .daft import AfdmConfig


def guard_width(cfg: AfdmConfig) -> int:
    """Width of the cyclic footprint one path family smears a spike over."""
    return cfg.grid_size - 1


def max_pilot_count(cfg: AfdmConfig) -> int:
    """Largest pilot count whose last pilot still keeps its trailing guards."""
    q = guard_width(cfg)
    return (cfg.n_subcarriers - q - 1) // (q + 1) + 1


@dataclass(frozen=True)
class PilotConfig:
    """Placement and power of the superimposed pilots."""

    pilot_count: int          # number of pilot spikes
    pilot_power: float        # total pilot energy in the frame
    guard: int                # zero run kept clear between pilots
    indices: tuple[int, ...]  # pilot positions on the chirp-domain grid

    def __post_init__(self) -> None:
        if self.pilot_count < 1:
            raise ValueError("pilot_count must be at least 1")
        if self.pilot_power < 0:
            raise ValueError("pilot_power must be nonnegative")
        if self.guard < 0:
            raise ValueError("guard must be nonnegative")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        expected = tuple(range(0, self.pilot_count * (self.guard + 1), self.guard + 1))
        if self.indices != expected:
            raise ValueError(
                f"pilot indices must be 0, {self.guard + 1}, ... in steps of guard+1"
            )

    @classmethod
    def for_config(cls, cfg: AfdmConfig, pilot_count: int, pilot_power: float) -> "PilotConfig":
        """Equally spaced pilots matched to the channel footprint of cfg."""
        if pilot_count > max_pilot_count(cfg):
            raise ValueError(
                f"pilot_count {pilot_count} exceeds the maximum "
                f"{max_pilot_count(cfg)} for N = {cfg.n_subcarriers}"
            )
        q = guard_width(cfg)
        indices = tuple(range(0, pilot_count * (q + 1), q + 1))
        return cls(pilot_count, pilot_power, q, indices)


def build_pilot_vector(pc: PilotConfig, cfg: AfdmConfig) -> np.ndarray:
    """Length-N pilot frame with total energy pilot_power."""
    n = cfg.n_subcarriers
    if pc.guard < guard_width(cfg):
        raise ValueError(
            f"guard {pc.guard} is narrower than the channel footprint {guard_width(cfg)}"
        )
    last = (pc.pilot_count - 1) * (pc.guard + 1)
    if last >= n - pc.guard:
        raise ValueError(
            f"pilot placement exceeds the frame: last pilot at {last} "
            f"needs {pc.guard} trailing guards in a length-{n} frame"
        )
    out = np.zeros(n, dtype=complex)
    out[list(pc.indices)] = np.sqrt(pc.pilot_power / pc.pilot_count)
    return out


def superimpose(x_p: np.ndarray, x_d: np.ndarray) -> np.ndarray:
    """Pilot-plus-data frame; pilots ride on top of the data symbols."""
    x_p = np.asarray(x_p, dtype=complex)
    x_d = np.asarray(x_d, dtype=complex)
    if x_p.shape != x_d.shape:
        raise ValueError(f"shape mismatch: {x_p.shape} vs {x_d.shape}")
    return x_p + x_d
