"""Iterative channel estimation and data detection.

The first pass estimates the channel straight from the received frame,
data interference and all.  Each later pass re-estimates after
subtracting the previous pass's detected data through the previous
channel estimate, then detects again behind the refreshed pilot
cancellation.  Estimates stop changing once detection stops changing,
so the loop exits early on a fixed point.

Two details matter for the loop to actually help at every pilot count.
The detector is told how noisy each observation really is: rows inside
the pilot footprint keep residual pilot interference proportional to the
estimator's own error variance, which is known in closed form, so the
noise floor is raised there instead of being flat.  And the data image
subtracted before re-estimation defaults to posterior-mean symbols
rather than hard decisions; where detection is genuinely uncertain this
cancels almost nothing instead of injecting a confidently wrong symbol
at full power onto exactly the rows the estimator reads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .daft import AfdmConfig
from .detection import (
    DetectionResult,
    SymbolAlphabet,
    bits_from_indices,
    cancel_pilots,
    mp_detect,
)
from .estimation import (
    ChannelPrior,
    assemble_effective_channel,
    default_threshold,
    effective_noise_variance,
    frame_response_matrix,
    mmse_estimate,
    threshold_paths,
)
from .pilots import PilotConfig, build_pilot_vector

_FIXED_POINT_TOL = 1e-6


@dataclass
class ReceiverReport:
    """Append-only trace of the estimation/detection loop."""

    gain_estimates: list[np.ndarray] = field(default_factory=list)
    indicators: list[np.ndarray] = field(default_factory=list)
    bit_decisions: list[np.ndarray | None] = field(default_factory=list)
    residual_norms: list[float] = field(default_factory=list)
    iterations: int = 0


class Receiver:
    """Reusable receiver for one configuration.

    Precomputes the pilot frame, its response matrix and the detection
    threshold once; run() is then safe to call concurrently on distinct
    frames since all shared state is read-only.
    """

    def __init__(
        self,
        cfg: AfdmConfig,
        pilot_cfg: PilotConfig,
        prior: ChannelPrior | None = None,
        data_amplitude: float = 1.0,
        noise_power: float = 1.0,
        alphabet: SymbolAlphabet | None = None,
        max_iters: int = 3,
        threshold: float | None = None,
        mp_iters: int = 30,
        damping: float = 0.6,
        mp_tol: float = 1e-4,
        resynthesis: str = "soft",
    ) -> None:
        if max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if data_amplitude < 0 or noise_power < 0:
            raise ValueError("data_amplitude and noise_power must be nonnegative")
        if resynthesis not in ("soft", "hard"):
            raise ValueError(f"resynthesis must be 'soft' or 'hard', got {resynthesis!r}")
        if alphabet is None:
            if cfg.bits_per_symbol == 2:
                alphabet = SymbolAlphabet.qpsk()
            elif cfg.bits_per_symbol == 1:
                alphabet = SymbolAlphabet.bpsk()
            else:
                raise ValueError(
                    f"no default alphabet for {cfg.bits_per_symbol} bits per symbol"
                )
        self.cfg = cfg
        self.pilot_cfg = pilot_cfg
        self.prior = ChannelPrior.uniform(cfg) if prior is None else prior
        self.data_amplitude = float(data_amplitude)
        self.noise_power = float(noise_power)
        self.alphabet = alphabet
        self.max_iters = max_iters
        self.mp_iters = mp_iters
        self.damping = damping
        self.mp_tol = mp_tol
        self.resynthesis = resynthesis

        self.pilot_frame = build_pilot_vector(pilot_cfg, cfg)
        self.response = frame_response_matrix(self.pilot_frame, cfg)
        self.gram = self.response.conj().T @ self.response
        self.noise_var = effective_noise_variance(
            self.prior, self.data_amplitude**2, self.noise_power
        )
        if threshold is None:
            threshold = default_threshold(self.noise_var, pilot_cfg.pilot_power)
        self.threshold = float(threshold)

        # per-row detection noise: thermal floor plus the residual pilot
        # image left by the estimator's own error, whose per-hypothesis
        # variance is the MMSE posterior variance; the floor keeps
        # message variances positive in noise-free runs
        if self.noise_var > 0:
            posterior_var = 1.0 / (
                np.real(np.diag(self.gram)) / self.noise_var + 1.0 / self.prior.variances
            )
        else:
            posterior_var = np.zeros(self.prior.variances.size)
        self.detector_noise = (
            max(self.noise_power, 1e-12) + (np.abs(self.response) ** 2) @ posterior_var
        )
        self._scaled_points = self.data_amplitude * self.alphabet.points

    def run(self, y: np.ndarray) -> ReceiverReport:
        y = np.asarray(y, dtype=complex)
        if y.shape != (self.cfg.n_subcarriers,):
            raise ValueError(
                f"y must be a length-{self.cfg.n_subcarriers} vector, got shape {y.shape}"
            )
        report = ReceiverReport()
        previous_gains: np.ndarray | None = None
        data_estimate: np.ndarray | None = None
        channel_estimate = None

        for _ in range(self.max_iters):
            if data_estimate is None:
                estimation_input = y
            else:
                estimation_input = y - channel_estimate.apply(data_estimate)
            gains = mmse_estimate(
                estimation_input, self.response, self.prior, self.noise_var, gram=self.gram
            )
            indicators = threshold_paths(gains, self.threshold)
            channel_estimate = assemble_effective_channel(gains, indicators, self.cfg)

            bits: np.ndarray | None = None
            if self.data_amplitude > 0:
                data_input = cancel_pilots(y, channel_estimate, self.pilot_frame)
                detection: DetectionResult = mp_detect(
                    data_input,
                    channel_estimate,
                    self.alphabet,
                    self.detector_noise,
                    max_iters=self.mp_iters,
                    damping=self.damping,
                    tol=self.mp_tol,
                    scale=self.data_amplitude,
                )
                bits = bits_from_indices(detection.indices, self.alphabet)
                if self.resynthesis == "soft":
                    data_estimate = detection.posteriors @ self._scaled_points
                else:
                    data_estimate = detection.symbols

            resynth = self.pilot_frame if data_estimate is None else self.pilot_frame + data_estimate
            residual = float(np.linalg.norm(y - channel_estimate.apply(resynth)))

            report.gain_estimates.append(gains)
            report.indicators.append(indicators)
            report.bit_decisions.append(bits)
            report.residual_norms.append(residual)
            report.iterations += 1

            if previous_gains is not None:
                if np.max(np.abs(gains - previous_gains)) < _FIXED_POINT_TOL:
                    break
            previous_gains = gains
        return report


def run_receiver(
    y: np.ndarray,
    pilot_cfg: PilotConfig,
    prior: ChannelPrior | None,
    cfg: AfdmConfig,
    data_amplitude: float = 1.0,
    noise_power: float = 1.0,
    alphabet: SymbolAlphabet | None = None,
    threshold: float | None = None,
    mp_iters: int = 30,
    damping: float = 0.6,
    mp_tol: float = 1e-4,
    max_iters: int = 3,
    resynthesis: str = "soft",
) -> ReceiverReport:
    """One-shot wrapper around Receiver for a single frame."""
    receiver = Receiver(
        cfg,
        pilot_cfg,
        prior=prior,
        data_amplitude=data_amplitude,
        noise_power=noise_power,
        alphabet=alphabet,
        max_iters=max_iters,
        threshold=threshold,
        mp_iters=mp_iters,
        damping=damping,
        mp_tol=mp_tol,
        resynthesis=resynthesis,
    )
    return receiver.run(y)
