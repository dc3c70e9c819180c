"""Configuration-driven Monte Carlo sweeps producing CSV plot data.

Each sweep point runs independent frames through the full link: draw a
channel, modulate random bits, superimpose pilots, pass through the
time-domain channel with noise, then run the iterative receiver.  Every
trial derives its own RNG stream from (seed, point, trial), so results
are reproducible and independent of worker count and execution order.
Iteration counts share trials: one receiver run at the deepest count
serves every requested count, reading the trace at that depth.
"""

from __future__ import annotations

import csv
import hashlib
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np
from joblib import Parallel, delayed

from .channel import apply_time_domain, grid_gains, sample_channel
from .daft import AfdmConfig, daft, default_params, idaft
from .detection import modulate_bits
from .estimation import ChannelPrior
from .pilots import PilotConfig, max_pilot_count, superimpose
from .receiver import Receiver

# ============================================================
# configuration
# ============================================================

_LIST_FIELDS = {"snr_d_db": float, "pilot_counts": int, "iteration_counts": int}
_SCALAR_FIELDS = {
    "n_subcarriers": int,
    "alpha_max": int,
    "l_max": int,
    "paths": int,
    "snr_p_db": float,
    "trials": int,
    "seed": int,
    "noise_power": float,
    "bits_per_symbol": int,
    "mp_iters": int,
    "mp_damping": float,
    "output": str,
}
_OPTIONAL_FIELDS = {
    "noise_power",
    "bits_per_symbol",
    "mp_iters",
    "mp_damping",
    "output",
}


@dataclass
class ExperimentConfig:
    """Everything a sweep needs, mirroring the config-file keys."""

    n_subcarriers: int
    alpha_max: int
    l_max: int
    paths: int
    snr_p_db: float
    snr_d_db: tuple[float, ...]
    pilot_counts: tuple[int, ...]
    iteration_counts: tuple[int, ...]
    trials: int
    seed: int
    noise_power: float = 1.0
    bits_per_symbol: int = 2
    mp_iters: int = 30
    mp_damping: float = 0.6
    output: str = "results.csv"

    def __post_init__(self) -> None:
        self.snr_d_db = tuple(float(v) for v in self.snr_d_db)
        self.pilot_counts = tuple(int(v) for v in self.pilot_counts)
        self.iteration_counts = tuple(int(v) for v in self.iteration_counts)

    def afdm_config(self) -> AfdmConfig:
        cfg = default_params(self.n_subcarriers, self.alpha_max, self.l_max)
        if self.bits_per_symbol != cfg.bits_per_symbol:
            cfg = replace(cfg, bits_per_symbol=self.bits_per_symbol)
        return cfg

    @property
    def reference_power(self) -> float:
        # noise-free runs read SNR fields against unit reference power
        return self.noise_power if self.noise_power > 0 else 1.0

    @property
    def pilot_power(self) -> float:
        return self.reference_power * 10.0 ** (self.snr_p_db / 10.0)

    def data_power(self, snr_db: float) -> float:
        return self.reference_power * 10.0 ** (snr_db / 10.0)

    def validate(self) -> None:
        cfg = self.afdm_config()
        if self.paths < 1 or self.paths > self.l_max + 1:
            raise ValueError(f"paths must lie in [1, {self.l_max + 1}]")
        limit = max_pilot_count(cfg)
        for count in self.pilot_counts:
            if not 1 <= count <= limit:
                raise ValueError(f"pilot count {count} outside [1, {limit}]")
        if not self.snr_d_db:
            raise ValueError("snr_d_db must not be empty")
        if not self.pilot_counts:
            raise ValueError("pilot_counts must not be empty")
        if not self.iteration_counts or min(self.iteration_counts) < 1:
            raise ValueError("iteration_counts must all be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.noise_power < 0:
            raise ValueError("noise_power must be nonnegative")
        if not 0 < self.mp_damping <= 1:
            raise ValueError("mp_damping must be in (0, 1]")
        if self.mp_iters < 1:
            raise ValueError("mp_iters must be at least 1")

    def canonical(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def load_config(path: str) -> ExperimentConfig:
    """Parse a flat key = value config file (# starts a comment)."""
    values: dict[str, object] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, text = (part.strip() for part in line.split("=", 1))
            if key in values:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            if key in _LIST_FIELDS:
                cast = _LIST_FIELDS[key]
                try:
                    values[key] = tuple(cast(item.strip()) for item in text.split(","))
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad list for {key!r}: {text!r}") from exc
            elif key in _SCALAR_FIELDS:
                cast = _SCALAR_FIELDS[key]
                try:
                    values[key] = cast(text)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad value for {key!r}: {text!r}") from exc
            else:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    required = (set(_LIST_FIELDS) | set(_SCALAR_FIELDS)) - _OPTIONAL_FIELDS
    missing = sorted(required - set(values))
    if missing:
        raise ValueError(f"{path}: missing required keys: {', '.join(missing)}")
    config = ExperimentConfig(**values)
    config.validate()
    return config


# ============================================================
# sweep execution
# ============================================================


@dataclass
class SweepRecord:
    """One CSV row: averaged metrics for a (snr, pilots, iterations) cell."""

    snr_d_db: float
    pilot_count: int
    iterations: int
    trials: int
    mse: float
    ber: float | None
    seed: int
    wall_time: float = field(default=0.0, compare=False)


@dataclass
class PointResult:
    """Per-trial metrics for one (snr, pilot count) point, all iteration depths."""

    snr_d_db: float
    pilot_count: int
    trial_mse: np.ndarray         # (trials, max_iterations)
    trial_bit_errors: np.ndarray  # (trials, max_iterations)
    bits_per_trial: int
    wall_time: float

    def mse_at(self, iterations: int) -> np.ndarray:
        return self.trial_mse[:, iterations - 1]

    def ber_at(self, iterations: int) -> float | None:
        if self.bits_per_trial == 0:
            return None
        total = self.trial_bit_errors.shape[0] * self.bits_per_trial
        return float(self.trial_bit_errors[:, iterations - 1].sum() / total)


def _run_trial(
    receiver: Receiver,
    paths: int,
    seed: int,
    snr_index: int,
    pilot_index: int,
    trial: int,
    depth: int,
) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(
        np.random.SeedSequence((seed, snr_index, pilot_index, trial))
    )
    cfg = receiver.cfg
    channel = sample_channel(rng, paths, cfg)

    if receiver.data_amplitude > 0:
        bits = rng.integers(0, 2, size=cfg.n_subcarriers * cfg.bits_per_symbol)
        data_frame = modulate_bits(bits, receiver.alphabet, receiver.data_amplitude)
    else:
        bits = None
        data_frame = np.zeros(cfg.n_subcarriers, dtype=complex)

    frame = superimpose(receiver.pilot_frame, data_frame)
    received = apply_time_domain(
        idaft(frame, cfg), channel, cfg, noise_power=receiver.noise_power, rng=rng
    )
    report = receiver.run(daft(received, cfg))

    truth = grid_gains(channel, cfg)
    mse_row = np.empty(depth)
    err_row = np.zeros(depth, dtype=np.int64)
    for i in range(depth):
        # early-exited runs hold their last recorded iterate
        j = min(i, report.iterations - 1)
        estimate = report.gain_estimates[j] * report.indicators[j]
        mse_row[i] = float(np.sum(np.abs(estimate - truth) ** 2))
        if bits is not None:
            err_row[i] = int(np.count_nonzero(report.bit_decisions[j] != bits))
    return mse_row, err_row


def run_point(
    config: ExperimentConfig,
    snr_index: int,
    pilot_index: int,
    workers: int = 1,
) -> PointResult:
    """Run all trials for one (snr, pilot count) sweep point."""
    snr_db = config.snr_d_db[snr_index]
    pilot_count = config.pilot_counts[pilot_index]
    cfg = config.afdm_config()
    pilot_cfg = PilotConfig.for_config(cfg, pilot_count, config.pilot_power)
    data_amplitude = float(np.sqrt(config.data_power(snr_db)))
    depth = max(config.iteration_counts)
    receiver = Receiver(
        cfg,
        pilot_cfg,
        prior=ChannelPrior.uniform(cfg),
        data_amplitude=data_amplitude,
        noise_power=config.noise_power,
        max_iters=depth,
        mp_iters=config.mp_iters,
        damping=config.mp_damping,
    )

    start = time.perf_counter()
    args = [
        (receiver, config.paths, config.seed, snr_index, pilot_index, trial, depth)
        for trial in range(config.trials)
    ]
    if workers > 1:
        rows = Parallel(n_jobs=workers)(delayed(_run_trial)(*a) for a in args)
    else:
        rows = [_run_trial(*a) for a in args]
    elapsed = time.perf_counter() - start

    bits_per_trial = cfg.n_subcarriers * cfg.bits_per_symbol if data_amplitude > 0 else 0
    return PointResult(
        snr_d_db=snr_db,
        pilot_count=pilot_count,
        trial_mse=np.stack([r[0] for r in rows]),
        trial_bit_errors=np.stack([r[1] for r in rows]),
        bits_per_trial=bits_per_trial,
        wall_time=elapsed,
    )


def run_sweep(config: ExperimentConfig, workers: int = 1) -> list[SweepRecord]:
    """Run every sweep point and flatten the grid into records."""
    config.validate()
    records = []
    for snr_index in range(len(config.snr_d_db)):
        for pilot_index in range(len(config.pilot_counts)):
            point = run_point(config, snr_index, pilot_index, workers=workers)
            for iterations in config.iteration_counts:
                records.append(
                    SweepRecord(
                        snr_d_db=point.snr_d_db,
                        pilot_count=point.pilot_count,
                        iterations=iterations,
                        trials=config.trials,
                        mse=float(point.mse_at(iterations).mean()),
                        ber=point.ber_at(iterations),
                        seed=config.seed,
                        wall_time=point.wall_time,
                    )
                )
    return records


# ============================================================
# CSV and metadata output
# ============================================================

_CSV_HEADER = ["snr_d_db", "pilot_count", "iterations", "trials", "mse", "ber", "seed"]


def emit_csv(records: list[SweepRecord], path: str) -> None:
    """Write records as CSV with full-precision floats and LF endings."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(",".join(_CSV_HEADER) + "\n")
            for rec in records:
                row = [
                    repr(float(rec.snr_d_db)),
                    str(rec.pilot_count),
                    str(rec.iterations),
                    str(rec.trials),
                    repr(float(rec.mse)),
                    "" if rec.ber is None else repr(float(rec.ber)),
                    str(rec.seed),
                ]
                handle.write(",".join(row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def parse_csv(path: str) -> list[SweepRecord]:
    """Read records back; wall_time is not persisted and comes back as 0."""
    records = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != _CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for row in reader:
            records.append(
                SweepRecord(
                    snr_d_db=float(row[0]),
                    pilot_count=int(row[1]),
                    iterations=int(row[2]),
                    trials=int(row[3]),
                    mse=float(row[4]),
                    ber=None if row[5] == "" else float(row[5]),
                    seed=int(row[6]),
                )
            )
    return records


def write_meta(csv_path: str, config: ExperimentConfig) -> str:
    """Write the companion metadata file next to a CSV output."""
    from afdm_sim import __version__

    meta_path = str(csv_path) + ".meta"
    cfg = config.afdm_config()
    lines = [
        f"config_hash = {config.config_hash()}",
        f"seed = {config.seed}",
        f"c2 = {cfg.c2!r}",
        f"version = {__version__}",
    ]
    with open(meta_path, "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(lines) + "\n")
    return meta_path
