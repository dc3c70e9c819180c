"""Link-level simulator for AFDM with superimposed-pilot channel estimation."""

__version__ = "0.1.0"

from .channel import (
    ChannelPath,
    ChannelRealization,
    SparseChannel,
    apply_time_domain,
    delay_doppler_to_index,
    effective_channel,
    effective_matrix,
    grid_gains,
    index_to_delay_doppler,
    sample_channel,
    subchannel_matrix,
    subchannel_matrix_from_factors,
    subchannel_offset,
    subchannel_weights,
)
from .daft import AfdmConfig, daft, daft_matrix, default_params, idaft
from .detection import (
    DetectionResult,
    SymbolAlphabet,
    bits_from_indices,
    bits_to_indices,
    cancel_pilots,
    demodulate_symbols,
    exact_map_oracle,
    modulate_bits,
    mp_detect,
)
from .estimation import (
    ChannelPrior,
    EstimationResult,
    assemble_effective_channel,
    default_threshold,
    effective_noise_variance,
    frame_response_matrix,
    mmse_estimate,
    threshold_paths,
)
from .harness import (
    ExperimentConfig,
    PointResult,
    SweepRecord,
    emit_csv,
    load_config,
    parse_csv,
    run_point,
    run_sweep,
    write_meta,
)
from .pilots import (
    PilotConfig,
    build_pilot_vector,
    guard_width,
    max_pilot_count,
    superimpose,
)
from .receiver import Receiver, ReceiverReport, run_receiver

__all__ = [
    "AfdmConfig",
    "ChannelPath",
    "ChannelPrior",
    "ChannelRealization",
    "DetectionResult",
    "EstimationResult",
    "ExperimentConfig",
    "PilotConfig",
    "PointResult",
    "Receiver",
    "ReceiverReport",
    "SparseChannel",
    "SweepRecord",
    "SymbolAlphabet",
    "apply_time_domain",
    "assemble_effective_channel",
    "bits_from_indices",
    "bits_to_indices",
    "build_pilot_vector",
    "cancel_pilots",
    "daft",
    "daft_matrix",
    "default_params",
    "default_threshold",
    "delay_doppler_to_index",
    "demodulate_symbols",
    "effective_channel",
    "effective_matrix",
    "effective_noise_variance",
    "emit_csv",
    "exact_map_oracle",
    "frame_response_matrix",
    "grid_gains",
    "guard_width",
    "idaft",
    "index_to_delay_doppler",
    "load_config",
    "max_pilot_count",
    "mmse_estimate",
    "modulate_bits",
    "mp_detect",
    "parse_csv",
    "run_point",
    "run_receiver",
    "run_sweep",
    "sample_channel",
    "subchannel_matrix",
    "subchannel_matrix_from_factors",
    "subchannel_offset",
    "subchannel_weights",
    "superimpose",
    "threshold_paths",
    "write_meta",
]
