"""Spatially encoded single-photon links: channel model, information metrics,
Gray/LDPC coding and end-to-end experiments."""

from .channel import (
    ChannelMatrix,
    DetectionEvent,
    GridSpec,
    InvalidDimensionError,
    NoiseModel,
    PointSpread,
    bin_hit_probability,
    bin_to_symbol,
    build_channel_matrix,
    grid_from_config,
    read_counts_csv,
    sample_detections,
    symbol_to_bin,
    write_channel_matrix_csv,
    write_counts_csv,
)
from .info import (
    DEFAULT_LOSS_CHAIN,
    JointDistribution,
    LossChain,
    expected_mutual_information,
    joint_from_counts,
    max_mutual_information,
    mutual_information,
    sent_photon_capacity,
)
from .ldpc import (
    DecoderConfig,
    DecodeResult,
    LdpcCode,
    ldpc_decode,
    ldpc_encode,
    llr_from_hard_bits,
    load_dvbs2_rate12,
    load_parity_table,
    parity_syndrome,
)
from .link import (
    ExperimentReport,
    estimate_raw_ber,
    run_coded_experiment,
    run_full_pipeline,
    run_uncoded_experiment,
    sweep_bin_sizes,
)
from .mapping import (
    BitFrame,
    GrayMap,
    bit_error_rate,
    bits_to_symbol,
    bits_to_symbols,
    gray_decode,
    gray_encode,
    pack_bits_to_symbols,
    symbol_to_bits,
    symbols_to_bits,
    unpack_symbols_to_bits,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # channel
    "ChannelMatrix", "DetectionEvent", "GridSpec", "InvalidDimensionError",
    "NoiseModel", "PointSpread", "bin_hit_probability", "bin_to_symbol",
    "build_channel_matrix", "grid_from_config", "read_counts_csv",
    "sample_detections", "symbol_to_bin", "write_channel_matrix_csv",
    "write_counts_csv",
    # info
    "DEFAULT_LOSS_CHAIN", "JointDistribution", "LossChain",
    "expected_mutual_information", "joint_from_counts",
    "max_mutual_information", "mutual_information", "sent_photon_capacity",
    # ldpc
    "DecoderConfig", "DecodeResult", "LdpcCode", "ldpc_decode", "ldpc_encode",
    "llr_from_hard_bits", "load_dvbs2_rate12", "load_parity_table",
    "parity_syndrome",
    # link
    "ExperimentReport", "estimate_raw_ber", "run_coded_experiment",
    "run_full_pipeline", "run_uncoded_experiment", "sweep_bin_sizes",
    # mapping
    "BitFrame", "GrayMap", "bit_error_rate", "bits_to_symbol",
    "bits_to_symbols", "gray_decode", "gray_encode", "pack_bits_to_symbols",
    "symbol_to_bits", "symbols_to_bits", "unpack_symbols_to_bits",
]
