"""Noise recycling across orthogonal channels with Gauss-Markov noise:
code construction, guessing-based decoding, recycling schemes, achievable
rates, and a Monte-Carlo BLER harness."""

from .channel import (
    GmParams, NoiseMatrix, ChannelBundle,
    gm_noise_sample, bpsk_modulate, bpsk_demodulate, ebn0_to_sigma, transmit,
    snap, scale_by_rho,
)
from .codes import (
    LinearCode, CrcSpec, CaPolarSpec, CRC8, CRC11,
    rlc, systematic_code, polar_transform,
    ca_polar_spec, ca_polar_encode, ca_polar_code, ca_polar_extract,
)
from .grand import (
    DecodeOutcome, DECODERS,
    grand_hard, orbgrand, sgrandab, ml_oracle, all_codewords, correlation_metric,
)
from .recycling import (
    RecyclingResult, estimate_noise, recycle,
    decode_independent, decode_predetermined, decode_racing,
)
from .rate_region import (
    RatePoint, capacity, recycled_capacity, average_rate, region_table,
    write_region_csv,
)
from .harness import (
    ExperimentConfig, BlerPoint, ConfigError,
    parse_config, load_config, run_experiment, emit_results,
    wilson_interval, bler_curve, crossing_db, horizontal_gain,
)

__version__ = "0.1.0"

__all__ = [
    "GmParams", "NoiseMatrix", "ChannelBundle",
    "gm_noise_sample", "bpsk_modulate", "bpsk_demodulate", "ebn0_to_sigma",
    "transmit", "snap", "scale_by_rho",
    "LinearCode", "CrcSpec", "CaPolarSpec", "CRC8", "CRC11",
    "rlc", "systematic_code", "polar_transform",
    "ca_polar_spec", "ca_polar_encode", "ca_polar_code", "ca_polar_extract",
    "DecodeOutcome", "DECODERS",
    "grand_hard", "orbgrand", "sgrandab", "ml_oracle", "all_codewords",
    "correlation_metric",
    "RecyclingResult", "estimate_noise", "recycle",
    "decode_independent", "decode_predetermined", "decode_racing",
    "RatePoint", "capacity", "recycled_capacity", "average_rate",
    "region_table", "write_region_csv",
    "ExperimentConfig", "BlerPoint", "ConfigError",
    "parse_config", "load_config", "run_experiment", "emit_results",
    "wilson_interval", "bler_curve", "crossing_db", "horizontal_gain",
]
