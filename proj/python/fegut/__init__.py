"""GNSS/UWB tightly coupled integration with online temporal calibration."""

from fegut._core import (
    ConfigError,
    EnuFrame,
    TruthTable,
    build_truth_table,
    config_hash,
    default_config_json,
    ecef_to_geodetic,
    geodetic_to_ecef,
    montecarlo,
    run_seed,
    run_traces,
    simulate,
)

__all__ = [
    "ConfigError",
    "EnuFrame",
    "TruthTable",
    "build_truth_table",
    "config_hash",
    "default_config_json",
    "ecef_to_geodetic",
    "geodetic_to_ecef",
    "montecarlo",
    "run_seed",
    "run_traces",
    "simulate",
]
