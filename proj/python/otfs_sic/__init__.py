"""Zero-padded OTFS simulator with SIC-MMSE detection (Python front end)."""

from ._core import (
    ConfigError,
    OtfsError,
    coherence_symbols,
    complexity_formulas,
    config_json,
    idzt,
    isfft_heisenberg,
    recycling_span,
    run_ber,
    run_mse_trace,
    run_sinr_trace,
    run_turbo,
)

__all__ = [
    "ConfigError",
    "OtfsError",
    "coherence_symbols",
    "complexity_formulas",
    "config_json",
    "idzt",
    "isfft_heisenberg",
    "recycling_span",
    "run_ber",
    "run_mse_trace",
    "run_sinr_trace",
    "run_turbo",
]
