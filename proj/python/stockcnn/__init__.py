"""Candlestick-chart trend classification: data, charts, splits, metrics and models."""

from ._core import (
    VARIANTS,
    Error,
    Model,
    Series,
    __version__,
    build_samples,
    config_hash,
    confusion,
    ema,
    gaf,
    label,
    load_csv,
    macd,
    parameter_count,
    parse_csv,
    render,
    run_matrix,
    sample_count,
    scores,
    sma,
    split_automatic,
    split_random,
    split_time,
    validate,
)

__all__ = [
    "VARIANTS",
    "Error",
    "Model",
    "Series",
    "__version__",
    "build_samples",
    "config_hash",
    "confusion",
    "ema",
    "gaf",
    "label",
    "load_csv",
    "macd",
    "parameter_count",
    "parse_csv",
    "render",
    "run_matrix",
    "sample_count",
    "scores",
    "sma",
    "split_automatic",
    "split_random",
    "split_time",
    "validate",
]
