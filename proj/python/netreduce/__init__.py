"""Reaction-network reduction by parameter information ranking."""

from ._core import (
    InformationRanking,
    ModelError,
    Network,
    PipelineResult,
    PipelineRow,
    TimeSeries,
    fim_diagonal,
    kurtz_scale,
    load_model,
    parse_model,
    run_pipeline,
    simulate,
)

__all__ = [
    "InformationRanking",
    "ModelError",
    "Network",
    "PipelineResult",
    "PipelineRow",
    "TimeSeries",
    "fim_diagonal",
    "kurtz_scale",
    "load_model",
    "parse_model",
    "run_pipeline",
    "simulate",
]
