"""Behavioural model of a spin-based computing-in-memory array."""

from ._core import (
    Collapse,
    ConfigError,
    CurrentLevelModel,
    Error,
    InvalidShift,
    MappingViolation,
    ParseError,
    SenseConfig,
    UnknownOp,
    adapt_references,
    analytic_decode_failure,
    classification_accuracy,
    collapse_probability,
    config_hash,
    default_config,
    mc_decode_failure,
    run_program,
)

__all__ = [name for name in dir() if not name.startswith("_")]
