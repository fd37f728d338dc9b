"""Shapes-to-cartoon translation: layouts, toon synthesis, fitting and inference."""

from ._core import (
    Error,
    IoError,
    Model,
    NumericError,
    ParseError,
    ValidationError,
    build_corpus,
    cli,
    expand_corpus,
    fit_layout,
    frechet_distance,
    frechet_distance_samples,
    rasterize,
    render_toon,
    sample_layout,
    validate_layout,
)

__all__ = [
    "Error",
    "IoError",
    "Model",
    "NumericError",
    "ParseError",
    "ValidationError",
    "build_corpus",
    "cli",
    "expand_corpus",
    "fit_layout",
    "frechet_distance",
    "frechet_distance_samples",
    "rasterize",
    "render_toon",
    "sample_layout",
    "validate_layout",
]
