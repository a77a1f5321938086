"""Reef survey planning, rugosity and fish-hotspot mapping."""

from ._core import (
    ConfigError,
    DomainError,
    DuplicateError,
    FormatError,
    Grid,
    IndexError,
    MappingError,
    PoseError,
    PreconditionError,
    RangeError,
    ReefmapError,
    ShapeError,
    TriangleMesh,
    TruncationError,
    correlate,
    evaluate,
    evaluate_dirs,
    footprint_dims,
    hotspot_peaks,
    load_mesh,
    parse_ply,
    plan_lawnmower,
    run_end_to_end,
    rugosity_grid,
    sample_annotation_frames,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
