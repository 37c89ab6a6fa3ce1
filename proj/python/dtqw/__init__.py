"""Discrete-time quantum walk engine.

Split-step walk protocols on 1D rings and 2D lattices: quasienergy bands,
topological invariants, domain-wall edge states, and stroboscopic
decoherence. The heavy lifting lives in the compiled extension; this package
re-exports its public surface.
"""

from ._core import (
    ConfigError,
    GapClosedError,
    InvariantViolation,
    bands,
    invariants,
    list_presets,
    parse_angle,
    preset_config,
    run_file,
    run_preset,
    run_text,
    validate_file,
    version,
    wall_state_json,
    winding,
)

__version__ = version()

__all__ = [
    "ConfigError",
    "GapClosedError",
    "InvariantViolation",
    "bands",
    "invariants",
    "list_presets",
    "parse_angle",
    "preset_config",
    "run_file",
    "run_preset",
    "run_text",
    "validate_file",
    "version",
    "wall_state_json",
    "winding",
]
