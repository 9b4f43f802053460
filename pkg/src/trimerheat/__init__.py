"""Heat transport through a three-oscillator loop threaded by a synthetic flux."""

from __future__ import annotations

from .errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    NumericalError,
    QuasiSteadyError,
    StabilityError,
    TrimerError,
    TruncationError,
    UnsupportedConfigurationError,
)
from .model import LinkPhaseAssignment, TrimerParams

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ConvergenceError",
    "DomainError",
    "LinkPhaseAssignment",
    "NumericalError",
    "QuasiSteadyError",
    "StabilityError",
    "TrimerError",
    "TrimerParams",
    "TruncationError",
    "UnsupportedConfigurationError",
]
