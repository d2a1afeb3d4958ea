"""
Exception hierarchy for the sequential channel estimation tools.
Numerical kernels raise the narrow subclasses; the CLI reports any SeqCEError
as a diagnostic and exits non-zero.
"""

from typing import Optional


class SeqCEError(Exception):
    """Base exception for seqce errors."""
    pass


class BesselDomainError(SeqCEError, ValueError):
    """Raised for negative or non-finite Bessel arguments."""
    pass


class BesselOverflowError(SeqCEError, OverflowError):
    """Raised when an unscaled Bessel value would overflow a 64-bit float."""
    pass


class DimensionError(SeqCEError, ValueError):
    """Raised when vector and matrix sizes disagree."""
    pass


class CorrelationError(SeqCEError, ValueError):
    """Raised for matrices that are not Hermitian PSD or cannot be factorized."""
    pass


class PhaseUndefinedError(SeqCEError, ValueError):
    """Raised when the phase of a zero inner product is requested."""
    pass


class ChannelModelError(SeqCEError, ValueError):
    """Raised for invalid channel model parameters."""
    pass


class WaveformError(SeqCEError, ValueError):
    """Raised for invalid OFDM waveform inputs; `attribute` names the offending setting."""

    def __init__(self, message: str, attribute: Optional[str] = None):
        self.attribute = attribute
        super().__init__(message)



class ConfigError(SeqCEError, ValueError):
    """Raised when an experiment file cannot be parsed."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.field = field
        self.line = line
        location = ""
        if field is not None:
            location += f"field '{field}'"
        if line is not None:
            location += f"{' ' if location else ''}(line {line})"
        super().__init__(f"{location}: {message}" if location else message)
