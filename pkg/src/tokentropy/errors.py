"""Exception hierarchy shared across the package.

Everything raised on purpose derives from TokentropyError so callers can
catch one base class at API boundaries.
"""


class TokentropyError(Exception):
    """Base class for all package errors."""


class InvalidLogits(TokentropyError):
    """Raised when a logit vector contains NaN or infinite entries."""


class EmptySupport(TokentropyError):
    """Raised when a distribution would have no support entries."""


class EmptySequence(TokentropyError):
    """Raised when an operation requires at least one token position."""


class AlignmentError(TokentropyError):
    """Raised when token texts and distributions disagree in length."""


class ParseError(TokentropyError):
    """Raised on a malformed record line; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SequenceGapError(ParseError):
    """Raised when record positions are not 0, 1, 2, ... without gaps."""


class SelectionMissingError(TokentropyError):
    """Raised when the selected token is not part of the support."""


class MassOverflowError(TokentropyError):
    """Raised when top-k probability mass exceeds 1 beyond tolerance."""


class BackendError(TokentropyError):
    """Raised on a non-2xx backend response; carries status and payload."""

    def __init__(self, status: int, fragment: str = ""):
        super().__init__(f"backend returned HTTP {status}: {fragment[:200]}")
        self.status = status
        self.fragment = fragment


class BackendTimeout(TokentropyError):
    """Raised when the backend does not answer within the timeout."""


class UnsupportedBackend(TokentropyError):
    """Raised when the backend response lacks per-token logprobs."""


class NoData(TokentropyError):
    """Raised when a monitor operation needs a non-empty window."""


class NoBaseline(TokentropyError):
    """Raised when drift is scored before a baseline was frozen."""
