"""
Exception hierarchy for lung-attr-seg.

Value-like failures subclass ``ValueError`` and missing inputs subclass
``FileNotFoundError`` so callers that only catch builtins keep working.
The CLI maps ``ConfigError`` to exit code 2 and every other
``LungSegError`` to exit code 1.
"""

from __future__ import annotations

from typing import Any, Tuple


class LungSegError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(LungSegError, ValueError):
    """A configuration value is missing, unknown or out of range."""


class ShapeMismatch(LungSegError, ValueError):
    """Two arrays that must agree in shape do not."""

    def __init__(self, what: str, expected: Tuple[int, ...] | Any, got: Tuple[int, ...] | Any) -> None:
        self.what = what
        self.expected = tuple(expected) if not isinstance(expected, str) else expected
        self.got = tuple(got) if not isinstance(got, str) else got
        super().__init__(f"{what}: expected shape {self.expected}, got {self.got}")


class InvalidLabels(LungSegError, ValueError):
    """An attribute label vector does not fit the taxonomy."""


class UnparseableClause(LungSegError, ValueError):
    """A description clause matches no known attribute value."""

    def __init__(self, clause_index: int, clause_text: str, reason: str = "") -> None:
        self.clause_index = clause_index
        self.clause_text = clause_text
        msg = f"clause {clause_index} is unparseable: {clause_text!r}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class MissingClause(LungSegError, ValueError):
    """A description has fewer comma-separated clauses than required."""

    def __init__(self, found: int, required: int, text: str = "") -> None:
        self.found = found
        self.required = required
        super().__init__(
            f"expected {required} comma-separated clauses, found {found}: {text!r}"
        )


class EmptyText(LungSegError, ValueError):
    """A text to encode contains no tokens."""


class SampleParseError(LungSegError, ValueError):
    """A dataset row failed to parse; carries the sample id."""

    def __init__(self, sample_id: str, cause: Exception) -> None:
        self.sample_id = sample_id
        self.cause = cause
        super().__init__(f"sample {sample_id!r}: {cause}")


class MissingFile(LungSegError, FileNotFoundError):
    """A file referenced by a sample does not exist."""

    def __init__(self, sample_id: str, path: Any) -> None:
        self.sample_id = sample_id
        self.path = str(path)
        super().__init__(f"sample {sample_id!r}: file not found: {self.path}")


class MissingGroundTruth(LungSegError, ValueError):
    """Evaluation was requested on a sample without a ground-truth mask."""

    def __init__(self, sample_id: str) -> None:
        self.sample_id = sample_id
        super().__init__(f"sample {sample_id!r} has no ground-truth mask")


class NonFiniteLoss(LungSegError, FloatingPointError):
    """A loss term evaluated to NaN or Inf; the optimisation step is aborted."""

    def __init__(self, term: str, value: float) -> None:
        self.term = term
        self.value = value
        super().__init__(f"non-finite loss term {term} = {value}")


class CheckpointMismatch(LungSegError, ValueError):
    """A checkpoint does not match the model it is being loaded into."""
