"""Exception and warning types shared across the package.

Every fit/corpus failure carries a short machine-readable ``reason`` code so
that batch stages can turn exceptions into report entries without string
matching.
"""
from __future__ import annotations


class RumorSpreadError(Exception):
    reason = "error"


class InvalidParams(RumorSpreadError, ValueError):
    reason = "invalid_params"


class NonFiniteState(RumorSpreadError, ArithmeticError):
    """Raised when an integrated density leaves its admissible range."""

    reason = "non_finite_state"


# --- influence fitting -----------------------------------------------------

class FitError(RumorSpreadError):
    reason = "fit_error"


class WindowOutOfRange(FitError):
    reason = "window_out_of_range"


class NonPositiveResidual(FitError):
    reason = "non_positive_residual"


class DegenerateSeries(FitError):
    reason = "degenerate"


class ZeroTraffic(FitError):
    reason = "zero_traffic"


class NoDecayWarning(UserWarning):
    """Fitted attenuation is not negative; the result is still returned."""


# --- features ---------------------------------------------------------------

class EmptyWindow(RumorSpreadError):
    reason = "empty_window"


class DateNotCovered(RumorSpreadError, KeyError):
    reason = "date_not_covered"

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class TooFewRows(RumorSpreadError, ValueError):
    reason = "too_few_rows"


class ClampWarning(UserWarning):
    """Held-out values fell outside the fitted normalization range."""


class FeatureError(RumorSpreadError):
    """Wraps a sub-operation failure with the offending rumor id."""

    def __init__(self, rumor_id: str, cause: Exception):
        self.rumor_id = rumor_id
        self.cause = cause
        self.reason = getattr(cause, "reason", "error")
        super().__init__(f"rumor {rumor_id!r}: {cause}")


# --- regression ------------------------------------------------------------

class RankDeficient(RumorSpreadError, ValueError):
    reason = "rank_deficient"


class DimensionMismatch(RumorSpreadError, ValueError):
    reason = "dimension_mismatch"


class ConstantSeries(RumorSpreadError, ValueError):
    reason = "constant_series"


# --- corpus ----------------------------------------------------------------

class ParseError(RumorSpreadError, ValueError):
    reason = "parse_error"

    def __init__(self, message: str, *, path: str | None = None,
                 line: int | None = None, field: str | None = None):
        self.path = path
        self.line = line
        self.field = field
        where = ":".join(str(p) for p in (path, line) if p is not None)
        prefix = f"{where}: " if where else ""
        suffix = f" (field {field!r})" if field else ""
        super().__init__(f"{prefix}{message}{suffix}")


class MissingSeries(RumorSpreadError, LookupError):
    reason = "missing_series"

    def __init__(self, entity: str, rumor_id: str | None = None):
        self.entity = entity
        self.rumor_id = rumor_id
        msg = f"no search series for entity {entity!r}"
        if rumor_id is not None:
            msg += f" (referenced by rumor {rumor_id!r})"
        super().__init__(msg)


class DuplicateId(RumorSpreadError, ValueError):
    reason = "duplicate_id"


class SchemaViolation(RumorSpreadError, ValueError):
    reason = "schema_violation"
