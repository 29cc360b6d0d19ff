"""Exception types shared across the pipeline."""


class RegcheckError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RegcheckError):
    """Invalid user-supplied settings, dimensions, or task parameters."""


# --- ingestion ---

class MalformedId(ValidationError):
    """Registry identifier does not match the required pattern."""


class RegistryNotFound(RegcheckError):
    """The registry has no study for the given identifier."""


class RegistryUnavailable(RegcheckError):
    """The registry could not be reached after retries."""


class EmptyRecord(RegcheckError):
    """A registry record contained no non-empty fields."""


class ParserServiceUnavailable(RegcheckError):
    """The remote document parser could not be reached."""


class UnparseableDocument(RegcheckError):
    """No extractable text was found in the uploaded document."""


class UnsupportedFormat(ValidationError):
    """The uploaded document format is not supported."""


# --- preprocessing ---

class TargetStudyNotFound(RegcheckError):
    """No section heading matched the requested study label."""


# --- embedding / retrieval ---

class ProviderUnavailable(RegcheckError):
    """An embedding or judgement provider failed after retries."""


class DimensionMismatch(RegcheckError):
    """Embedding vectors of inconsistent dimensionality were combined."""


class EmptyPartition(RegcheckError):
    """A vector store partition holds no chunks of the requested kind."""


# --- judgement ---

class SchemaViolation(RegcheckError):
    """A provider response did not conform to the structured output schema."""


# --- reporting ---

class StorageUnavailable(RegcheckError):
    """The report store could not be read or written."""


class UnknownReport(RegcheckError):
    """No report exists for the given identifier."""


class DuplicateDimension(RegcheckError):
    """An analysis for this dimension was already appended."""


class ReportNotRunning(RegcheckError):
    """The report is not in the running state."""
