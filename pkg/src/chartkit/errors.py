"""Exception hierarchy shared across chartkit modules."""


class ChartKitError(Exception):
    """Base class for all chartkit errors."""


# --- table parsing / modeling ---

class ParseError(ChartKitError):
    """Input bytes/text do not conform to the declared format."""


class SchemaError(ChartKitError):
    """Structurally invalid table: ragged rows, duplicate or empty headers."""


class EmptyTable(ChartKitError):
    """Table has no data rows or no columns."""


class NoChartApplicable(ChartKitError):
    """No chart type can visualize the table (e.g. all-text)."""


# --- rendering ---

class RenderOverflow(ChartKitError):
    """Labels or layout cannot fit at the requested image size."""


class UnsupportedCombination(ChartKitError):
    """Chart type incompatible with the data (e.g. pie with negatives)."""


class NotInvertible(ChartKitError):
    """Mark geometry underdetermines the data value."""


# --- visual prompts ---

class DegenerateBBox(ChartKitError):
    """Target bounding box has zero area."""


# --- QA generation ---

class TemplateInapplicable(ChartKitError):
    """No question template fits the table/chart combination."""


class BackendUnavailable(ChartKitError):
    """External generation backend cannot be reached or is unconfigured."""


class ValidationFailed(ChartKitError):
    """Externally generated answer contradicts the source table."""


# --- dataset records ---

class IoError(ChartKitError):
    """Filesystem-level read/write failure."""


class SchemaVersionMismatch(ChartKitError):
    """Record file was written with an incompatible schema version."""


class ForbiddenTaskForStage(ChartKitError):
    """Task is not admissible for the training stage."""


# --- metrics / evaluation ---

class UnknownTask(ChartKitError):
    """Evaluation task name not recognized."""


class MalformedPredictions(ChartKitError):
    """Predictions file contains an unparseable or incomplete line."""


class EmptyCorpus(ChartKitError):
    """BLEU called with no hypothesis/reference pairs."""


# --- MoE numerics ---

class NonFiniteInput(ChartKitError):
    """Matrix contains NaN or infinite entries."""


class TieTooClose(ChartKitError):
    """An argmax tie would flip under the finite-difference step."""


class ZeroProbabilityTarget(ChartKitError):
    """A target token was assigned zero probability."""
