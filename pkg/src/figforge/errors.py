"""Exception hierarchy shared across figforge modules."""


class FigforgeError(Exception):
    """Base class for all figforge errors."""


# -- corpus ingestion --------------------------------------------------------

class MissingManifest(FigforgeError):
    """Package directory contains neither article.xml nor article.json."""


class MalformedSource(FigforgeError):
    """Unparseable article source; carries line/position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class DanglingGraphic(FigforgeError):
    """A figure's graphic href names a file missing from the package."""


class DuplicateFigureId(FigforgeError):
    """Two figures in one package share an id."""


class UnknownFigureId(FigforgeError):
    """A figure id was requested that the package does not define."""


# -- figure kit --------------------------------------------------------------

class ImageDecodeError(FigforgeError):
    """Raster bytes could not be decoded."""


class DegenerateImage(FigforgeError):
    """Image smaller than the minimum panel size on some axis."""


class ClassifierFailure(FigforgeError):
    """Panel classifier failed; carries the offending panel_id."""

    def __init__(self, panel_id: str, message: str = ""):
        self.panel_id = panel_id
        super().__init__(message or f"classifier failed on panel {panel_id!r}")


# -- model gateway -----------------------------------------------------------

class GatewayError(FigforgeError):
    """Base class for model-endpoint errors."""


class AuthError(GatewayError):
    """Missing or rejected credential; never retried."""


class RateLimitExhausted(GatewayError):
    """Transient failures persisted through every allowed retry."""


class BackendRefusal(GatewayError):
    """Endpoint returned a non-retryable 4xx refusal."""

    def __init__(self, message: str, status_code: int | None = None):
        self.status_code = status_code
        super().__init__(message)


class MalformedReply(GatewayError):
    """Endpoint body did not parse; raw body attached."""

    def __init__(self, message: str, body: str = ""):
        self.body = body
        super().__init__(message)


# -- instruction forge -------------------------------------------------------

class UnparseableReply(FigforgeError):
    """Model reply did not match the mandated output skeleton."""

    def __init__(self, message: str, reply: str = ""):
        self.reply = reply
        super().__init__(message)


class InsufficientPanels(FigforgeError):
    """Task type needs more panels than the figure provides."""


class FigureRejected(FigforgeError):
    """A figure failed a stage hard enough to be dropped from the run."""


# -- eval suite --------------------------------------------------------------

class EmptyItemSet(FigforgeError):
    """A metric was asked to aggregate zero items."""


# -- quality stats -----------------------------------------------------------

class DegenerateMatrix(FigforgeError):
    """ICC needs at least 2 subjects and 2 raters."""


class EmptyInput(FigforgeError):
    """Statistic requested over an empty collection."""


class IllegalScore(FigforgeError):
    """Score outside the legal {1, 3, 5} set."""


# -- bench curator -----------------------------------------------------------

class InsufficientRecords(FigforgeError):
    """Dataset cannot supply the requested per-category sample; names deficits."""

    def __init__(self, deficits: dict[str, int]):
        self.deficits = dict(deficits)
        short = ", ".join(f"{c} (short {n})" for c, n in sorted(self.deficits.items()))
        super().__init__(f"insufficient records for categories: {short}")


class DuplicateVerdict(FigforgeError):
    """Rater already voted on this item at this revision."""


class TerminalState(FigforgeError):
    """Item is accepted/rejected; no further verdicts allowed."""


class UnknownItem(FigforgeError):
    """No curation item with that id."""


class StaleRevision(FigforgeError):
    """Submitted revision does not match the item's current revision."""


class NoDualVerdicts(FigforgeError):
    """Agreement requested but no item carries two verdicts."""


class QuotaUnmet(FigforgeError):
    """Benchmark export blocked; carries the per-category deficit map."""

    def __init__(self, deficits: dict[str, int]):
        self.deficits = dict(deficits)
        short = ", ".join(f"{c} (need {n} more)" for c, n in sorted(self.deficits.items()))
        super().__init__(f"quota unmet: {short}")


# -- config / CLI ------------------------------------------------------------

class ConfigError(FigforgeError):
    """RunConfig file missing, malformed, or violating its invariants."""
