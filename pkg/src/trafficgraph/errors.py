"""Exception hierarchy shared across the package."""


class TrafficGraphError(Exception):
    """Base class for all errors raised by this package."""


class ScenarioParseError(TrafficGraphError):
    """Malformed scenario document (carries line/column context when known)."""


class ScenarioValidationError(TrafficGraphError):
    """Structurally valid document violating a model invariant (dangling refs etc.)."""


class GeometryError(TrafficGraphError):
    """Degenerate or invalid geometric input."""


class SchemaError(TrafficGraphError):
    """Invalid feature-channel schema (duplicate names, bad widths)."""


class GraphInvariantError(TrafficGraphError):
    """A graph instance violates a structural invariant."""


class MergeError(TrafficGraphError):
    """Graphs cannot be merged into a temporal window."""


class PipelineError(TrafficGraphError):
    """A scenario transform or postprocessor failed (names the element)."""


class ExtractionError(TrafficGraphError):
    """Failure during feature extraction or graph assembly."""


class SerializationError(TrafficGraphError):
    """Corrupt, truncated, or unsupported sample payload."""


class ConfigError(TrafficGraphError):
    """Invalid run or extraction configuration.

    ``problems`` lists every individual validation failure so callers can
    report them all at once.
    """

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems) if problems else [message]


class DatasetError(TrafficGraphError):
    """Dataset-level failure (missing manifest, checksum mismatch, ...)."""
