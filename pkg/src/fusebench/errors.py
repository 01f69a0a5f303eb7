"""Exception hierarchy for the engine.

Every error raised on a contract violation is a FusebenchError subclass so
callers (and the CLI) can distinguish bad input from genuine bugs.
"""


class FusebenchError(Exception):
    """Base class for all engine errors."""


class ConfigError(FusebenchError):
    """Invalid configuration: overlapping split ranges, bad sweep step, ..."""


class IngestError(FusebenchError):
    """Input data violates an ingest invariant (zero vector, uncovered subject)."""


class GeometryError(FusebenchError):
    """Degenerate geometry: coincident eye keypoints, pupil >= iris radius, ..."""


class ProtocolError(FusebenchError):
    """Evaluation protocol misuse: empty score lists, misaligned tables."""


class DataIntegrityError(FusebenchError):
    """A referenced sample is missing and was not flagged as such."""
