"""Exception types shared across the package."""


class TextcropError(Exception):
    """Base class for all package-specific errors."""


class FormatError(TextcropError):
    """A binary or JSON artifact is malformed (bad magic, version, truncation)."""


class ShapeError(TextcropError):
    """Array dimensions are inconsistent with the declared geometry."""


class RangeError(TextcropError):
    """An index window falls outside the available layers."""


class EmptyInput(TextcropError):
    """An operation that needs at least one element received none."""


class DegenerateBox(TextcropError):
    """A box has zero area after clipping."""


class DimensionMismatch(TextcropError):
    """Embedding vectors or id sidecars disagree on counts or dimensionality."""


class ZeroVector(TextcropError):
    """An embedding vector has zero norm and cannot be normalized."""


class DuplicateResponse(TextcropError):
    """More than one response was supplied for the same sample and mode."""


class UnknownSample(TextcropError):
    """A response references a sample id missing from the manifest."""


class UnsupportedAngle(TextcropError):
    """Rotation is only defined for 90, 180 and 270 degrees."""


class JudgeTransportError(TextcropError):
    """The judge endpoint stayed unreachable after retries."""


class JudgeParseError(TextcropError):
    """The judge verdict could not be parsed as YES/NO after a reprompt."""
