"""Exception hierarchy shared by the engine modules."""


class EngineError(Exception):
    """Base class for all engine errors; CLI maps these to exit code 1."""


# label / prediction parsing
class MalformedLine(EngineError):
    pass


class OutOfRange(EngineError):
    pass


class UnknownClass(EngineError):
    pass


class ModeMismatch(EngineError):
    pass


class MissingConfidence(EngineError):
    pass


class ConfidenceOutOfRange(EngineError):
    pass


# dataset splitting
class InvalidFractions(EngineError):
    pass


# tiling
class MissingGSD(EngineError):
    pass


class TileLargerThanImage(EngineError):
    pass


class InvalidGrid(EngineError):
    pass


class OutOfBounds(EngineError):
    pass


# masks / evaluation
class DimensionMismatch(EngineError):
    pass
