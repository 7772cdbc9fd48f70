"""Exception hierarchy shared by all polysphere modules."""


class PolysphereError(Exception):
    """Base class for every error raised by the library."""


class InvalidBall(PolysphereError, ValueError):
    """The vertex list does not describe a valid symmetric polytope ball."""


class NotSymmetric(InvalidBall):
    pass


class NotFullDimensional(InvalidBall):
    pass


class RedundantVertex(InvalidBall):
    def __init__(self, index: int, reason: str = "not an extreme point"):
        self.index = index
        super().__init__(f"vertex {index} is redundant: {reason}")


class DimensionMismatch(PolysphereError, ValueError):
    pass


class ZeroVector(PolysphereError, ValueError):
    pass


class NotSmoothPoint(PolysphereError, ValueError):
    pass


class EvaluatorFailure(PolysphereError):
    pass


class SamplingExhausted(PolysphereError):
    pass


class HypothesisViolated(PolysphereError, ValueError):
    pass


class NoStabilization(PolysphereError):
    pass


class InconsistentPairs(PolysphereError):
    pass


class SpanViolation(PolysphereError):
    pass


class BasePointMismatch(PolysphereError, ValueError):
    pass


class SingularSampleSet(PolysphereError):
    pass


class VerificationFailed(PolysphereError):
    pass


class MissingPiece(PolysphereError, KeyError):
    pass


class ParseError(PolysphereError, ValueError):
    pass


class ValidationError(PolysphereError, ValueError):
    """A well-formed file whose content fails ball or map validation."""
