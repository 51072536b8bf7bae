"""Exception types raised across the package."""


class OtcError(Exception):
    """Base class for all package errors."""


# network construction and kernels

class NonPositiveWeight(OtcError):
    pass


class IndexOutOfRange(OtcError):
    pass


class AsymmetricUndirected(OtcError):
    pass


class ZeroOutDegree(OtcError):
    pass


class NotStronglyConnected(OtcError):
    pass


class NumericalNonConvergence(OtcError):
    pass


class ModeInvalidForDirected(OtcError):
    pass


class DirectedInput(OtcError):
    pass


# cost construction

class MissingAttributes(OtcError):
    pass


class DimensionMismatch(OtcError):
    pass


# optimal transport

class MarginalInvalid(OtcError):
    pass


class NumericalUnderflow(OtcError):
    pass


# transition-coupling solvers

class IterationCapExceeded(OtcError):
    pass


class InstanceTooLarge(OtcError):
    pass


class PreconditionViolated(OtcError):
    pass


# factor maps

class NotSurjective(OtcError):
    pass


class NotAFactor(OtcError):
    pass


class CommonFactorMismatch(OtcError):
    pass


class GenerationFailed(OtcError):
    pass


# benchmarking

class LabelMismatch(OtcError):
    pass


class DegenerateSplit(OtcError):
    pass


# file formats

class ParseError(OtcError):
    pass


class InvariantViolation(OtcError):
    pass


class MissingFile(OtcError):
    pass


class CrossGraphEdge(OtcError):
    pass
