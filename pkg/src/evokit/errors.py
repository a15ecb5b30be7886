"""Exception hierarchy shared by all evokit modules."""


class EvokitError(Exception):
    """Base class for every error raised by evokit."""


class DimensionMismatch(EvokitError, ValueError):
    pass


class HermiticityError(EvokitError, ValueError):
    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class UnitarityError(EvokitError, ValueError):
    pass


class DegenerateGapError(EvokitError, ValueError):
    pass


class SingleGroupError(EvokitError, ValueError):
    pass


class ContourFailure(EvokitError, RuntimeError):
    pass


class OrderOverflow(EvokitError, ValueError):
    pass


class QuadratureFailure(EvokitError, RuntimeError):
    pass


class AverageNonConvergent(EvokitError, RuntimeError):
    pass


class GridTooCoarse(EvokitError, RuntimeError):
    pass


class PeriodMismatch(EvokitError, ValueError):
    pass


class ModeMismatch(EvokitError, ValueError):
    pass


class NoConvergence(EvokitError, RuntimeError):
    pass


class InsufficientData(EvokitError, ValueError):
    pass


class SchemaError(EvokitError, ValueError):
    """Config document does not match the schema.

    ``path`` is the dotted/indexed location of the offending field.
    """

    def __init__(self, path, expectation):
        super().__init__(f"{path}: {expectation}")
        self.path = path
        self.expectation = expectation


class IoError(EvokitError, OSError):
    pass
