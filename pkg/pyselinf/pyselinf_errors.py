"""
pyselinf specific exceptions

The integer ``code`` of each exception is the process exit code used by the
command-line interface.
"""

EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_NUMERICAL_ERROR = 4


class PyselinfError(Exception):
    """
    Base class for all pyselinf specific exceptions
    """

    def __init__(self, msg=None, code=1):
        super(PyselinfError, self).__init__(msg)
        self.code = code


class PyselinfConfigError(PyselinfError):
    """
    Signals an invalid configuration value or argument combination
    """

    def __init__(self, msg=None, code=EXIT_CONFIG_ERROR):
        super(PyselinfConfigError, self).__init__(msg, code)


class PyselinfNotSupportedError(PyselinfConfigError):
    """
    Signals that an attempted operation or option is not supported
    """


class PyselinfDataError(PyselinfError):
    """
    Error in the input data or in the selected model
    """

    def __init__(self, msg=None, code=EXIT_DATA_ERROR):
        super(PyselinfDataError, self).__init__(msg, code)


class ParseError(PyselinfDataError):
    """
    Malformed input file; the message names file, line and column
    """

    def __init__(self, msg=None, path=None, line=None, column=None):
        super(ParseError, self).__init__(msg)
        self.path = path
        self.line = line
        self.column = column


class ShapeMismatch(PyselinfDataError):
    """
    Array dimensions do not agree
    """


class NonFiniteData(PyselinfDataError):
    """
    Input arrays hold NaN or infinite entries
    """


class EmptyModel(PyselinfDataError):
    """
    The lasso selected no variables
    """


class RankDeficient(PyselinfDataError):
    """
    A design matrix does not have full column rank
    """


class PyselinfNumericalError(PyselinfError):
    """
    Numerical failure in a computation
    """

    def __init__(self, msg=None, code=EXIT_NUMERICAL_ERROR):
        super(PyselinfNumericalError, self).__init__(msg, code)


class NotPositiveDefinite(PyselinfNumericalError):
    """
    A matrix that must be positive-definite is not
    """


class SingularH(PyselinfNumericalError):
    """
    The selection precision matrix H is numerically singular
    """


class NoConvergence(PyselinfNumericalError):
    """
    An iterative solver stopped at its iteration cap
    """


class HessianNotPD(PyselinfNumericalError):
    """
    The observed selective information is not positive-definite
    """


class DegenerateDenominator(PyselinfNumericalError):
    """
    Every SOV weight of a replicate vanished
    """


class EffectiveSampleCollapse(PyselinfNumericalError):
    """
    The effective sample size of importance weights fell below its floor
    """


class InsufficientReplicates(PyselinfNumericalError):
    """
    A standard error was requested from fewer than two replicates
    """


class UnsupportedDimension(PyselinfNotSupportedError):
    """
    Requested point dimension exceeds the direction-number table
    """
