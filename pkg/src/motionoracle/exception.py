"""
Exceptions for motionoracle
"""


class MotionOracleError(Exception):
    """
    Base motionoracle exception
    """
    pass


class MotionOracleConfigurationError(MotionOracleError):
    """
    motionoracle configuration error
    """
    pass


class MotionOracleInputError(MotionOracleError):
    """
    Raised when user supplied data (streams, matrices, models, scenarios)
    can not be used. The command line maps it to exit code 1.
    """
    pass


class MotionOracleContractError(MotionOracleError):
    """
    Raised when a caller breaks a precondition of the library, e.g. asking
    for the distance to a marker that was never observed. The command line
    maps it to exit code 2.
    """
    pass


class FrameFormatError(MotionOracleInputError):
    """
    A line of a frame stream could not be parsed.
    """

    def __init__(self, message, lineno=None):
        """
        :type message: str
        :type lineno: int | None

        :param message: what is wrong with the line
        :param lineno: 1-based line number in the source, if known
        """
        if lineno is not None:
            message = "line {lineno}: {message}".format(lineno=lineno, message=message)
        super().__init__(message)
        self.lineno = lineno


class FrameOrderError(MotionOracleInputError):
    """
    Frame indices must strictly increase along a stream.
    """
    pass


class CostMatrixError(MotionOracleInputError):
    """
    A cost matrix holds a negative or non-finite entry, or is not 2-D.
    """
    pass


class DimensionError(MotionOracleInputError):
    """
    A feature vector does not match the dimensionality of the oracle.
    """
    pass


class ModelFormatError(MotionOracleInputError):
    """
    A serialized oracle model is malformed, truncated or of another version.
    """
    pass


class ScenarioError(MotionOracleInputError):
    """
    Unknown simulation kind or invalid scenario parameters.
    """
    pass
