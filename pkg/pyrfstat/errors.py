"""Exceptions raised by pyrfstat"""


class RFStatError(Exception):
    """Base class for all pyrfstat errors"""


class ParameterError(RFStatError, ValueError):
    """A physical or numerical parameter is outside its valid domain"""


class CoherenceInconsistencyError(ParameterError):
    """T2 exceeds the Fourier limit 2*T1"""


class GridMismatchError(ParameterError):
    """Two curves that must share a grid do not"""


class SamplingError(ParameterError):
    """A curve is too coarsely sampled or not flat at its edges"""


class ClickStreamError(ParameterError):
    """A click stream is empty or its timestamps are not strictly increasing"""

    def __init__(self, message: str, index: int = None):
        super().__init__(message)
        self.index = index


class DegenerateDataError(RFStatError):
    """Data carries no information for the requested fit"""


class NumericalError(RFStatError, ArithmeticError):
    """A model evaluation produced a value outside its physical range"""


class FileFormatError(RFStatError):
    """A data file could not be parsed"""

    def __init__(self, message: str, path=None, line: int = None):
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(location + message)
        self.path = path
        self.line = line


class ConfigError(RFStatError):
    """Invalid run configuration"""

    def __init__(self, message: str, key: str = None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key
