from roundabout_safety.exceptions import RoundaboutError


class NotApplicable(RoundaboutError):
    """Trial has no usable onset: no warning, no decision or a degenerate window"""


class StratificationError(RoundaboutError):
    """Dataset cannot be split with both classes on each side"""


class DatasetError(RoundaboutError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
