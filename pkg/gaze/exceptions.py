from roundabout_safety.exceptions import RoundaboutError


class GazeParseError(RoundaboutError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OverlapError(RoundaboutError):
    """Fixation records overlap in time or are out of order"""


class NoDataError(RoundaboutError):
    """No fixation record intersects the requested window"""
