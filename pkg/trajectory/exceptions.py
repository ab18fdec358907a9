from roundabout_safety.exceptions import RoundaboutError


class TrajectoryParseError(RoundaboutError):
    """
    Malformed trajectory file; ``line`` is the 1-based file line number
    (header is line 1) or None for schema problems
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OrderingError(RoundaboutError):
    """Timestamps not strictly increasing or not on the nominal grid"""


class InsufficientDataError(RoundaboutError):
    """Too few samples for the requested computation"""


class AlignmentError(RoundaboutError):
    """Two trajectories share no common time range"""
