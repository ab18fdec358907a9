from roundabout_safety.exceptions import RoundaboutError


class DegenerateDistanceError(RoundaboutError):
    """DRAC requested at a non-positive gap"""


class WindowError(RoundaboutError):
    """Aggregation window is empty or too short"""
