from roundabout_safety.exceptions import RoundaboutError


class BalanceError(RoundaboutError):
    """A subject is missing at least one cell of the factorial design"""


class DegenerateSampleError(RoundaboutError):
    """Sample too small or without variance"""
