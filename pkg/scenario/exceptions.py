from roundabout_safety.exceptions import ConfigError, RoundaboutError

__all__ = ['ConfigError', 'SchedulingError', 'SimulationTimeout']


class SchedulingError(RoundaboutError):
    """Target headway cannot be reached within the path and speed limits"""


class SimulationTimeout(RoundaboutError):
    """Trial did not terminate before the configured time limit"""
