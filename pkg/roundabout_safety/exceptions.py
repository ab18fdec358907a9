class RoundaboutError(Exception):
    """
    Base class for every domain error raised by the project apps
    """


class ConfigError(RoundaboutError):
    """Invalid or unreadable configuration document"""
