from dataclasses import dataclass

from django.db import models

from .exceptions import OverlapError


class AreaOfInterest(models.TextChoices):
    AGGRESSIVE_VEHICLE = 'AggressiveVehicle', 'Aggressive vehicle'
    SPEED_INFO = 'SpeedInfo', 'Speed display'
    WARNING_INFO = 'WarningInfo', 'Warning display'
    ROAD_AHEAD = 'RoadAhead', 'Road ahead'


@dataclass(frozen=True)
class FixationRecord:
    """
    One fixation on an area of interest with the pupil diameters (px)
    recorded for it
    """
    t_start: float
    t_end: float
    aoi: str
    pupil_left: float
    pupil_right: float

    def __post_init__(self):
        if self.t_end <= self.t_start:
            raise ValueError(f"fixation must end after it starts ({self.t_start} >= {self.t_end})")
        if self.aoi not in AreaOfInterest.values:
            raise ValueError(f"unknown AOI {self.aoi!r}, expected one of {AreaOfInterest.values}")
        if self.pupil_left <= 0 or self.pupil_right <= 0:
            raise ValueError("pupil diameters must be > 0")
        object.__setattr__(self, 'aoi', AreaOfInterest(self.aoi))

    @property
    def duration(self):
        return self.t_end - self.t_start

    def clipped(self, t0, t1):
        """Part of the fixation inside [t0, t1], 0 when disjoint"""
        return max(0.0, min(self.t_end, t1) - max(self.t_start, t0))


@dataclass(frozen=True)
class GazeLog:
    trial_id: str
    records: tuple

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, 'records', records)
        for prev, cur in zip(records, records[1:]):
            if cur.t_start < prev.t_start:
                raise OverlapError(f"{self.trial_id}: fixations not sorted at t={cur.t_start}")
            if cur.t_start < prev.t_end:
                raise OverlapError(
                    f"{self.trial_id}: fixation at t={cur.t_start} overlaps the one ending at {prev.t_end}"
                )

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def intersecting(self, t0, t1):
        return [r for r in self.records if r.t_end > t0 and r.t_start < t1]


@dataclass(frozen=True)
class FixationFeatures:
    """Total fixation duration, fixation count and mean duration for one AOI"""
    total_duration: float
    count: int
    mean_duration: float
    empty: bool = False
