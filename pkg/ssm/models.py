from dataclasses import asdict, dataclass, field
import math

import numpy as np
from django.conf import settings


@dataclass(frozen=True)
class VehicleSpec:
    """
    Physical radius and braking capability of a vehicle. The maximum
    available deceleration rate (MADR) follows a truncated normal law.
    """
    radius: float = 2.0
    madr_mean: float = 8.45
    madr_std: float = 1.40
    madr_lower: float = 4.23
    madr_upper: float = 12.68

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.madr_std <= 0:
            raise ValueError(f"madr_std must be > 0, got {self.madr_std}")
        if not self.madr_lower < self.madr_mean < self.madr_upper:
            raise ValueError("MADR bounds must satisfy lower < mean < upper")

    @classmethod
    def from_settings(cls):
        return cls(
            radius=settings.VEHICLE_RADIUS_M,
            madr_mean=settings.MADR_MEAN,
            madr_std=settings.MADR_STD,
            madr_lower=settings.MADR_LOWER,
            madr_upper=settings.MADR_UPPER,
        )


@dataclass(frozen=True)
class ConflictGeometry:
    """
    Conflict point plus remaining distances to it, one value per aligned
    sample. Distances turn negative once a vehicle has passed the point.
    """
    conflict_point: tuple
    dist_to_conflict_i: np.ndarray
    dist_to_conflict_j: np.ndarray

    @classmethod
    def from_trajectories(cls, conflict_point, traj_i, traj_j):
        """
        Straight-line distance to the conflict point, signed negative after
        the closest approach. Used for trajectories that arrive without
        their path arclengths (external CSVs).
        """
        return cls(
            tuple(conflict_point),
            _signed_distance(conflict_point, traj_i),
            _signed_distance(conflict_point, traj_j),
        )

    def arrival_time(self, times, which='i'):
        """First time the vehicle reaches the conflict point, None if it never does"""
        dist = self.dist_to_conflict_i if which == 'i' else self.dist_to_conflict_j
        reached = np.flatnonzero(np.asarray(dist) <= 0)
        if reached.size == 0:
            return None
        return float(times[reached[0]])


def _signed_distance(point, traj):
    dist = np.hypot(traj.x - point[0], traj.y - point[1])
    if dist.size == 0:
        return dist
    closest = int(np.argmin(dist))
    signed = dist.copy()
    signed[closest] = 0.0
    signed[closest + 1:] *= -1.0
    return signed


@dataclass(frozen=True)
class BrakingStats:
    avg_decel: float
    max_decel: float
    duration: float
    window: tuple
    no_braking: bool = False


@dataclass
class SafetyReport:
    """
    Per-trial bundle of safety indicators. ``None`` marks a field that is
    undefined for the trial (no finite TTC, window too short).
    """
    trial_id: str = ''
    min_ttc: float = None
    t_min_ttc: float = None
    max_drac: float = 0.0
    cpi: float = 0.0
    an: float = None
    max_decel: float = 0.0
    avg_decel: float = 0.0
    braking_duration: float = 0.0
    braking_window: tuple = field(default=None)
    max_decel_to_min_ttc: float = None
    collision: bool = False
    no_braking: bool = True

    CSV_FIELDS = (
        'trial_id', 'min_ttc', 't_min_ttc', 'max_drac', 'cpi', 'an', 'max_decel',
        'avg_decel', 'braking_duration', 'braking_window_start', 'braking_window_end',
        'max_decel_to_min_ttc', 'collision', 'no_braking',
    )

    def to_dict(self):
        data = asdict(self)
        if self.braking_window is not None:
            data['braking_window'] = [float(v) for v in self.braking_window]
        return data

    def to_row(self):
        data = self.to_dict()
        window = data.pop('braking_window') or (None, None)
        data['braking_window_start'], data['braking_window_end'] = window
        return {name: data[name] for name in self.CSV_FIELDS}


def is_finite(value):
    return value is not None and math.isfinite(value)
