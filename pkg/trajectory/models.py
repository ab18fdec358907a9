from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from django.conf import settings

from .exceptions import AlignmentError, InsufficientDataError, OrderingError

TIME_TOLERANCE = 1e-6
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TrajectoryPoint:
    """
    One kinematic sample of a vehicle
    """
    t: float
    x: float
    y: float
    v: float
    a: float
    heading: float

    def __post_init__(self):
        if self.v < 0:
            raise ValueError(f"speed must be non-negative, got {self.v} at t={self.t}")

    @property
    def vx(self):
        return self.v * math.cos(self.heading)

    @property
    def vy(self):
        return self.v * math.sin(self.heading)


@dataclass(frozen=True)
class Trajectory:
    """
    Time-ordered samples of one vehicle on a fixed clock (default 10 Hz)
    """
    vehicle_id: str
    points: tuple
    dt: float = field(default=None)

    def __post_init__(self):
        points = tuple(self.points)
        object.__setattr__(self, 'points', points)
        dt = self.dt
        if dt is None:
            dt = points[1].t - points[0].t if len(points) >= 2 else settings.SIM_DT
            object.__setattr__(self, 'dt', dt)
        if dt <= 0:
            raise OrderingError(f"{self.vehicle_id}: non-positive sample interval {dt}")
        for prev, cur in zip(points, points[1:]):
            step = cur.t - prev.t
            if step <= 0:
                raise OrderingError(
                    f"{self.vehicle_id}: timestamps not strictly increasing at t={cur.t}"
                )
            if abs(step - dt) > TIME_TOLERANCE:
                raise OrderingError(
                    f"{self.vehicle_id}: irregular sampling at t={cur.t} "
                    f"(step {step:.6f} s, expected {dt:.6f} s)"
                )

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, index):
        return self.points[index]

    def _column(self, name):
        return np.array([getattr(p, name) for p in self.points], dtype=float)

    @cached_property
    def t(self):
        return self._column('t')

    @cached_property
    def x(self):
        return self._column('x')

    @cached_property
    def y(self):
        return self._column('y')

    @cached_property
    def v(self):
        return self._column('v')

    @cached_property
    def a(self):
        return self._column('a')

    @cached_property
    def heading(self):
        return self._column('heading')

    @property
    def start(self):
        return self.points[0].t

    @property
    def end(self):
        return self.points[-1].t

    def index_at(self, t):
        """Index of the sample nearest to ``t``; raises if none lies within dt/2"""
        if not self.points:
            raise InsufficientDataError(f"{self.vehicle_id}: empty trajectory")
        idx = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[idx] - t) > self.dt / 2 + TIME_TOLERANCE:
            raise AlignmentError(f"{self.vehicle_id}: no sample near t={t:.3f}")
        return idx

    def sample_at(self, t):
        return self.points[self.index_at(t)]

    def window(self, t0, t1):
        """Samples with t0 <= t <= t1 (tolerant to clock rounding)"""
        return [p for p in self.points if t0 - TIME_TOLERANCE <= p.t <= t1 + TIME_TOLERANCE]

    def series(self, name):
        """(t, value) pairs of one field, the shape the ssm functions take"""
        return list(zip(self.t.tolist(), self._column(name).tolist()))


@dataclass(frozen=True)
class KalmanConfig:
    process_noise_std: float = 1.0
    measurement_noise_std_pos: float = 0.5
    measurement_noise_std_vel: float = 0.3
    initial_covariance_scale: float = 10.0

    def __post_init__(self):
        for name in ('process_noise_std', 'measurement_noise_std_pos',
                     'measurement_noise_std_vel', 'initial_covariance_scale'):
            if getattr(self, name) <= 0:
                raise ValueError(f"KalmanConfig.{name} must be > 0")

    @classmethod
    def from_settings(cls):
        return cls(
            process_noise_std=settings.KALMAN_PROCESS_NOISE_STD,
            measurement_noise_std_pos=settings.KALMAN_POS_NOISE_STD,
            measurement_noise_std_vel=settings.KALMAN_VEL_NOISE_STD,
            initial_covariance_scale=settings.KALMAN_INITIAL_COV_SCALE,
        )


def align(traj_i, traj_j):
    """
    Restrict two trajectories to their common clock. Samples are paired by
    timestamp (within 1e-6 s); raises AlignmentError if nothing overlaps.
    """
    times_j = {round(p.t, 6): p for p in traj_j.points}
    paired_i, paired_j = [], []
    for p in traj_i.points:
        q = times_j.get(round(p.t, 6))
        if q is not None:
            paired_i.append(p)
            paired_j.append(q)
    if not paired_i:
        raise AlignmentError(
            f"{traj_i.vehicle_id} and {traj_j.vehicle_id} share no common time range"
        )
    return (
        Trajectory(traj_i.vehicle_id, paired_i, traj_i.dt),
        Trajectory(traj_j.vehicle_id, paired_j, traj_j.dt),
    )
