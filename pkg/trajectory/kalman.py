"""
Offline trajectory smoothing: a 2D constant-velocity Kalman filter run
forward over the whole record, followed by a Rauch-Tung-Striebel pass.
"""
import logging
import math

import numpy as np
from filterpy.common import Q_discrete_white_noise
from filterpy.kalman import KalmanFilter

from .exceptions import InsufficientDataError
from .models import TWO_PI, KalmanConfig, Trajectory, TrajectoryPoint

logger = logging.getLogger(__name__)


def _build_filter(dt, cfg, z0):
    # state: [x, vx, y, vy]; measurement: same order (v/heading projected)
    kf = KalmanFilter(dim_x=4, dim_z=4)
    kf.F = np.array([
        [1.0, dt, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, dt],
        [0.0, 0.0, 0.0, 1.0],
    ])
    kf.H = np.eye(4)
    kf.Q = Q_discrete_white_noise(dim=2, dt=dt, var=cfg.process_noise_std ** 2, block_size=2)
    pos_var = cfg.measurement_noise_std_pos ** 2
    vel_var = cfg.measurement_noise_std_vel ** 2
    kf.R = np.diag([pos_var, vel_var, pos_var, vel_var])
    kf.x = np.array(z0, dtype=float)
    kf.P = np.eye(4) * cfg.initial_covariance_scale
    return kf


def kalman_smooth(traj, cfg=None):
    """
    Smooth a recorded trajectory. Speed is treated as a measurement and
    projected on the recorded heading. Returned speed and heading come from
    the smoothed velocity; acceleration is the central difference of the
    smoothed speed (one-sided at the ends).
    """
    cfg = cfg or KalmanConfig.from_settings()
    if len(traj) < 2:
        raise InsufficientDataError(
            f"{traj.vehicle_id}: Kalman smoothing needs at least 2 samples, got {len(traj)}"
        )

    zs = np.column_stack([traj.x, traj.v * np.cos(traj.heading), traj.y, traj.v * np.sin(traj.heading)])
    kf = _build_filter(traj.dt, cfg, zs[0])
    means, covariances, _, _ = kf.batch_filter(zs, update_first=True)
    smoothed, _, _, _ = kf.rts_smoother(means, covariances)

    speed = np.hypot(smoothed[:, 1], smoothed[:, 3])
    accel = np.gradient(speed, traj.dt)
    points = []
    for k, p in enumerate(traj.points):
        if speed[k] > 1e-9:
            heading = math.atan2(smoothed[k, 3], smoothed[k, 1]) % TWO_PI
        else:
            heading = p.heading
        points.append(TrajectoryPoint(
            t=p.t,
            x=float(smoothed[k, 0]),
            y=float(smoothed[k, 2]),
            v=float(speed[k]),
            a=float(accel[k]),
            heading=heading,
        ))
    logger.debug("Smoothed %s (%d samples)", traj.vehicle_id, len(points))
    return Trajectory(traj.vehicle_id, points, traj.dt)
