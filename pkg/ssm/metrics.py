"""
Surrogate safety measures over a pair of synchronized trajectories.

Undefined values (diverging vehicles, zero speeds) are returned as None and
never encoded as numbers.
"""
import logging
import math

import numpy as np
from scipy.stats import truncnorm

from trajectory.models import TIME_TOLERANCE, align

from .exceptions import DegenerateDistanceError, WindowError
from .models import BrakingStats

logger = logging.getLogger(__name__)

BRAKING_HALF_WINDOW_S = 2.0


def ttc(net_distance, closing_speed_i, closing_speed_j):
    """Time to collision; None when the closing-speed sum is not positive"""
    if net_distance < 0:
        raise ValueError(f"net distance must be >= 0, got {net_distance}")
    closing = closing_speed_i + closing_speed_j
    if closing <= 0:
        return None
    return net_distance / closing


def line_of_sight(p_i, p_j, spec_i, spec_j):
    """
    Net distance between two samples and each vehicle's speed projected on
    the unit vector pointing to the other vehicle.
    """
    dx, dy = p_j.x - p_i.x, p_j.y - p_i.y
    center = math.hypot(dx, dy)
    net = max(center - spec_i.radius - spec_j.radius, 0.0)
    if center == 0:
        return net, 0.0, 0.0
    ux, uy = dx / center, dy / center
    closing_i = p_i.vx * ux + p_i.vy * uy
    closing_j = -(p_j.vx * ux + p_j.vy * uy)
    return net, closing_i, closing_j


def ttc_series(traj_i, traj_j, spec_i, spec_j):
    """(t, ttc) per aligned sample; ttc is 0 at contact and None when diverging"""
    traj_i, traj_j = align(traj_i, traj_j)
    series = []
    for p_i, p_j in zip(traj_i, traj_j):
        net, c_i, c_j = line_of_sight(p_i, p_j, spec_i, spec_j)
        if net == 0.0:
            series.append((p_i.t, 0.0))
        else:
            series.append((p_i.t, ttc(net, c_i, c_j)))
    return series


def time_headway(D_i, V_i, D_j, V_j):
    """
    Difference of projected arrival times at the conflict point, positive
    when vehicle i arrives first. None if either vehicle is stopped.
    """
    if V_i <= 0 or V_j <= 0:
        return None
    return D_j / V_j - D_i / V_i


def drac(V_i, V_j, d):
    if d <= 0:
        raise DegenerateDistanceError(f"DRAC undefined at gap {d} m")
    if V_i <= V_j:
        return 0.0
    return (V_i - V_j) ** 2 / (2.0 * d)


def drac_series(traj_i, traj_j, spec_i, spec_j):
    """
    DRAC of vehicle i against vehicle j along their line of sight: V_i is
    i's approach speed, V_j is j's speed along the same direction. Samples
    at contact carry None.
    """
    traj_i, traj_j = align(traj_i, traj_j)
    series = []
    for p_i, p_j in zip(traj_i, traj_j):
        net, c_i, c_j = line_of_sight(p_i, p_j, spec_i, spec_j)
        if net <= 0:
            series.append((p_i.t, None))
        else:
            series.append((p_i.t, drac(c_i, -c_j, net)))
    return series


def madr_exceedance_prob(drac_value, spec):
    """P(MADR < drac_value) under the vehicle's truncated normal MADR"""
    if drac_value < 0:
        raise ValueError(f"DRAC must be >= 0, got {drac_value}")
    return float(_exceedance(np.array([drac_value], dtype=float), spec)[0])


def _exceedance(values, spec):
    a = (spec.madr_lower - spec.madr_mean) / spec.madr_std
    b = (spec.madr_upper - spec.madr_mean) / spec.madr_std
    probs = truncnorm.cdf(values, a, b, loc=spec.madr_mean, scale=spec.madr_std)
    probs = np.clip(probs, 0.0, 1.0)
    probs = np.where(values <= spec.madr_lower, 0.0, probs)
    return np.where(values >= spec.madr_upper, 1.0, probs)


def _in_window(series, t0, t1, closed=True):
    if closed:
        return [(t, v) for t, v in series if t0 - TIME_TOLERANCE <= t <= t1 + TIME_TOLERANCE]
    return [(t, v) for t, v in series if t0 - TIME_TOLERANCE <= t < t1 - TIME_TOLERANCE]


def cpi(drac_series, spec, t_e, t_f, dt):
    """
    Crash potential index over [t_e, t_f). Samples without a DRAC value
    (contact) do not contribute.
    """
    window_length = t_f - t_e
    if window_length <= 0:
        raise WindowError(f"empty CPI window [{t_e}, {t_f}]")
    samples = _in_window(drac_series, t_e, t_f, closed=False)
    if not samples:
        raise WindowError(f"no DRAC samples in [{t_e}, {t_f})")
    values = np.array([v for _, v in samples if v is not None and v > 0], dtype=float)
    if values.size == 0:
        return 0.0
    total = float(np.sum(_exceedance(values, spec))) * dt
    return min(total / window_length, 1.0)


def acceleration_noise(accels, t_e, t_f, dt):
    """
    Time-weighted RMS deviation of acceleration from its window mean; the
    exposure time is the sampled duration (samples x dt).
    """
    samples = _in_window(accels, t_e, t_f)
    if len(samples) < 2:
        raise WindowError(f"acceleration noise needs 2 samples in [{t_e}, {t_f}], got {len(samples)}")
    values = np.array([a for _, a in samples], dtype=float)
    exposure = len(values) * dt
    deviation = values - values.mean()
    return float(math.sqrt(np.sum(deviation ** 2) * dt / exposure))


def braking_stats(traj, t_collision_point):
    """
    Average and maximum deceleration, and total braking time, within two
    seconds either side of the conflict-point arrival.
    """
    t0 = t_collision_point - BRAKING_HALF_WINDOW_S
    t1 = min(t_collision_point + BRAKING_HALF_WINDOW_S, traj.end)
    window = traj.window(t0, t1)
    decels = [p.a for p in window if p.a < 0]
    if not decels:
        return BrakingStats(0.0, 0.0, 0.0, (t0, t1), no_braking=True)
    # each braking sample stands for one dt of its contiguous span
    return BrakingStats(
        avg_decel=float(np.mean(decels)),
        max_decel=float(np.min(decels)),
        duration=len(decels) * traj.dt,
        window=(t0, t1),
    )


def max_deceleration(traj, t_e, t_f):
    """Most negative acceleration between t_e and t_f (0 if the vehicle never braked)"""
    window = traj.window(t_e, t_f)
    if not window:
        raise WindowError(f"{traj.vehicle_id}: no samples in [{t_e}, {t_f}]")
    return min(0.0, min(p.a for p in window))
