import logging
from dataclasses import dataclass

import numpy as np

from ssm.metrics import time_headway

from .control import AGGRESSIVE_BRAKE_DECEL, EgoController, advance
from .exceptions import SchedulingError
from .models import AggressivenessLevel

logger = logging.getLogger(__name__)

HEADWAY_TOLERANCE_S = 0.05
# a yielding vehicle is at rest this long before the ego reaches the conflict point
LOW_STOP_LEAD_S = 6.0
LOW_STOP_SHORT_OF_YIELD_M = 1.0
LOW_RELEASE_MARGIN_M = 2.0


@dataclass(frozen=True)
class EgoPlan:
    """Unreactive ego profile: the driver follows the limits and never brakes for the conflict"""
    t: np.ndarray
    s: np.ndarray
    v: np.ndarray
    arrival_time: float


@dataclass(frozen=True)
class AggressivePlan:
    level: str
    start_s: float
    speed: float
    arrival_time: float = None
    target_headway: float = None
    realized_headway: float = None
    stop_s: float = None
    release_s_ego: float = None


def nominal_ego_plan(cfg, geometry, contact_distance):
    controller = EgoController(cfg.driver, geometry, contact_distance, cfg.dt)
    s, v = 0.0, cfg.driver.approach_speed_limit
    ts, ss, vs = [], [], []
    k = 0
    while True:
        t = round(k * cfg.dt, 9)
        ts.append(t)
        ss.append(s)
        vs.append(v)
        if s >= geometry.conflict_s_ego:
            break
        s, v, _ = advance(s, v, controller.accel(s, v), cfg.dt)
        k += 1
        if v <= 0.0:
            raise SchedulingError("nominal ego profile stops before the conflict point")
    ts, ss, vs = np.array(ts), np.array(ss), np.array(vs)
    arrival = float(np.interp(geometry.conflict_s_ego, ss, ts))
    return EgoPlan(ts, ss, vs, arrival)


def schedule_aggressive(cfg, ego_plan, geometry, contact_distance):
    """
    Start position and speed of the aggressive vehicle. Medium/High reach
    the conflict point ``target_headway`` seconds ahead of the unreactive
    ego, measured as the time headway at the instant the aggressive vehicle
    crosses its yield line. Low stops short of the yield line.
    """
    level = AggressivenessLevel(cfg.aggressiveness)
    speed = cfg.aggressive_speed
    if level == AggressivenessLevel.LOW:
        return _schedule_yield(cfg, ego_plan, geometry, contact_distance, speed)

    headway = level.target_headway
    arrival = ego_plan.arrival_time - headway
    start_s = geometry.conflict_s_agg - speed * arrival
    if start_s < 0:
        raise SchedulingError(
            f"{level} headway {headway} s needs {speed * arrival:.1f} m of approach, "
            f"only {geometry.conflict_s_agg:.1f} m available"
        )

    crossing = max(int(np.ceil((geometry.aggressive_yield_s - start_s) / (speed * cfg.dt) - 1e-9)), 0)
    if crossing >= len(ego_plan.t):
        raise SchedulingError(f"aggressive vehicle reaches its yield line after the ego passes ({level})")
    s_agg = start_s + speed * crossing * cfg.dt
    realized = time_headway(
        geometry.conflict_s_agg - s_agg, speed,
        geometry.conflict_s_ego - ego_plan.s[crossing], ego_plan.v[crossing],
    )
    if realized is None or abs(realized - headway) > HEADWAY_TOLERANCE_S:
        raise SchedulingError(f"{level}: realized headway {realized} s misses the {headway} s target")
    logger.debug("%s: start at s=%.2f m, realized headway %.3f s", level, start_s, realized)
    return AggressivePlan(
        level=level, start_s=start_s, speed=speed, arrival_time=arrival,
        target_headway=headway, realized_headway=realized,
    )


def _schedule_yield(cfg, ego_plan, geometry, contact_distance, speed):
    stop_s = geometry.aggressive_yield_s - LOW_STOP_SHORT_OF_YIELD_M
    braking_time = speed / AGGRESSIVE_BRAKE_DECEL
    braking_distance = speed * speed / (2.0 * AGGRESSIVE_BRAKE_DECEL)
    cruise_time = ego_plan.arrival_time - LOW_STOP_LEAD_S - braking_time
    start_s = stop_s - braking_distance - speed * cruise_time
    if cruise_time < 0 or start_s < 0:
        raise SchedulingError("Low: the aggressive vehicle cannot be at rest before the ego arrives")
    return AggressivePlan(
        level=AggressivenessLevel.LOW, start_s=start_s, speed=speed,
        stop_s=stop_s,
        release_s_ego=geometry.conflict_s_ego + contact_distance + LOW_RELEASE_MARGIN_M,
    )
