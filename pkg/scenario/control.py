"""
Longitudinal controllers of the two vehicles. Both move along their own
path; accelerations are returned for one step and integrated by
``advance``.
"""
import math

# speed errors below this are treated as settled
SETTLED = 1e-9
DEADBAND = 0.02

AGGRESSIVE_GAIN = 0.5
AGGRESSIVE_MAX_ACCEL = 1.5
AGGRESSIVE_MAX_DECEL = -3.0
AGGRESSIVE_BRAKE_DECEL = 1.5
POST_MERGE_CRUISE_M = 15.0
POST_MERGE_SPEED_FACTOR = 1.1
# below this speed a yielding vehicle is brought to rest in one step
CREEP_SPEED = 0.05


def advance(s, v, a, dt):
    """
    One step of constant acceleration. Returns (s, v, a) with ``a`` reduced
    so that the speed never goes negative.
    """
    if v + a * dt < 0.0:
        a = -v / dt
        return s + 0.5 * v * dt, 0.0, a
    return s + v * dt + 0.5 * a * dt * dt, v + a * dt, a


def clamp(value, low, high):
    return min(max(value, low), high)


def track(v, v_target, a_ff, gain, low, high, dt):
    """Proportional speed tracking with feedforward and a settle deadband"""
    err = v_target - v
    if a_ff == 0.0:
        if abs(err) < SETTLED:
            return 0.0
        if abs(err) < DEADBAND:
            return err / dt
    return clamp(a_ff + gain * err, low, high)


def following_cap(gap, contact_distance, standstill_gap, time_gap):
    """Highest speed that keeps the time gap to a leader ``gap`` metres ahead"""
    return max(0.0, (gap - contact_distance - standstill_gap) / time_gap)


class EgoController:
    """
    Limit-following control of the ego: approach limit, anticipatory
    braking to the circulating limit ahead of the roundabout entry, and a
    car-following cap behind a leader.
    """

    def __init__(self, driver, geometry, contact_distance, dt):
        self.driver = driver
        self.geometry = geometry
        self.contact_distance = contact_distance
        self.dt = dt
        self.slow_point = geometry.roundabout_entry_s_ego - driver.anticipation_margin

    def target(self, s, v):
        """(target speed, feedforward acceleration) at arclength s"""
        d = self.driver
        if s >= self.slow_point:
            return d.circulating_speed_limit, 0.0
        v_t = math.sqrt(d.circulating_speed_limit ** 2 + 2.0 * d.anticipation_decel * (self.slow_point - s))
        if v_t >= d.approach_speed_limit:
            return d.approach_speed_limit, 0.0
        return v_t, -d.anticipation_decel * v / v_t

    def accel(self, s, v, leader=None):
        """``leader`` is (gap along the path, leader speed) or None"""
        d = self.driver
        v_t, a_ff = self.target(s, v)
        if leader is not None:
            gap, v_lead = leader
            cap = following_cap(gap, self.contact_distance, d.standstill_gap, d.time_gap)
            if cap < v_t:
                v_t, a_ff = cap, 0.0
        a = track(v, v_t, a_ff, d.speed_gain, d.max_normal_decel, d.max_accel, self.dt)
        if leader is not None and leader[1] >= v and leader[0] > self.contact_distance:
            # leader pulling away: hold speed instead of braking
            a = max(a, 0.0)
        return a


class AggressiveController:
    """
    Scheduled aggressive vehicle. Medium/High cruise into the ring without
    yielding; Low stops short of its yield line and waits for the ego to
    clear the conflict point.
    """

    def __init__(self, plan, geometry, driver, contact_distance, dt):
        self.plan = plan
        self.geometry = geometry
        self.driver = driver
        self.contact_distance = contact_distance
        self.dt = dt
        self.released = plan.stop_s is None
        self.top_speed = POST_MERGE_SPEED_FACTOR * driver.circulating_speed_limit

    def _yield(self, s, v):
        remaining = self.plan.stop_s - s
        if v <= 0.0:
            return 0.0
        if v < CREEP_SPEED or remaining <= 0.0:
            return -v / self.dt
        if remaining <= v * v / (2.0 * AGGRESSIVE_BRAKE_DECEL):
            return -v * v / (2.0 * remaining)
        return 0.0

    def accel(self, s, v, s_ego, v_ego):
        if not self.released:
            if s_ego >= self.plan.release_s_ego:
                self.released = True
            else:
                return self._yield(s, v)

        g = self.geometry
        v_t = self.plan.speed if s < g.conflict_s_agg + POST_MERGE_CRUISE_M else self.top_speed
        ego = g.ego_in_aggressive_frame(s_ego) if s >= g.conflict_s_agg else None
        following = ego is not None and ego > s
        if following:
            cap = following_cap(ego - s, self.contact_distance, self.driver.standstill_gap, self.driver.time_gap)
            v_t = min(v_t, cap)
        a = track(v, v_t, 0.0, AGGRESSIVE_GAIN, AGGRESSIVE_MAX_DECEL, AGGRESSIVE_MAX_ACCEL, self.dt)
        if following and v_ego >= v:
            a = max(a, 0.0)
        return a
