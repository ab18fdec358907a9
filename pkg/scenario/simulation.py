"""
Time-stepped simulation of one merging trial and of the full
aggressiveness x warning design.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
import logging
import math

import django
import numpy as np
from django.conf import settings

from ssm.metrics import time_headway
from ssm.models import VehicleSpec
from trajectory.models import Trajectory
from warning.monitor import WarningMonitor
from warning.prediction import collision_time_along_paths, min_net_distance

from .control import AggressiveController, EgoController, advance
from .exceptions import SimulationTimeout
from .geometry import build_geometry, path_point
from .models import AggressivenessLevel, Decision, TrialResult, WarningLead
from .scheduling import nominal_ego_plan, schedule_aggressive

logger = logging.getLogger(__name__)

STEP_TOLERANCE = 1e-9
# following-rule braking keeps this net distance to a slower leader
FOLLOW_NET_MARGIN_M = 1.0
# jittered drivers: standard scores beyond this are clipped
JITTER_CLIP = 2.0
# smallest gap between jittered emergency and comfortable braking, m/s^2
EMERGENCY_MARGIN = 1.0

NORMAL, STOPPING, GOING = 'normal', 'stopping', 'going'


class _Ego:
    """Decision and braking state of the ego driver within one trial"""

    def __init__(self, cfg, geometry, contact_distance, horizon):
        self.driver = cfg.driver
        self.geometry = geometry
        self.contact_distance = contact_distance
        self.horizon = horizon
        self.dt = cfg.dt
        self.controller = EgoController(cfg.driver, geometry, contact_distance, cfg.dt)
        self.stop_line = geometry.conflict_s_ego - cfg.driver.stop_clearance
        self.mode = NORMAL
        self.decision = None
        self.cue_time = None
        self.action_time = None
        self.peak = None
        self.predicted_net = None
        self.escalated = False
        self.hold_line = False
        self._steps_braking = 0

    def leader(self, s, s_agg, v_agg):
        ahead = self.geometry.aggressive_in_ego_frame(s_agg)
        if ahead is None or ahead <= s:
            return None
        return ahead - s, v_agg

    def cue(self, t, s, v, s_agg, v_agg):
        self.cue_time = t
        decision = self.driver.decision
        if decision == Decision.RULE:
            g = self.geometry
            h_t = time_headway(g.conflict_s_ego - s, v, g.conflict_s_agg - s_agg, v_agg)
            go = h_t is not None and h_t >= self.driver.go_headway_threshold
            decision = Decision.GO if go else Decision.STOP
        self.decision = decision

    def act(self, t, s, v, s_agg, v_agg):
        self.action_time = t
        if self.decision == Decision.GO:
            self.mode = GOING
            return
        self.mode = STOPPING
        self.hold_line = s_agg < self.geometry.conflict_s_agg
        self.predicted_net = min_net_distance(
            self.geometry, s, v, self.driver.comfortable_decel, s_agg, v_agg, self.contact_distance, self.horizon,
        )
        self.escalated = self.driver.escalates(self.predicted_net)
        self.peak = self.driver.braking_decel(self.predicted_net)
        logger.debug(
            "Braking at t=%.2f, peak %.2f m/s^2 (net %.2f m at comfortable braking, escalated=%s)",
            t, self.peak, self.predicted_net, self.escalated,
        )

    def accel(self, s, v, s_agg, v_agg):
        g = self.geometry
        agg_merged = s_agg >= g.conflict_s_agg
        if self.mode == STOPPING:
            if self.hold_line and v <= 0.0 and agg_merged:
                self.mode = NORMAL
            elif not self.hold_line and agg_merged and v <= v_agg:
                self.mode = NORMAL
        if self.mode == GOING and s >= g.conflict_s_ego:
            self.mode = NORMAL

        if self.mode == GOING:
            top = 1.2 * self.driver.circulating_speed_limit
            return min(self.driver.go_accel, (top - v) / self.dt)
        if self.mode == NORMAL:
            # no car-following until the driver has noticed the other vehicle
            lead = self.leader(s, s_agg, v_agg) if self.cue_time is not None else None
            return self.controller.accel(s, v, lead)
        return self._braking(s, v, s_agg, v_agg)

    def _braking(self, s, v, s_agg, v_agg):
        if v <= 0.0:
            # stopped short of the line, waiting for the aggressive vehicle to merge
            return 0.0
        self._steps_braking += 1
        ramp = self._steps_braking * self.dt / self.driver.ramp_time
        if ramp < 1.0 + STEP_TOLERANCE:
            return -self.peak * min(ramp, 1.0)

        if self.hold_line:
            room = self.stop_line - s
            required = v * v / (2.0 * room) if room > 0 else math.inf
        else:
            lead = self.leader(s, s_agg, v_agg)
            if lead is None:
                self.mode = NORMAL
                return self.controller.accel(s, v)
            net = lead[0] - self.contact_distance - FOLLOW_NET_MARGIN_M
            required = (v - v_agg) ** 2 / (2.0 * net) if net > 0 else math.inf
        return -min(self.peak, required)


def _sees_conflict(driver, geometry, t, s_ego, v_ego, s_agg, v_agg, contact, horizon):
    """Whether the driver notices the conflict unaided at this step"""
    t_c = collision_time_along_paths(geometry, s_ego, v_ego, s_agg, v_agg, contact, t, horizon)
    return t_c is not None and t_c - t <= driver.visual_detection_ttc + STEP_TOLERANCE


def simulate_trial(cfg, trial_id=None, subject=''):
    """
    Step both vehicles at ``cfg.dt`` until both are past the conflict
    point, they touch, or the time limit runs out (SimulationTimeout).
    """
    geometry = build_geometry(cfg.geometry)
    spec = VehicleSpec.from_settings()
    contact = 2.0 * spec.radius
    horizon = settings.WARNING_HORIZON_S
    trial_id = trial_id or f"{cfg.aggressiveness}-{cfg.warning_lead}-s{cfg.seed}"

    plan = nominal_ego_plan(cfg, geometry, contact)
    agg_plan = schedule_aggressive(cfg, plan, geometry, contact)
    ego = _Ego(cfg, geometry, contact, horizon)
    agg = AggressiveController(agg_plan, geometry, cfg.driver, contact, cfg.dt)
    monitor = WarningMonitor(WarningLead(cfg.warning_lead).seconds, geometry, contact, horizon, cfg.warning_latency)

    s_e, v_e, a_e = 0.0, cfg.driver.approach_speed_limit, 0.0
    s_a, v_a, a_a = agg_plan.start_s, agg_plan.speed, 0.0
    rows = []
    entry_time = t_contact = None
    action_due = None
    ego_past = geometry.conflict_s_ego + contact
    agg_past = geometry.conflict_s_agg + contact
    k = 0
    while True:
        t = round(k * cfg.dt, 9)
        if entry_time is None and s_e >= geometry.roundabout_entry_s_ego:
            entry_time = t

        monitor.step(t, s_e, v_e, a_e, s_a, v_a, a_a)
        if ego.cue_time is None and geometry.conflict_open(s_e, s_a):
            warned = monitor.event is not None and t >= monitor.event.t_delivery - STEP_TOLERANCE
            if warned or _sees_conflict(cfg.driver, geometry, t, s_e, v_e, s_a, v_a, contact, horizon):
                ego.cue(t, s_e, v_e, s_a, v_a)
                action_due = t + cfg.driver.reaction_time
        if ego.action_time is None and action_due is not None and t >= action_due - STEP_TOLERANCE:
            ego.act(t, s_e, v_e, s_a, v_a)

        a_e = ego.accel(s_e, v_e, s_a, v_a)
        a_a = agg.accel(s_a, v_a, s_e, v_e)
        if v_e + a_e * cfg.dt < 0.0:
            a_e = -v_e / cfg.dt
        if v_a + a_a * cfg.dt < 0.0:
            a_a = -v_a / cfg.dt
        rows.append((t, s_e, v_e, a_e, s_a, v_a, a_a))

        if float(geometry.center_distance(s_e, s_a)) <= contact:
            t_contact = t
            logger.info("Trial %s: contact at t=%.2f", trial_id, t)
            break
        if s_e >= ego_past and s_a >= agg_past:
            break

        s_e, v_e, a_e = advance(s_e, v_e, a_e, cfg.dt)
        s_a, v_a, a_a = advance(s_a, v_a, a_a, cfg.dt)
        k += 1
        if k * cfg.dt > settings.SIM_TIMEOUT_S + STEP_TOLERANCE:
            raise SimulationTimeout(f"trial {trial_id} still running after {settings.SIM_TIMEOUT_S} s")

    ego_traj, agg_traj = _trajectories(rows, geometry, cfg.dt)
    result = TrialResult(
        trial_id=trial_id,
        config=cfg,
        ego=ego_traj,
        aggressive=agg_traj,
        ego_s=[row[1] for row in rows],
        aggressive_s=[row[4] for row in rows],
        warning=monitor.event,
        outcome=ego.decision if ego.action_time is not None else None,
        collision=t_contact is not None,
        t_contact=t_contact,
        entry_time=entry_time,
        cue_time=ego.cue_time,
        action_time=ego.action_time,
        escalated=ego.escalated,
        predicted_net=ego.predicted_net,
        nominal_ego_arrival=plan.arrival_time,
        planned_aggressive_arrival=agg_plan.arrival_time,
        realized_headway=agg_plan.realized_headway,
        subject=subject,
    )
    logger.info(
        "Trial %s: %d steps, warning=%s, outcome=%s, collision=%s",
        trial_id, len(rows), monitor.event is not None, result.outcome, result.collision,
    )
    return result


def _trajectories(rows, geometry, dt):
    ego = [path_point(geometry.ego_path, t, s, v, a) for t, s, v, a, _, _, _ in rows]
    agg = [path_point(geometry.aggressive_path, t, s, v, a) for t, _, _, _, s, v, a in rows]
    return Trajectory('ego', ego, dt), Trajectory('aggressive', agg, dt)


def jitter_driver(driver, rng, fraction):
    """
    Driver with multiplicative Gaussian noise (std ``fraction``, clipped at
    two standard deviations) on the reaction time, both braking levels and
    the go threshold. Emergency braking stays at least EMERGENCY_MARGIN
    beyond comfortable braking.
    """
    if fraction <= 0:
        return driver
    z = np.clip(rng.standard_normal(4), -JITTER_CLIP, JITTER_CLIP)
    comfortable = min(driver.comfortable_decel * (1.0 + fraction * z[1]), -1e-3)
    emergency = min(driver.emergency_decel * (1.0 + fraction * z[2]), comfortable - EMERGENCY_MARGIN)
    return replace(
        driver,
        reaction_time=max(driver.reaction_time * (1.0 + fraction * z[0]), 0.0),
        comfortable_decel=comfortable,
        emergency_decel=emergency,
        go_headway_threshold=driver.go_headway_threshold * (1.0 + fraction * z[3]),
    )


def design_cells(base, repeats, seeds=None):
    """
    (config, trial_id, subject) for every aggressiveness x warning x repeat,
    ordered by level, warning, repeat. One jittered driver per repeat is
    shared by its nine cells, so a repeat plays the role of a participant.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    seeds = list(seeds) if seeds is not None else [base.seed + r for r in range(repeats)]
    if len(seeds) != repeats:
        raise ValueError(f"{repeats} repeats need {repeats} seeds, got {len(seeds)}")
    drivers = [jitter_driver(base.driver, np.random.default_rng(seed), base.jitter_fraction) for seed in seeds]
    cells = []
    for level in AggressivenessLevel.values:
        for lead in WarningLead.values:
            for r, seed in enumerate(seeds):
                cfg = replace(base.with_cell(level, lead, drivers[r]), seed=seed)
                cells.append((cfg, f"{level}-{lead}-r{r}", f"r{r}"))
    return cells


def _init_worker():
    django.setup()


def _run_cell(cell):
    cfg, trial_id, subject = cell
    return simulate_trial(cfg, trial_id, subject)


def run_design(base, repeats, seeds=None, jobs=1):
    """9 x ``repeats`` trial results in design order, whatever ``jobs`` is"""
    cells = design_cells(base, repeats, seeds)
    logger.info("Running %d trials with %d job(s)", len(cells), jobs)
    if jobs <= 1:
        return [_run_cell(cell) for cell in cells]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker) as executor:
        return list(executor.map(_run_cell, cells))
