from io import StringIO
import json
import math
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.conf import settings
from django.test import SimpleTestCase

from ssm.models import ConflictGeometry, VehicleSpec
from ssm.report import safety_report
from stats.anova import welch_t

from .config import config_from_dict, config_to_dict, load_config
from .control import EgoController, advance
from .exceptions import ConfigError
from .geometry import build_geometry
from .models import (
    AggressivenessLevel,
    Decision,
    DriverModel,
    GeometrySpec,
    ScenarioConfig,
    WarningLead,
)
from .scheduling import HEADWAY_TOLERANCE_S, nominal_ego_plan, schedule_aggressive
from .simulation import EMERGENCY_MARGIN, design_cells, jitter_driver, run_design, simulate_trial

CONTACT = 2.0 * VehicleSpec().radius
LEADS = (WarningLead.NONE, WarningLead.ONE_SECOND, WarningLead.TWO_SECONDS)


def high_trial(lead, driver=None, seed=0):
    cfg = ScenarioConfig(
        aggressiveness=AggressivenessLevel.HIGH, warning_lead=lead,
        driver=driver or DriverModel(), seed=seed,
    )
    return simulate_trial(cfg)


def medium_trial(lead, driver=None, seed=0):
    cfg = ScenarioConfig(
        aggressiveness=AggressivenessLevel.MEDIUM, warning_lead=lead,
        driver=driver or DriverModel(), seed=seed,
    )
    return simulate_trial(cfg)


def _on_ring(radius, theta):
    return radius * math.cos(theta), radius * math.sin(theta), theta + 0.5 * math.pi


def ego_pose(spec, s):
    """(x, y, heading) of the ego on the exact circle-and-lines geometry"""
    R, L = spec.radius, spec.ego_approach_length
    if s < L:
        return -R, L - s, 1.5 * math.pi
    if s < L + math.pi * R:
        return _on_ring(R, math.pi + (s - L) / R)
    return R, s - L - math.pi * R, 0.5 * math.pi


def aggressive_pose(spec, s):
    R, L = spec.radius, spec.aggressive_approach_length
    if s < L:
        return 0.0, s - L - R, 0.5 * math.pi
    if s < L + math.pi * R:
        return _on_ring(R, 1.5 * math.pi + (s - L) / R)
    return 0.0, R + s - L - math.pi * R, 0.5 * math.pi


def oracle_min_ttc(trial, spec, contact):
    """
    Minimum TTC of a trial recomputed step by step: both vehicles are
    re-integrated from their first state and recorded accelerations and
    placed on the exact geometry
    """
    dt = trial.config.dt
    s_e, v_e = trial.ego_s[0], float(trial.ego.v[0])
    s_a, v_a = trial.aggressive_s[0], float(trial.aggressive.v[0])
    best, t_best = math.inf, None
    for k in range(len(trial.ego)):
        xe, ye, he = ego_pose(spec, s_e)
        xa, ya, ha = aggressive_pose(spec, s_a)
        rx, ry = xa - xe, ya - ye
        d = math.hypot(rx, ry)
        wx = v_a * math.cos(ha) - v_e * math.cos(he)
        wy = v_a * math.sin(ha) - v_e * math.sin(he)
        closing = -(rx * wx + ry * wy) / d
        if d <= contact:
            value = 0.0
        elif closing > 0:
            value = (d - contact) / closing
        else:
            value = None
        if value is not None and value < best:
            best, t_best = value, k * dt
        a_e, a_a = float(trial.ego.a[k]), float(trial.aggressive.a[k])
        s_e, v_e = s_e + v_e * dt + 0.5 * a_e * dt * dt, v_e + a_e * dt
        s_a, v_a = s_a + v_a * dt + 0.5 * a_a * dt * dt, v_a + a_a * dt
    return best, t_best


def braking_after_action(trial):
    """(max deceleration, braking duration) of the ego once it acted"""
    t, a = trial.ego.t, trial.ego.a
    braking = (t >= trial.action_time - 1e-9) & (a < -1e-9)
    if not braking.any():
        return 0.0, 0.0
    return float(-a[braking].min()), float(braking.sum() * trial.config.dt)


class GeometryTests(SimpleTestCase):

    def setUp(self):
        self.spec = GeometrySpec()
        self.geometry = build_geometry(self.spec)

    def test_conflict_point_is_south_of_ring(self):
        x, y = self.geometry.conflict_point
        self.assertAlmostEqual(x, 0.0, places=3)
        self.assertAlmostEqual(y, -self.spec.radius, places=3)

    def test_conflict_arclengths(self):
        quarter = 0.5 * math.pi * self.spec.radius
        self.assertAlmostEqual(self.geometry.conflict_s_ego, self.spec.ego_approach_length + quarter, places=2)
        self.assertAlmostEqual(self.geometry.conflict_s_agg, self.spec.aggressive_approach_length, places=3)
        self.assertAlmostEqual(self.geometry.roundabout_entry_s_ego, self.spec.ego_approach_length, places=3)

    def test_paths_meet_at_conflict_point(self):
        g = self.geometry
        self.assertLess(float(g.center_distance(g.conflict_s_ego, g.conflict_s_agg)), 1e-3)

    def test_shared_arc_frames(self):
        g = self.geometry
        s_ego = g.aggressive_in_ego_frame(g.conflict_s_agg + 5.0)
        self.assertAlmostEqual(s_ego, g.conflict_s_ego + 5.0)
        self.assertAlmostEqual(g.ego_in_aggressive_frame(s_ego), g.conflict_s_agg + 5.0)
        self.assertIsNone(g.aggressive_in_ego_frame(g.conflict_s_agg - 1.0))
        self.assertLess(float(g.center_distance(s_ego, g.conflict_s_agg + 5.0)), 1e-3)

    def test_conflict_open(self):
        g = self.geometry
        self.assertTrue(g.conflict_open(g.conflict_s_ego - 1.0, g.conflict_s_agg - 30.0))
        # aggressive vehicle ahead on the ring
        self.assertTrue(g.conflict_open(g.conflict_s_ego + 1.0, g.conflict_s_agg + 6.0))
        # aggressive vehicle behind, or still on its approach
        self.assertFalse(g.conflict_open(g.conflict_s_ego + 6.0, g.conflict_s_agg + 1.0))
        self.assertFalse(g.conflict_open(g.conflict_s_ego + 1.0, g.conflict_s_agg - 2.0))

    def test_extrapolation_before_start(self):
        x, y = self.geometry.ego_path.position(-10.0)
        self.assertAlmostEqual(float(x), -self.spec.radius)
        self.assertAlmostEqual(float(y), self.spec.ego_approach_length + 10.0)

    def test_headings(self):
        ego = self.geometry.ego_path
        self.assertAlmostEqual(float(ego.heading(10.0)), 1.5 * math.pi, places=6)
        # counter-clockwise through the south point the ego heads east
        self.assertAlmostEqual(math.cos(float(ego.heading(self.geometry.conflict_s_ego))), 1.0, places=4)


class ControlTests(SimpleTestCase):

    def test_advance_is_constant_acceleration(self):
        s, v, a = advance(10.0, 5.0, -2.0, 0.1)
        self.assertAlmostEqual(s, 10.0 + 0.5 - 0.01)
        self.assertAlmostEqual(v, 4.8)
        self.assertEqual(a, -2.0)

    def test_advance_never_reverses(self):
        s, v, a = advance(0.0, 0.5, -10.0, 0.1)
        self.assertEqual(v, 0.0)
        self.assertAlmostEqual(a, -5.0)
        self.assertAlmostEqual(s, 0.025)

    def test_ego_holds_approach_limit_far_upstream(self):
        driver = DriverModel()
        controller = EgoController(driver, build_geometry(GeometrySpec()), CONTACT, 0.1)
        self.assertEqual(controller.accel(0.0, driver.approach_speed_limit), 0.0)

    def test_ego_slows_to_circulating_limit(self):
        driver = DriverModel()
        geometry = build_geometry(GeometrySpec())
        controller = EgoController(driver, geometry, CONTACT, 0.1)
        v_t, a_ff = controller.target(geometry.roundabout_entry_s_ego, driver.approach_speed_limit)
        self.assertEqual(v_t, driver.circulating_speed_limit)
        self.assertEqual(a_ff, 0.0)


class DriverModelTests(SimpleTestCase):

    def test_braking_decel_escalates_below_threshold(self):
        driver = DriverModel()
        self.assertEqual(driver.escalation_net_distance, 5.0)
        self.assertAlmostEqual(driver.braking_decel(12.0), 7.8)
        self.assertAlmostEqual(driver.braking_decel(5.0), 7.8)
        self.assertAlmostEqual(driver.braking_decel(2.5), 0.5 * (7.8 + 10.5))
        self.assertAlmostEqual(driver.braking_decel(0.0), 10.5)
        self.assertAlmostEqual(driver.braking_decel(-1.0), 10.5)
        self.assertFalse(driver.escalates(5.0))
        self.assertTrue(driver.escalates(4.9))

    def test_rejects_inverted_decelerations(self):
        with self.assertRaises(ValueError):
            DriverModel(comfortable_decel=-9.0, emergency_decel=-8.0)

    def test_rejects_non_positive_escalation_distance(self):
        with self.assertRaises(ValueError):
            DriverModel(escalation_net_distance=0.0)
        with self.assertRaises(ValueError):
            DriverModel(visual_detection_ttc=-0.1)

    def test_jitter_keeps_emergency_beyond_comfortable(self):
        for seed in range(200):
            for fraction in (settings.JITTER_FRACTION, 0.3):
                driver = jitter_driver(DriverModel(), np.random.default_rng(seed), fraction)
                self.assertLessEqual(driver.emergency_decel, driver.comfortable_decel - EMERGENCY_MARGIN + 1e-12)
                self.assertGreaterEqual(driver.reaction_time, 0.0)

    def test_jitter_is_clipped(self):
        base = DriverModel()
        for seed in range(200):
            driver = jitter_driver(base, np.random.default_rng(seed), 0.1)
            self.assertLessEqual(abs(driver.reaction_time / base.reaction_time - 1.0), 0.2 + 1e-12)
            self.assertLessEqual(abs(driver.comfortable_decel / base.comfortable_decel - 1.0), 0.2 + 1e-12)

    def test_zero_jitter_is_identity(self):
        driver = DriverModel()
        self.assertIs(jitter_driver(driver, np.random.default_rng(0), 0.0), driver)


class SchedulingTests(SimpleTestCase):

    def setUp(self):
        self.geometry = build_geometry(GeometrySpec())

    def plan(self, level):
        cfg = ScenarioConfig(aggressiveness=level)
        ego_plan = nominal_ego_plan(cfg, self.geometry, CONTACT)
        return ego_plan, schedule_aggressive(cfg, ego_plan, self.geometry, CONTACT)

    def test_headway_targets(self):
        for level, target in ((AggressivenessLevel.MEDIUM, 1.5), (AggressivenessLevel.HIGH, 0.5)):
            ego_plan, plan = self.plan(level)
            self.assertAlmostEqual(abs(plan.realized_headway), target, delta=HEADWAY_TOLERANCE_S)
            self.assertAlmostEqual(plan.arrival_time, ego_plan.arrival_time - target)
            self.assertGreaterEqual(plan.start_s, 0.0)

    def test_nominal_ego_respects_limits(self):
        ego_plan, _ = self.plan(AggressivenessLevel.HIGH)
        driver = DriverModel()
        self.assertLessEqual(ego_plan.v.max(), driver.approach_speed_limit + 1e-9)
        self.assertGreater(ego_plan.arrival_time, 0.0)

    def test_low_stops_short_of_yield_line(self):
        _, plan = self.plan(AggressivenessLevel.LOW)
        self.assertAlmostEqual(plan.stop_s, self.geometry.aggressive_yield_s - 1.0)
        self.assertGreater(plan.release_s_ego, self.geometry.conflict_s_ego)
        self.assertIsNone(plan.target_headway)


class SimulationTests(SimpleTestCase):

    def test_deterministic(self):
        first = high_trial(WarningLead.TWO_SECONDS)
        second = high_trial(WarningLead.TWO_SECONDS)
        np.testing.assert_array_equal(first.ego.v, second.ego.v)
        np.testing.assert_array_equal(first.aggressive.x, second.aggressive.x)
        self.assertEqual(first.warning, second.warning)

    def test_kinematics_follow_recorded_accelerations(self):
        trial = high_trial(WarningLead.ONE_SECOND)
        dt = trial.config.dt
        s, v, a = np.array(trial.ego_s), trial.ego.v, trial.ego.a
        np.testing.assert_allclose(np.diff(s), v[:-1] * dt + 0.5 * a[:-1] * dt * dt, atol=1e-3)
        np.testing.assert_allclose(np.diff(v), a[:-1] * dt, atol=1e-3)

    def test_speed_bounds(self):
        driver = DriverModel()
        for lead in LEADS:
            trial = high_trial(lead)
            self.assertGreaterEqual(trial.ego.v.min(), 0.0)
            self.assertGreaterEqual(trial.aggressive.v.min(), 0.0)
            self.assertLessEqual(trial.ego.v.max(), driver.approach_speed_limit + 1e-9)

    def test_low_aggressiveness_yields(self):
        for seed in range(30):
            driver = jitter_driver(DriverModel(), np.random.default_rng(seed), settings.JITTER_FRACTION)
            for lead in LEADS:
                cfg = ScenarioConfig(aggressiveness=AggressivenessLevel.LOW, warning_lead=lead, driver=driver, seed=seed)
                trial = simulate_trial(cfg)
                self.assertIsNone(trial.warning)
                self.assertIsNone(trial.cue_time)
                self.assertFalse(trial.collision)
                self.assertIsNone(trial.outcome)

    def test_two_second_warning_lead(self):
        trial = high_trial(WarningLead.TWO_SECONDS)
        self.assertIsNotNone(trial.warning)
        self.assertEqual(trial.warning.lead, 2.0)
        lead = trial.warning.t_predicted_collision - trial.warning.t_issue
        self.assertGreater(lead, 2.0 - 2 * trial.config.dt)
        self.assertLessEqual(lead, 2.0 + 1e-9)
        self.assertEqual(trial.outcome, Decision.STOP)
        self.assertFalse(trial.collision)

    def test_no_warning_reacts_on_sight(self):
        trial = high_trial(WarningLead.NONE)
        self.assertIsNone(trial.warning)
        self.assertIsNotNone(trial.cue_time)
        self.assertEqual(trial.outcome, Decision.STOP)
        driver = trial.config.driver
        self.assertAlmostEqual(trial.action_time - trial.cue_time, driver.reaction_time, delta=trial.config.dt)

    def test_earlier_warning_cues_earlier(self):
        cues = [high_trial(lead).cue_time for lead in LEADS]
        self.assertLess(cues[2], cues[1])
        self.assertLess(cues[1], cues[0])

    def test_late_cue_escalates(self):
        for lead in (WarningLead.NONE, WarningLead.ONE_SECOND):
            trial = high_trial(lead)
            self.assertLess(trial.predicted_net, DriverModel().escalation_net_distance)
            self.assertTrue(trial.escalated)
        trial = high_trial(WarningLead.TWO_SECONDS)
        self.assertGreaterEqual(trial.predicted_net, DriverModel().escalation_net_distance)
        self.assertFalse(trial.escalated)

    def test_two_second_warning_braking_profile(self):
        peak, duration = braking_after_action(high_trial(WarningLead.TWO_SECONDS))
        self.assertAlmostEqual(peak, 7.8, delta=0.05)
        self.assertAlmostEqual(duration, 3.5, delta=0.7)

    def test_go_decision_accelerates(self):
        driver = DriverModel(decision=Decision.GO)
        trial = high_trial(WarningLead.TWO_SECONDS, driver=driver)
        self.assertEqual(trial.outcome, Decision.GO)
        after = trial.ego.a[trial.ego.t >= trial.action_time - 1e-9]
        self.assertGreater(after[0], 0.0)

    def test_braking_follows_warning_lead(self):
        """
        High aggressiveness, 50 jittered drivers: the later the cue, the
        harder and shorter the braking.
        """
        peaks = {lead: [] for lead in LEADS}
        durations = {lead: [] for lead in LEADS}
        for seed in range(50):
            driver = jitter_driver(DriverModel(), np.random.default_rng(seed), settings.JITTER_FRACTION)
            for lead in LEADS:
                peak, duration = braking_after_action(high_trial(lead, driver, seed))
                peaks[lead].append(peak)
                durations[lead].append(duration)
            none, one, two = (peaks[lead][-1] for lead in LEADS)
            self.assertGreater(none, one, f"seed {seed}")
            self.assertGreater(one, two, f"seed {seed}")
            none, one, two = (durations[lead][-1] for lead in LEADS)
            self.assertLess(none, one, f"seed {seed}")
            self.assertLess(one, two, f"seed {seed}")

        means = {lead: float(np.mean(values)) for lead, values in peaks.items()}
        for lead, anchor in ((WarningLead.NONE, 10.5), (WarningLead.ONE_SECOND, 9.8), (WarningLead.TWO_SECONDS, 7.8)):
            self.assertAlmostEqual(means[lead], anchor, delta=0.15 * anchor)
        mean_two = float(np.mean(durations[WarningLead.TWO_SECONDS]))
        self.assertGreaterEqual(mean_two, 2.8)
        self.assertLessEqual(mean_two, 4.2)

    def test_medium_warning_precedes_sight(self):
        trials = {lead: medium_trial(lead) for lead in LEADS}
        seen = trials[WarningLead.NONE]
        self.assertIsNone(seen.warning)
        self.assertIsNotNone(seen.cue_time)
        for lead in (WarningLead.ONE_SECOND, WarningLead.TWO_SECONDS):
            trial = trials[lead]
            self.assertIsNotNone(trial.warning)
            self.assertAlmostEqual(trial.cue_time, trial.warning.t_delivery, delta=1e-9)
            self.assertLess(trial.cue_time, seen.cue_time)
            n = min(len(trial.ego), len(seen.ego))
            self.assertFalse(np.array_equal(trial.ego.v[:n], seen.ego.v[:n]))
        self.assertLess(trials[WarningLead.TWO_SECONDS].cue_time, trials[WarningLead.ONE_SECOND].cue_time)
        self.assertFalse(any(trial.collision for trial in trials.values()))

    def test_full_trial_min_ttc_matches_kinematic_oracle(self):
        trial = high_trial(WarningLead.TWO_SECONDS)
        spec = VehicleSpec.from_settings()
        geometry = build_geometry(GeometrySpec())
        conflict = ConflictGeometry.from_trajectories(geometry.conflict_point, trial.ego, trial.aggressive)
        report = safety_report(trial.ego, trial.aggressive, spec, spec, conflict, trial.entry_time)
        expected, t_expected = oracle_min_ttc(trial, GeometrySpec(), 2.0 * spec.radius)
        self.assertFalse(trial.collision)
        self.assertAlmostEqual(report.min_ttc, expected, delta=0.02)
        self.assertAlmostEqual(report.t_min_ttc, t_expected, delta=trial.config.dt + 1e-9)

    def test_warning_improves_safety_margins(self):
        spec = VehicleSpec.from_settings()
        geometry = build_geometry(GeometrySpec())
        min_ttc = {lead: [] for lead in LEADS}
        cpis = {lead: [] for lead in LEADS}
        for seed in range(30):
            driver = jitter_driver(DriverModel(), np.random.default_rng(1000 + seed), 0.05)
            for lead in LEADS:
                trial = high_trial(lead, driver, seed)
                conflict = ConflictGeometry.from_trajectories(geometry.conflict_point, trial.ego, trial.aggressive)
                report = safety_report(trial.ego, trial.aggressive, spec, spec, conflict, trial.entry_time)
                min_ttc[lead].append(report.min_ttc or 0.0)
                cpis[lead].append(report.cpi or 0.0)

        t, _, p = welch_t(min_ttc[WarningLead.TWO_SECONDS], min_ttc[WarningLead.NONE])
        self.assertGreater(t, 0.0)
        self.assertLess(p, 0.05)
        self.assertGreater(np.mean(cpis[WarningLead.NONE]), np.mean(cpis[WarningLead.ONE_SECOND]))
        self.assertGreater(np.mean(cpis[WarningLead.NONE]), np.mean(cpis[WarningLead.TWO_SECONDS]))


class DesignTests(SimpleTestCase):

    def test_design_order_and_ids(self):
        cells = design_cells(ScenarioConfig(), repeats=2)
        self.assertEqual(len(cells), 18)
        self.assertEqual(cells[0][1], 'Low-None-r0')
        self.assertEqual(cells[1][1], 'Low-None-r1')
        self.assertEqual(cells[-1][1], 'High-TwoSeconds-r1')
        self.assertEqual({subject for _, _, subject in cells}, {'r0', 'r1'})

    def test_one_driver_per_repeat(self):
        cells = design_cells(ScenarioConfig(jitter_fraction=0.1), repeats=2)
        r0 = {cfg.driver for cfg, _, subject in cells if subject == 'r0'}
        r1 = {cfg.driver for cfg, _, subject in cells if subject == 'r1'}
        self.assertEqual(len(r0), 1)
        self.assertEqual(len(r1), 1)
        self.assertNotEqual(r0, r1)

    def test_seed_count_must_match(self):
        with self.assertRaises(ValueError):
            design_cells(ScenarioConfig(), repeats=2, seeds=[1])

    def test_jobs_do_not_change_results(self):
        base = ScenarioConfig(seed=7)
        serial = run_design(base, 1, jobs=1)
        parallel = run_design(base, 1, jobs=2)
        self.assertEqual([t.trial_id for t in serial], [t.trial_id for t in parallel])
        for a, b in zip(serial, parallel):
            np.testing.assert_array_equal(a.ego.v, b.ego.v)
            self.assertEqual(a.collision, b.collision)


class ConfigTests(SimpleTestCase):

    def write(self, directory, text):
        path = Path(directory) / 'scenario.json'
        path.write_text(text, encoding='utf-8')
        return path

    def test_minimal_document_gives_defaults(self):
        self.assertEqual(config_from_dict({'schema_version': 1}), ScenarioConfig())

    def test_round_trip(self):
        cfg = ScenarioConfig(
            aggressiveness='Medium', warning_lead='OneSecond', seed=3,
            driver=DriverModel(reaction_time=0.5), geometry=GeometrySpec(radius=18.0),
        )
        data = json.loads(json.dumps(config_to_dict(cfg)))
        self.assertEqual(config_from_dict(data), cfg)

    def test_wrong_schema_version(self):
        with self.assertRaisesMessage(ConfigError, 'schema_version'):
            config_from_dict({'schema_version': 2})

    def test_unknown_field_is_named(self):
        with self.assertRaisesMessage(ConfigError, 'reaction_tme'):
            config_from_dict({'schema_version': 1, 'driver': {'reaction_tme': 0.3}})

    def test_invalid_value_names_section(self):
        with self.assertRaisesMessage(ConfigError, 'geometry'):
            config_from_dict({'schema_version': 1, 'geometry': {'radius': -1}})

    def test_bad_level(self):
        with self.assertRaises(ConfigError):
            config_from_dict({'schema_version': 1, 'aggressiveness': 'Extreme'})

    def test_json_error_reports_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = self.write(tmp, '{\n  "schema_version": 1,\n  "seed": \n}\n')
            with self.assertRaisesMessage(ConfigError, 'line 4'):
                load_config(path)


class SimulateCommandTests(SimpleTestCase):

    def simulate(self, out, *args):
        call_command('simulate', *args, '--out', str(out), stdout=StringIO())

    def test_default_config_two_repeats(self):
        with tempfile.TemporaryDirectory() as tmp:
            self.simulate(tmp, '--repeats', '2')
            trials = sorted(p for p in (Path(tmp) / 'trials').iterdir() if p.is_dir())
            self.assertEqual(len(trials), 18)
            for name in ('ego.csv', 'aggressive.csv', 'gaze.csv', 'trial.json'):
                self.assertTrue((trials[0] / name).is_file())
            manifest = json.loads((Path(tmp) / 'manifest.json').read_text())
            self.assertEqual(manifest['repeats'], 2)
            self.assertEqual(manifest['seeds'], [0, 1])
            self.assertEqual(manifest['summary']['n_trials'], 18)
            self.assertEqual(manifest['config']['schema_version'], 1)

    def test_trial_manifest_contents(self):
        with tempfile.TemporaryDirectory() as tmp:
            self.simulate(tmp)
            trial = json.loads((Path(tmp) / 'trials' / 'High-TwoSeconds-r0' / 'trial.json').read_text())
            self.assertEqual(trial['aggressiveness'], 'High')
            self.assertEqual(trial['warning']['lead'], 2.0)
            self.assertEqual(trial['outcome'], 'Stop')
            ego = pd.read_csv(Path(tmp) / 'trials' / 'High-TwoSeconds-r0' / 'ego.csv')
            self.assertEqual(list(ego.columns), ['t', 'x', 'y', 'v', 'a', 'heading'])

    def test_same_seed_same_bytes(self):
        with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
            self.simulate(a, '--seed', '5')
            self.simulate(b, '--seed', '5')
            for trial in (Path(a) / 'trials').iterdir():
                for name in ('ego.csv', 'aggressive.csv', 'gaze.csv', 'trial.json'):
                    self.assertEqual(
                        (trial / name).read_bytes(),
                        (Path(b) / 'trials' / trial.name / name).read_bytes(),
                    )
            self.assertEqual((Path(a) / 'manifest.json').read_bytes(), (Path(b) / 'manifest.json').read_bytes())

    def test_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'scenario.json'
            path.write_text(json.dumps({'schema_version': 1, 'seed': 11, 'jitter_fraction': 0.0}))
            self.simulate(Path(tmp) / 'run', str(path))
            manifest = json.loads((Path(tmp) / 'run' / 'manifest.json').read_text())
            self.assertEqual(manifest['seeds'], [11])

    def test_missing_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                self.simulate(tmp, str(Path(tmp) / 'nope.json'))
            self.assertEqual(ctx.exception.returncode, 2)

    def test_invalid_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'scenario.json'
            path.write_text('{"schema_version": 1, "dt": -0.1}')
            with self.assertRaises(CommandError) as ctx:
                self.simulate(Path(tmp) / 'run', str(path))
            self.assertEqual(ctx.exception.returncode, 2)

    def test_written_config_reproduces_run(self):
        with tempfile.TemporaryDirectory() as tmp:
            first, second = Path(tmp) / 'first', Path(tmp) / 'second'
            self.simulate(first, '--seed', '3', '--jitter', '0.2')
            written = first / 'config.json'
            self.assertEqual(load_config(written), ScenarioConfig(seed=3, jitter_fraction=0.2))
            self.simulate(second, str(written))
            self.assertEqual((first / 'manifest.json').read_bytes(), (second / 'manifest.json').read_bytes())

    def test_jobs_give_identical_bytes(self):
        with tempfile.TemporaryDirectory() as serial, tempfile.TemporaryDirectory() as parallel:
            self.simulate(serial, '--repeats', '2', '--jobs', '1')
            self.simulate(parallel, '--repeats', '2', '--jobs', '8')
            names = sorted(p.relative_to(serial) for p in Path(serial).rglob('*') if p.is_file())
            self.assertEqual(names, sorted(p.relative_to(parallel) for p in Path(parallel).rglob('*') if p.is_file()))
            for name in names:
                self.assertEqual((Path(serial) / name).read_bytes(), (Path(parallel) / name).read_bytes(), str(name))
