import math

import numpy as np
from django.test import SimpleTestCase, override_settings

from scenario.geometry import build_geometry, path_point
from scenario.models import GeometrySpec
from ssm.models import VehicleSpec

from .models import WarningEvent
from .monitor import WarningMonitor, monitor_trace
from .prediction import (
    collision_time_along_paths,
    min_net_distance,
    predict_collision_time,
    predicted_distances,
)

SMALL_CONTACT = 0.4
CONTACT = 4.0
DT = 0.1


def dense_oracle(geometry, s_ego, v_ego, s_agg, v_agg, contact, horizon=10.0):
    """First grid time (1 ms) at which the centre distance reaches contact"""
    tau = np.arange(0.0, horizon, 0.001)
    dist = geometry.center_distance(s_ego + v_ego * tau, s_agg + v_agg * tau)
    hits = np.flatnonzero(dist <= contact)
    return float(tau[hits[0]]) if hits.size else None


def constant_speed_trace(geometry, ego_lag, v_ego, agg_lag, v_agg, steps=80):
    """Both vehicles at constant speed, starting ``lag`` metres before the conflict point"""
    s_ego0 = geometry.conflict_s_ego - ego_lag
    s_agg0 = geometry.conflict_s_agg - agg_lag
    return [
        (round(k * DT, 9), s_ego0 + v_ego * k * DT, v_ego, s_agg0 + v_agg * k * DT, v_agg)
        for k in range(steps)
    ]


class PredictionTests(SimpleTestCase):

    def setUp(self):
        self.geometry = build_geometry(GeometrySpec())

    def test_simultaneous_arrival_with_small_radii(self):
        g = self.geometry
        t = collision_time_along_paths(
            g, g.conflict_s_ego - 10.0, 10.0, g.conflict_s_agg - 5.0, 5.0, SMALL_CONTACT, now=3.0,
        )
        self.assertIsNotNone(t)
        self.assertGreater(t, 3.9)
        self.assertLessEqual(t, 4.0 + 1e-9)

    def test_matches_dense_grid(self):
        g = self.geometry
        cases = [
            (g.conflict_s_ego - 30.0, 6.7, g.conflict_s_agg - 12.0, 4.5),
            (g.conflict_s_ego - 12.0, 6.0, g.conflict_s_agg - 6.5, 4.5),
            (g.conflict_s_ego - 40.0, 12.0, g.conflict_s_agg - 20.0, 6.0),
        ]
        for s_ego, v_ego, s_agg, v_agg in cases:
            oracle = dense_oracle(g, s_ego, v_ego, s_agg, v_agg, CONTACT)
            predicted = collision_time_along_paths(g, s_ego, v_ego, s_agg, v_agg, CONTACT, now=0.0)
            self.assertIsNotNone(oracle)
            self.assertAlmostEqual(predicted, oracle, delta=DT)

    def test_stopped_aggressive_far_from_conflict(self):
        g = self.geometry
        t = collision_time_along_paths(
            g, g.conflict_s_ego - 20.0, 6.7, g.conflict_s_agg - 30.0, 0.0, CONTACT, now=0.0,
        )
        self.assertIsNone(t)

    def test_horizon_limits_prediction(self):
        g = self.geometry
        args = (g, g.conflict_s_ego - 60.0, 6.0, g.conflict_s_agg - 45.0, 4.5, CONTACT)
        self.assertIsNone(collision_time_along_paths(*args, now=0.0, horizon=5.0))
        self.assertIsNotNone(collision_time_along_paths(*args, now=0.0, horizon=15.0))

    def test_distances_start_at_current_positions(self):
        g = self.geometry
        tau, dist = predicted_distances(g, g.conflict_s_ego, 5.0, g.conflict_s_agg - 10.0, 5.0)
        self.assertEqual(tau[0], 0.0)
        self.assertAlmostEqual(float(dist[0]), 10.0, places=2)

    def test_braking_ego_keeps_its_distance(self):
        g = self.geometry
        s_ego, s_agg = g.conflict_s_ego - 50.0, g.conflict_s_agg - 25.0
        coasting = min_net_distance(g, s_ego, 10.0, 0.0, s_agg, 5.0, CONTACT)
        braking = min_net_distance(g, s_ego, 10.0, -5.0, s_agg, 5.0, CONTACT)
        self.assertLess(coasting, 0.0)
        self.assertGreater(braking, 25.0)

    def test_trajectory_points_are_projected(self):
        g = self.geometry
        spec = VehicleSpec(radius=2.0)
        s_ego, s_agg = g.conflict_s_ego - 30.0, g.conflict_s_agg - 12.0
        ego = path_point(g.ego_path, 1.0, s_ego, 6.7, 0.0)
        agg = path_point(g.aggressive_path, 1.0, s_agg, 4.5, 0.0)
        expected = collision_time_along_paths(g, s_ego, 6.7, s_agg, 4.5, CONTACT, now=1.0)
        self.assertAlmostEqual(predict_collision_time(ego, agg, g, (spec, spec)), expected, delta=0.011)


class WarningEventTests(SimpleTestCase):

    def test_delivery_defaults_to_issue(self):
        event = WarningEvent(1.0, 3.0, 2.0, None, None)
        self.assertEqual(event.t_delivery, 1.0)

    def test_rejects_other_leads(self):
        with self.assertRaises(ValueError):
            WarningEvent(1.0, 2.5, 1.5, None, None)

    def test_to_dict(self):
        data = WarningEvent(1.0, 2.0, 1.0, None, None, t_delivery=1.2).to_dict()
        self.assertEqual(data['t_delivery'], 1.2)
        self.assertEqual(data['lead'], 1.0)


class MonitorTests(SimpleTestCase):

    def setUp(self):
        self.geometry = build_geometry(GeometrySpec())
        # ego 50 m at 10 m/s, aggressive 25 m at 5 m/s: both reach the conflict point at t = 5
        self.trace = constant_speed_trace(self.geometry, 50.0, 10.0, 25.0, 5.0)
        self.contact = dense_oracle(self.geometry, *self.trace[0][1:], CONTACT)

    def test_issues_when_collision_is_lead_away(self):
        for lead in (1.0, 2.0):
            event = monitor_trace(self.trace, lead, self.geometry, CONTACT)
            self.assertIsNotNone(event)
            self.assertLessEqual(event.t_predicted_collision - event.t_issue, lead + 1e-9)
            self.assertGreater(event.t_predicted_collision - event.t_issue, lead - DT - 1e-9)
            self.assertAlmostEqual(event.t_predicted_collision, self.contact, delta=DT)
            expected_issue = math.ceil((self.contact - lead) / DT - 1e-6) * DT
            self.assertAlmostEqual(event.t_issue, expected_issue, delta=DT + 1e-9)

    def test_longer_lead_issues_earlier(self):
        one = monitor_trace(self.trace, 1.0, self.geometry, CONTACT)
        two = monitor_trace(self.trace, 2.0, self.geometry, CONTACT)
        self.assertLess(two.t_issue, one.t_issue)

    def test_disabled_monitor(self):
        monitor = WarningMonitor(None, self.geometry, CONTACT)
        for t, s_e, v_e, s_a, v_a in self.trace:
            self.assertIsNone(monitor.step(t, s_e, v_e, 0.0, s_a, v_a, 0.0))
        self.assertIsNone(monitor.event)
        self.assertIsNone(monitor_trace(self.trace, None, self.geometry, CONTACT))

    def test_issues_once(self):
        monitor = WarningMonitor(2.0, self.geometry, CONTACT)
        issued = [monitor.step(t, s_e, v_e, 0.0, s_a, v_a, 0.0) for t, s_e, v_e, s_a, v_a in self.trace]
        self.assertEqual(sum(event is not None for event in issued), 1)

    def test_latency_delays_delivery(self):
        event = monitor_trace(self.trace, 2.0, self.geometry, CONTACT, latency=0.3)
        self.assertAlmostEqual(event.t_delivery, event.t_issue + 0.3)

    @override_settings(WARNING_LATENCY_S=0.2)
    def test_latency_from_settings(self):
        event = monitor_trace(self.trace, 2.0, self.geometry, CONTACT)
        self.assertAlmostEqual(event.t_delivery, event.t_issue + 0.2)

    def test_vanishing_prediction_issues_nothing(self):
        g = self.geometry
        monitor = WarningMonitor(1.0, g, CONTACT)
        s_ego, s_agg = g.conflict_s_ego - 40.0, g.conflict_s_agg - 16.0
        # on course for a collision 4 s out, then the aggressive vehicle stops
        monitor.step(0.0, s_ego, 10.0, 0.0, s_agg, 4.0, 0.0)
        self.assertIsNotNone(monitor.last_prediction)
        self.assertIsNone(monitor.event)
        monitor.step(0.1, s_ego + 1.0, 10.0, 0.0, s_agg, 0.0, 0.0)
        self.assertIsNone(monitor.last_prediction)
        self.assertIsNone(monitor.event)

    def test_no_prediction_once_ego_has_passed(self):
        g = self.geometry
        monitor = WarningMonitor(2.0, g, CONTACT)
        self.assertIsNone(monitor.predict(0.0, g.conflict_s_ego + 1.0, 5.0, g.conflict_s_agg - 3.0, 5.0))

    def test_slower_vehicle_ahead_on_the_ring_is_still_predicted(self):
        g = self.geometry
        monitor = WarningMonitor(2.0, g, CONTACT)
        s_ego = g.conflict_s_ego + 1.0
        s_agg = g.conflict_s_agg + 8.0
        predicted = monitor.predict(0.0, s_ego, 6.7, s_agg, 4.5)
        self.assertIsNotNone(predicted)
        # the centre gap of 7 m closes at 2.2 m/s down to contact
        self.assertAlmostEqual(predicted, (7.0 - CONTACT) / 2.2, delta=0.1)
