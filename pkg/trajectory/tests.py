import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, override_settings

from .csv_io import ingest_trajectory_csv, write_trajectory_csv
from .exceptions import AlignmentError, InsufficientDataError, OrderingError, TrajectoryParseError
from .kalman import kalman_smooth
from .models import KalmanConfig, Trajectory, TrajectoryPoint, align


def constant_velocity(n, speed=10.0, heading=0.0, dt=0.1, x0=0.0, y0=0.0, vehicle_id='cv'):
    points = []
    for k in range(n):
        t = round(k * dt, 9)
        points.append(TrajectoryPoint(
            t=t,
            x=x0 + speed * math.cos(heading) * t,
            y=y0 + speed * math.sin(heading) * t,
            v=speed,
            a=0.0,
            heading=heading,
        ))
    return Trajectory(vehicle_id, points, dt)


class IngestTrajectoryCsvTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text, name='ego.csv'):
        path = Path(self.tmp.name) / name
        path.write_text(text, encoding='utf-8')
        return path

    def test_well_formed_file(self):
        path = self.write(
            "t,x,y,v,a,heading\n"
            "0.0,0.0,0.0,10.0,0.0,0.0\n"
            "0.1,1.0,0.0,10.0,0.0,0.0\n"
            "0.2,2.0,0.0,10.0,0.0,0.0\n"
        )
        traj = ingest_trajectory_csv(path)
        self.assertEqual(len(traj), 3)
        self.assertAlmostEqual(traj.dt, 0.1, places=9)
        self.assertEqual(traj.vehicle_id, 'ego')

    def test_duplicate_timestamp_is_ordering_error(self):
        path = self.write(
            "t,x,y,v,a,heading\n"
            "0.0,0.0,0.0,10.0,0.0,0.0\n"
            "0.0,1.0,0.0,10.0,0.0,0.0\n"
        )
        with self.assertRaises(OrderingError):
            ingest_trajectory_csv(path)

    def test_missing_heading_column(self):
        path = self.write(
            "t,x,y,v,a\n"
            "0.0,0.0,0.0,10.0,0.0\n"
        )
        with self.assertRaises(TrajectoryParseError):
            ingest_trajectory_csv(path)

    def test_malformed_row_names_line(self):
        path = self.write(
            "t,x,y,v,a,heading\n"
            "0.0,0.0,0.0,10.0,0.0,0.0\n"
            "0.1,abc,0.0,10.0,0.0,0.0\n"
        )
        with self.assertRaises(TrajectoryParseError) as ctx:
            ingest_trajectory_csv(path)
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn('line 3', str(ctx.exception))

    def test_write_then_read_keeps_samples(self):
        traj = constant_velocity(5, heading=0.3)
        path = write_trajectory_csv(traj, Path(self.tmp.name) / 'cv.csv')
        back = ingest_trajectory_csv(path)
        np.testing.assert_allclose(back.x, traj.x, atol=1e-6)
        self.assertEqual(path.read_text().splitlines()[0], 't,x,y,v,a,heading')


class TrajectoryModelTests(SimpleTestCase):

    def test_negative_speed_rejected(self):
        with self.assertRaises(ValueError):
            TrajectoryPoint(0.0, 0.0, 0.0, -1.0, 0.0, 0.0)

    def test_irregular_sampling_rejected(self):
        points = [TrajectoryPoint(t, 0, 0, 0, 0, 0) for t in (0.0, 0.1, 0.25)]
        with self.assertRaises(OrderingError):
            Trajectory('bad', points)

    def test_align_intersects_clocks(self):
        a = constant_velocity(10)
        b = Trajectory('b', constant_velocity(15).points[4:], 0.1)
        ai, bj = align(a, b)
        self.assertEqual(len(ai), 6)
        np.testing.assert_allclose(ai.t, bj.t)

    def test_align_without_overlap(self):
        a = constant_velocity(5)
        b = Trajectory('b', constant_velocity(20).points[10:], 0.1)
        with self.assertRaises(AlignmentError):
            align(a, b)


class KalmanSmoothTests(SimpleTestCase):

    def test_noiseless_input_converges(self):
        traj = constant_velocity(50, speed=10.0, heading=0.6)
        smoothed = kalman_smooth(traj, KalmanConfig())
        err = np.hypot(smoothed.x - traj.x, smoothed.y - traj.y)
        self.assertLess(err[5:].max(), 1e-6)
        self.assertLess(err[5:].max(), 1e-4)

    def test_timestamps_preserved(self):
        traj = constant_velocity(30)
        smoothed = kalman_smooth(traj, KalmanConfig())
        self.assertEqual(smoothed.t.tolist(), traj.t.tolist())

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        base = constant_velocity(40)
        noisy = Trajectory('n', [
            TrajectoryPoint(p.t, p.x + rng.normal(0, 0.5), p.y + rng.normal(0, 0.5), p.v, p.a, p.heading)
            for p in base
        ], base.dt)
        cfg = KalmanConfig()
        first = kalman_smooth(noisy, cfg)
        second = kalman_smooth(noisy, cfg)
        self.assertEqual(first.x.tobytes(), second.x.tobytes())
        self.assertEqual(first.a.tobytes(), second.a.tobytes())

    def test_monte_carlo_rmse_reduction(self):
        truth = constant_velocity(200, speed=10.0)
        cfg = KalmanConfig()
        raw_rmse, smooth_rmse = [], []
        for seed in range(100):
            rng = np.random.default_rng(seed)
            nx = rng.normal(0.0, 0.5, len(truth))
            ny = rng.normal(0.0, 0.5, len(truth))
            noisy = Trajectory('mc', [
                TrajectoryPoint(p.t, p.x + ex, p.y + ey, p.v, p.a, p.heading)
                for p, ex, ey in zip(truth, nx, ny)
            ], truth.dt)
            smoothed = kalman_smooth(noisy, cfg)
            raw_rmse.append(np.sqrt(np.mean(nx ** 2 + ny ** 2)))
            smooth_rmse.append(np.sqrt(np.mean((smoothed.x - truth.x) ** 2 + (smoothed.y - truth.y) ** 2)))
        self.assertLess(np.mean(smooth_rmse), 0.7 * np.mean(raw_rmse))

    def test_acceleration_from_smoothed_speed(self):
        dt = 0.1
        points = []
        for k in range(40):
            t = round(k * dt, 9)
            v = 5.0 + 1.0 * t
            points.append(TrajectoryPoint(t, 5.0 * t + 0.5 * t * t, 0.0, v, 1.0, 0.0))
        smoothed = kalman_smooth(Trajectory('acc', points, dt), KalmanConfig())
        np.testing.assert_allclose(smoothed.a[5:-5], 1.0, atol=0.2)

    def test_single_point_is_insufficient(self):
        traj = constant_velocity(1)
        with self.assertRaises(InsufficientDataError):
            kalman_smooth(traj, KalmanConfig())

    @override_settings(KALMAN_POS_NOISE_STD=2.0)
    def test_config_from_settings(self):
        self.assertEqual(KalmanConfig.from_settings().measurement_noise_std_pos, 2.0)

    def test_non_positive_config_rejected(self):
        with self.assertRaises(ValueError):
            KalmanConfig(process_noise_std=0.0)
