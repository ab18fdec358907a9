from io import StringIO
import json
import math
from pathlib import Path
import shutil
import tempfile

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from scipy import integrate
from scipy.stats import norm

from trajectory.models import Trajectory, TrajectoryPoint

from .batch import DESCRIPTOR_FIELDS, trial_row
from .exceptions import DegenerateDistanceError, WindowError
from .metrics import (
    acceleration_noise,
    braking_stats,
    cpi,
    drac,
    madr_exceedance_prob,
    time_headway,
    ttc,
    ttc_series,
)
from .models import ConflictGeometry, SafetyReport, VehicleSpec
from .report import read_report_json, safety_report

DT = 0.1


def straight(vehicle_id, x0, y0, heading, speed, n=20, accels=None):
    points = []
    x, y = x0, y0
    for k in range(n):
        a = accels[k] if accels is not None else 0.0
        points.append(TrajectoryPoint(round(k * DT, 9), x, y, speed, a, heading % (2 * math.pi)))
        x += speed * math.cos(heading) * DT
        y += speed * math.sin(heading) * DT
    return Trajectory(vehicle_id, points, DT)


def truncnorm_cdf_oracle(x, spec):
    density = lambda u: norm.pdf((u - spec.madr_mean) / spec.madr_std) / spec.madr_std
    num, _ = integrate.quad(density, spec.madr_lower, x, epsabs=1e-13, epsrel=1e-13)
    den, _ = integrate.quad(density, spec.madr_lower, spec.madr_upper, epsabs=1e-13, epsrel=1e-13)
    return num / den


class TtcTests(SimpleTestCase):

    def test_direct_substitution(self):
        spec = VehicleSpec(radius=2.0)
        self.assertAlmostEqual(ttc(24.0 - 2 * spec.radius, 5.0, 5.0), 2.0)

    def test_zero_closing_speed_is_undefined(self):
        self.assertIsNone(ttc(10.0, 0.0, 0.0))

    def test_perpendicular_approach(self):
        spec = VehicleSpec(radius=2.0)
        leg = 24.0 / math.sqrt(2.0)
        ego = straight('ego', -leg, 0.0, 0.0, 10.0, n=3)
        agg = straight('agg', 0.0, -leg, math.pi / 2, 10.0, n=3)
        series = ttc_series(ego, agg, spec, spec)
        expected = 20.0 / (10.0 * math.cos(math.pi / 4) * 2)
        self.assertAlmostEqual(series[0][1], expected, places=9)
        self.assertAlmostEqual(series[0][1], 1.414, places=3)

    def test_perpendicular_matches_closest_approach_oracle(self):
        # symmetric approach: the line of sight stays at 45 degrees, so TTC
        # equals the time until the centre gap shrinks to the combined radii
        spec = VehicleSpec(radius=2.0)
        leg = 24.0 / math.sqrt(2.0)
        ego = straight('ego', -leg, 0.0, 0.0, 10.0, n=3)
        agg = straight('agg', 0.0, -leg, math.pi / 2, 10.0, n=3)
        grid = np.arange(0.0, 5.0, 1e-5)
        gap = np.hypot(leg - 10.0 * grid, leg - 10.0 * grid) - 4.0
        contact = grid[np.argmax(gap <= 0)]
        self.assertAlmostEqual(ttc_series(ego, agg, spec, spec)[0][1], contact, places=3)

    def test_stationary_vehicles_undefined(self):
        spec = VehicleSpec()
        ego = straight('ego', 0.0, 0.0, 0.0, 0.0, n=5)
        agg = straight('agg', 30.0, 0.0, math.pi, 0.0, n=5)
        self.assertTrue(all(v is None for _, v in ttc_series(ego, agg, spec, spec)))

    def test_diverging_vehicles_undefined(self):
        spec = VehicleSpec()
        ego = straight('ego', 0.0, 0.0, math.pi, 10.0, n=5)
        agg = straight('agg', 30.0, 0.0, 0.0, 10.0, n=5)
        self.assertTrue(all(v is None for _, v in ttc_series(ego, agg, spec, spec)))

    def test_scale_invariance(self):
        k = 3.5
        small = VehicleSpec(radius=1.0)
        large = VehicleSpec(radius=1.0 * k)
        base = ttc_series(
            straight('e', -20.0, 0.0, 0.0, 8.0, n=10),
            straight('a', 0.0, -15.0, math.pi / 2, 6.0, n=10), small, small)
        scaled = ttc_series(
            straight('e', -20.0 * k, 0.0, 0.0, 8.0 * k, n=10),
            straight('a', 0.0, -15.0 * k, math.pi / 2, 6.0 * k, n=10), large, large)
        for (_, a), (_, b) in zip(base, scaled):
            self.assertAlmostEqual(a, b, places=9)


class HeadwayAndDracTests(SimpleTestCase):

    def test_headway_substitution(self):
        self.assertAlmostEqual(time_headway(10.0, 5.0, 30.0, 10.0), 1.0)

    def test_headway_symmetric(self):
        self.assertEqual(time_headway(12.0, 6.0, 12.0, 6.0), 0.0)

    def test_headway_zero_speed(self):
        self.assertIsNone(time_headway(10.0, 0.0, 30.0, 10.0))

    def test_drac_substitution(self):
        self.assertAlmostEqual(drac(15.0, 5.0, 10.0), 5.0)

    def test_drac_equal_speeds(self):
        self.assertEqual(drac(7.0, 7.0, 10.0), 0.0)

    def test_drac_not_closing(self):
        self.assertEqual(drac(3.0, 7.0, 10.0), 0.0)

    def test_drac_degenerate_distance(self):
        with self.assertRaises(DegenerateDistanceError):
            drac(15.0, 5.0, 0.0)


class MadrTests(SimpleTestCase):

    def setUp(self):
        self.spec = VehicleSpec()

    def test_bounds(self):
        self.assertEqual(madr_exceedance_prob(self.spec.madr_lower, self.spec), 0.0)
        self.assertEqual(madr_exceedance_prob(self.spec.madr_upper, self.spec), 1.0)
        self.assertEqual(madr_exceedance_prob(0.0, self.spec), 0.0)
        self.assertEqual(madr_exceedance_prob(20.0, self.spec), 1.0)

    def test_symmetric_bounds_median(self):
        spec = VehicleSpec(madr_mean=8.0, madr_std=1.5, madr_lower=5.0, madr_upper=11.0)
        self.assertAlmostEqual(madr_exceedance_prob(8.0, spec), 0.5, places=10)

    def test_quadrature_oracle(self):
        self.assertAlmostEqual(
            madr_exceedance_prob(9.0, self.spec), truncnorm_cdf_oracle(9.0, self.spec), delta=1e-8)

    def test_non_decreasing(self):
        values = [madr_exceedance_prob(x, self.spec) for x in np.linspace(0.0, 15.0, 301)]
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))

    def test_invalid_spec(self):
        with self.assertRaises(ValueError):
            VehicleSpec(madr_lower=9.0, madr_mean=8.0)


class CpiTests(SimpleTestCase):

    def setUp(self):
        self.spec = VehicleSpec()

    def test_zero_drac(self):
        series = [(round(k * DT, 9), 0.0) for k in range(10)]
        self.assertEqual(cpi(series, self.spec, 0.0, 1.0, DT), 0.0)

    def test_drac_above_upper_bound(self):
        series = [(round(k * DT, 9), 13.0) for k in range(11)]
        value = cpi(series, self.spec, 0.0, 1.0, DT)
        self.assertLessEqual(abs(value - 1.0), DT / 1.0)
        self.assertLessEqual(value, 1.0)

    def test_piecewise_quadrature_oracle(self):
        series = [(0.0, 0.0), (0.1, 6.0), (0.2, 10.0)]
        expected = sum(truncnorm_cdf_oracle(v, self.spec) for v in (6.0, 10.0)) * 0.1 / 0.3
        self.assertAlmostEqual(cpi(series, self.spec, 0.0, 0.3, DT), expected, delta=1e-8)

    def test_empty_window(self):
        with self.assertRaises(WindowError):
            cpi([(0.0, 1.0)], self.spec, 1.0, 1.0, DT)

    def test_randomized_bounds_and_monotonicity(self):
        rng = np.random.default_rng(2024)
        for _ in range(10000):
            n = int(rng.integers(1, 30))
            values = rng.uniform(0.0, 15.0, n) * (rng.random(n) < 0.8)
            series = [(round(k * DT, 9), float(v)) for k, v in enumerate(values)]
            window = n * DT
            base = cpi(series, self.spec, 0.0, window, DT)
            self.assertGreaterEqual(base, 0.0)
            self.assertLessEqual(base, 1.0 + 1e-12)
            bumped = values + rng.uniform(0.0, 3.0, n)
            series_up = [(t, float(v)) for (t, _), v in zip(series, bumped)]
            self.assertGreaterEqual(cpi(series_up, self.spec, 0.0, window, DT), base - 1e-15)


class AccelerationNoiseTests(SimpleTestCase):

    def test_constant_acceleration(self):
        series = [(round(k * DT, 9), -2.0) for k in range(20)]
        self.assertEqual(acceleration_noise(series, 0.0, 1.9, DT), 0.0)

    def test_alternating_unit_deviation(self):
        series = [(round(k * DT, 9), 1.0 if k % 2 == 0 else -1.0) for k in range(20)]
        self.assertAlmostEqual(acceleration_noise(series, 0.0, 1.9, DT), 1.0)

    def test_ramp_direct_summation(self):
        accels = np.linspace(0.0, 2.0, 10)
        series = [(round(k * DT, 9), float(a)) for k, a in enumerate(accels)]
        mean = sum(accels) / 10
        expected = math.sqrt(sum((a - mean) ** 2 * DT for a in accels) / (10 * DT))
        self.assertAlmostEqual(acceleration_noise(series, 0.0, 0.9, DT), expected, places=12)

    def test_shift_invariance(self):
        rng = np.random.default_rng(5)
        accels = rng.normal(0.0, 1.5, 30)
        base = [(round(k * DT, 9), float(a)) for k, a in enumerate(accels)]
        shifted = [(t, a + 4.2) for t, a in base]
        self.assertAlmostEqual(
            acceleration_noise(base, 0.0, 2.9, DT), acceleration_noise(shifted, 0.0, 2.9, DT), places=10)

    def test_single_sample_window(self):
        with self.assertRaises(WindowError):
            acceleration_noise([(0.0, 1.0), (0.1, 2.0)], 0.0, 0.05, DT)


class BrakingStatsTests(SimpleTestCase):

    def test_constant_deceleration(self):
        traj = straight('ego', 0.0, 0.0, 0.0, 10.0, n=60, accels=[-6.11] * 60)
        stats = braking_stats(traj, 3.0)
        self.assertAlmostEqual(stats.avg_decel, -6.11)
        self.assertFalse(stats.no_braking)

    def test_no_braking(self):
        traj = straight('ego', 0.0, 0.0, 0.0, 10.0, n=60, accels=[0.5] * 60)
        stats = braking_stats(traj, 3.0)
        self.assertTrue(stats.no_braking)
        self.assertEqual((stats.avg_decel, stats.max_decel, stats.duration), (0.0, 0.0, 0.0))

    def test_two_phase_duration(self):
        accels = [0.0] * 20 + [-5.0] * 15 + [0.0] * 25
        traj = straight('ego', 0.0, 0.0, 0.0, 10.0, n=60, accels=accels)
        stats = braking_stats(traj, 3.0)
        self.assertAlmostEqual(stats.duration, 1.5)
        self.assertLessEqual(stats.max_decel, stats.avg_decel)
        self.assertLessEqual(stats.avg_decel, 0.0)

    def test_window_clipped_at_trajectory_end(self):
        traj = straight('ego', 0.0, 0.0, 0.0, 10.0, n=30, accels=[-1.0] * 30)
        stats = braking_stats(traj, 2.5)
        self.assertAlmostEqual(stats.window[1], traj.end)


class SafetyReportTests(SimpleTestCase):

    def setUp(self):
        self.spec = VehicleSpec()

    def test_never_approaching(self):
        ego = straight('ego', 0.0, 0.0, math.pi, 10.0, n=30)
        agg = straight('agg', 30.0, 0.0, 0.0, 10.0, n=30)
        geometry = ConflictGeometry.from_trajectories((15.0, 0.0), ego, agg)
        report = safety_report(ego, agg, self.spec, self.spec, geometry, 0.0)
        self.assertIsNone(report.min_ttc)
        self.assertEqual(report.cpi, 0.0)
        self.assertFalse(report.collision)

    def test_contact_event(self):
        ego = straight('ego', 0.0, 0.0, 0.0, 10.0, n=30)
        agg = straight('agg', 40.0, 0.0, math.pi, 10.0, n=30)
        geometry = ConflictGeometry.from_trajectories((20.0, 0.0), ego, agg)
        report = safety_report(ego, agg, self.spec, self.spec, geometry, 0.0, trial_id='head-on')
        self.assertEqual(report.min_ttc, 0.0)
        self.assertTrue(report.collision)
        self.assertGreater(report.max_drac, 0.0)
        self.assertGreaterEqual(report.cpi, 0.0)
        self.assertLessEqual(report.cpi, 1.0)

    def test_minimum_ttc_before_entry_leaves_window_fields_absent(self):
        ego = straight('ego', 0.0, 0.0, 0.0, 10.0, n=30)
        agg = straight('agg', 40.0, 0.0, math.pi, 10.0, n=30)
        geometry = ConflictGeometry.from_trajectories((20.0, 0.0), ego, agg)
        with self.assertLogs('ssm.report', level='WARNING'):
            report = safety_report(ego, agg, self.spec, self.spec, geometry, 2.5, trial_id='late-entry')
        self.assertEqual(report.min_ttc, 0.0)
        self.assertLess(report.t_min_ttc, 2.5)
        self.assertIsNone(report.cpi)
        self.assertIsNone(report.max_drac)
        self.assertIsNone(report.an)
        self.assertIsNone(report.max_decel_to_min_ttc)
        row = report.to_row()
        self.assertIsNone(row['cpi'])

    def test_row_has_flat_braking_window(self):
        row = SafetyReport(trial_id='x', braking_window=(1.0, 5.0)).to_row()
        self.assertEqual(row['braking_window_start'], 1.0)
        self.assertEqual(list(row), list(SafetyReport.CSV_FIELDS))


class MetricsCommandTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls._tmp = tempfile.TemporaryDirectory()
        cls.run_dir = Path(cls._tmp.name) / 'run'
        call_command('simulate', '--out', str(cls.run_dir), '--repeats', '2', stdout=StringIO())

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()
        super().tearDownClass()

    def metrics(self, source, out, *args):
        call_command('metrics', str(source), '--out', str(out), *args, stdout=StringIO())

    def test_one_row_per_trial(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / 'metrics.csv'
            self.metrics(self.run_dir, out)
            frame = pd.read_csv(out, dtype=str, keep_default_na=False)
            self.assertEqual(len(frame), 18)
            self.assertEqual(list(frame.columns[:6]), list(('trial_id',) + DESCRIPTOR_FIELDS))
            self.assertEqual(set(frame['subject']), {'r0', 'r1'})
            low = frame[frame['aggressiveness'] == 'Low']
            self.assertTrue((low['warning_issued'] == 'False').all())

    def test_identical_runs_give_identical_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            first, second = Path(tmp) / 'a.csv', Path(tmp) / 'b.csv'
            self.metrics(self.run_dir, first)
            self.metrics(self.run_dir, second, '--jobs', '2')
            self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_smoothing_keeps_every_trial(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / 'smoothed.csv'
            self.metrics(self.run_dir, out, '--smooth')
            self.assertEqual(len(pd.read_csv(out)), 18)

    def test_feeds_stats(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / 'metrics.csv'
            self.metrics(self.run_dir, out)
            table = Path(tmp) / 'anova.csv'
            call_command('stats', str(out), '--metric', 'max_drac', '--out', str(table), stdout=StringIO())
            frame = pd.read_csv(table)
            self.assertEqual(list(frame['df']), [2, 2, 4])

    def test_empty_directory(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                self.metrics(tmp, Path(tmp) / 'out.csv')
            self.assertEqual(ctx.exception.returncode, 4)

    def test_malformed_trial_is_skipped(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp) / 'trials'
            good = root / 'good'
            shutil.copytree(self.run_dir / 'trials' / 'High-TwoSeconds-r0', good)
            bad = root / 'bad'
            bad.mkdir()
            (bad / 'ego.csv').write_text('t,x,y\n0,1,2\n')
            (bad / 'aggressive.csv').write_text('t,x,y,v,a,heading\n0,0,0,1,0,0\n')
            out = Path(tmp) / 'metrics.csv'
            with self.assertLogs('ssm.batch', level='WARNING'):
                self.metrics(root, out)
            frame = pd.read_csv(out, dtype=str, keep_default_na=False)
            self.assertEqual(list(frame['trial_id']), ['High-TwoSeconds-r0'])

    def test_json_reports_match_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            out, json_dir = Path(tmp) / 'metrics.csv', Path(tmp) / 'reports'
            self.metrics(self.run_dir, out, '--json-dir', str(json_dir))
            frame = pd.read_csv(out).set_index('trial_id')
            paths = sorted(json_dir.glob('*.json'))
            self.assertEqual(len(paths), 18)
            for path in paths:
                report = read_report_json(path)
                self.assertIsInstance(report, SafetyReport)
                self.assertEqual(report.trial_id, path.stem)
                row = frame.loc[report.trial_id]
                self.assertAlmostEqual(report.min_ttc, row['min_ttc'], places=5)
                self.assertEqual(report.collision, bool(row['collision']))
                if report.braking_window is not None:
                    self.assertEqual(len(report.braking_window), 2)
                    self.assertAlmostEqual(report.braking_window[0], row['braking_window_start'], places=5)

    def test_manifest_with_wrong_types_is_skipped(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp) / 'trials'
            good, odd = root / 'good', root / 'odd'
            shutil.copytree(self.run_dir / 'trials' / 'High-TwoSeconds-r0', good)
            shutil.copytree(self.run_dir / 'trials' / 'High-OneSecond-r0', odd)
            manifest = json.loads((odd / 'trial.json').read_text())
            manifest['entry_time'] = 'soon'
            (odd / 'trial.json').write_text(json.dumps(manifest))
            out = Path(tmp) / 'metrics.csv'
            with self.assertLogs('ssm.batch', level='WARNING'):
                self.metrics(root, out)
            frame = pd.read_csv(out, dtype=str, keep_default_na=False)
            self.assertEqual(list(frame['trial_id']), ['High-TwoSeconds-r0'])

    def test_all_malformed(self):
        with tempfile.TemporaryDirectory() as tmp:
            bad = Path(tmp) / 'bad'
            bad.mkdir()
            (bad / 'ego.csv').write_text('nonsense\n')
            (bad / 'aggressive.csv').write_text('nonsense\n')
            with self.assertRaises(CommandError) as ctx:
                self.metrics(tmp, Path(tmp) / 'out.csv')
            self.assertEqual(ctx.exception.returncode, 5)

    def test_trial_without_manifest(self):
        with tempfile.TemporaryDirectory() as tmp:
            trial = Path(tmp) / 'external'
            shutil.copytree(self.run_dir / 'trials' / 'High-OneSecond-r0', trial)
            (trial / 'trial.json').unlink()
            row = trial_row(trial)
            self.assertEqual(row['trial_id'], 'external')
            self.assertEqual(row['subject'], '')
            self.assertIsNotNone(row['min_ttc'])
