import tempfile
from pathlib import Path
from types import SimpleNamespace

from django.test import SimpleTestCase

from .csv_io import ingest_gaze_csv, write_gaze_csv
from .exceptions import GazeParseError, NoDataError, OverlapError
from .features import aoi_summary, fixation_features, mean_pupil_diameter, pupil_stats
from .models import AreaOfInterest, FixationRecord, GazeLog
from .synthetic import synthesize_gaze

ROAD = AreaOfInterest.ROAD_AHEAD


def record(t0, t1, aoi=ROAD, left=40.0, right=44.0):
    return FixationRecord(t0, t1, aoi, left, right)


class PupilDiameterTests(SimpleTestCase):

    def test_single_record(self):
        log = GazeLog('t', [record(0.0, 0.5)])
        self.assertEqual(mean_pupil_diameter(log, 0.0, 1.0), 42.0)

    def test_identical_eyes(self):
        log = GazeLog('t', [record(0.0, 0.5, left=37.5, right=37.5)])
        self.assertEqual(mean_pupil_diameter(log, 0.0, 1.0), 37.5)

    def test_minimum_per_eye(self):
        log = GazeLog('t', [
            record(0.0, 0.3, left=40, right=44),
            record(0.4, 0.7, left=38, right=43),
            record(0.8, 1.0, left=41, right=45),
        ])
        self.assertEqual(mean_pupil_diameter(log, 0.0, 1.0), 40.5)

    def test_empty_window(self):
        log = GazeLog('t', [record(0.0, 0.5)])
        with self.assertRaises(NoDataError):
            mean_pupil_diameter(log, 2.0, 3.0)

    def test_pupil_stats(self):
        log = GazeLog('t', [record(0.0, 0.3, left=40, right=42), record(0.4, 0.7, left=44, right=46)])
        self.assertEqual(pupil_stats(log, 0.0, 1.0), (41.0, 45.0, 43.0))


class FixationFeatureTests(SimpleTestCase):

    def test_mean_fixation_duration(self):
        log = GazeLog('t', [record(k * 0.5, k * 0.5 + 0.4) for k in range(6)])
        features = fixation_features(log, 0.0, 3.0, ROAD)
        self.assertAlmostEqual(features.total_duration, 2.4)
        self.assertEqual(features.count, 6)
        self.assertAlmostEqual(features.mean_duration, 0.4)

    def test_no_matching_fixation(self):
        log = GazeLog('t', [record(0.0, 0.5, aoi=AreaOfInterest.SPEED_INFO)])
        features = fixation_features(log, 0.0, 1.0, ROAD)
        self.assertEqual((features.total_duration, features.count, features.mean_duration), (0.0, 0, 0.0))
        self.assertTrue(features.empty)

    def test_straddling_record_clipped(self):
        log = GazeLog('t', [record(1.0, 3.0)])
        features = fixation_features(log, 2.0, 5.0, ROAD)
        self.assertAlmostEqual(features.total_duration, 1.0)
        self.assertEqual(features.count, 1)

    def test_split_fixation_keeps_total_duration(self):
        whole = GazeLog('w', [record(0.2, 1.4)])
        split = GazeLog('s', [record(0.2, 0.8), record(0.8, 1.4)])
        a = fixation_features(whole, 0.0, 1.0, ROAD)
        b = fixation_features(split, 0.0, 1.0, ROAD)
        self.assertAlmostEqual(a.total_duration, b.total_duration)
        self.assertNotEqual(a.count, b.count)

    def test_bounds(self):
        log = GazeLog('t', [record(0.0, 0.9), record(1.0, 1.2), record(1.5, 4.0)])
        features = fixation_features(log, 0.5, 2.0, ROAD)
        self.assertLessEqual(features.total_duration, 1.5)
        self.assertLessEqual(features.mean_duration, 0.5 + 1e-12)

    def test_summary_covers_every_aoi(self):
        log = GazeLog('t', [record(0.0, 0.5)])
        self.assertEqual(set(aoi_summary(log, 0.0, 1.0)), set(AreaOfInterest.values))


class GazeLogTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text):
        path = Path(self.tmp.name) / 'gaze.csv'
        path.write_text(text, encoding='utf-8')
        return path

    def test_overlap_rejected(self):
        with self.assertRaises(OverlapError):
            GazeLog('t', [record(0.0, 0.5), record(0.4, 0.8)])

    def test_unknown_aoi(self):
        with self.assertRaises(ValueError):
            FixationRecord(0.0, 0.5, 'Mirror', 40, 40)

    def test_ingest(self):
        path = self.write(
            "t_start,t_end,aoi,pupil_left,pupil_right\n"
            "0.0,0.4,RoadAhead,40,44\n"
            "0.5,0.9,WarningInfo,41,43\n"
        )
        log = ingest_gaze_csv(path, 'trial')
        self.assertEqual(len(log), 2)
        self.assertEqual(log.records[1].aoi, AreaOfInterest.WARNING_INFO)

    def test_ingest_bad_aoi_names_line(self):
        path = self.write(
            "t_start,t_end,aoi,pupil_left,pupil_right\n"
            "0.0,0.4,RoadAhead,40,44\n"
            "0.5,0.9,Dashboard,41,43\n"
        )
        with self.assertRaises(GazeParseError) as ctx:
            ingest_gaze_csv(path)
        self.assertEqual(ctx.exception.line, 3)

    def test_write_then_read(self):
        log = GazeLog('t', [record(0.0, 0.4), record(0.5, 0.9, aoi=AreaOfInterest.AGGRESSIVE_VEHICLE)])
        back = ingest_gaze_csv(write_gaze_csv(log, Path(self.tmp.name) / 'out.csv'))
        self.assertEqual([r.aoi for r in back], [r.aoi for r in log])


class SynthesizeGazeTests(SimpleTestCase):

    def trial(self, outcome='Stop'):
        ego = SimpleNamespace(start=0.0, end=12.0)
        return SimpleNamespace(
            trial_id='High-TwoSeconds-r0', ego=ego, outcome=outcome,
            warning=SimpleNamespace(t_issue=8.0), cue_time=8.0,
        )

    def test_deterministic_and_valid(self):
        first = synthesize_gaze(self.trial(), seed=7)
        second = synthesize_gaze(self.trial(), seed=7)
        self.assertEqual(first.records, second.records)
        self.assertGreater(len(first), 10)
        self.assertLessEqual(first.records[-1].t_end, 12.0)

    def test_pupil_dilates_after_alert(self):
        log = synthesize_gaze(self.trial(), seed=3)
        before = pupil_stats(log, 0.0, 8.0)[2]
        after = pupil_stats(log, 8.0, 12.0)[2]
        self.assertGreater(after, before)
