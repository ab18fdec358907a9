from dataclasses import replace
from io import StringIO
import json
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from gaze.models import GazeLog
from gaze.synthetic import synthesize_gaze
from scenario.models import AggressivenessLevel, Decision, DriverModel, ScenarioConfig, WarningLead
from scenario.simulation import simulate_trial

from .classifiers import DecisionTree, GradientBoosting, KNNClassifier, RandomForest
from .csv_io import dataset_from_csv, dataset_to_csv
from .exceptions import DatasetError, NotApplicable, StratificationError
from .features import band, correlation_bands, dataset_from_trials, extract_features, pearson_matrix
from .models import FEATURE_NAMES, Dataset, FeatureVector, ModelKind
from .synthetic import synthetic_dataset
from .training import classification_scores, evaluate, roc_points, split_dataset, train


def vector(values, label='Stop'):
    return FeatureVector(*values, label=label)


def dataset_from_columns(columns, labels, seed=0):
    rows = [vector(values, label) for values, label in zip(np.array(columns).T.tolist(), labels)]
    return Dataset(rows, split_seed=seed)


class FeatureVectorTests(SimpleTestCase):

    def test_rejects_negative_drac(self):
        with self.assertRaises(ValueError):
            vector((5.0, -1.0, 0.5, -0.1, 0.4, 40.0))

    def test_rejects_non_finite(self):
        with self.assertRaises(ValueError):
            vector((float('nan'), -1.0, 0.5, 1.0, 0.4, 40.0))

    def test_rejects_rule_label(self):
        with self.assertRaises(ValueError):
            vector((5.0, -1.0, 0.5, 1.0, 0.4, 40.0), label='Rule')

    def test_missing_gaze_is_incomplete(self):
        row = vector((5.0, -1.0, 0.5, 1.0, None, None))
        self.assertFalse(row.complete)
        ds = Dataset([row, vector((5.0, -1.0, 0.5, 1.0, 0.4, 40.0), 'Go')])
        self.assertEqual(ds.X.shape, (1, 6))
        self.assertEqual(list(ds.y), [1])


class ExtractFeaturesTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.trial = simulate_trial(ScenarioConfig(
            aggressiveness=AggressivenessLevel.HIGH, warning_lead=WarningLead.TWO_SECONDS,
        ))

    def test_onset_features(self):
        log = synthesize_gaze(self.trial, 0)
        features = extract_features(self.trial, log, self.trial.warning)
        self.assertEqual(features.label, Decision.STOP)
        self.assertAlmostEqual(features.v_i, DriverModel().circulating_speed_limit, delta=0.05)
        self.assertAlmostEqual(features.h_t, -0.5, delta=0.1)
        self.assertGreaterEqual(features.drac, 0.0)
        self.assertGreaterEqual(features.an, 0.0)

    def test_absent_gaze_is_flagged_missing(self):
        features = extract_features(self.trial, None, self.trial.warning)
        self.assertIsNone(features.mfd_road)
        self.assertIsNone(features.pd_bar)
        self.assertFalse(features.complete)

    def test_no_warning_is_not_applicable(self):
        with self.assertRaises(NotApplicable):
            extract_features(self.trial, None, None)

    def test_onset_at_entry_is_not_applicable(self):
        warning = replace(self.trial.warning, t_issue=self.trial.entry_time)
        with self.assertRaises(NotApplicable):
            extract_features(self.trial, None, warning)

    def test_low_trials_are_excluded(self):
        low = simulate_trial(ScenarioConfig(aggressiveness=AggressivenessLevel.LOW))
        ds = dataset_from_trials([low, self.trial])
        self.assertEqual(len(ds), 1)
        self.assertEqual(ds.rows[0].trial_id, self.trial.trial_id)

    def test_medium_one_second_onset_headway(self):
        medium = simulate_trial(ScenarioConfig(
            aggressiveness=AggressivenessLevel.MEDIUM, warning_lead=WarningLead.ONE_SECOND,
        ))
        self.assertIsNotNone(medium.warning)
        features = extract_features(medium, synthesize_gaze(medium, 0), medium.warning)
        # the aggressive vehicle reached the conflict point 1.5 s before the ego
        self.assertAlmostEqual(features.h_t, -1.5, delta=0.1)
        self.assertEqual(features.label, Decision.STOP)

    def test_medium_trials_are_kept(self):
        trials = [
            simulate_trial(ScenarioConfig(aggressiveness=AggressivenessLevel.MEDIUM, warning_lead=lead))
            for lead in (WarningLead.ONE_SECOND, WarningLead.TWO_SECONDS)
        ]
        ds = dataset_from_trials(trials)
        self.assertEqual(len(ds), 2)

    def test_empty_gaze_log(self):
        features = extract_features(self.trial, GazeLog(self.trial.trial_id, []), self.trial.warning)
        self.assertIsNone(features.mfd_road)
        self.assertIsNone(features.pd_bar)


class CorrelationTests(SimpleTestCase):

    def test_duplicate_and_mirrored_columns(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=50)
        columns = [x + 6.0, -x, np.abs(rng.normal(size=50)), np.abs(rng.normal(size=50)),
                   np.abs(rng.normal(size=50)), 40.0 + x]
        ds = dataset_from_columns(columns, ['Stop'] * 50)
        matrix = pearson_matrix(ds)
        self.assertAlmostEqual(matrix['v_i', 'pd_bar'], 1.0)
        self.assertAlmostEqual(matrix['v_i', 'h_t'], -1.0)
        np.testing.assert_allclose(matrix.values, matrix.values.T)
        np.testing.assert_allclose(np.diag(matrix.values), 1.0)

    def test_independent_features(self):
        rng = np.random.default_rng(1)
        columns = np.abs(rng.normal(size=(6, 10000))) + 1.0
        ds = dataset_from_columns(columns, ['Stop'] * 10000)
        matrix = pearson_matrix(ds)
        off = matrix.values[~np.eye(6, dtype=bool)]
        self.assertLess(np.abs(off).max(), 0.05)
        self.assertGreaterEqual(np.linalg.eigvalsh(matrix.values).min(), -1e-10)
        self.assertTrue(all(label == 'negligible' for label in correlation_bands(matrix).values()))

    def test_zero_variance_feature(self):
        rng = np.random.default_rng(2)
        columns = np.abs(rng.normal(size=(6, 20)))
        columns[2] = 0.5
        with self.assertLogs('intent.features', level='WARNING'):
            matrix = pearson_matrix(dataset_from_columns(columns, ['Stop'] * 20))
        self.assertEqual(matrix.undefined, ('an',))
        self.assertTrue(np.isnan(matrix['an', 'v_i']))
        self.assertEqual(correlation_bands(matrix)['v_i:an'], 'undefined')

    def test_too_few_rows(self):
        columns = np.ones((6, 2))
        with self.assertRaises(DatasetError):
            pearson_matrix(dataset_from_columns(columns, ['Stop', 'Go']))

    def test_bands(self):
        self.assertEqual(band(0.29), 'negligible')
        self.assertEqual(band(-0.3), 'low')
        self.assertEqual(band(0.6), 'moderate')
        self.assertEqual(band(-0.95), 'high')


class ClassifierTests(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(3)
        self.X = rng.normal(size=(120, 6))
        self.y = ((self.X[:, 0] > 0.2) & (self.X[:, 1] < 0.5)).astype(int)

    def test_knn_one_neighbour_memorizes(self):
        model = KNNClassifier(k=1).fit(self.X, self.y)
        self.assertEqual(np.mean(model.predict(self.X) == self.y), 1.0)

    def test_knn_scaler_sees_training_rows_only(self):
        model = KNNClassifier().fit(self.X[:80], self.y[:80])
        np.testing.assert_allclose(model.scaler.mean_, self.X[:80].mean(axis=0))
        np.testing.assert_allclose(model.scaler.scale_, self.X[:80].std(axis=0))

    def test_knn_score_is_vote_fraction(self):
        scores = KNNClassifier(k=5).fit(self.X, self.y).predict_proba(self.X)
        np.testing.assert_allclose(scores * 5, np.round(scores * 5))

    def test_stump_on_threshold_data(self):
        X = np.linspace(0.0, 1.0, 40).reshape(-1, 1)
        y = (X[:, 0] > 0.5).astype(int)
        tree = DecisionTree(max_depth=1, min_samples_leaf=1).fit(X, y)
        self.assertEqual(tree.depth, 1)
        X_test = np.array([[0.1], [0.49], [0.52], [0.9]])
        np.testing.assert_array_equal(tree.predict(X_test), [0, 0, 1, 1])

    def test_tree_respects_limits(self):
        tree = DecisionTree(max_depth=3, min_samples_leaf=5).fit(self.X, self.y)
        self.assertLessEqual(tree.depth, 3)

        def leaves(node):
            return [node] if node.is_leaf else leaves(node.left) + leaves(node.right)
        self.assertTrue(all(leaf.n >= 5 for leaf in leaves(tree.root)))

    def test_single_tree_forest_is_the_tree(self):
        tree = DecisionTree(max_depth=6, min_samples_leaf=2).fit(self.X, self.y)
        forest = RandomForest(n_estimators=1, bootstrap=False, max_features=None, random_state=9).fit(self.X, self.y)
        query = np.random.default_rng(4).normal(size=(500, 6))
        np.testing.assert_array_equal(forest.predict(query), tree.predict(query))
        np.testing.assert_array_equal(forest.predict(self.X), tree.predict(self.X))

    def test_forest_is_seeded(self):
        a = RandomForest(n_estimators=10, random_state=1).fit(self.X, self.y).predict_proba(self.X)
        b = RandomForest(n_estimators=10, random_state=1).fit(self.X, self.y).predict_proba(self.X)
        np.testing.assert_array_equal(a, b)

    def test_boosting_loss_never_increases(self):
        model = GradientBoosting(n_estimators=50).fit(self.X, self.y)
        losses = np.array(model.train_loss_)
        self.assertEqual(len(losses), 51)
        self.assertTrue(np.all(np.diff(losses) <= 1e-12))
        self.assertLess(losses[-1], losses[0])

    def test_boosting_starts_from_log_odds(self):
        model = GradientBoosting(n_estimators=1).fit(self.X, self.y)
        p = self.y.mean()
        self.assertAlmostEqual(model.init_score_, np.log(p / (1 - p)))


class MetricsTests(SimpleTestCase):

    def test_perfect_scores(self):
        y = np.array([0, 0, 1, 1, 0, 1])
        roc, area = roc_points(y, y * 0.8 + 0.1)
        self.assertEqual(area, 1.0)
        _, precision, recall, f1, _, _ = classification_scores(y, y)
        self.assertEqual((precision, recall, f1), (1.0, 1.0, 1.0))

    def test_random_scores(self):
        rng = np.random.default_rng(5)
        y = rng.integers(0, 2, size=10000)
        _, area = roc_points(y, rng.uniform(size=10000))
        self.assertAlmostEqual(area, 0.5, delta=0.02)

    def test_all_positive_on_balanced_split(self):
        y = np.array([0, 1] * 10)
        accuracy, precision, recall, f1, confusion, _ = classification_scores(y, np.ones(20, dtype=int))
        self.assertEqual(recall, 1.0)
        self.assertEqual(precision, 0.5)
        self.assertAlmostEqual(f1, 2 * 0.5 / 1.5)
        self.assertEqual(confusion, [[0, 10], [0, 10]])

    def test_monotone_transform_keeps_roc(self):
        rng = np.random.default_rng(6)
        y = rng.integers(0, 2, size=300)
        scores = rng.normal(size=300) + y
        roc_a, auc_a = roc_points(y, scores)
        roc_b, auc_b = roc_points(y, np.exp(3.0 * scores))
        self.assertEqual(roc_a, roc_b)
        self.assertEqual(auc_a, auc_b)

    def test_single_class_is_undefined(self):
        roc, area = roc_points(np.zeros(10, dtype=int), np.linspace(0, 1, 10))
        self.assertEqual(roc, [])
        self.assertIsNone(area)
        _, precision, recall, f1, _, undefined = classification_scores(np.zeros(4), np.zeros(4))
        self.assertIsNone(precision)
        self.assertIsNone(recall)
        self.assertIsNone(f1)
        self.assertEqual(undefined, ['precision', 'recall'])


class TrainingTests(SimpleTestCase):

    def test_synthetic_scale_and_balance(self):
        ds = synthetic_dataset(seed=0)
        self.assertEqual(len(ds), 288)
        self.assertEqual(ds.class_counts(), {'Stop': 217, 'Go': 71})

    def test_split_is_stratified(self):
        split = split_dataset(synthetic_dataset(seed=1))
        self.assertEqual(len(split.y_test), 58)
        self.assertEqual(int(split.y_test.sum()), 14)

    def test_single_class_cannot_split(self):
        ds = dataset_from_columns(np.abs(np.random.default_rng(0).normal(size=(6, 10))), ['Stop'] * 10)
        with self.assertRaises(StratificationError):
            split_dataset(ds)

    def test_every_model_on_linear_benchmark(self):
        ds = synthetic_dataset(seed=2)
        for kind in ModelKind:
            metrics = evaluate(train(ds, kind))
            self.assertGreaterEqual(metrics.test_accuracy, 0.85, kind)
            self.assertIsNotNone(metrics.auc)
            if metrics.f1 is not None and metrics.precision + metrics.recall > 0:
                self.assertAlmostEqual(
                    metrics.f1, 2 * metrics.precision * metrics.recall / (metrics.precision + metrics.recall),
                )

    def test_boosting_leads_on_nonlinear_benchmark(self):
        ds = synthetic_dataset(seed=3, nonlinear=True)
        accuracy = {kind: evaluate(train(ds, kind)).test_accuracy for kind in ModelKind}
        for kind in ModelKind:
            self.assertGreaterEqual(accuracy[ModelKind.GRADIENT_BOOSTING], accuracy[kind])
        self.assertGreaterEqual(accuracy[ModelKind.GRADIENT_BOOSTING], 0.85)

    def test_training_is_reproducible(self):
        ds = synthetic_dataset(seed=4)
        a = evaluate(train(ds, ModelKind.RANDOM_FOREST, {'n_estimators': 20}))
        b = evaluate(train(ds, ModelKind.RANDOM_FOREST, {'n_estimators': 20}))
        self.assertEqual(a, b)

    def test_model_aliases(self):
        self.assertEqual(ModelKind.parse('gbt'), ModelKind.GRADIENT_BOOSTING)
        self.assertEqual(ModelKind.parse('decisiontree'), ModelKind.DECISION_TREE)
        with self.assertRaisesMessage(ValueError, 'forest'):
            ModelKind.parse('svm')


class DatasetCsvTests(SimpleTestCase):

    def test_round_trip_keeps_missing_gaze(self):
        rows = [
            FeatureVector(5.0, -1.2, 0.5, 1.5, None, None, 'Stop', 'a'),
            FeatureVector(7.0, -0.4, 0.8, 3.5, 0.6, 41.0, 'Go', 'b'),
        ]
        with tempfile.TemporaryDirectory() as tmp:
            path = dataset_to_csv(Dataset(rows), Path(tmp) / 'ds.csv')
            header = path.read_text().splitlines()[0]
            self.assertTrue(header.startswith(','.join(FEATURE_NAMES) + ',label'))
            back = dataset_from_csv(path)
        self.assertEqual(back.rows, rows)

    def test_bad_label_names_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'ds.csv'
            path.write_text('v_i,h_t,an,drac,mfd_road,pd_bar,label\n5,-1,0.5,1,0.4,40,Stop\n5,-1,0.5,1,0.4,40,Maybe\n')
            with self.assertRaisesMessage(DatasetError, 'line 3'):
                dataset_from_csv(path)

    def test_missing_column(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'ds.csv'
            path.write_text('v_i,h_t,label\n5,-1,Stop\n')
            with self.assertRaisesMessage(DatasetError, 'an'):
                dataset_from_csv(path)


class CommandTests(SimpleTestCase):

    def make_dataset(self, out, *args):
        call_command('make_dataset', '--out', str(out), *args, stdout=StringIO())

    def predict(self, dataset, out, *args):
        call_command('predict', str(dataset), '--out', str(out), *args, stdout=StringIO())

    def test_synthetic_benchmark_with_gbt(self):
        with tempfile.TemporaryDirectory() as tmp:
            dataset, out = Path(tmp) / 'ds.csv', Path(tmp) / 'gbt.json'
            self.make_dataset(dataset, '--synthetic', '--seed', '3')
            self.predict(dataset, out, '--model', 'gbt')
            data = json.loads(out.read_text())
            for key in ('train_accuracy', 'test_accuracy', 'precision', 'recall', 'f1', 'auc', 'roc', 'confusion'):
                self.assertIsNotNone(data[key], key)
            self.assertEqual(data['model'], 'GradientBoosting')
            self.assertEqual(len(data['correlation']['bands']), 15)
            roc = pd.read_csv(Path(tmp) / 'gbt_roc.csv')
            self.assertEqual(list(roc.columns), ['fpr', 'tpr'])

    def test_same_seed_same_outputs(self):
        with tempfile.TemporaryDirectory() as tmp:
            dataset = Path(tmp) / 'ds.csv'
            self.make_dataset(dataset, '--synthetic', '--nonlinear')
            self.predict(dataset, Path(tmp) / 'a.json', '--model', 'forest', '--n-estimators', '15')
            self.predict(dataset, Path(tmp) / 'b.json', '--model', 'forest', '--n-estimators', '15')
            self.assertEqual((Path(tmp) / 'a.json').read_bytes(), (Path(tmp) / 'b.json').read_bytes())

    def test_unknown_model(self):
        with tempfile.TemporaryDirectory() as tmp:
            dataset = Path(tmp) / 'ds.csv'
            self.make_dataset(dataset, '--synthetic')
            with self.assertRaises(CommandError) as ctx:
                self.predict(dataset, Path(tmp) / 'x.json', '--model', 'unknown')
            self.assertEqual(ctx.exception.returncode, 2)
            self.assertIn('GradientBoosting', str(ctx.exception))

    def test_single_class_dataset(self):
        with tempfile.TemporaryDirectory() as tmp:
            dataset = Path(tmp) / 'ds.csv'
            ds = dataset_from_columns(np.abs(np.random.default_rng(0).normal(size=(6, 12))), ['Stop'] * 12)
            dataset_to_csv(ds, dataset)
            with self.assertRaises(CommandError) as ctx:
                self.predict(dataset, Path(tmp) / 'x.json')
            self.assertEqual(ctx.exception.returncode, 5)

    def test_simulated_dataset(self):
        with tempfile.TemporaryDirectory() as tmp:
            dataset = Path(tmp) / 'sim.csv'
            self.make_dataset(dataset, '--repeats', '2')
            frame = pd.read_csv(dataset, dtype=str, keep_default_na=False)
            self.assertGreater(len(frame), 0)
            self.assertTrue(set(frame['label']) <= {'Stop', 'Go'})
