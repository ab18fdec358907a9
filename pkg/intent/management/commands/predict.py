from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from intent.csv_io import dataset_from_csv, write_json, write_roc_csv
from intent.exceptions import DatasetError, StratificationError
from intent.features import correlation_bands, pearson_matrix
from intent.models import ModelKind
from intent.training import evaluate, train

PARAM_OPTIONS = {
    'k': 'k',
    'max_depth': 'max_depth',
    'min_leaf': 'min_samples_leaf',
    'n_estimators': 'n_estimators',
    'learning_rate': 'learning_rate',
}


class Command(BaseCommand):
    help = 'Train a stop-or-go classifier on a feature dataset and report its test metrics'

    def add_arguments(self, parser):
        parser.add_argument('dataset')
        parser.add_argument('--model', default='gbt', help='KNN, DecisionTree, RandomForest, GradientBoosting or knn/tree/forest/gbt')
        parser.add_argument('--seed', type=int, default=0, help='split and forest seed')
        parser.add_argument('--out', required=True, help='metrics JSON')
        parser.add_argument('--roc', default=None, help='ROC points CSV (default: <out>_roc.csv)')
        parser.add_argument('--k', type=int)
        parser.add_argument('--max-depth', type=int)
        parser.add_argument('--min-leaf', type=int)
        parser.add_argument('--n-estimators', type=int)
        parser.add_argument('--learning-rate', type=float)

    def handle(self, *args, **options):
        try:
            kind = ModelKind.parse(options['model'])
        except ValueError as exc:
            raise CommandError(str(exc), returncode=2)
        params = {name: options[option] for option, name in PARAM_OPTIONS.items() if options[option] is not None}

        source = Path(options['dataset'])
        if not source.is_file():
            raise CommandError(f"dataset not found: {source}", returncode=3)
        try:
            ds = dataset_from_csv(source, split_seed=options['seed'])
        except DatasetError as exc:
            raise CommandError(str(exc), returncode=5)

        try:
            fitted = train(ds, kind, params)
        except StratificationError as exc:
            raise CommandError(str(exc), returncode=5)
        except TypeError as exc:
            raise CommandError(f"{kind} does not take these parameters: {exc}", returncode=2)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=2)
        metrics = evaluate(fitted)

        data = metrics.to_dict()
        data['params'] = fitted.params
        data['seed'] = options['seed']
        data['n_rows'] = len(ds.complete_rows)
        data['n_excluded'] = len(ds) - len(ds.complete_rows)
        data['class_counts'] = ds.class_counts()
        try:
            correlation = pearson_matrix(ds)
            data['correlation'] = {**correlation.to_dict(), 'bands': correlation_bands(correlation)}
        except DatasetError:
            data['correlation'] = None

        out = Path(options['out'])
        roc = Path(options['roc']) if options['roc'] else out.with_name(f"{out.stem}_roc.csv")
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            write_json(data, out)
            write_roc_csv(metrics.roc, roc)
        except OSError as exc:
            raise CommandError(f"cannot write {out}: {exc}", returncode=3)

        self.stdout.write(
            f"{kind}: train {metrics.train_accuracy:.3f}, test {metrics.test_accuracy:.3f}, "
            f"AUC {'n/a' if metrics.auc is None else f'{metrics.auc:.3f}'}"
        )
        self.stdout.write(self.style.SUCCESS(f'✓ Metrics written to {out}, ROC to {roc}'))
