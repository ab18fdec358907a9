from dataclasses import replace
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from intent.csv_io import dataset_to_csv
from intent.features import dataset_from_trials
from intent.synthetic import synthetic_dataset
from scenario.config import load_config
from scenario.exceptions import ConfigError, SchedulingError, SimulationTimeout
from scenario.models import Decision, ScenarioConfig
from scenario.simulation import run_design


class Command(BaseCommand):
    help = 'Create a stop-or-go feature dataset, synthetic or from simulated trials'

    def add_arguments(self, parser):
        parser.add_argument('--out', required=True)
        parser.add_argument('--synthetic', action='store_true', help='seeded benchmark instead of simulation')
        parser.add_argument('--nonlinear', action='store_true')
        parser.add_argument('--n', type=int, default=288)
        parser.add_argument('--go-rate', type=float, default=0.2465)
        parser.add_argument('--config', default=None, help='scenario JSON for the simulated dataset')
        parser.add_argument('--repeats', type=int, default=16)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--jobs', type=int, default=1)
        parser.add_argument('--go-threshold', type=float, default=-0.5,
                            help='headway threshold of the go rule used when the config fixes a Stop decision')

    def handle(self, *args, **options):
        if options['synthetic']:
            try:
                ds = synthetic_dataset(options['n'], options['go_rate'], options['seed'], options['nonlinear'])
            except ValueError as exc:
                raise CommandError(str(exc), returncode=2)
        else:
            ds = self.simulated(options)

        if not ds.rows:
            raise CommandError("no trial produced a feature vector", returncode=4)
        out = Path(options['out'])
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            dataset_to_csv(ds, out)
        except OSError as exc:
            raise CommandError(f"cannot write {out}: {exc}", returncode=3)
        counts = ds.class_counts()
        self.stdout.write(self.style.SUCCESS(
            f"✓ {len(ds)} rows ({counts['Go']} Go, {counts['Stop']} Stop) written to {out}"
        ))

    def simulated(self, options):
        try:
            base = load_config(options['config']) if options['config'] else ScenarioConfig()
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=2)
        if base.driver.decision == Decision.STOP:
            # a fixed Stop decision yields a single class; let the headway rule decide
            driver = replace(base.driver, decision=Decision.RULE, go_headway_threshold=options['go_threshold'])
            base = replace(base, driver=driver)
        base = replace(base, seed=options['seed'])
        if options['repeats'] < 1 or options['jobs'] < 1:
            raise CommandError("--repeats and --jobs must be >= 1", returncode=2)
        try:
            trials = run_design(base, options['repeats'], jobs=options['jobs'])
        except (SchedulingError, SimulationTimeout) as exc:
            raise CommandError(str(exc), returncode=2)
        return dataset_from_trials(trials, split_seed=options['seed'])
