from dataclasses import replace
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from scenario.artifacts import write_run
from scenario.config import load_config
from scenario.exceptions import ConfigError, SchedulingError, SimulationTimeout
from scenario.models import ScenarioConfig
from scenario.simulation import run_design


class Command(BaseCommand):
    help = 'Simulate the aggressiveness x warning design and write trial artefacts'

    def add_arguments(self, parser):
        parser.add_argument('config_path', nargs='?', help='JSON scenario config; built-in defaults when omitted')
        parser.add_argument('--out', required=True)
        parser.add_argument('--repeats', type=int, default=1)
        parser.add_argument('--seed', type=int, default=None, help='overrides the config seed')
        parser.add_argument('--jobs', type=int, default=1)
        parser.add_argument('--jitter', type=float, default=None, help='overrides the driver jitter fraction')

    def handle(self, *args, **options):
        try:
            base = load_config(options['config_path']) if options['config_path'] else ScenarioConfig()
            if options['seed'] is not None:
                base = replace(base, seed=options['seed'])
            if options['jitter'] is not None:
                base = replace(base, jitter_fraction=options['jitter'])
        except (ConfigError, ValueError) as exc:
            raise CommandError(str(exc), returncode=2)
        if options['repeats'] < 1 or options['jobs'] < 1:
            raise CommandError("--repeats and --jobs must be >= 1", returncode=2)

        seeds = [base.seed + r for r in range(options['repeats'])]
        self.stdout.write(f"Simulating {9 * len(seeds)} trials...")
        try:
            trials = run_design(base, options['repeats'], seeds, jobs=options['jobs'])
        except (SchedulingError, SimulationTimeout) as exc:
            raise CommandError(str(exc), returncode=2)

        out = Path(options['out'])
        try:
            manifest = write_run(trials, out, base, options['repeats'], seeds)
        except OSError as exc:
            raise CommandError(f"cannot write {out}: {exc}", returncode=3)

        collisions = sum(t.collision for t in trials)
        warnings = sum(t.warning is not None for t in trials)
        if collisions:
            self.stdout.write(self.style.WARNING(f'{collisions} trial(s) ended in contact'))
        self.stdout.write(self.style.SUCCESS(
            f'✓ {len(trials)} trials ({warnings} warned) written, manifest {manifest}'
        ))
