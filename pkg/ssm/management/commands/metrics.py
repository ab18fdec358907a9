from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from ssm.batch import collect_reports, find_trial_dirs
from ssm.report import write_report_json, write_reports_csv


class Command(BaseCommand):
    help = 'Compute surrogate safety metrics for every trial directory under a run'

    def add_arguments(self, parser):
        parser.add_argument('trials_dir')
        parser.add_argument('--out', required=True, help='combined metrics CSV')
        parser.add_argument('--json-dir', default=None, help='also write one <trial_id>.json report per trial here')
        parser.add_argument('--smooth', action='store_true', help='Kalman-smooth both trajectories first')
        parser.add_argument('--jobs', type=int, default=1)

    def handle(self, *args, **options):
        root = Path(options['trials_dir'])
        if not root.is_dir():
            raise CommandError(f"trials directory not found: {root}", returncode=3)
        if options['jobs'] < 1:
            raise CommandError("--jobs must be >= 1", returncode=2)

        directories = find_trial_dirs(root)
        if not directories:
            raise CommandError(f"no trials under {root}", returncode=4)

        results = collect_reports(directories, options['smooth'], options['jobs'])
        kept = [result for result in results if result is not None]
        skipped = len(results) - len(kept)
        if not kept:
            raise CommandError(f"all {len(results)} trial(s) under {root} are malformed", returncode=5)

        out = Path(options['out'])
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            write_reports_csv([{**descriptors, **report.to_row()} for descriptors, report in kept], out)
            if options['json_dir']:
                json_dir = Path(options['json_dir'])
                json_dir.mkdir(parents=True, exist_ok=True)
                for _, report in kept:
                    write_report_json(report, json_dir / f'{report.trial_id}.json')
        except OSError as exc:
            raise CommandError(f"cannot write reports: {exc}", returncode=3)

        if skipped:
            self.stdout.write(self.style.WARNING(f'{skipped} malformed trial(s) skipped'))
        self.stdout.write(self.style.SUCCESS(f'✓ {len(kept)} trial report(s) written to {out}'))
