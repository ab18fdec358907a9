from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from stats.anova import describe, rm_anova, rm_contrast
from stats.csv_io import samples_from_csv, write_anova_csv, write_json
from stats.exceptions import BalanceError


def parse_contrast(text):
    try:
        factor, group_a, group_b = text.split(':')
    except ValueError:
        raise CommandError(f"contrast {text!r} must look like factor:levelA[,levelA2]:levelB[,...]", returncode=2)
    return factor, tuple(group_a.split(',')), tuple(group_b.split(','))


class Command(BaseCommand):
    help = 'Two-way repeated-measures ANOVA of one metric column of a metrics CSV'

    def add_arguments(self, parser):
        parser.add_argument('metrics_csv')
        parser.add_argument('--metric', default='value')
        parser.add_argument('--out', required=True, help='ANOVA table CSV; a JSON twin is written next to it')
        parser.add_argument('--subject-column', default='subject')
        parser.add_argument('--contrast', action='append', default=[])

    def handle(self, *args, **options):
        source = Path(options['metrics_csv'])
        if not source.is_file():
            raise CommandError(f"metrics file not found: {source}", returncode=3)
        contrasts = [parse_contrast(text) for text in options['contrast']]

        try:
            samples = samples_from_csv(source, options['metric'], options['subject_column'])
            result = rm_anova(samples)
            contrast_results = [rm_contrast(samples, *spec) for spec in contrasts]
        except BalanceError as exc:
            raise CommandError(str(exc), returncode=5)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=2)

        out = Path(options['out'])
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            write_anova_csv(result, out)
            data = result.to_dict()
            data['metric'] = options['metric']
            data['contrasts'] = [
                {
                    'factor': c.factor, 'group_a': list(c.group_a), 'group_b': list(c.group_b),
                    'F': c.F, 'df1': c.df1, 'df2': c.df2, 'p': c.p, 'mean_difference': c.mean_difference,
                }
                for c in contrast_results
            ]
            data['cells'] = describe(samples).to_dict('records')
            write_json(data, out.with_suffix('.json'))
        except OSError as exc:
            raise CommandError(f"cannot write {out}: {exc}", returncode=3)

        for row in result.rows:
            self.stdout.write(
                f"{row.effect:<26} df={row.df} F={row.F:.3f} p={row.p:.4f} eta_p^2={row.partial_eta_sq:.3f}"
            )
        self.stdout.write(self.style.SUCCESS(f'✓ ANOVA of {options["metric"]} written to {out}'))
