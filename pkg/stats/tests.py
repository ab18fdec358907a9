from io import StringIO
import json
import math
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from .anova import describe, rm_anova, rm_contrast, welch_t
from .distributions import f_upper_tail
from .exceptions import BalanceError, DegenerateSampleError
from .models import FactorialSample

WARNINGS = ['None', 'OneSecond', 'TwoSeconds']
LEVELS = ['Low', 'Medium', 'High']


def design(values_fn, subjects=4):
    return [
        FactorialSample(f's{s}', w, a, values_fn(s, i, j))
        for s in range(subjects)
        for i, w in enumerate(WARNINGS)
        for j, a in enumerate(LEVELS)
    ]


def random_design(seed, subjects=6):
    rng = np.random.default_rng(seed)
    return design(lambda s, i, j: float(rng.normal(i * 0.5 + j, 1.0)), subjects)


class DistributionTests(SimpleTestCase):

    def test_f_zero(self):
        self.assertEqual(f_upper_tail(0.0, 2, 70), 1.0)

    def test_f_one_one_median(self):
        self.assertAlmostEqual(f_upper_tail(1.0, 1, 1), 0.5, places=12)

    def test_reported_warning_effect(self):
        p = f_upper_tail(5.341, 2, 70)
        self.assertGreaterEqual(p, 0.006)
        self.assertLessEqual(p, 0.008)

    def test_strictly_decreasing(self):
        values = [f_upper_tail(F, 2, 30) for F in np.linspace(0.0, 20.0, 200)]
        self.assertTrue(all(a > b for a, b in zip(values, values[1:])))

    def test_two_df2_closed_form(self):
        # F(2, 2) upper tail is 1 / (1 + F)
        for F in (0.3, 1.0, 4.5):
            self.assertAlmostEqual(f_upper_tail(F, 2, 2), 1.0 / (1.0 + F), places=10)


class RmAnovaTests(SimpleTestCase):

    def test_degrees_of_freedom(self):
        result = rm_anova(random_design(0))
        self.assertEqual([row.df for row in result.rows], [2, 2, 4])
        self.assertEqual([row.error_df for row in result.rows], [10, 10, 20])

    def test_constant_values(self):
        result = rm_anova(design(lambda s, i, j: 3.0))
        for row in result.rows:
            self.assertEqual(row.F, 0.0)
            self.assertEqual(row.partial_eta_sq, 0.0)

    def test_brute_force_sums_of_squares(self):
        values = {
            (0, 0, 0): 1.0, (0, 0, 1): 4.0, (0, 0, 2): 2.0,
            (0, 1, 0): 3.0, (0, 1, 1): 7.0, (0, 1, 2): 5.0,
            (0, 2, 0): 6.0, (0, 2, 1): 2.0, (0, 2, 2): 8.0,
            (1, 0, 0): 2.0, (1, 0, 1): 3.0, (1, 0, 2): 3.0,
            (1, 1, 0): 5.0, (1, 1, 1): 6.0, (1, 1, 2): 4.0,
            (1, 2, 0): 9.0, (1, 2, 1): 1.0, (1, 2, 2): 7.0,
        }
        result = rm_anova(design(lambda s, i, j: values[(s, i, j)], subjects=2))

        cells = list(values)
        grand = sum(values.values()) / len(values)

        def mean_over(pred):
            chosen = [values[c] for c in cells if pred(c)]
            return sum(chosen) / len(chosen)

        ss_a = ss_b = ss_ab = ss_as = ss_bs = 0.0
        for s, i, j in cells:
            m_a = mean_over(lambda c: c[1] == i)
            m_b = mean_over(lambda c: c[2] == j)
            m_s = mean_over(lambda c: c[0] == s)
            m_ab = mean_over(lambda c: c[1] == i and c[2] == j)
            m_as = mean_over(lambda c: c[0] == s and c[1] == i)
            m_bs = mean_over(lambda c: c[0] == s and c[2] == j)
            ss_a += (m_a - grand) ** 2
            ss_b += (m_b - grand) ** 2
            ss_ab += (m_ab - m_a - m_b + grand) ** 2
            ss_as += (m_as - m_a - m_s + grand) ** 2
            ss_bs += (m_bs - m_b - m_s + grand) ** 2

        for key, expected in (
            ('warning', ss_a), ('aggressiveness', ss_b), ('interaction', ss_ab),
            ('warning_error', ss_as), ('aggressiveness_error', ss_bs),
        ):
            self.assertLessEqual(abs(result.ss[key] - expected), 1e-9 * max(abs(expected), 1.0), key)

    def test_sum_of_squares_additivity(self):
        ss = rm_anova(random_design(1)).ss
        parts = sum(value for key, value in ss.items() if key != 'total')
        self.assertLessEqual(abs(ss['total'] - parts), 1e-9 * ss['total'])

    def test_shift_and_scale_invariance(self):
        samples = random_design(2)
        base = rm_anova(samples)
        shifted = rm_anova([
            FactorialSample(s.subject_id, s.warning_level, s.aggressiveness, s.value + 100.0) for s in samples
        ])
        scaled = rm_anova([
            FactorialSample(s.subject_id, s.warning_level, s.aggressiveness, s.value * 3.0) for s in samples
        ])
        for a, b, c in zip(base.rows, shifted.rows, scaled.rows):
            self.assertAlmostEqual(a.F, b.F, places=6)
            self.assertAlmostEqual(a.p, c.p, places=9)
            self.assertAlmostEqual(a.partial_eta_sq, c.partial_eta_sq, places=9)
            self.assertAlmostEqual(c.mean_square, 9.0 * a.mean_square, places=6)

    def test_replicates_averaged(self):
        samples = random_design(3)
        doubled = samples + [
            FactorialSample(s.subject_id, s.warning_level, s.aggressiveness, s.value) for s in samples
        ]
        self.assertAlmostEqual(rm_anova(samples).warning.F, rm_anova(doubled).warning.F)

    def test_unbalanced(self):
        samples = random_design(4)[:-1]
        with self.assertRaises(BalanceError) as ctx:
            rm_anova(samples)
        self.assertIn('s5', str(ctx.exception))

    def test_single_subject(self):
        with self.assertRaises(BalanceError):
            rm_anova(random_design(5, subjects=1))


class ContrastTests(SimpleTestCase):

    def test_paired_difference(self):
        samples = design(lambda s, i, j: (2.0 if i == 2 else 0.0) + s * (0.1 if i == 2 else 0.0))
        result = rm_contrast(samples, 'warning', ['TwoSeconds'], ['None', 'OneSecond'])
        self.assertEqual((result.df1, result.df2), (1, 3))
        d = np.array([2.0 + s * 0.1 for s in range(4)])
        expected = len(d) * d.mean() ** 2 / d.var(ddof=1)
        self.assertAlmostEqual(result.F, expected, places=9)

    def test_unknown_level(self):
        with self.assertRaises(BalanceError):
            rm_contrast(random_design(0), 'warning', ['ThreeSeconds'], ['None'])


class WelchTests(SimpleTestCase):

    def test_identical_samples(self):
        t, df, p = welch_t([1.0, 2.0, 4.0], [1.0, 2.0, 4.0])
        self.assertEqual(t, 0.0)
        self.assertAlmostEqual(p, 1.0, places=12)

    def test_closed_form(self):
        t, df, p = welch_t([1, 2, 3], [4, 5, 6])
        # equal variances 1 and sizes 3: t = -3 / sqrt(2/3), df = 4
        self.assertAlmostEqual(t, -3.0 / math.sqrt(2.0 / 3.0), places=10)
        self.assertAlmostEqual(df, 4.0, places=10)
        # t distribution with 4 df has a closed-form CDF
        x = t * t
        expected = 1.0 - (abs(t) * (6.0 + x) / (4.0 + x) ** 1.5)
        self.assertAlmostEqual(p, expected, places=10)

    def test_antisymmetric(self):
        a, b = [1.0, 3.0, 2.5, 4.0], [2.0, 5.0, 7.5]
        t_ab, df_ab, p_ab = welch_t(a, b)
        t_ba, df_ba, p_ba = welch_t(b, a)
        self.assertLess(t_ab, 0.0)
        self.assertAlmostEqual(t_ab, -t_ba)
        self.assertAlmostEqual(p_ab, p_ba)

    def test_welch_satterthwaite_df(self):
        a, b = [1.0, 3.0, 2.5, 4.0, 3.5], [2.0, 5.0, 7.5]
        qa, qb = np.var(a, ddof=1) / 5, np.var(b, ddof=1) / 3
        expected = (qa + qb) ** 2 / (qa ** 2 / 4 + qb ** 2 / 2)
        t, df, _ = welch_t(a, b)
        self.assertAlmostEqual(df, expected, places=10)
        self.assertAlmostEqual(t, (np.mean(a) - np.mean(b)) / math.sqrt(qa + qb), places=10)

    def test_degenerate(self):
        with self.assertRaises(DegenerateSampleError):
            welch_t([1.0], [2.0, 3.0])
        with self.assertRaises(DegenerateSampleError):
            welch_t([1.0, 1.0], [2.0, 3.0])


class DescribeTests(SimpleTestCase):

    def test_cells(self):
        table = describe(design(lambda s, i, j: float(s), subjects=3))
        self.assertEqual(len(table), 9)
        self.assertTrue((table['n'] == 3).all())
        self.assertTrue(np.allclose(table['mean'], 1.0))


class StatsCommandTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def write(self, samples, name='metrics.csv'):
        path = self.dir / name
        pd.DataFrame(
            [
                {'subject': s.subject_id, 'warning': s.warning_level,
                 'aggressiveness': s.aggressiveness, 'min_ttc': s.value}
                for s in samples
            ]
        ).to_csv(path, index=False)
        return path

    def test_balanced_table(self):
        source = self.write(random_design(7))
        out = self.dir / 'anova.csv'
        call_command('stats', str(source), metric='min_ttc', out=str(out),
                     contrast=['warning:TwoSeconds:None,OneSecond'], stdout=StringIO())
        table = pd.read_csv(out)
        self.assertEqual(table['df'].tolist(), [2, 2, 4])
        self.assertTrue((self.dir / 'anova.json').exists())

    def test_constant_values(self):
        source = self.write(design(lambda s, i, j: 1.0))
        out = self.dir / 'anova.csv'
        call_command('stats', str(source), metric='min_ttc', out=str(out), stdout=StringIO())
        self.assertTrue((pd.read_csv(out)['F'] == 0.0).all())

    def test_unbalanced_exit_code(self):
        source = self.write(random_design(8)[1:])
        with self.assertRaises(CommandError) as ctx:
            call_command('stats', str(source), metric='min_ttc', out=str(self.dir / 'a.csv'))
        self.assertEqual(ctx.exception.returncode, 5)
        self.assertIn('s0', str(ctx.exception))

    def test_missing_input(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('stats', str(self.dir / 'nope.csv'), out=str(self.dir / 'a.csv'))
        self.assertEqual(ctx.exception.returncode, 3)

    def test_infinite_f_is_written_as_null(self):
        # additive design without noise: zero error variance for both main effects
        source = self.write(design(lambda s, i, j: float(s + i + 2 * j)))
        out = self.dir / 'anova.csv'
        call_command('stats', str(source), metric='min_ttc', out=str(out), stdout=StringIO())

        def reject(constant):
            raise ValueError(f"non-standard JSON constant {constant}")

        data = json.loads((self.dir / 'anova.json').read_text(), parse_constant=reject)
        warning = next(row for row in data['effects'] if row['effect'] == 'warning')
        self.assertIsNone(warning['F'])
        self.assertTrue(warning['degenerate'])
