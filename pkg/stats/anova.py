"""
Repeated-measures analyses over a subject x warning x aggressiveness
design. Replicates within a cell are averaged before decomposition.
"""
import logging
import math

import numpy as np
import pandas as pd
from scipy import stats

from scenario.models import AggressivenessLevel, WarningLead

from .distributions import f_upper_tail
from .exceptions import BalanceError, DegenerateSampleError
from .models import AnovaResult, ContrastResult, EffectRow

logger = logging.getLogger(__name__)

FACTORS = {
    'warning': ('warning_level', WarningLead.values),
    'aggressiveness': ('aggressiveness', AggressivenessLevel.values),
}
# sums of squares below this fraction of the total are treated as zero
RELATIVE_ZERO = 1e-12


def _ordered_levels(observed, known):
    observed = set(observed)
    if observed <= set(known):
        return [level for level in known if level in observed]
    return sorted(observed)


def _frame(samples):
    frame = pd.DataFrame(
        [(s.subject_id, s.warning_level, s.aggressiveness, float(s.value)) for s in samples],
        columns=['subject_id', 'warning_level', 'aggressiveness', 'value'],
    )
    if frame.empty:
        raise BalanceError("no samples")
    return frame


def cell_array(samples):
    """
    Cell means as an array indexed [subject, warning, aggressiveness] plus
    the level labels of each axis. Raises BalanceError naming the first
    missing subject/cell.
    """
    frame = _frame(samples)
    subjects = sorted(frame['subject_id'].unique(), key=str)
    warnings = _ordered_levels(frame['warning_level'].unique(), WarningLead.values)
    aggressiveness = _ordered_levels(frame['aggressiveness'].unique(), AggressivenessLevel.values)
    means = frame.groupby(['subject_id', 'warning_level', 'aggressiveness'])['value'].mean()
    cells = np.empty((len(subjects), len(warnings), len(aggressiveness)))
    for i, subject in enumerate(subjects):
        for j, w in enumerate(warnings):
            for k, a in enumerate(aggressiveness):
                key = (subject, w, a)
                if key not in means.index:
                    raise BalanceError(f"subject {subject} has no value in cell warning={w}, aggressiveness={a}")
                cells[i, j, k] = means.loc[key]
    return cells, subjects, warnings, aggressiveness


def _effect(name, ss, df, ss_err, df_err, scale):
    tiny = RELATIVE_ZERO * scale
    ms = ss / df
    ms_err = ss_err / df_err
    degenerate = ss_err <= tiny
    if ss <= tiny:
        F, p, eta = 0.0, 1.0, 0.0
    elif degenerate:
        F, p, eta = math.inf, 0.0, 1.0
    else:
        F = ms / ms_err
        p = f_upper_tail(F, df, df_err)
        eta = ss / (ss + ss_err)
    if degenerate:
        logger.warning("Zero error variance for effect %s", name)
    return EffectRow(name, df, df_err, ss, ms, ms_err, F, p, eta, degenerate)


def rm_anova(samples):
    """Two-way within-subjects ANOVA with partial eta squared per effect"""
    y, subjects, warnings, aggressiveness = cell_array(samples)
    n, A, B = y.shape
    if n < 2:
        raise BalanceError(f"repeated-measures ANOVA needs >= 2 subjects, got {n}")
    if A < 2 or B < 2:
        raise BalanceError(f"each factor needs >= 2 levels, got {A} x {B}")

    grand = y.mean()
    m_s = y.mean(axis=(1, 2))
    m_a = y.mean(axis=(0, 2))
    m_b = y.mean(axis=(0, 1))
    m_ab = y.mean(axis=0)
    m_sa = y.mean(axis=2)
    m_sb = y.mean(axis=1)

    ss = {
        'total': float(np.sum((y - grand) ** 2)),
        'subjects': float(A * B * np.sum((m_s - grand) ** 2)),
        'warning': float(n * B * np.sum((m_a - grand) ** 2)),
        'aggressiveness': float(n * A * np.sum((m_b - grand) ** 2)),
        'interaction': float(n * np.sum((m_ab - m_a[:, None] - m_b[None, :] + grand) ** 2)),
        'warning_error': float(B * np.sum((m_sa - m_s[:, None] - m_a[None, :] + grand) ** 2)),
        'aggressiveness_error': float(A * np.sum((m_sb - m_s[:, None] - m_b[None, :] + grand) ** 2)),
    }
    residual = (
        y - m_ab[None, :, :] - m_sa[:, :, None] - m_sb[:, None, :]
        + m_a[None, :, None] + m_b[None, None, :] + m_s[:, None, None] - grand
    )
    ss['interaction_error'] = float(np.sum(residual ** 2))

    scale = max(ss['total'], float(np.sum(y ** 2)), 1e-300)
    df_a, df_b, df_s = A - 1, B - 1, n - 1
    result = AnovaResult(
        warning=_effect('warning', ss['warning'], df_a, ss['warning_error'], df_a * df_s, scale),
        aggressiveness=_effect(
            'aggressiveness', ss['aggressiveness'], df_b, ss['aggressiveness_error'], df_b * df_s, scale
        ),
        interaction=_effect(
            'warning * aggressiveness', ss['interaction'], df_a * df_b,
            ss['interaction_error'], df_a * df_b * df_s, scale,
        ),
        n_subjects=n,
        ss=ss,
    )
    logger.info(
        "RM-ANOVA over %d subjects: F(warning)=%.3f F(aggressiveness)=%.3f F(interaction)=%.3f",
        n, result.warning.F, result.aggressiveness.F, result.interaction.F,
    )
    return result


def rm_contrast(samples, factor, group_a, group_b):
    """
    Single-df within-subjects contrast of the pooled levels ``group_a``
    against ``group_b`` of one factor, averaging over the other factor.
    """
    if factor not in FACTORS:
        raise ValueError(f"unknown factor {factor!r}, expected one of {sorted(FACTORS)}")
    y, subjects, warnings, aggressiveness = cell_array(samples)
    levels = warnings if factor == 'warning' else aggressiveness
    axis = 1 if factor == 'warning' else 2
    group_a, group_b = tuple(group_a), tuple(group_b)
    for level in group_a + group_b:
        if level not in levels:
            raise BalanceError(f"level {level!r} not present for factor {factor}")
    if set(group_a) & set(group_b):
        raise ValueError("contrast groups must be disjoint")

    per_level = y.mean(axis=3 - axis)
    pooled_a = per_level[:, [levels.index(level) for level in group_a]].mean(axis=1)
    pooled_b = per_level[:, [levels.index(level) for level in group_b]].mean(axis=1)
    d = pooled_a - pooled_b
    n = len(d)
    if n < 2:
        raise BalanceError(f"contrast needs >= 2 subjects, got {n}")
    mean = float(d.mean())
    var = float(d.var(ddof=1))
    if var <= RELATIVE_ZERO * max(mean * mean, 1e-300):
        F = 0.0 if mean == 0 else math.inf
    else:
        F = n * mean * mean / var
    return ContrastResult(factor, group_a, group_b, F, 1, n - 1, f_upper_tail(F, 1, n - 1), mean)


def welch_t(sample_a, sample_b):
    """Welch's unequal-variance t test; t < 0 when mean(a) < mean(b)"""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise DegenerateSampleError(f"each sample needs >= 2 values, got {a.size} and {b.size}")
    if a.var(ddof=1) == 0 or b.var(ddof=1) == 0:
        raise DegenerateSampleError("samples must have nonzero variance")
    result = stats.ttest_ind(a, b, equal_var=False)
    return float(result.statistic), float(result.df), float(result.pvalue)


def describe(samples):
    """Mean, standard deviation, standard error and count per design cell"""
    frame = _frame(samples)
    grouped = frame.groupby(['warning_level', 'aggressiveness'])['value']
    table = grouped.agg(['mean', 'std', 'count']).reset_index()
    table['sem'] = table['std'] / np.sqrt(table['count'])
    table = table.rename(columns={'count': 'n'})
    return table[['warning_level', 'aggressiveness', 'mean', 'std', 'sem', 'n']]
