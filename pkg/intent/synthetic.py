"""
Seeded stop-or-go benchmark datasets at the scale of the field study:
288 onsets, about a quarter of them Go.
"""
import logging

import numpy as np

from scenario.models import Decision

from .models import Dataset, FeatureVector

logger = logging.getLogger(__name__)

# class-conditional (mean, std) of v_i, h_t, an, drac, mfd_road, pd_bar
STOP_PROFILE = ((5.5, 0.8), (-1.4, 0.3), (0.6, 0.15), (2.0, 0.6), (0.45, 0.08), (42.0, 2.0))
GO_PROFILE = ((7.5, 0.8), (-0.5, 0.3), (0.9, 0.15), (4.0, 0.6), (0.65, 0.08), (40.0, 2.0))

# decision boundary of the nonlinear variant and the empty band kept around it
H_T_EDGE, V_I_EDGE, DRAC_EDGE = -1.0, 7.0, 3.0
H_T_GAP, V_I_GAP, DRAC_GAP = 0.1, 0.3, 0.3


def _vector(values, label, index):
    v_i, h_t, an, drac, mfd, pd_bar = values
    return FeatureVector(
        v_i=float(max(v_i, 0.0)), h_t=float(h_t), an=float(abs(an)), drac=float(max(drac, 0.0)),
        mfd_road=float(abs(mfd)), pd_bar=float(abs(pd_bar)), label=label, trial_id=f"synthetic-{index:03d}",
    )


def _gaussian_rows(rng, profile, count):
    means = np.array([m for m, _ in profile])
    stds = np.array([s for _, s in profile])
    return means + stds * rng.standard_normal((count, len(profile)))


def _is_go(v_i, h_t, drac):
    return h_t > H_T_EDGE + H_T_GAP and (v_i > V_I_EDGE + V_I_GAP or drac > DRAC_EDGE + DRAC_GAP)


def _is_stop(v_i, h_t, drac):
    return h_t < H_T_EDGE - H_T_GAP or (v_i < V_I_EDGE - V_I_GAP and drac < DRAC_EDGE - DRAC_GAP)


def _rule_rows(rng, count, go):
    rows = []
    while len(rows) < count:
        v_i, h_t, drac = rng.uniform(4.0, 10.0), rng.uniform(-2.5, 0.5), rng.uniform(0.0, 6.0)
        an, mfd, pd_bar = rng.normal(0.75, 0.2), rng.normal(0.55, 0.1), rng.normal(41.0, 2.0)
        keep = _is_go(v_i, h_t, drac) if go else _is_stop(v_i, h_t, drac)
        if keep:
            rows.append((v_i, h_t, an, drac, mfd, pd_bar))
    return np.array(rows)


def synthetic_dataset(n=288, go_rate=0.2465, seed=0, nonlinear=False):
    """
    Linear variant: Gaussian classes shifted on every feature. Nonlinear
    variant: Go iff h_t > -1 and (v_i > 7 or drac > 3), with an empty band
    around the boundary; the other three features carry no signal.
    """
    if n < 4 or not 0.0 < go_rate < 1.0:
        raise ValueError("need n >= 4 and 0 < go_rate < 1")
    rng = np.random.default_rng(seed)
    n_go = int(round(n * go_rate))
    n_go = min(max(n_go, 2), n - 2)
    if nonlinear:
        go, stop = _rule_rows(rng, n_go, True), _rule_rows(rng, n - n_go, False)
    else:
        go, stop = _gaussian_rows(rng, GO_PROFILE, n_go), _gaussian_rows(rng, STOP_PROFILE, n - n_go)
    labelled = [(row, Decision.GO) for row in go] + [(row, Decision.STOP) for row in stop]
    order = rng.permutation(len(labelled))
    rows = [_vector(labelled[i][0], labelled[i][1], k) for k, i in enumerate(order)]
    logger.debug("Synthetic dataset: %d rows, %d Go, nonlinear=%s", n, n_go, nonlinear)
    return Dataset(rows, split_seed=seed)
