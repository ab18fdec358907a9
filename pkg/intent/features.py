import logging
import math

import numpy as np

from gaze.exceptions import NoDataError
from gaze.features import fixation_features, mean_pupil_diameter
from gaze.models import AreaOfInterest
from gaze.synthetic import synthesize_gaze
from scenario.geometry import build_geometry
from ssm.exceptions import DegenerateDistanceError, WindowError
from ssm.metrics import acceleration_noise, drac, line_of_sight, time_headway
from ssm.models import VehicleSpec

from .exceptions import DatasetError, NotApplicable
from .models import FEATURE_NAMES, CorrelationMatrix, Dataset, FeatureVector

logger = logging.getLogger(__name__)

BANDS = ((0.3, 'negligible'), (0.5, 'low'), (0.7, 'moderate'))


def extract_features(trial, gaze_log, warning):
    """
    Instantaneous features at the warning issue time plus window features
    from roundabout entry to the issue time. Raises NotApplicable for
    trials that cannot contribute a vector.
    """
    if warning is None:
        raise NotApplicable(f"{trial.trial_id}: no warning issued")
    if trial.outcome is None:
        raise NotApplicable(f"{trial.trial_id}: the driver never acted")
    t0, t1 = trial.entry_time, warning.t_issue
    if t0 is None or t1 - t0 <= 1e-9:
        raise NotApplicable(f"{trial.trial_id}: empty window from roundabout entry to onset")

    ego, agg = trial.ego.sample_at(t1), trial.aggressive.sample_at(t1)
    geometry = build_geometry(trial.config.geometry)
    # signed distances: negative once a vehicle is past the conflict point
    h_t = time_headway(
        geometry.conflict_s_ego - geometry.ego_path.project(ego.x, ego.y), ego.v,
        geometry.conflict_s_agg - geometry.aggressive_path.project(agg.x, agg.y), agg.v,
    )
    if h_t is None:
        raise NotApplicable(f"{trial.trial_id}: headway undefined at onset (a vehicle is stopped)")

    spec = VehicleSpec.from_settings()
    net, closing_i, closing_j = line_of_sight(ego, agg, spec, spec)
    try:
        drac_value = drac(closing_i, -closing_j, net)
        an = acceleration_noise(trial.ego.series('a'), t0, t1, trial.ego.dt)
    except (DegenerateDistanceError, WindowError) as exc:
        raise NotApplicable(f"{trial.trial_id}: {exc}") from exc

    mfd_road = pd_bar = None
    if gaze_log is not None:
        road = fixation_features(gaze_log, t0, t1, AreaOfInterest.ROAD_AHEAD)
        mfd_road = None if road.empty else road.mean_duration
        try:
            pd_bar = mean_pupil_diameter(gaze_log, t0, t1)
        except NoDataError:
            pd_bar = None

    return FeatureVector(
        v_i=float(ego.v), h_t=float(h_t), an=float(an), drac=float(drac_value),
        mfd_road=mfd_road, pd_bar=pd_bar, label=trial.outcome, trial_id=trial.trial_id,
    )


def pearson_matrix(ds):
    """Pearson correlation of the six features over the complete rows"""
    X = ds.X
    if X.shape[0] < 3:
        raise DatasetError(f"correlation needs >= 3 complete rows, got {X.shape[0]}")
    centered = X - X.mean(axis=0)
    norms = np.sqrt((centered ** 2).sum(axis=0))
    constant = norms <= 1e-12 * np.maximum(np.abs(X).max(axis=0), 1.0)
    safe = np.where(constant, 1.0, norms)
    values = (centered.T @ centered) / np.outer(safe, safe)
    values = np.clip(values, -1.0, 1.0)
    values[constant, :] = np.nan
    values[:, constant] = np.nan
    np.fill_diagonal(values, np.where(constant, np.nan, 1.0))
    undefined = tuple(name for name, flag in zip(FEATURE_NAMES, constant) if flag)
    if undefined:
        logger.warning("Zero-variance feature(s) %s: correlation undefined", ', '.join(undefined))
    return CorrelationMatrix(FEATURE_NAMES, values, undefined)


def band(r):
    if r is None or math.isnan(r):
        return 'undefined'
    for limit, label in BANDS:
        if abs(r) < limit:
            return label
    return 'high'


def correlation_bands(matrix):
    """Band label of every feature pair (upper triangle)"""
    names = matrix.names
    return {
        f"{a}:{b}": band(matrix[a, b])
        for i, a in enumerate(names)
        for b in names[i + 1:]
    }


def dataset_from_trials(trials, split_seed=0):
    """
    Feature vectors of every simulated trial with an onset. Gaze logs are
    synthesized with the same per-trial seeds the run artefacts use.
    """
    rows, skipped = [], 0
    for index, trial in enumerate(trials):
        gaze_log = synthesize_gaze(trial, [trial.config.seed, index])
        try:
            rows.append(extract_features(trial, gaze_log, trial.warning))
        except NotApplicable as exc:
            skipped += 1
            logger.debug("Excluded: %s", exc)
    logger.info("Built %d feature vectors, %d trial(s) without an onset", len(rows), skipped)
    return Dataset(rows, split_seed=split_seed)
