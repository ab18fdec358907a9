"""
Pupil-diameter and fixation-duration features over a time window of a
fixation log.
"""
import logging

import numpy as np

from .exceptions import NoDataError
from .models import AreaOfInterest, FixationFeatures

logger = logging.getLogger(__name__)


def _check_window(t0, t1):
    if t1 <= t0:
        raise ValueError(f"invalid window [{t0}, {t1}]")


def mean_pupil_diameter(log, t0, t1):
    """
    Average of the left and right minimum pupil diameters over the records
    intersecting [t0, t1]
    """
    _check_window(t0, t1)
    records = log.intersecting(t0, t1)
    if not records:
        raise NoDataError(f"{log.trial_id}: no fixation in [{t0}, {t1}]")
    pd_left = min(r.pupil_left for r in records)
    pd_right = min(r.pupil_right for r in records)
    return (pd_left + pd_right) / 2.0


def pupil_stats(log, t0, t1):
    """(min, max, mean) of the per-record two-eye average pupil diameter"""
    _check_window(t0, t1)
    records = log.intersecting(t0, t1)
    if not records:
        raise NoDataError(f"{log.trial_id}: no fixation in [{t0}, {t1}]")
    both = np.array([(r.pupil_left + r.pupil_right) / 2.0 for r in records])
    return float(both.min()), float(both.max()), float(both.mean())


def fixation_features(log, t0, t1, aoi):
    """
    Fixation durations on ``aoi`` clipped to [t0, t1]. A fixation straddling
    an edge is counted once with its inside part only.
    """
    _check_window(t0, t1)
    aoi = AreaOfInterest(aoi)
    durations = [r.clipped(t0, t1) for r in log.intersecting(t0, t1) if r.aoi == aoi]
    durations = [d for d in durations if d > 0]
    if not durations:
        return FixationFeatures(0.0, 0, 0.0, empty=True)
    total = float(sum(durations))
    return FixationFeatures(total, len(durations), total / len(durations))


def aoi_summary(log, t0, t1):
    return {aoi: fixation_features(log, t0, t1, aoi) for aoi in AreaOfInterest.values}
