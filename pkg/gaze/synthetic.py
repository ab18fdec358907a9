import logging

import numpy as np

from .models import AreaOfInterest, FixationRecord, GazeLog

logger = logging.getLogger(__name__)

BASE_PUPIL_PX = 40.0
WARNING_PUPIL_DILATION_PX = 4.0
SACCADE_S = 0.05

# AOI probabilities before and after a warning or a visual detection
CALM_AOI_WEIGHTS = {
    AreaOfInterest.ROAD_AHEAD: 0.70,
    AreaOfInterest.SPEED_INFO: 0.15,
    AreaOfInterest.AGGRESSIVE_VEHICLE: 0.10,
    AreaOfInterest.WARNING_INFO: 0.05,
}
ALERT_AOI_WEIGHTS = {
    AreaOfInterest.ROAD_AHEAD: 0.35,
    AreaOfInterest.SPEED_INFO: 0.05,
    AreaOfInterest.AGGRESSIVE_VEHICLE: 0.40,
    AreaOfInterest.WARNING_INFO: 0.20,
}


def synthesize_gaze(trial, seed):
    """
    Seeded fixation log covering the ego trajectory of a simulated trial.
    Drivers who go through the conflict dwell longer on the road ahead and
    dilate less after the alert.
    """
    rng = np.random.default_rng(seed)
    t, t_end = float(trial.ego.start), float(trial.ego.end)
    alert = trial.warning.t_issue if trial.warning is not None else trial.cue_time
    goes = str(trial.outcome) == 'Go'
    baseline = BASE_PUPIL_PX + rng.normal(0.0, 2.0)
    records = []
    while t < t_end:
        alerted = alert is not None and t >= alert
        weights = ALERT_AOI_WEIGHTS if alerted else CALM_AOI_WEIGHTS
        aois = list(weights)
        aoi = aois[rng.choice(len(aois), p=np.array(list(weights.values())))]
        duration = float(rng.uniform(0.2, 0.6))
        if goes and aoi == AreaOfInterest.ROAD_AHEAD:
            duration *= 1.5
        end = min(t + duration, t_end)
        if end - t < 1e-3:
            break
        pupil = baseline + rng.normal(0.0, 1.0)
        if alerted:
            pupil += WARNING_PUPIL_DILATION_PX * (0.5 if goes else 1.0)
        pupil = max(pupil, 1.0)
        records.append(FixationRecord(
            t_start=round(t, 6),
            t_end=round(end, 6),
            aoi=aoi,
            pupil_left=round(pupil + rng.normal(0.0, 0.5), 3),
            pupil_right=round(pupil + rng.normal(0.0, 0.5), 3),
        ))
        t = end + SACCADE_S
    logger.debug("Synthesized %d fixations for %s", len(records), trial.trial_id)
    return GazeLog(trial.trial_id, records)
