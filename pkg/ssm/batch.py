"""
Safety reports for a directory of trials. A trial directory holds
``ego.csv`` and ``aggressive.csv`` and, when it comes from a simulated
run, a ``trial.json`` manifest with the conflict point and descriptors.
"""
from concurrent.futures import ProcessPoolExecutor
import json
import logging
from pathlib import Path

import django
import numpy as np

from roundabout_safety.exceptions import RoundaboutError
from trajectory.csv_io import ingest_trajectory_csv
from trajectory.kalman import kalman_smooth
from trajectory.models import align

from .models import ConflictGeometry, VehicleSpec
from .report import safety_report

logger = logging.getLogger(__name__)

EGO_CSV, AGGRESSIVE_CSV, TRIAL_JSON = 'ego.csv', 'aggressive.csv', 'trial.json'
DESCRIPTOR_FIELDS = ('subject', 'warning', 'aggressiveness', 'outcome', 'warning_issued')


def find_trial_dirs(root):
    root = Path(root)
    return sorted(p.parent for p in root.rglob(EGO_CSV) if (p.parent / AGGRESSIVE_CSV).is_file())


def closest_approach_point(traj_i, traj_j):
    """Midpoint of the two vehicles at their closest approach, for trials without a manifest"""
    dist = np.hypot(traj_i.x - traj_j.x, traj_i.y - traj_j.y)
    k = int(np.argmin(dist))
    return (float(traj_i.x[k] + traj_j.x[k]) / 2.0, float(traj_i.y[k] + traj_j.y[k]) / 2.0)


def read_manifest(directory):
    path = Path(directory) / TRIAL_JSON
    if not path.is_file():
        return {}
    return json.loads(path.read_text(encoding='utf-8'))


def trial_report(directory, smooth=False):
    """
    (descriptors, SafetyReport) of one trial directory. Raises whatever the
    readers or the report raise for a malformed trial.
    """
    directory = Path(directory)
    manifest = read_manifest(directory)
    ego = ingest_trajectory_csv(directory / EGO_CSV, 'ego')
    agg = ingest_trajectory_csv(directory / AGGRESSIVE_CSV, 'aggressive')
    if smooth:
        ego, agg = kalman_smooth(ego), kalman_smooth(agg)
    ego, agg = align(ego, agg)

    conflict_point = manifest.get('conflict_point') or closest_approach_point(ego, agg)
    geometry = ConflictGeometry.from_trajectories(conflict_point, ego, agg)
    t_e = manifest.get('entry_time')
    if t_e is None:
        t_e = ego.start
    spec = VehicleSpec.from_settings()
    trial_id = manifest.get('trial_id') or directory.name
    report = safety_report(ego, agg, spec, spec, geometry, t_e, trial_id=trial_id)

    descriptors = {
        'trial_id': trial_id,
        'subject': manifest.get('subject', ''),
        'warning': manifest.get('warning_lead', ''),
        'aggressiveness': manifest.get('aggressiveness', ''),
        'outcome': manifest.get('outcome') or '',
        'warning_issued': manifest.get('warning') is not None,
    }
    return descriptors, report


def trial_row(directory, smooth=False):
    """One metrics row: trial descriptors followed by SafetyReport.to_row()"""
    descriptors, report = trial_report(directory, smooth)
    return {**descriptors, **report.to_row()}


def _init_worker():
    django.setup()


def _safe_report(job):
    directory, smooth = job
    try:
        return trial_report(directory, smooth)
    except (RoundaboutError, ValueError, TypeError, KeyError, OSError) as exc:
        logger.warning("Skipping trial %s: %s", directory, exc)
        return None


def collect_reports(directories, smooth=False, jobs=1):
    """(descriptors, SafetyReport) pairs in directory order; malformed trials come back as None"""
    work = [(d, smooth) for d in directories]
    if jobs <= 1:
        return [_safe_report(job) for job in work]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker) as executor:
        return list(executor.map(_safe_report, work))
