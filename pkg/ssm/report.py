import json
import logging
from pathlib import Path

import pandas as pd

from trajectory.models import align

from .exceptions import WindowError
from .metrics import (
    acceleration_noise,
    braking_stats,
    cpi,
    drac_series,
    max_deceleration,
    ttc_series,
)
from .models import ConflictGeometry, SafetyReport

logger = logging.getLogger(__name__)


def safety_report(traj_i, traj_j, spec_i, spec_j, geometry, t_e, trial_id=''):
    """
    Safety indicators of vehicle i (ego) against vehicle j. The exposure
    window runs from roundabout entry ``t_e`` to the minimum-TTC instant.
    """
    traj_i, traj_j = align(traj_i, traj_j)
    if geometry is None:
        raise ValueError("conflict geometry is required")
    if len(geometry.dist_to_conflict_i) != len(traj_i):
        geometry = ConflictGeometry.from_trajectories(geometry.conflict_point, traj_i, traj_j)

    report = SafetyReport(trial_id=trial_id)
    series = ttc_series(traj_i, traj_j, spec_i, spec_j)
    finite = [(t, value) for t, value in series if value is not None]
    report.collision = any(value == 0.0 for _, value in finite)
    # braking window centres on the merging vehicle's arrival
    arrival = geometry.arrival_time(traj_j.t, 'j')
    if arrival is None:
        arrival = geometry.arrival_time(traj_i.t, 'i')

    if finite:
        t_f, min_ttc = min(finite, key=lambda item: item[1])
        report.min_ttc, report.t_min_ttc = min_ttc, t_f
        if t_f > t_e:
            dracs = drac_series(traj_i, traj_j, spec_i, spec_j)
            report.cpi = cpi(dracs, spec_i, t_e, t_f, traj_i.dt)
            in_window = [v for t, v in dracs if t_e - 1e-6 <= t <= t_f + 1e-6 and v is not None]
            report.max_drac = max(in_window, default=0.0)
            try:
                report.an = acceleration_noise(traj_i.series('a'), t_e, t_f, traj_i.dt)
            except WindowError:
                report.an = None
            report.max_decel_to_min_ttc = max_deceleration(traj_i, t_e, t_f)
        else:
            # exposure window [t_e, t_f] is empty: the window fields stay absent
            logger.warning("Trial %s: minimum TTC at t=%.2f precedes entry at t=%.2f", trial_id or '?', t_f, t_e)
            report.cpi = report.max_drac = None
        if arrival is None:
            arrival = t_f
    else:
        logger.info("Trial %s: vehicles never approach, no finite TTC", trial_id or '?')

    if arrival is not None:
        braking = braking_stats(traj_i, arrival)
        report.avg_decel = braking.avg_decel
        report.max_decel = braking.max_decel
        report.braking_duration = braking.duration
        report.braking_window = braking.window
        report.no_braking = braking.no_braking
    return report


def write_reports_csv(rows, path):
    """
    ``rows`` are dicts: trial descriptors followed by SafetyReport.to_row()
    """
    path = Path(path)
    frame = pd.DataFrame(rows)
    frame.to_csv(path, index=False, float_format='%.6f', lineterminator='\n')
    return path


def write_report_json(report, path):
    path = Path(path)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path


def read_report_json(path):
    data = json.loads(Path(path).read_text(encoding='utf-8'))
    if data.get('braking_window') is not None:
        data['braking_window'] = tuple(data['braking_window'])
    return SafetyReport(**data)
