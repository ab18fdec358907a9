"""
On-disk layout of a simulated run:

    <out>/manifest.json
    <out>/config.json
    <out>/trials/<trial_id>/ego.csv
    <out>/trials/<trial_id>/aggressive.csv
    <out>/trials/<trial_id>/gaze.csv
    <out>/trials/<trial_id>/trial.json
"""
from collections import Counter
import json
import logging
from pathlib import Path

from django.conf import settings

from gaze.csv_io import write_gaze_csv
from gaze.synthetic import synthesize_gaze
from trajectory.csv_io import write_trajectory_csv

from .config import config_to_dict, dump_config
from .geometry import build_geometry

logger = logging.getLogger(__name__)

TRIALS_DIR = 'trials'
TRIAL_MANIFEST = 'trial.json'
RUN_MANIFEST = 'manifest.json'
# the run's base config, loadable to reproduce it
RUN_CONFIG = 'config.json'
TRIAL_FILES = {'ego': 'ego.csv', 'aggressive': 'aggressive.csv', 'gaze': 'gaze.csv'}


def write_json(data, path):
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path


def trial_manifest(trial):
    geometry = build_geometry(trial.config.geometry)
    return {
        'trial_id': trial.trial_id,
        'subject': trial.subject,
        'aggressiveness': str(trial.aggressiveness),
        'warning_lead': str(trial.warning_lead),
        'seed': trial.config.seed,
        'config': config_to_dict(trial.config),
        'conflict_point': [float(v) for v in geometry.conflict_point],
        'entry_time': trial.entry_time,
        'cue_time': trial.cue_time,
        'action_time': trial.action_time,
        'outcome': None if trial.outcome is None else str(trial.outcome),
        'collision': trial.collision,
        't_contact': trial.t_contact,
        'escalated': trial.escalated,
        'predicted_net': trial.predicted_net,
        'nominal_ego_arrival': trial.nominal_ego_arrival,
        'planned_aggressive_arrival': trial.planned_aggressive_arrival,
        'realized_headway': trial.realized_headway,
        'warning': None if trial.warning is None else trial.warning.to_dict(),
        'files': dict(TRIAL_FILES),
    }


def write_trial(trial, directory, gaze_seed):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(trial.ego, directory / TRIAL_FILES['ego'])
    write_trajectory_csv(trial.aggressive, directory / TRIAL_FILES['aggressive'])
    write_gaze_csv(synthesize_gaze(trial, gaze_seed), directory / TRIAL_FILES['gaze'])
    write_json(trial_manifest(trial), directory / TRIAL_MANIFEST)
    return directory


def run_summary(trials):
    by_level = {}
    for trial in trials:
        counts = by_level.setdefault(str(trial.aggressiveness), Counter())
        counts['trials'] += 1
        counts['warnings'] += trial.warning is not None
        counts['collisions'] += trial.collision
        counts[str(trial.outcome) if trial.outcome is not None else 'no_action'] += 1
    return {
        'n_trials': len(trials),
        'n_warnings': sum(t.warning is not None for t in trials),
        'n_collisions': sum(t.collision for t in trials),
        'by_aggressiveness': {level: dict(sorted(counts.items())) for level, counts in by_level.items()},
    }


def write_run(trials, out, base, repeats, seeds):
    """Trial directories plus the run manifest; returns the manifest path"""
    out = Path(out)
    entries = []
    for index, trial in enumerate(trials):
        directory = write_trial(trial, out / TRIALS_DIR / trial.trial_id, [trial.config.seed, index])
        entries.append({
            'trial_id': trial.trial_id,
            'subject': trial.subject,
            'aggressiveness': str(trial.aggressiveness),
            'warning_lead': str(trial.warning_lead),
            'seed': trial.config.seed,
            'path': directory.relative_to(out).as_posix(),
        })
    manifest = {
        'version': settings.ROUNDABOUT_VERSION,
        'config': config_to_dict(base),
        'repeats': repeats,
        'seeds': list(seeds),
        'trials': entries,
        'summary': run_summary(trials),
    }
    dump_config(base, out / RUN_CONFIG)
    path = write_json(manifest, out / RUN_MANIFEST)
    logger.info("Wrote %d trials under %s", len(trials), out)
    return path
