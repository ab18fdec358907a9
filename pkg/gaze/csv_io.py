import logging
from pathlib import Path

import pandas as pd

from .exceptions import GazeParseError, OverlapError
from .models import FixationRecord, GazeLog

logger = logging.getLogger(__name__)

COLUMNS = ['t_start', 't_end', 'aoi', 'pupil_left', 'pupil_right']
NUMERIC = ('t_start', 't_end', 'pupil_left', 'pupil_right')


def ingest_gaze_csv(path, trial_id=None):
    """
    Read a pre-fixated ``t_start,t_end,aoi,pupil_left,pupil_right`` log.
    Records must be sorted and must not overlap.
    """
    path = Path(path)
    trial_id = trial_id or path.stem
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as exc:
        raise GazeParseError(f"{path.name}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise GazeParseError(f"{path.name}: empty file", line=1) from exc

    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise GazeParseError(f"{path.name}: missing column(s) {', '.join(missing)}", line=1)

    records = []
    for offset, row in enumerate(frame[COLUMNS].to_dict('records')):
        line = offset + 2
        if any(pd.isna(row[name]) or str(row[name]).strip() == '' for name in COLUMNS):
            raise GazeParseError("missing field(s)", line=line)
        try:
            values = {name: float(row[name]) for name in NUMERIC}
        except ValueError as exc:
            raise GazeParseError(f"non-numeric field ({exc})", line=line) from exc
        try:
            records.append(FixationRecord(aoi=str(row['aoi']).strip(), **values))
        except ValueError as exc:
            raise GazeParseError(str(exc), line=line) from exc

    try:
        log = GazeLog(trial_id, records)
    except OverlapError as exc:
        raise GazeParseError(f"{path.name}: {exc}") from exc
    logger.debug("Read %d fixations for %s from %s", len(records), trial_id, path)
    return log


def write_gaze_csv(log, path):
    path = Path(path)
    frame = pd.DataFrame(
        [
            {
                't_start': r.t_start,
                't_end': r.t_end,
                'aoi': r.aoi.value,
                'pupil_left': r.pupil_left,
                'pupil_right': r.pupil_right,
            }
            for r in log
        ],
        columns=COLUMNS,
    )
    frame.to_csv(path, index=False, float_format='%.6f', lineterminator='\n')
    return path
