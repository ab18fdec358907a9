import logging
from pathlib import Path

import pandas as pd

from .exceptions import OrderingError, TrajectoryParseError
from .models import Trajectory, TrajectoryPoint

logger = logging.getLogger(__name__)

COLUMNS = ['t', 'x', 'y', 'v', 'a', 'heading']
FLOAT_FORMAT = '%.6f'


def ingest_trajectory_csv(path, vehicle_id=None):
    """
    Read a ``t,x,y,v,a,heading`` file into a Trajectory. The sample
    interval is inferred from the first two rows.
    """
    path = Path(path)
    vehicle_id = vehicle_id or path.stem
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as exc:
        raise TrajectoryParseError(f"{path.name}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise TrajectoryParseError(f"{path.name}: empty file", line=1) from exc

    header = [c.strip() for c in frame.columns]
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise TrajectoryParseError(f"{path.name}: missing column(s) {', '.join(missing)}", line=1)
    frame.columns = header

    points = []
    for offset, row in enumerate(frame[COLUMNS].itertuples(index=False)):
        line = offset + 2
        if any(pd.isna(value) for value in row):
            raise TrajectoryParseError("missing field(s)", line=line)
        try:
            values = [float(str(value).strip()) for value in row]
        except ValueError as exc:
            raise TrajectoryParseError(f"non-numeric field ({exc})", line=line) from exc
        try:
            points.append(TrajectoryPoint(*values))
        except ValueError as exc:
            raise TrajectoryParseError(str(exc), line=line) from exc
        if len(points) >= 2 and points[-1].t <= points[-2].t:
            raise OrderingError(
                f"{path.name} line {line}: t={points[-1].t} does not follow t={points[-2].t}"
            )

    logger.debug("Read %d samples for %s from %s", len(points), vehicle_id, path)
    return Trajectory(vehicle_id, points)


def write_trajectory_csv(traj, path):
    path = Path(path)
    frame = pd.DataFrame({name: getattr(traj, name) for name in COLUMNS}, columns=COLUMNS)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path
