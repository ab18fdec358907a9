import json
import logging
from pathlib import Path

import pandas as pd

from .exceptions import DatasetError
from .models import FEATURE_NAMES, Dataset, FeatureVector

logger = logging.getLogger(__name__)

COLUMNS = list(FEATURE_NAMES) + ['label']
FLOAT_FORMAT = '%.6f'


def dataset_from_csv(path, split_seed=0):
    """
    Read ``v_i,h_t,an,drac,mfd_road,pd_bar,label``. Empty gaze cells mark
    missing gaze features; an optional ``trial_id`` column is kept.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as exc:
        raise DatasetError(f"{path.name}: empty file", line=1) from exc
    except pd.errors.ParserError as exc:
        raise DatasetError(f"{path.name}: {exc}") from exc
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise DatasetError(f"{path.name}: missing column(s) {', '.join(missing)}", line=1)
    has_ids = 'trial_id' in frame.columns

    rows = []
    for offset, record in enumerate(frame.to_dict('records')):
        line = offset + 2
        values = {}
        try:
            for name in FEATURE_NAMES:
                cell = str(record[name]).strip()
                values[name] = None if cell == '' else float(cell)
            rows.append(FeatureVector(
                **values, label=str(record['label']).strip(),
                trial_id=str(record['trial_id']) if has_ids else '',
            ))
        except ValueError as exc:
            raise DatasetError(str(exc), line=line) from exc
    logger.debug("Read %d feature vectors from %s", len(rows), path)
    return Dataset(rows, split_seed=split_seed)


def dataset_to_csv(ds, path):
    path = Path(path)
    frame = pd.DataFrame(
        [{**dict(zip(FEATURE_NAMES, row.values())), 'label': str(row.label), 'trial_id': row.trial_id} for row in ds.rows],
        columns=COLUMNS + ['trial_id'],
    )
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def write_roc_csv(roc, path):
    path = Path(path)
    frame = pd.DataFrame(roc, columns=['fpr', 'tpr'])
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def write_json(data, path):
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path
