import json
import logging
import math
from pathlib import Path

import pandas as pd

from .exceptions import BalanceError
from .models import FactorialSample

logger = logging.getLogger(__name__)

LEVEL_COLUMNS = {'warning': 'warning_level', 'aggressiveness': 'aggressiveness'}


def samples_from_csv(path, metric='value', subject_column='subject'):
    """
    Long-format rows ``subject,warning,aggressiveness,<metric>``. Rows with
    an empty metric cell are dropped; the balance check later names any
    cell they leave empty.
    """
    path = Path(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    frame.columns = [c.strip() for c in frame.columns]
    required = [subject_column, 'warning', 'aggressiveness', metric]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise BalanceError(f"{path.name}: missing column(s) {', '.join(missing)}")

    samples, dropped = [], 0
    for row in frame[required].itertuples(index=False):
        subject, warning, aggressiveness, value = (str(v).strip() for v in row)
        if value == '':
            dropped += 1
            continue
        try:
            number = float(value)
        except ValueError as exc:
            raise BalanceError(f"{path.name}: non-numeric {metric} value {value!r}") from exc
        samples.append(FactorialSample(subject, warning, aggressiveness, number))
    if dropped:
        logger.warning("%s: %d row(s) without a %s value dropped", path.name, dropped, metric)
    return samples


def write_anova_csv(result, path):
    path = Path(path)
    frame = pd.DataFrame(result.table())
    frame.to_csv(path, index=False, float_format='%.6f', lineterminator='\n')
    return path


def json_safe(value):
    """Copy of ``value`` with every non-finite float replaced by None"""
    if isinstance(value, dict):
        return {key: json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(data, path):
    """Strict JSON: infinite F values and undefined statistics are written as null"""
    path = Path(path)
    text = json.dumps(json_safe(data), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + '\n', encoding='utf-8')
    return path
