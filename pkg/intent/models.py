from dataclasses import asdict, dataclass, field
import math

import numpy as np
from django.db import models

from scenario.models import Decision

FEATURE_NAMES = ('v_i', 'h_t', 'an', 'drac', 'mfd_road', 'pd_bar')
NON_NEGATIVE = ('an', 'drac', 'mfd_road', 'pd_bar')
GAZE_FEATURES = ('mfd_road', 'pd_bar')
LABELS = (Decision.STOP, Decision.GO)


class ModelKind(models.TextChoices):
    KNN = 'KNN', 'K-nearest neighbours'
    DECISION_TREE = 'DecisionTree', 'Decision tree (CART)'
    RANDOM_FOREST = 'RandomForest', 'Random forest'
    GRADIENT_BOOSTING = 'GradientBoosting', 'Gradient boosting'

    @classmethod
    def parse(cls, name):
        """Accepts the enum value, case-insensitively, or a short alias"""
        key = name.strip().lower()
        for kind in cls:
            if key == kind.value.lower():
                return kind
        if key in MODEL_ALIASES:
            return cls(MODEL_ALIASES[key])
        raise ValueError(f"unknown model {name!r}; choose from {', '.join(valid_model_names())}")


MODEL_ALIASES = {'knn': 'KNN', 'tree': 'DecisionTree', 'forest': 'RandomForest', 'gbt': 'GradientBoosting'}


def valid_model_names():
    return list(ModelKind.values) + list(MODEL_ALIASES)


@dataclass(frozen=True)
class FeatureVector:
    """
    Features at warning onset. Gaze features are None when no fixation
    data covers the window; such vectors are kept but never trained on.
    """
    v_i: float
    h_t: float
    an: float
    drac: float
    mfd_road: float
    pd_bar: float
    label: str
    trial_id: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'label', Decision(self.label))
        if self.label not in LABELS:
            raise ValueError(f"label must be Stop or Go, got {self.label}")
        for name in FEATURE_NAMES:
            value = getattr(self, name)
            if value is None and name in GAZE_FEATURES:
                continue
            if value is None or not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            if name in NON_NEGATIVE and value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")

    @property
    def complete(self):
        return all(getattr(self, name) is not None for name in FEATURE_NAMES)

    @property
    def is_go(self):
        return self.label == Decision.GO

    def values(self):
        return [getattr(self, name) for name in FEATURE_NAMES]


@dataclass
class Dataset:
    rows: list
    split_seed: int = 0

    def __len__(self):
        return len(self.rows)

    @property
    def complete_rows(self):
        return [row for row in self.rows if row.complete]

    @property
    def X(self):
        rows = self.complete_rows
        return np.array([row.values() for row in rows], dtype=float).reshape(len(rows), len(FEATURE_NAMES))

    @property
    def y(self):
        """1 for Go, 0 for Stop, complete rows only"""
        return np.array([int(row.is_go) for row in self.complete_rows], dtype=int)

    def class_counts(self):
        y = self.y
        return {str(Decision.STOP): int((y == 0).sum()), str(Decision.GO): int((y == 1).sum())}


@dataclass(frozen=True)
class ClassifierMetrics:
    """
    Go is the positive class. ``precision``/``recall``/``f1`` are None when
    undefined on the test split (single class, no positive prediction).
    """
    model: str
    train_accuracy: float
    test_accuracy: float
    precision: float
    recall: float
    f1: float
    roc: list = field(default_factory=list)
    auc: float = None
    confusion: list = field(default_factory=list)
    undefined: list = field(default_factory=list)

    def to_dict(self):
        data = asdict(self)
        data['roc'] = [[float(fpr), float(tpr)] for fpr, tpr in self.roc]
        return data


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson coefficients; rows/columns of zero-variance features are NaN"""
    names: tuple
    values: np.ndarray
    undefined: tuple = ()

    def __getitem__(self, pair):
        a, b = pair
        return float(self.values[self.names.index(a), self.names.index(b)])

    def to_dict(self):
        return {
            'names': list(self.names),
            'values': [[None if math.isnan(v) else float(v) for v in row] for row in self.values],
            'undefined': list(self.undefined),
        }
