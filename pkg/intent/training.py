from dataclasses import dataclass
import logging

import numpy as np
from django.conf import settings
from sklearn.metrics import auc, confusion_matrix, roc_curve
from sklearn.model_selection import train_test_split

from .classifiers import DecisionTree, GradientBoosting, KNNClassifier, RandomForest
from .exceptions import StratificationError
from .models import ClassifierMetrics, ModelKind

logger = logging.getLogger(__name__)

DEFAULT_PARAMS = {
    ModelKind.KNN: {'k': 5},
    ModelKind.DECISION_TREE: {'max_depth': 6, 'min_samples_leaf': 2},
    ModelKind.RANDOM_FOREST: {'n_estimators': 100, 'max_depth': 6, 'min_samples_leaf': 2},
    ModelKind.GRADIENT_BOOSTING: {'n_estimators': 100, 'max_depth': 3, 'learning_rate': 0.1},
}


@dataclass(frozen=True)
class Split:
    X_train: np.ndarray
    X_test: np.ndarray
    y_train: np.ndarray
    y_test: np.ndarray


@dataclass(frozen=True)
class FittedModel:
    kind: str
    estimator: object
    split: Split
    params: dict


def split_dataset(ds, test_size=None):
    """Stratified train/test split of the complete rows, seeded by ``ds.split_seed``"""
    test_size = settings.INTENT_TEST_SIZE if test_size is None else test_size
    X, y = ds.X, ds.y
    counts = np.bincount(y, minlength=2) if y.size else np.zeros(2, dtype=int)
    if counts.min() < 2:
        raise StratificationError(
            f"stratified split needs >= 2 rows of each class, got Stop={counts[0]} Go={counts[1]}"
        )
    try:
        parts = train_test_split(X, y, test_size=test_size, stratify=y, random_state=ds.split_seed)
    except ValueError as exc:
        raise StratificationError(str(exc)) from exc
    X_train, X_test, y_train, y_test = parts
    if len(set(y_train)) < 2:
        raise StratificationError("a class is missing from the training split")
    return Split(X_train, X_test, y_train, y_test)


def build_estimator(kind, params=None, seed=0):
    kind = ModelKind(kind)
    params = {**DEFAULT_PARAMS[kind], **(params or {})}
    if kind == ModelKind.KNN:
        return KNNClassifier(**params), params
    if kind == ModelKind.DECISION_TREE:
        return DecisionTree(**params), params
    if kind == ModelKind.RANDOM_FOREST:
        return RandomForest(random_state=seed, **params), params
    return GradientBoosting(**params), params


def train(ds, model, params=None):
    split = split_dataset(ds)
    estimator, params = build_estimator(model, params, seed=ds.split_seed)
    estimator.fit(split.X_train, split.y_train)
    logger.info(
        "Trained %s on %d rows (%d Go), %d held out",
        model, len(split.y_train), int(split.y_train.sum()), len(split.y_test),
    )
    return FittedModel(str(ModelKind(model)), estimator, split, params)


def roc_points(y, scores):
    """(fpr, tpr) pairs and the trapezoid AUC; None when y has a single class"""
    y = np.asarray(y, dtype=int)
    if len(set(y.tolist())) < 2:
        return [], None
    fpr, tpr, _ = roc_curve(y, scores, drop_intermediate=False)
    return list(zip(fpr.tolist(), tpr.tolist())), float(auc(fpr, tpr))


def classification_scores(y, predicted):
    """(accuracy, precision, recall, f1, confusion, undefined) with Go positive"""
    y, predicted = np.asarray(y, dtype=int), np.asarray(predicted, dtype=int)
    matrix = confusion_matrix(y, predicted, labels=[0, 1])
    (tn, fp), (fn, tp) = matrix
    undefined = []
    accuracy = float((tp + tn) / matrix.sum()) if matrix.sum() else None
    precision = float(tp / (tp + fp)) if tp + fp else None
    recall = float(tp / (tp + fn)) if tp + fn else None
    if precision is None:
        undefined.append('precision')
    if recall is None:
        undefined.append('recall')
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return accuracy, precision, recall, f1, matrix.tolist(), undefined


def evaluate(fitted, X_test=None, y_test=None):
    """Metrics on the held-out split (or the given rows)"""
    split = fitted.split
    X_test = split.X_test if X_test is None else X_test
    y_test = split.y_test if y_test is None else y_test
    estimator = fitted.estimator

    train_accuracy = float(np.mean(estimator.predict(split.X_train) == split.y_train))
    accuracy, precision, recall, f1, confusion, undefined = classification_scores(y_test, estimator.predict(X_test))
    roc, area = roc_points(y_test, estimator.predict_proba(X_test))
    if area is None:
        undefined.append('auc')
        logger.warning("%s: test split holds a single class, ROC undefined", fitted.kind)
    return ClassifierMetrics(
        model=fitted.kind,
        train_accuracy=train_accuracy,
        test_accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        roc=roc,
        auc=area,
        confusion=confusion,
        undefined=undefined,
    )
