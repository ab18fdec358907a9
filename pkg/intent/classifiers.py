"""
Binary stop-or-go classifiers on numpy arrays. Labels are 0 (Stop) and
1 (Go); ``predict_proba`` returns the Go score used for the ROC curve.
"""
from dataclasses import dataclass
import math

import numpy as np
from sklearn.preprocessing import StandardScaler

# leaf values and probabilities at or above this are Go
DECISION_THRESHOLD = 0.5
MIN_GAIN = 1e-12
PROBA_CLIP = 1e-12


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def log_loss(y, p):
    p = np.clip(p, PROBA_CLIP, 1.0 - PROBA_CLIP)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1.0 - p)))


class _Classifier:

    def predict(self, X):
        return (self.predict_proba(X) >= DECISION_THRESHOLD).astype(int)


class KNNClassifier(_Classifier):
    """Euclidean k-NN on z-scored features; the scaler only sees training rows"""

    def __init__(self, k=5):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = k
        self.scaler = StandardScaler()

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        self.X_ = self.scaler.fit_transform(X)
        self.y_ = np.asarray(y, dtype=int)
        return self

    def predict_proba(self, X):
        Z = self.scaler.transform(np.asarray(X, dtype=float))
        k = min(self.k, len(self.y_))
        dist = ((Z[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argsort(dist, axis=1, kind='stable')[:, :k]
        return self.y_[nearest].mean(axis=1)


@dataclass
class Node:
    value: float
    n: int
    feature: int = None
    threshold: float = None
    left: 'Node' = None
    right: 'Node' = None

    @property
    def is_leaf(self):
        return self.feature is None


def _gini(n, total, _squares):
    p = total / n
    return n * 2.0 * p * (1.0 - p)


def _sse(n, total, squares):
    return squares - total * total / n


class DecisionTree(_Classifier):
    """
    Binary CART. ``criterion='gini'`` grows a classifier whose leaves hold
    the Go fraction; ``'mse'`` a regression tree with mean leaves.
    """

    def __init__(self, max_depth=6, min_samples_leaf=2, max_features=None, criterion='gini', rng=None):
        if max_depth < 0 or min_samples_leaf < 1:
            raise ValueError("max_depth must be >= 0 and min_samples_leaf >= 1")
        if criterion not in ('gini', 'mse'):
            raise ValueError(f"unknown criterion {criterion!r}")
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.impurity = _gini if criterion == 'gini' else _sse
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.root = None

    def _n_candidates(self, d):
        if self.max_features is None:
            return d
        if self.max_features == 'sqrt':
            return max(1, int(math.sqrt(d)))
        return max(1, min(int(self.max_features), d))

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.shape[0] == 0:
            raise ValueError("cannot fit a tree on zero rows")
        self.n_features_ = X.shape[1]
        self.root = self._grow(X, y, depth=0)
        return self

    def _grow(self, X, y, depth):
        node = Node(value=float(y.mean()), n=len(y))
        if depth >= self.max_depth or len(y) < 2 * self.min_samples_leaf:
            return node
        split = self._best_split(X, y)
        if split is None:
            return node
        node.feature, node.threshold = split
        mask = X[:, node.feature] <= node.threshold
        node.left = self._grow(X[mask], y[mask], depth + 1)
        node.right = self._grow(X[~mask], y[~mask], depth + 1)
        return node

    def _best_split(self, X, y):
        n, d = X.shape
        parent = self.impurity(n, y.sum(), (y * y).sum())
        if parent <= MIN_GAIN:
            return None
        k = self._n_candidates(d)
        features = np.arange(d) if k == d else np.sort(self.rng.choice(d, size=k, replace=False))
        leaf = self.min_samples_leaf
        best, best_score = None, parent - MIN_GAIN
        for f in features:
            order = np.argsort(X[:, f], kind='stable')
            xs, ys = X[order, f], y[order]
            sums, squares = np.cumsum(ys), np.cumsum(ys * ys)
            total, total_sq = sums[-1], squares[-1]
            i = np.arange(leaf - 1, n - leaf)
            i = i[xs[i] != xs[i + 1]]
            if i.size == 0:
                continue
            n_left = i + 1
            scores = (
                self.impurity(n_left, sums[i], squares[i])
                + self.impurity(n - n_left, total - sums[i], total_sq - squares[i])
            )
            j = int(np.argmin(scores))
            if scores[j] < best_score:
                best_score = scores[j]
                best = (int(f), float((xs[i[j]] + xs[i[j] + 1]) / 2.0))
        return best

    def _leaf(self, x):
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def predict_value(self, X):
        X = np.asarray(X, dtype=float)
        return np.array([self._leaf(x).value for x in X])

    def predict_proba(self, X):
        return self.predict_value(X)

    @property
    def depth(self):
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)


class RandomForest(_Classifier):
    """
    Bagged CART trees with per-split feature subsampling. The Go score is
    the fraction of trees voting Go.
    """

    def __init__(self, n_estimators=100, max_depth=6, min_samples_leaf=2,
                 max_features='sqrt', bootstrap=True, random_state=0):
        if n_estimators < 1:
            raise ValueError(f"n_estimators must be >= 1, got {n_estimators}")
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        streams = np.random.SeedSequence(self.random_state).spawn(self.n_estimators)
        self.trees_ = []
        for stream in streams:
            rng = np.random.default_rng(stream)
            rows = rng.integers(0, len(y), size=len(y)) if self.bootstrap else np.arange(len(y))
            tree = DecisionTree(self.max_depth, self.min_samples_leaf, self.max_features, rng=rng)
            self.trees_.append(tree.fit(X[rows], y[rows]))
        return self

    def predict_proba(self, X):
        votes = np.array([tree.predict(X) for tree in self.trees_])
        return votes.mean(axis=0)


class GradientBoosting(_Classifier):
    """
    Logistic-loss boosting of depth-limited regression trees fitted to the
    residuals y - p, starting from the training log-odds.
    """

    def __init__(self, n_estimators=100, max_depth=3, learning_rate=0.1, min_samples_leaf=1):
        if n_estimators < 1 or learning_rate <= 0:
            raise ValueError("n_estimators must be >= 1 and learning_rate > 0")
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_samples_leaf = min_samples_leaf

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        p = np.clip(y.mean(), PROBA_CLIP, 1.0 - PROBA_CLIP)
        self.init_score_ = float(math.log(p / (1.0 - p)))
        score = np.full(len(y), self.init_score_)
        self.trees_ = []
        self.train_loss_ = [log_loss(y, _sigmoid(score))]
        for _ in range(self.n_estimators):
            residual = y - _sigmoid(score)
            tree = DecisionTree(self.max_depth, self.min_samples_leaf, criterion='mse').fit(X, residual)
            score = score + self.learning_rate * tree.predict_value(X)
            self.trees_.append(tree)
            self.train_loss_.append(log_loss(y, _sigmoid(score)))
        return self

    def decision_function(self, X):
        X = np.asarray(X, dtype=float)
        score = np.full(X.shape[0], self.init_score_)
        for tree in self.trees_:
            score += self.learning_rate * tree.predict_value(X)
        return score

    def predict_proba(self, X):
        return _sigmoid(self.decision_function(X))
