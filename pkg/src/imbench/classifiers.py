"""Downstream classifiers trained on (augmented) data: logistic regression,
random forest, second-order gradient boosting, and an MLP on top of nn.py.

All are deterministic given (data, spec); randomized ones derive per-tree or
per-epoch streams from the spec seed. Probabilities are thresholded at 0.5
with ties going to class 1, so metric runs are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import nn
from .data import Dataset
from .errors import DimensionMismatchError, SingleClassError


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _require_both_classes(train: Dataset) -> None:
    if np.unique(train.labels).size < 2:
        raise SingleClassError("classifier training needs both classes present")


@dataclass(frozen=True)
class LogRegSpec:
    learning_rate: float = 0.1
    iterations: int = 500
    seed: int = 0


@dataclass(frozen=True)
class ForestSpec:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    max_features: str | None = "sqrt"  # "sqrt" or None (all features)
    bootstrap: bool = True
    seed: int = 0


@dataclass(frozen=True)
class GBTSpec:
    rounds: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    l2: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class MLPSpec:
    hidden: tuple[int, ...] = (64, 32)
    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3
    dropout: float = 0.0
    seed: int = 0


class TrainedClassifier:
    """Frozen fitted model; subclasses implement predict_proba."""

    kind = "base"
    threshold = 0.5

    def __init__(self, n_features: int):
        self.n_features = n_features

    def _check(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"expected {self.n_features} features, got shape {x.shape}"
            )
        return x

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def predict_labels(model: TrainedClassifier, features: np.ndarray) -> np.ndarray:
    """Label 1 iff probability >= 0.5 (ties to the positive class)."""
    return (model.predict_proba(features) >= model.threshold).astype(np.int64)


# ---------------------------------------------------------------------------
# logistic regression


class LogisticModel(TrainedClassifier):
    kind = "logreg"

    def __init__(self, weights: np.ndarray, bias: float):
        super().__init__(weights.shape[0])
        self.weights = weights
        self.bias = bias

    def predict_proba(self, features):
        x = self._check(features)
        return _sigmoid(x @ self.weights + self.bias)


def train_logreg(train: Dataset, spec: LogRegSpec | None = None) -> LogisticModel:
    """Full-batch gradient descent on mean BCE from zero weights."""
    spec = spec or LogRegSpec()
    _require_both_classes(train)
    x, y = train.features, train.labels.astype(np.float64)
    n = train.n_rows
    w = np.zeros(train.n_features)
    b = 0.0
    for _ in range(spec.iterations):
        p = _sigmoid(x @ w + b)
        err = (p - y) / n
        w = w - spec.learning_rate * (x.T @ err)
        b = b - spec.learning_rate * float(err.sum())
    return LogisticModel(w, b)


# ---------------------------------------------------------------------------
# CART / random forest


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.value = 0


def _gini_split(x_col: np.ndarray, y01: np.ndarray) -> tuple[float, float] | None:
    """Best (cost, threshold) for one feature by weighted Gini; None when the
    column is constant. Lowest threshold wins cost ties."""
    order = np.argsort(x_col, kind="stable")
    xo = x_col[order]
    yo = y01[order]
    cut = np.flatnonzero(xo[:-1] < xo[1:])
    if cut.size == 0:
        return None
    n = x_col.size
    c1 = np.cumsum(yo)
    n_left = cut + 1.0
    n_right = n - n_left
    l1 = c1[cut]
    r1 = c1[-1] - l1
    g_left = 1.0 - (l1 / n_left) ** 2 - ((n_left - l1) / n_left) ** 2
    g_right = 1.0 - (r1 / n_right) ** 2 - ((n_right - r1) / n_right) ** 2
    cost = (n_left * g_left + n_right * g_right) / n
    j = int(np.argmin(cost))
    threshold = 0.5 * (xo[cut[j]] + xo[cut[j] + 1])
    return float(cost[j]), float(threshold)


def _build_cart(
    x: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    max_depth: int | None,
    min_samples_split: int,
    n_candidates: int | None,
) -> _Node:
    """Iterative CART on class labels. Splits whenever a node is impure and a
    valid cut exists (zero-gain splits allowed, so XOR-style data still gets
    separated). n_candidates limits how many non-constant features are
    evaluated per node; None means all, in index order."""
    root = _Node()
    stack = [(root, np.arange(x.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ones = int(y[idx].sum())
        node.value = 1 if 2 * ones >= idx.size else 0
        if ones == 0 or ones == idx.size:
            continue
        if idx.size < min_samples_split or (max_depth is not None and depth >= max_depth):
            continue
        feat_order = (
            np.arange(x.shape[1]) if n_candidates is None else rng.permutation(x.shape[1])
        )
        best = None
        evaluated = 0
        for f in feat_order:
            res = _gini_split(x[idx, f], y[idx])
            if res is None:
                continue
            evaluated += 1
            cost, thr = res
            if best is None or cost < best[0] - 1e-15:
                best = (cost, int(f), thr)
            if n_candidates is not None and evaluated >= n_candidates:
                break
        if best is None:
            continue
        _, f, thr = best
        node.feature = f
        node.threshold = thr
        mask = x[idx, f] < thr
        node.left = _Node()
        node.right = _Node()
        stack.append((node.left, idx[mask], depth + 1))
        stack.append((node.right, idx[~mask], depth + 1))
    return root


def _tree_apply(root: _Node, x: np.ndarray, out: np.ndarray, idx: np.ndarray) -> None:
    # iterative: unlimited-depth trees must not hit the recursion limit
    stack = [(root, idx)]
    while stack:
        node, rows = stack.pop()
        if node.left is None:
            out[rows] = node.value
            continue
        mask = x[rows, node.feature] < node.threshold
        stack.append((node.left, rows[mask]))
        stack.append((node.right, rows[~mask]))


class ForestModel(TrainedClassifier):
    kind = "random_forest"

    def __init__(self, trees: list[_Node], n_features: int, n_trees: int):
        super().__init__(n_features)
        self.trees = trees
        self.n_trees = n_trees

    def predict_proba(self, features):
        x = self._check(features)
        votes = np.zeros(x.shape[0])
        out = np.empty(x.shape[0], dtype=np.int64)
        for tree in self.trees:
            _tree_apply(tree, x, out, np.arange(x.shape[0]))
            votes += out
        return votes / self.n_trees


def train_random_forest(train: Dataset, spec: ForestSpec | None = None) -> ForestModel:
    """Gini CART trees on bootstrap resamples, majority-vote probability."""
    spec = spec or ForestSpec()
    _require_both_classes(train)
    x, y = train.features, train.labels
    if spec.max_features == "sqrt":
        n_candidates = max(1, int(math.sqrt(train.n_features)))
    elif spec.max_features is None:
        n_candidates = None
    else:
        raise ValueError(f"unknown max_features {spec.max_features!r}")
    children = np.random.SeedSequence(spec.seed).spawn(spec.n_trees)
    trees = []
    for child in children:
        rng = np.random.default_rng(child)
        if spec.bootstrap:
            idx = rng.integers(0, train.n_rows, size=train.n_rows)
        else:
            idx = np.arange(train.n_rows)
        trees.append(
            _build_cart(x[idx], y[idx], rng, spec.max_depth, spec.min_samples_split, n_candidates)
        )
    return ForestModel(trees, train.n_features, spec.n_trees)


# ---------------------------------------------------------------------------
# gradient boosting with logistic loss


class _GBTNode:
    __slots__ = ("feature", "threshold", "left", "right", "weight")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.weight = 0.0


def _gbt_best_split(x_col, g, h, lam) -> tuple[float, float] | None:
    order = np.argsort(x_col, kind="stable")
    xo = x_col[order]
    cut = np.flatnonzero(xo[:-1] < xo[1:])
    if cut.size == 0:
        return None
    go = g[order]
    ho = h[order]
    gl = np.cumsum(go)[cut]
    hl = np.cumsum(ho)[cut]
    g_tot, h_tot = g.sum(), h.sum()
    gr = g_tot - gl
    hr = h_tot - hl
    gain = 0.5 * (gl**2 / (hl + lam) + gr**2 / (hr + lam) - g_tot**2 / (h_tot + lam))
    j = int(np.argmax(gain))
    if gain[j] <= 1e-12:
        return None
    return float(gain[j]), 0.5 * (xo[cut[j]] + xo[cut[j] + 1])


def _build_gbt_tree(x, g, h, depth, max_depth, lam) -> _GBTNode:
    node = _GBTNode()
    node.weight = -g.sum() / (h.sum() + lam)
    if depth >= max_depth or x.shape[0] < 2:
        return node
    best = None
    for f in range(x.shape[1]):
        res = _gbt_best_split(x[:, f], g, h, lam)
        if res is not None and (best is None or res[0] > best[0] + 1e-15):
            best = (res[0], f, res[1])
    if best is None:
        return node
    _, f, thr = best
    node.feature = f
    node.threshold = thr
    mask = x[:, f] < thr
    node.left = _build_gbt_tree(x[mask], g[mask], h[mask], depth + 1, max_depth, lam)
    node.right = _build_gbt_tree(x[~mask], g[~mask], h[~mask], depth + 1, max_depth, lam)
    return node


def _gbt_apply(node: _GBTNode, x: np.ndarray, out: np.ndarray, idx: np.ndarray) -> None:
    if node.left is None:
        out[idx] = node.weight
        return
    mask = x[idx, node.feature] < node.threshold
    _gbt_apply(node.left, x, out, idx[mask])
    _gbt_apply(node.right, x, out, idx[~mask])


class BoostedModel(TrainedClassifier):
    kind = "gbt"

    def __init__(self, base_score, trees, learning_rate, n_features, train_loss_history):
        super().__init__(n_features)
        self.base_score = base_score
        self.trees = trees
        self.learning_rate = learning_rate
        # mean training logloss after 0, 1, ..., rounds trees
        self.train_loss_history = train_loss_history

    def decision_function(self, features):
        x = self._check(features)
        score = np.full(x.shape[0], self.base_score)
        out = np.empty(x.shape[0])
        for tree in self.trees:
            _gbt_apply(tree, x, out, np.arange(x.shape[0]))
            score += self.learning_rate * out
        return score

    def predict_proba(self, features):
        return _sigmoid(self.decision_function(features))


def train_gbt(train: Dataset, spec: GBTSpec | None = None) -> BoostedModel:
    """Additive regression trees fit to logistic-loss gradients with
    Hessian-weighted leaf values, initialized at the prior log-odds."""
    spec = spec or GBTSpec()
    _require_both_classes(train)
    x, y = train.features, train.labels.astype(np.float64)
    prior = float(y.mean())
    base = math.log(prior / (1.0 - prior))
    score = np.full(train.n_rows, base)
    trees: list[_GBTNode] = []
    history = []
    out = np.empty(train.n_rows)
    for _ in range(spec.rounds):
        p = _sigmoid(score)
        history.append(float(nn.bce_loss(p, y)[0]))
        g = p - y
        h = p * (1.0 - p)
        tree = _build_gbt_tree(x, g, h, 0, spec.max_depth, spec.l2)
        trees.append(tree)
        _gbt_apply(tree, x, out, np.arange(train.n_rows))
        score = score + spec.learning_rate * out
    history.append(float(nn.bce_loss(_sigmoid(score), y)[0]))
    return BoostedModel(base, trees, spec.learning_rate, train.n_features, history)


# ---------------------------------------------------------------------------
# MLP classifier


class MLPModel(TrainedClassifier):
    kind = "mlp"

    def __init__(self, net: nn.MLPNetwork):
        super().__init__(net.input_dim)
        self.net = net

    def predict_proba(self, features):
        x = self._check(features)
        out, _ = nn.forward(self.net, x, training=False)
        return out[:, 0]


def train_mlp_classifier(train: Dataset, spec: MLPSpec | None = None) -> MLPModel:
    """Mini-batch Adam on BCE over a ReLU MLP with sigmoid output."""
    spec = spec or MLPSpec()
    _require_both_classes(train)
    rng = np.random.default_rng(spec.seed)
    sizes = [train.n_features, *spec.hidden, 1]
    dims = list(zip(sizes[:-1], sizes[1:]))
    acts = ["relu"] * len(spec.hidden) + ["sigmoid"]
    net = nn.init_network(dims, acts, dropout_rate=spec.dropout, seed=rng)
    opt = nn.AdamState(net.parameters(), learning_rate=spec.learning_rate)
    x, y = train.features, train.labels.astype(np.float64)
    for _ in range(spec.epochs):
        perm = rng.permutation(train.n_rows)
        for start in range(0, train.n_rows, spec.batch_size):
            idx = perm[start : start + spec.batch_size]
            out, cache = nn.forward(net, x[idx], training=True, seed=rng)
            _, grad = nn.bce_loss(out[:, 0], y[idx])
            grads, _ = nn.backward(net, cache, grad.reshape(-1, 1))
            net.set_parameters(nn.adam_step(opt, net.parameters(), grads))
    return MLPModel(net)


# ---------------------------------------------------------------------------

ClassifierSpec = LogRegSpec | ForestSpec | GBTSpec | MLPSpec

_TRAINERS = {
    LogRegSpec: train_logreg,
    ForestSpec: train_random_forest,
    GBTSpec: train_gbt,
    MLPSpec: train_mlp_classifier,
}


def train_classifier(train: Dataset, spec: ClassifierSpec) -> TrainedClassifier:
    """Dispatch on the spec type."""
    try:
        trainer = _TRAINERS[type(spec)]
    except KeyError:
        raise ValueError(f"unknown classifier spec {type(spec).__name__}") from None
    return trainer(train, spec)
