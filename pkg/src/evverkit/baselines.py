"""Reference classifiers: softmax regression, multinomial naive Bayes and a
CART decision tree, plus an MLP baseline that reuses the network trainer.

These are deliberately small, exactly specified implementations so their
behavior can be pinned by closed-form oracles in the tests: NB prediction
equals the log-posterior formula, tree splits break ties toward the lowest
feature index then lowest threshold, and the regression gradient matches
finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse

from .errors import DataError, TrainingDivergedError
from .network import EvverConfig, EvverModel, classification_report, forward, log_softmax
from .network import train as train_mlp

N_CLASSES = 3

FEATURE_MODES = ("count", "tfidf", "dcs_only")


@dataclass
class BaselineModel:
    kind: str  # logreg | naive_bayes | decision_tree | mlp
    parameters: dict
    feature_mode: str = "count"

    def __post_init__(self):
        if self.feature_mode not in FEATURE_MODES:
            raise DataError(f"unknown feature_mode {self.feature_mode!r}")


def _densify(X) -> np.ndarray:
    if sparse.issparse(X):
        return np.asarray(X.todense(), dtype=np.float64)
    return np.asarray(X, dtype=np.float64)


# --- softmax regression -------------------------------------------------

def logreg_loss_and_grads(W: np.ndarray, b: np.ndarray, X: np.ndarray,
                          y: np.ndarray, l2: float):
    """Mean cross-entropy of softmax(XW + b) plus l2 * sum(W^2)."""
    n = X.shape[0]
    logits = X @ W + b
    logp = log_softmax(logits)
    loss = -float(np.mean(logp[np.arange(n), y]))
    if l2 > 0:
        loss += l2 * float(np.sum(W * W))
    dlogits = np.exp(logp)
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    dW = X.T @ dlogits
    if l2 > 0:
        dW += 2.0 * l2 * W
    return loss, dW, dlogits.sum(axis=0)


def fit_logreg(features, labels, l2: float = 0.0, lr: float = 0.5,
               epochs: int = 500, seed: int = 42) -> BaselineModel:
    """Multinomial logistic regression by full-batch gradient descent."""
    X = _densify(features)
    y = np.asarray(labels, dtype=np.int64)
    if len(set(y.tolist())) < 2:
        raise DataError("logistic regression needs at least two classes present")
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((X.shape[1], N_CLASSES)) * 0.01
    b = np.zeros(N_CLASSES)
    losses = []
    for epoch in range(epochs):
        loss, dW, db = logreg_loss_and_grads(W, b, X, y, l2)
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"loss became {loss}", epoch=epoch, batch=0)
        W -= lr * dW
        b -= lr * db
        losses.append(loss)
    return BaselineModel(
        kind="logreg",
        parameters={"weights": W, "bias": b, "losses": losses, "l2": l2},
    )


def _predict_logreg(params: dict, X: np.ndarray) -> np.ndarray:
    logits = X @ params["weights"] + params["bias"]
    return logits.argmax(axis=1)


# --- multinomial naive Bayes --------------------------------------------

def fit_naive_bayes(count_features, labels, alpha: float = 1.0) -> BaselineModel:
    """Multinomial NB with Laplace smoothing; fractional counts (TF-IDF
    weights) are treated as counts."""
    if alpha <= 0:
        raise DataError("smoothing alpha must be positive")
    X = _densify(count_features)
    if np.any(X < 0):
        raise DataError("naive Bayes features must be nonnegative")
    y = np.asarray(labels, dtype=np.int64)
    classes = np.arange(N_CLASSES)
    n_features = X.shape[1]

    log_prior = np.full(N_CLASSES, -np.inf)
    log_likelihood = np.zeros((N_CLASSES, n_features))
    for c in classes:
        mask = y == c
        if not mask.any():
            continue
        log_prior[c] = np.log(mask.sum() / len(y))
        token_counts = X[mask].sum(axis=0) + alpha
        log_likelihood[c] = np.log(token_counts / token_counts.sum())
    return BaselineModel(
        kind="naive_bayes",
        parameters={"log_prior": log_prior, "log_likelihood": log_likelihood, "alpha": alpha},
    )


def nb_joint_log_likelihood(model: BaselineModel, features) -> np.ndarray:
    X = _densify(features)
    p = model.parameters
    return X @ p["log_likelihood"].T + p["log_prior"]


def _predict_nb(model: BaselineModel, X) -> np.ndarray:
    return nb_joint_log_likelihood(model, X).argmax(axis=1)


# --- CART decision tree --------------------------------------------------

@dataclass
class _TreeNode:
    prediction: int
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["_TreeNode"] = None
    right: Optional["_TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def gini_impurity(labels: np.ndarray) -> float:
    if labels.size == 0:
        return 0.0
    _, counts = np.unique(labels, return_counts=True)
    p = counts / labels.size
    return float(1.0 - np.sum(p * p))


def _majority(labels: np.ndarray) -> int:
    # np.bincount argmax resolves ties toward the lowest class code
    return int(np.bincount(labels, minlength=N_CLASSES).argmax())


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Exhaustive Gini search over midpoints of consecutive distinct values.

    Ties resolve to the lowest feature index, then the lowest threshold,
    which keeps training deterministic on permuted feature data.
    """
    n = len(y)
    parent = gini_impurity(y)
    best = None  # (weighted_gini, feature, threshold)
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        if values.size < 2:
            continue
        thresholds = (values[:-1] + values[1:]) / 2.0
        for t in thresholds:
            left = X[:, f] <= t
            n_left = int(left.sum())
            if n_left < min_leaf or n - n_left < min_leaf:
                continue
            score = (n_left * gini_impurity(y[left])
                     + (n - n_left) * gini_impurity(y[~left])) / n
            if score >= parent:
                continue
            if best is None or score < best[0] - 1e-12:
                best = (score, f, float(t))
    return best


def _grow(X: np.ndarray, y: np.ndarray, depth: int, max_depth: int, min_leaf: int) -> _TreeNode:
    node = _TreeNode(prediction=_majority(y))
    if depth >= max_depth or gini_impurity(y) == 0.0 or len(y) < 2 * min_leaf:
        return node
    found = _best_split(X, y, min_leaf)
    if found is None:
        return node
    _, f, t = found
    mask = X[:, f] <= t
    node.feature = f
    node.threshold = t
    node.left = _grow(X[mask], y[mask], depth + 1, max_depth, min_leaf)
    node.right = _grow(X[~mask], y[~mask], depth + 1, max_depth, min_leaf)
    return node


def fit_decision_tree(features, labels, max_depth: int = 8,
                      min_leaf: int = 1) -> BaselineModel:
    X = _densify(features)
    y = np.asarray(labels, dtype=np.int64)
    root = _grow(X, y, depth=0, max_depth=max_depth, min_leaf=min_leaf)
    return BaselineModel(
        kind="decision_tree",
        parameters={"root": root, "max_depth": max_depth, "min_leaf": min_leaf},
    )


def _predict_tree(model: BaselineModel, X) -> np.ndarray:
    X = _densify(X)

    def walk(node: _TreeNode, row: np.ndarray) -> int:
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node.prediction

    root = model.parameters["root"]
    return np.array([walk(root, row) for row in X], dtype=np.int64)


def tree_depth(model: BaselineModel) -> int:
    def depth(node: Optional[_TreeNode]) -> int:
        if node is None or node.is_leaf:
            return 0
        return 1 + max(depth(node.left), depth(node.right))

    return depth(model.parameters["root"])


# --- MLP baseline and shared evaluation ----------------------------------

def fit_mlp_baseline(features, labels, hidden_dims=(64,), lr: float = 1e-3,
                     epochs: int = 50, batch_size: int = 64, dropout: float = 0.0,
                     l2: float = 0.0, seed: int = 42) -> BaselineModel:
    """Thin wrapper over the network trainer for the text-feature baseline."""
    X = _densify(features)
    config = EvverConfig(
        input_dim=X.shape[1], hidden_dims=tuple(hidden_dims), use_dcs=False,
        dropout=dropout, l2=l2, learning_rate=lr, batch_size=batch_size,
        max_epochs=epochs, seed=seed,
    )
    model = train_mlp(X, np.asarray(labels, dtype=np.int64), config)
    return BaselineModel(kind="mlp", parameters={"model": model})


def predict_baseline(model: BaselineModel, features) -> np.ndarray:
    if model.kind == "logreg":
        return _predict_logreg(model.parameters, _densify(features))
    if model.kind == "naive_bayes":
        return _predict_nb(model, features)
    if model.kind == "decision_tree":
        return _predict_tree(model, features)
    if model.kind == "mlp":
        inner: EvverModel = model.parameters["model"]
        probs = np.atleast_2d(forward(inner, _densify(features).astype(inner.dtype)))
        return probs.argmax(axis=1)
    raise DataError(f"unknown baseline kind {model.kind!r}")


def evaluate_baseline(model: BaselineModel, features, labels) -> dict:
    """Same metrics schema as the network evaluator."""
    y = np.asarray(labels, dtype=np.int64)
    preds = predict_baseline(model, features)
    return classification_report(y, preds)


def dcs_only_features(scores, present_flags=None) -> np.ndarray:
    """Feature rows for the score-only mode: the normalized scalar plus a
    missing-data indicator bit."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1, 1)
    if present_flags is None:
        present = np.ones_like(scores)
    else:
        present = np.asarray(present_flags, dtype=np.float64).reshape(-1, 1)
    return np.hstack([scores, present])
