"""The evidence classifier: a configurable MLP over a feature/embedding
vector, optionally concatenated with the domain credibility scalar, trained
with Adam on cross-entropy plus an L2 weight penalty.

Structure per sample x (and optional score s):
    a_0 = [x; s]                       (concatenation at the input only)
    a_k = GELU(a_{k-1} W_k + b_k)      (exact GELU, Gaussian CDF form)
    p   = softmax(a_L W_out + b_out)   (3 classes)

Training uses inverted dropout on hidden activations, Adam with
beta1=0.9, beta2=0.999, eps=1e-8, and a penalty of l2 * sum(W^2) over
weight matrices (biases excluded), so the weight gradient carries an exact
2*l2*W term. Everything is deterministic given (seed, config, data): one
seeded generator drives init, shuffling and dropout in a fixed order.

Default arithmetic is float32; gradient verification requires float64
(finite differences need the headroom).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import struct
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import erf

from .errors import DataError, DimensionError, FormatError, TrainingDivergedError

N_CLASSES = 3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

MODEL_MAGIC = b"EVVM"
MODEL_VERSION = 1

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def gelu(x: np.ndarray) -> np.ndarray:
    """Exact GELU: x * Phi(x) with the Gaussian CDF, not the tanh fit."""
    return x * 0.5 * (1.0 + erf(x / _SQRT2))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    phi = np.exp(-0.5 * x * x) * _INV_SQRT_2PI
    return 0.5 * (1.0 + erf(x / _SQRT2)) + x * phi


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


@dataclass(frozen=True)
class EvverConfig:
    input_dim: int
    hidden_dims: tuple
    use_dcs: bool = False
    dropout: float = 0.0
    l2: float = 0.0
    learning_rate: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 100
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if self.input_dim < 1:
            raise DataError("input_dim must be positive")
        if not self.hidden_dims or any(h < 1 for h in self.hidden_dims):
            raise DataError("hidden_dims must be a non-empty tuple of positive sizes")
        if not 0.0 <= self.dropout < 1.0:
            raise DataError("dropout must lie in [0, 1)")
        if self.l2 < 0:
            raise DataError("l2 must be nonnegative")
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be positive")
        if self.batch_size < 1 or self.max_epochs < 0:
            raise DataError("batch_size must be >= 1 and max_epochs >= 0")

    @property
    def model_input_dim(self) -> int:
        return self.input_dim + (1 if self.use_dcs else 0)

    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.model_input_dim, *self.hidden_dims, N_CLASSES]
        return list(zip(dims[:-1], dims[1:]))

    def parameter_count(self) -> int:
        return sum(m * n + n for m, n in self.layer_dims())

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_dims": list(self.hidden_dims),
            "use_dcs": self.use_dcs,
            "dropout": self.dropout,
            "l2": self.l2,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvverConfig":
        return cls(
            input_dim=int(d["input_dim"]),
            hidden_dims=tuple(d["hidden_dims"]),
            use_dcs=bool(d["use_dcs"]),
            dropout=float(d["dropout"]),
            l2=float(d["l2"]),
            learning_rate=float(d["learning_rate"]),
            batch_size=int(d["batch_size"]),
            max_epochs=int(d["max_epochs"]),
            seed=int(d["seed"]),
        )


@dataclass
class EvverModel:
    config: EvverConfig
    layers: list  # [(W: in x out, b: out)]
    training_metrics: list = field(default_factory=list)

    @property
    def dtype(self):
        return self.layers[0][0].dtype

    def squared_weight_sum(self) -> float:
        return float(sum(np.sum(W.astype(np.float64) ** 2) for W, _ in self.layers))


def init_model(config: EvverConfig, rng: Optional[np.random.Generator] = None,
               dtype=np.float32) -> EvverModel:
    """Glorot-normal weights, zero biases, drawn in layer order from ``rng``."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    layers = []
    for fan_in, fan_out in config.layer_dims():
        std = np.sqrt(2.0 / (fan_in + fan_out))
        W = (rng.standard_normal((fan_in, fan_out)) * std).astype(dtype)
        b = np.zeros(fan_out, dtype=dtype)
        layers.append((W, b))
    return EvverModel(config=config, layers=layers)


def _assemble_input(config: EvverConfig, features: np.ndarray,
                    dcs: Optional[np.ndarray], dtype) -> np.ndarray:
    features = np.atleast_2d(np.asarray(features, dtype=dtype))
    if features.shape[1] != config.input_dim:
        raise DimensionError(
            f"feature dim {features.shape[1]} does not match config input_dim {config.input_dim}"
        )
    if config.use_dcs:
        if dcs is None:
            raise DimensionError("model was trained with a credibility score; none supplied")
        dcs = np.asarray(dcs, dtype=dtype).reshape(-1)
        if dcs.shape[0] != features.shape[0]:
            raise DimensionError(f"{features.shape[0]} feature rows but {dcs.shape[0]} scores")
        if np.any(dcs < 0) or np.any(dcs > 1):
            raise DataError("credibility scores must lie in [0, 1]")
        return np.concatenate([features, dcs[:, None]], axis=1)
    if dcs is not None:
        raise DimensionError("model was trained without credibility scores; got one")
    return features


def _forward(layers: Sequence, X: np.ndarray, dropout: float = 0.0,
             rng: Optional[np.random.Generator] = None):
    """Returns (probs, cache); dropout masks are drawn only when training
    (rng given and dropout > 0)."""
    pre: list[np.ndarray] = []
    acts: list[np.ndarray] = [X]
    masks: list[Optional[np.ndarray]] = []
    a = X
    for W, b in layers[:-1]:
        z = a @ W + b
        h = gelu(z)
        if rng is not None and dropout > 0.0:
            mask = (rng.random(h.shape) >= dropout).astype(h.dtype) / (1.0 - dropout)
            h = h * mask
        else:
            mask = None
        pre.append(z)
        masks.append(mask)
        acts.append(h)
        a = h
    W_out, b_out = layers[-1]
    logits = a @ W_out + b_out
    return logits, (pre, acts, masks)


def _loss_and_grads(layers: Sequence, X: np.ndarray, y: np.ndarray, l2: float,
                    dropout: float = 0.0, rng: Optional[np.random.Generator] = None):
    """Mean cross-entropy + l2 * sum(W^2), with analytic gradients."""
    n = X.shape[0]
    logits, (pre, acts, masks) = _forward(layers, X, dropout=dropout, rng=rng)
    logp = log_softmax(logits)
    loss = -float(np.mean(logp[np.arange(n), y]))
    if l2 > 0:
        loss += l2 * float(sum(np.sum(W * W) for W, _ in layers))

    probs = np.exp(logp)
    dlogits = probs
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n

    grads: list = [None] * len(layers)
    W_out, _ = layers[-1]
    dW = acts[-1].T @ dlogits
    if l2 > 0:
        dW = dW + 2.0 * l2 * W_out
    grads[-1] = (dW, dlogits.sum(axis=0))
    da = dlogits @ W_out.T

    for i in range(len(layers) - 2, -1, -1):
        if masks[i] is not None:
            da = da * masks[i]
        dz = da * gelu_grad(pre[i])
        W_i, _ = layers[i]
        dW = acts[i].T @ dz
        if l2 > 0:
            dW = dW + 2.0 * l2 * W_i
        grads[i] = (dW, dz.sum(axis=0))
        if i > 0:
            da = dz @ W_i.T
    return loss, grads


def forward(model: EvverModel, features: np.ndarray, dcs=None) -> np.ndarray:
    """Inference probabilities (dropout off). Accepts one vector or a batch;
    rows always sum to 1."""
    single = np.asarray(features).ndim == 1
    dcs_arr = None
    if dcs is not None:
        dcs_arr = np.asarray(dcs, dtype=model.dtype)
        if dcs_arr.ndim == 0:
            dcs_arr = dcs_arr.reshape(1)
    X = _assemble_input(model.config, features, dcs_arr, model.dtype)
    logits, _ = _forward(model.layers, X)
    probs = softmax(logits)
    return probs[0] if single else probs


class _Adam:
    def __init__(self, layers: Sequence, lr: float):
        self.lr = lr
        self.t = 0
        self.m = [(np.zeros_like(W), np.zeros_like(b)) for W, b in layers]
        self.v = [(np.zeros_like(W), np.zeros_like(b)) for W, b in layers]

    def step(self, layers: list, grads: Sequence) -> None:
        self.t += 1
        bc1 = 1.0 - ADAM_BETA1**self.t
        bc2 = 1.0 - ADAM_BETA2**self.t
        for i, ((W, b), (gW, gb)) in enumerate(zip(layers, grads)):
            mW, mb = self.m[i]
            vW, vb = self.v[i]
            mW[:] = ADAM_BETA1 * mW + (1 - ADAM_BETA1) * gW
            mb[:] = ADAM_BETA1 * mb + (1 - ADAM_BETA1) * gb
            vW[:] = ADAM_BETA2 * vW + (1 - ADAM_BETA2) * (gW * gW)
            vb[:] = ADAM_BETA2 * vb + (1 - ADAM_BETA2) * (gb * gb)
            W -= self.lr * (mW / bc1) / (np.sqrt(vW / bc2) + ADAM_EPS)
            b -= self.lr * (mb / bc1) / (np.sqrt(vb / bc2) + ADAM_EPS)


def train(
    features: np.ndarray,
    labels: np.ndarray,
    config: EvverConfig,
    dcs: Optional[np.ndarray] = None,
    validation: Optional[tuple] = None,
    dtype=np.float32,
) -> EvverModel:
    """Train a model; deterministic under (seed, config, data).

    ``validation`` is an optional (features, labels[, dcs]) tuple; when
    given, the returned parameters are the best-validation-accuracy epoch's.
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise DataError("training set is empty")
    if not np.isin(labels, (0, 1, 2)).all():
        raise DataError("labels must be 0, 1 or 2")
    labels = labels.astype(np.int64)

    X = _assemble_input(config, features, dcs, dtype)
    n = X.shape[0]

    rng = np.random.default_rng(config.seed)
    model = init_model(config, rng=rng, dtype=dtype)

    val_X = val_y = None
    if validation is not None:
        vf, vy = validation[0], np.asarray(validation[1], dtype=np.int64)
        vdcs = validation[2] if len(validation) > 2 else None
        val_X = _assemble_input(config, vf, vdcs, dtype)
        val_y = vy

    opt = _Adam(model.layers, config.learning_rate)
    best_acc = -1.0
    best_layers = None

    for epoch in range(config.max_epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        epoch_hits = 0
        for batch_no, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            loss, grads = _loss_and_grads(
                model.layers, X[idx], labels[idx], config.l2,
                dropout=config.dropout, rng=rng,
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"loss became {loss} at epoch {epoch} batch {batch_no}",
                    epoch=epoch, batch=batch_no,
                )
            opt.step(model.layers, grads)
            epoch_loss += loss * len(idx)
            logits, _ = _forward(model.layers, X[idx])
            epoch_hits += int((logits.argmax(axis=1) == labels[idx]).sum())

        metrics = {
            "epoch": epoch,
            "loss": epoch_loss / n,
            "accuracy": epoch_hits / n,
        }
        if val_X is not None:
            logits, _ = _forward(model.layers, val_X)
            val_acc = float((logits.argmax(axis=1) == val_y).mean())
            metrics["validation_accuracy"] = val_acc
            if val_acc > best_acc:
                best_acc = val_acc
                best_layers = [(W.copy(), b.copy()) for W, b in model.layers]
        model.training_metrics.append(metrics)

    if best_layers is not None:
        model.layers = best_layers
    return model


def predict(model: EvverModel, features: np.ndarray, dcs=None) -> np.ndarray:
    probs = forward(model, features, dcs)
    return np.atleast_2d(probs).argmax(axis=1)


def evaluate(model: EvverModel, features: np.ndarray, labels: np.ndarray, dcs=None) -> dict:
    """Accuracy, per-class precision/recall/F1 and the 3x3 confusion matrix
    (rows = truth, columns = prediction; argmax ties go to the lowest code)."""
    labels = np.asarray(labels, dtype=np.int64)
    preds = predict(model, features, dcs)
    return classification_report(labels, preds)


def classification_report(labels: np.ndarray, preds: np.ndarray) -> dict:
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for t, p in zip(labels, preds):
        confusion[t, p] += 1
    total = confusion.sum()
    accuracy = float(np.trace(confusion) / total) if total else 0.0
    per_class = {}
    for c, name in enumerate(("fact_checked", "credible", "unreliable")):
        tp = confusion[c, c]
        col = confusion[:, c].sum()
        row = confusion[c, :].sum()
        precision = float(tp / col) if col else 0.0
        recall = float(tp / row) if row else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[name] = {"precision": precision, "recall": recall, "f1": f1}
    return {
        "accuracy": accuracy,
        "per_class": per_class,
        "confusion_matrix": confusion.tolist(),
        "count": int(total),
    }


def grad_check(
    config: EvverConfig,
    sample_count: int = 5,
    tolerance: float = 1e-4,
    step: float = 1e-5,
    seed: int = 0,
) -> dict:
    """Compare analytic gradients to central finite differences for every
    parameter of a randomly initialized model on random float64 data.

    Dropout is forced off: finite differences need a deterministic loss.
    Relative error uses max(|analytic|, |numeric|, 1e-6) as denominator so
    near-zero pairs do not divide into noise.
    """
    cfg = replace(config, dropout=0.0)
    rng = np.random.default_rng(seed)
    model = init_model(cfg, rng=rng, dtype=np.float64)
    X = rng.standard_normal((sample_count, cfg.model_input_dim))
    y = rng.integers(0, N_CLASSES, size=sample_count)

    _, grads = _loss_and_grads(model.layers, X, y, cfg.l2)

    def loss_at() -> float:
        loss, _ = _loss_and_grads(model.layers, X, y, cfg.l2)
        return loss

    max_rel = 0.0
    checked = 0
    for li, (W, b) in enumerate(model.layers):
        for arr, g in ((W, grads[li][0]), (b, grads[li][1])):
            flat = arr.reshape(-1)
            gflat = np.asarray(g).reshape(-1)
            for k in range(flat.size):
                orig = flat[k]
                flat[k] = orig + step
                up = loss_at()
                flat[k] = orig - step
                down = loss_at()
                flat[k] = orig
                numeric = (up - down) / (2 * step)
                denom = max(abs(gflat[k]), abs(numeric), 1e-6)
                max_rel = max(max_rel, abs(gflat[k] - numeric) / denom)
                checked += 1
    return {
        "max_relative_error": max_rel,
        "parameters_checked": checked,
        "tolerance": tolerance,
        "passed": bool(max_rel < tolerance),
    }


def _stratified_folds(labels: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Deal each class's shuffled indices round-robin; every fold must see
    every class."""
    labels = np.asarray(labels)
    assignments: list[list[int]] = [[] for _ in range(folds)]
    for c in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == c)
        if len(idx) < folds:
            raise DataError(
                f"class {c} has {len(idx)} samples; cannot stratify into {folds} folds"
            )
        rng = np.random.default_rng([seed, int(c)])
        idx = idx[rng.permutation(len(idx))]
        for f in range(folds):
            assignments[f].extend(idx[f::folds].tolist())
    return [np.array(sorted(a)) for a in assignments]


def cross_validate(
    features: np.ndarray,
    labels: np.ndarray,
    config: EvverConfig,
    folds: int = 3,
    seed: int = 42,
    dcs: Optional[np.ndarray] = None,
) -> dict:
    """Stratified k-fold accuracy; deterministic under seed."""
    features = np.asarray(features)
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) < folds:
        raise DataError("dataset smaller than fold count")
    fold_idx = _stratified_folds(labels, folds, seed)
    accuracies = []
    for f, held in enumerate(fold_idx):
        train_mask = np.ones(len(labels), dtype=bool)
        train_mask[held] = False
        model = train(
            features[train_mask], labels[train_mask], config,
            dcs=dcs[train_mask] if dcs is not None else None,
        )
        report = evaluate(
            model, features[held], labels[held],
            dcs=dcs[held] if dcs is not None else None,
        )
        accuracies.append(report["accuracy"])
    return {
        "fold_accuracies": accuracies,
        "mean_accuracy": float(np.mean(accuracies)),
        "std_accuracy": float(np.std(accuracies)),
        "folds": folds,
    }


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter grid. ``hidden_sizes`` entries may be ints (expanded
    to each layer count) or explicit per-layer tuples (used as given)."""

    hidden_sizes: tuple = (512, 1024)
    layer_counts: tuple = (1, 2, 3)
    learning_rates: tuple = (1e-3, 5e-4, 1e-4, 5e-5)
    batch_sizes: tuple = (512, 1024, 2048)
    dropouts: tuple = (0.1, 0.2, 0.25)
    l2s: tuple = (0.0, 1e-2, 1e-3)

    def __post_init__(self):
        for name in ("hidden_sizes", "layer_counts", "learning_rates",
                     "batch_sizes", "dropouts", "l2s"):
            if not getattr(self, name):
                raise DataError(f"grid field {name} must be non-empty")

    def hidden_dim_options(self) -> list[tuple]:
        options = []
        for h in self.hidden_sizes:
            if isinstance(h, (tuple, list)):
                options.append(tuple(int(x) for x in h))
            else:
                options.extend(tuple([int(h)] * l) for l in self.layer_counts)
        return options

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        kwargs = {}
        for name in ("hidden_sizes", "layer_counts", "learning_rates",
                     "batch_sizes", "dropouts", "l2s"):
            if name in d:
                kwargs[name] = tuple(
                    tuple(v) if isinstance(v, list) else v for v in d[name]
                )
        return cls(**kwargs)


def enumerate_grid(
    grid: GridSpec, input_dim: int, use_dcs: bool = False,
    max_epochs: int = 50, seed: int = 42, batch_cap: Optional[int] = None,
) -> list[EvverConfig]:
    configs = []
    for dims, lr, b, d, r in itertools.product(
        grid.hidden_dim_options(), grid.learning_rates, grid.batch_sizes,
        grid.dropouts, grid.l2s,
    ):
        configs.append(EvverConfig(
            input_dim=input_dim, hidden_dims=dims, use_dcs=use_dcs,
            dropout=d, l2=r, learning_rate=lr,
            batch_size=min(b, batch_cap) if batch_cap else b,
            max_epochs=max_epochs, seed=seed,
        ))
    return configs


def _score_config(args) -> tuple:
    features, labels, dcs, config, folds, seed = args
    cv = cross_validate(features, labels, config, folds=folds, seed=seed, dcs=dcs)
    return config, cv


def grid_search(
    features: np.ndarray,
    labels: np.ndarray,
    grid: GridSpec,
    seed: int = 42,
    dcs: Optional[np.ndarray] = None,
    folds: int = 3,
    max_epochs: int = 50,
    workers: int = 1,
) -> list[dict]:
    """Score every grid combination by cross-validated accuracy and rank:
    higher mean first, ties to fewer parameters, then lower learning rate."""
    features = np.asarray(features)
    labels = np.asarray(labels, dtype=np.int64)
    configs = enumerate_grid(
        grid, input_dim=features.shape[1], use_dcs=dcs is not None,
        max_epochs=max_epochs, seed=seed,
    )
    jobs = [(features, labels, dcs, cfg, folds, seed) for cfg in configs]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(_score_config, jobs))
    else:
        scored = [_score_config(j) for j in jobs]

    results = [
        {
            "config": cfg,
            "mean_accuracy": cv["mean_accuracy"],
            "std_accuracy": cv["std_accuracy"],
            "fold_accuracies": cv["fold_accuracies"],
            "parameter_count": cfg.parameter_count(),
        }
        for cfg, cv in scored
    ]
    results.sort(key=lambda r: (-r["mean_accuracy"], r["parameter_count"],
                                r["config"].learning_rate))
    return results


def save_model(model: EvverModel, path) -> None:
    """Versioned binary: magic, version, header length, sha256 of payload,
    then a JSON header and the raw little-endian parameter blob."""
    header = {
        "config": model.config.to_dict(),
        "dtype": np.dtype(model.dtype).str,
        "shapes": [[list(W.shape), list(b.shape)] for W, b in model.layers],
        "training_metrics": model.training_metrics,
    }
    header_bytes = json.dumps(header).encode("utf-8")
    blob = b"".join(
        np.ascontiguousarray(a).astype(a.dtype.newbyteorder("<"), copy=False).tobytes()
        for W, b in model.layers for a in (W, b)
    )
    payload = struct.pack("<I", len(header_bytes)) + header_bytes + blob
    digest = hashlib.sha256(payload).digest()
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", MODEL_VERSION))
        fh.write(digest)
        fh.write(payload)


def load_model(path) -> EvverModel:
    raw = open(path, "rb").read()
    if raw[:4] != MODEL_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}, expected {MODEL_MAGIC!r}")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != MODEL_VERSION:
        raise FormatError(f"{path}: unsupported model version {version}")
    digest = raw[8:40]
    payload = raw[40:]
    if hashlib.sha256(payload).digest() != digest:
        raise FormatError(f"{path}: checksum mismatch; file is corrupted")
    (header_len,) = struct.unpack_from("<I", payload, 0)
    header = json.loads(payload[4:4 + header_len].decode("utf-8"))
    config = EvverConfig.from_dict(header["config"])
    dtype = np.dtype(header["dtype"])

    blob = payload[4 + header_len:]
    offset = 0
    layers = []
    for w_shape, b_shape in header["shapes"]:
        w_size = int(np.prod(w_shape)) * dtype.itemsize
        W = np.frombuffer(blob, dtype=dtype, count=int(np.prod(w_shape)),
                          offset=offset).reshape(w_shape).copy()
        offset += w_size
        b = np.frombuffer(blob, dtype=dtype, count=int(np.prod(b_shape)),
                          offset=offset).reshape(b_shape).copy()
        offset += int(np.prod(b_shape)) * dtype.itemsize
        layers.append((W, b))
    if offset != len(blob):
        raise FormatError(f"{path}: parameter blob is {len(blob)} bytes, expected {offset}")
    return EvverModel(config=config, layers=layers,
                      training_metrics=header.get("training_metrics", []))
