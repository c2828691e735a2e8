"""Two-layer MLP, manual backprop through propagation, Adam training loop.

The architecture is decoupled: H = relu(X W0 + b0) W1 + b1 runs once, then
a parameter-free propagation maps H to Z and the softmax cross-entropy is
read off the labeled rows.  Because the propagation map P is symmetric (a
rational function of the symmetric normalized adjacency), the gradient
pullback P^T G is computed by re-applying the forward propagation to G.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ConfigError, DatasetError, ShapeError, TrainingDiverged
from .graphs import NormalizedOperators, normalize
from .linalg import as_dense
from .propagation import Mode, Model, PropagationConfig, propagate

__all__ = [
    "MlpParams",
    "TrainConfig",
    "Metrics",
    "init_params",
    "dropout_mask",
    "forward",
    "loss_and_grad",
    "train",
    "accuracy",
]


def _default_propagation() -> PropagationConfig:
    return PropagationConfig(Model.GNN_LF, Mode.ITER, alpha=0.1, mu=0.5, depth=10)


@dataclass
class MlpParams:
    w0: np.ndarray
    b0: np.ndarray
    w1: np.ndarray
    b1: np.ndarray

    def copy(self) -> "MlpParams":
        return MlpParams(
            self.w0.copy(), self.b0.copy(), self.w1.copy(), self.b1.copy()
        )


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 64
    lr: float = 0.01
    weight_decay_first_layer: float = 5e-3
    dropout: float = 0.5
    patience: int = 100
    max_epochs: int = 1500
    seed: int = 0
    propagation: PropagationConfig = field(default_factory=_default_propagation)

    def __post_init__(self):
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.hidden < 1:
            raise ConfigError(f"hidden must be >= 1, got {self.hidden}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.weight_decay_first_layer < 0:
            raise ConfigError("weight_decay_first_layer must be >= 0")


@dataclass
class Metrics:
    train_loss: list
    val_loss: list
    val_accuracy: float
    test_accuracy: float
    best_epoch: int


def init_params(num_features, hidden, num_classes, rng) -> MlpParams:
    """Seeded uniform fan-scaled init; biases start at zero."""
    def glorot(fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return MlpParams(
        w0=glorot(num_features, hidden),
        b0=np.zeros(hidden),
        w1=glorot(hidden, num_classes),
        b1=np.zeros(num_classes),
    )


def dropout_mask(rng, shape, rate: float):
    """Inverted-dropout mask: kept entries pre-scaled by 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)


def _forward_parts(params: MlpParams, x: np.ndarray, mask):
    pre = x @ params.w0 + params.b0
    hidden = np.maximum(pre, 0.0)
    if mask is not None:
        if mask.shape != hidden.shape:
            raise ShapeError(
                f"dropout mask shape {mask.shape} != hidden shape {hidden.shape}"
            )
        hidden = hidden * mask
    return pre, hidden, hidden @ params.w1 + params.b1


def forward(params: MlpParams, x, mask=None) -> np.ndarray:
    """H = relu(x W0 + b0) W1 + b1, with optional pre-scaled dropout mask
    on the hidden activation."""
    x = as_dense(x, "x")
    if x.shape[1] != params.w0.shape[0]:
        raise ShapeError(
            f"x has {x.shape[1]} columns, w0 expects {params.w0.shape[0]}"
        )
    return _forward_parts(params, x, mask)[2]


def _cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean softmax cross-entropy and the gradient wrt logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    total = exp.sum(axis=1, keepdims=True)
    log_prob = shifted - np.log(total)
    rows = np.arange(len(labels))
    loss = -float(log_prob[rows, labels].mean())
    grad = exp / total
    grad[rows, labels] -= 1.0
    return loss, grad / len(labels)


def loss_and_grad(params, ds: Dataset, cfg: TrainConfig, ops=None, mask=None):
    """Training loss and analytic gradients for every parameter.

    loss = mean CE over train rows of Z = propagate(forward(X)) plus
    weight_decay_first_layer * ||W0||_F^2.  The propagation pullback reuses
    ``propagate`` itself on the output gradient.
    """
    if len(ds.splits["train"]) == 0:
        raise DatasetError("train split is empty")
    if ops is None:
        ops = normalize(ds.graph)
    x = ds.features
    pre, hidden, h = _forward_parts(params, x, mask)
    z = propagate(cfg.propagation, ops, h)
    train_idx = np.asarray(ds.splits["train"], dtype=np.intp)
    ce, grad_logits = _cross_entropy(z[train_idx], ds.labels[train_idx])
    wd = cfg.weight_decay_first_layer
    loss = ce + wd * float(np.sum(params.w0 * params.w0))

    g_z = np.zeros_like(z)
    g_z[train_idx] = grad_logits
    g_h = propagate(cfg.propagation, ops, g_z)

    grad_w1 = hidden.T @ g_h
    grad_b1 = g_h.sum(axis=0)
    g_hidden = g_h @ params.w1.T
    if mask is not None:
        g_hidden = g_hidden * mask
    g_pre = g_hidden * (pre > 0)
    grad_w0 = x.T @ g_pre + 2.0 * wd * params.w0
    grad_b0 = g_pre.sum(axis=0)
    return loss, MlpParams(grad_w0, grad_b0, grad_w1, grad_b1)


def _evaluate(params, ds, cfg, ops):
    h = _forward_parts(params, ds.features, None)[2]
    return propagate(cfg.propagation, ops, h)


def accuracy(z, labels, indices) -> float:
    """Fraction of argmax predictions matching labels over ``indices``.
    Ties go to the lowest class index."""
    idx = np.asarray(indices, dtype=np.intp)
    if idx.size == 0:
        raise DatasetError("empty index list")
    preds = np.argmax(np.asarray(z)[idx], axis=1)
    return float(np.mean(preds == np.asarray(labels)[idx]))


def train(ds: Dataset, cfg: TrainConfig):
    """Full-batch Adam with early stopping on validation cross-entropy.

    Two child generators are split off the seed, one for the init and one
    for the per-epoch dropout masks, so changing max_epochs never alters
    the initial weights.  The best-validation parameters are restored
    before the final evaluation (dropout off).  Strictly-better comparison
    means a constant validation loss stops at epoch patience+1 with
    best_epoch=1.

    Returns (MlpParams, Metrics).  Raises TrainingDiverged on a non-finite
    training loss and DatasetError on an empty split.
    """
    for key in ("train", "val", "test"):
        if len(ds.splits[key]) == 0:
            raise DatasetError(f"{key} split is empty")
    ops = normalize(ds.graph)
    init_seq, drop_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    rng_init = np.random.default_rng(init_seq)
    rng_drop = np.random.default_rng(drop_seq)
    params = init_params(ds.num_features, cfg.hidden, ds.num_classes, rng_init)

    adam_m = MlpParams(*(np.zeros_like(p) for p in _fields(params)))
    adam_v = MlpParams(*(np.zeros_like(p) for p in _fields(params)))
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    val_idx = np.asarray(ds.splits["val"], dtype=np.intp)
    best_val = np.inf
    best_params = params.copy()
    best_epoch = 0
    train_losses, val_losses = [], []
    since_best = 0

    n = ds.num_nodes
    for epoch in range(1, cfg.max_epochs + 1):
        mask = (
            dropout_mask(rng_drop, (n, cfg.hidden), cfg.dropout)
            if cfg.dropout > 0.0
            else None
        )
        loss, grads = loss_and_grad(params, ds, cfg, ops, mask)
        if not np.isfinite(loss):
            raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
        train_losses.append(loss)

        t = epoch
        for p, g, m, v in zip(
            _fields(params), _fields(grads), _fields(adam_m), _fields(adam_v)
        ):
            m *= beta1
            m += (1 - beta1) * g
            v *= beta2
            v += (1 - beta2) * (g * g)
            m_hat = m / (1 - beta1 ** t)
            v_hat = v / (1 - beta2 ** t)
            p -= cfg.lr * m_hat / (np.sqrt(v_hat) + eps)

        z = _evaluate(params, ds, cfg, ops)
        val_ce, _ = _cross_entropy(z[val_idx], ds.labels[val_idx])
        val_losses.append(val_ce)
        if val_ce < best_val:
            best_val = val_ce
            best_epoch = epoch
            best_params = params.copy()
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                break

    z = _evaluate(best_params, ds, cfg, ops)
    metrics = Metrics(
        train_loss=train_losses,
        val_loss=val_losses,
        val_accuracy=accuracy(z, ds.labels, ds.splits["val"]),
        test_accuracy=accuracy(z, ds.labels, ds.splits["test"]),
        best_epoch=best_epoch,
    )
    return best_params, metrics


def _fields(p: MlpParams):
    return (p.w0, p.b0, p.w1, p.b1)
