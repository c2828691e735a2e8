"""Estimator wrappers with the scikit-learn parameter protocol.

Both classes store constructor arguments verbatim and validate them in
``fit``, so ``get_params``/``set_params`` and ``clone`` behave as sklearn
expects.  They are thin adapters: the math lives in ``propagation`` and
``nn``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .data import Dataset
from .errors import ConfigError
from .graphs import Graph, NormalizedOperators, normalize
from .nn import TrainConfig, accuracy, forward, train
from .propagation import Mode, Model, PropagationConfig, propagate

__all__ = ["GraphPropagator", "GnnNodeClassifier"]


def _coerce(enum_cls, value, what):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(value)
    except ValueError:
        valid = ", ".join(m.value for m in enum_cls)
        raise ConfigError(f"unknown {what} {value!r}; expected one of: {valid}") from None


class GraphPropagator(BaseEstimator):
    """Parameter-free propagation as a fit/transform pair.

    ``fit`` takes the graph (a Graph or precomputed NormalizedOperators)
    and freezes the validated propagation config; ``transform`` maps a
    feature matrix through the propagation operator.  There is deliberately
    no ``fit_transform(graph)`` convenience: the fit input is a graph while
    the transform input is a feature matrix.
    """

    def __init__(self, model="gnn-lf", mode="iter", alpha=0.1, mu=0.5,
                 beta=1.0, xi=None, depth=10, gc_exact=False,
                 allow_boundary=False):
        self.model = model
        self.mode = mode
        self.alpha = alpha
        self.mu = mu
        self.beta = beta
        self.xi = xi
        self.depth = depth
        self.gc_exact = gc_exact
        self.allow_boundary = allow_boundary

    def _config(self) -> PropagationConfig:
        return PropagationConfig(
            model=_coerce(Model, self.model, "model"),
            mode=_coerce(Mode, self.mode, "mode"),
            alpha=self.alpha,
            mu=self.mu,
            beta=self.beta,
            xi=self.xi,
            depth=self.depth,
            gc_exact=self.gc_exact,
            allow_boundary=self.allow_boundary,
        )

    def fit(self, graph, y=None):
        if isinstance(graph, NormalizedOperators):
            ops = graph
        elif isinstance(graph, Graph):
            ops = normalize(graph)
        else:
            raise ConfigError("fit expects a Graph or NormalizedOperators")
        self.config_ = self._config()
        self.ops_ = ops
        return self

    def transform(self, h) -> np.ndarray:
        if not hasattr(self, "ops_"):
            raise NotFittedError("call fit with a graph first")
        return propagate(self.config_, self.ops_, h)


class GnnNodeClassifier(BaseEstimator):
    """Transductive node classifier: decoupled MLP + propagation.

    ``fit`` takes a Dataset (graph, features, labels, splits) and trains
    with early stopping on the validation split; predictions cover every
    node of the fitted graph.  ``score`` reports accuracy on a named split.
    """

    def __init__(self, model="gnn-lf", mode="iter", alpha=0.1, mu=0.5,
                 beta=1.0, xi=None, depth=10, hidden=64, lr=0.01,
                 weight_decay_first_layer=5e-3, dropout=0.5, patience=100,
                 max_epochs=1500, seed=0):
        self.model = model
        self.mode = mode
        self.alpha = alpha
        self.mu = mu
        self.beta = beta
        self.xi = xi
        self.depth = depth
        self.hidden = hidden
        self.lr = lr
        self.weight_decay_first_layer = weight_decay_first_layer
        self.dropout = dropout
        self.patience = patience
        self.max_epochs = max_epochs
        self.seed = seed

    def _train_config(self) -> TrainConfig:
        prop = PropagationConfig(
            model=_coerce(Model, self.model, "model"),
            mode=_coerce(Mode, self.mode, "mode"),
            alpha=self.alpha,
            mu=self.mu,
            beta=self.beta,
            xi=self.xi,
            depth=self.depth,
        )
        return TrainConfig(
            hidden=self.hidden,
            lr=self.lr,
            weight_decay_first_layer=self.weight_decay_first_layer,
            dropout=self.dropout,
            patience=self.patience,
            max_epochs=self.max_epochs,
            seed=self.seed,
            propagation=prop,
        )

    def fit(self, dataset: Dataset, y=None):
        cfg = self._train_config()
        self.params_, self.metrics_ = train(dataset, cfg)
        self.dataset_ = dataset
        self.config_ = cfg
        ops = normalize(dataset.graph)
        h = forward(self.params_, dataset.features)
        self.scores_ = propagate(cfg.propagation, ops, h)
        return self

    def _check_fitted(self):
        if not hasattr(self, "scores_"):
            raise NotFittedError("call fit with a dataset first")

    def predict(self) -> np.ndarray:
        """Predicted class per node of the fitted graph."""
        self._check_fitted()
        return np.argmax(self.scores_, axis=1)

    def predict_proba(self) -> np.ndarray:
        self._check_fitted()
        shifted = self.scores_ - self.scores_.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        return exp / exp.sum(axis=1, keepdims=True)

    def score(self, split: str = "test") -> float:
        self._check_fitted()
        if split not in self.dataset_.splits:
            raise ConfigError(f"unknown split {split!r}")
        return accuracy(
            self.scores_, self.dataset_.labels, self.dataset_.splits[split]
        )
