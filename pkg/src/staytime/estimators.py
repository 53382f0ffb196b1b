"""Estimator-style wrappers around the functional core.

These follow the scikit-learn calling conventions (constructor stores
parameters verbatim, fit validates and learns, get_params/set_params expose
the constructor surface) so the models drop into sklearn-flavored tooling,
without taking scikit-learn on as a dependency.  Inputs stay domain-typed:
a labeled SurvivalDataset, or a list of ObservationSequence plus label arrays.
"""

from __future__ import annotations

import inspect

import numpy as np

from .errors import ConfigurationError, ValidationError
from .evaluation import c_index
from .representation import compute_ctr_batch
from .sequences import ObservationSequence, SurvivalDataset, SurvivalLabel
from .states import (
    DiscreteStateFunction,
    KernelBasisSet,
    KernelStateFunction,
    build_grid,
    sample_bases,
)
from .training import TrainConfig, train_model


class ParamsMixin:
    """get_params/set_params over the constructor signature, sklearn-style."""

    @classmethod
    def _param_names(cls) -> list:
        sig = inspect.signature(cls.__init__)
        return [
            name for name, p in sig.parameters.items()
            if name != "self" and p.kind is p.POSITIONAL_OR_KEYWORD
        ]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ConfigurationError(
                    f"invalid parameter {key!r} for {type(self).__name__}"
                )
            setattr(self, key, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


def _sequences_of(X) -> list:
    if isinstance(X, SurvivalDataset):
        return X.sequences
    seqs = list(X)
    if not seqs or not isinstance(seqs[0], ObservationSequence):
        raise ValidationError(
            "X must be a SurvivalDataset or a list of ObservationSequence"
        )
    return seqs


def _as_labeled_dataset(X, y=None, censored=None) -> SurvivalDataset:
    if isinstance(X, SurvivalDataset) and y is None:
        X.require_labels()
        return X
    seqs = _sequences_of(X)
    if y is None:
        raise ValidationError("y (event times) is required when X carries no labels")
    y = np.asarray(y, dtype=float)
    if len(y) != len(seqs):
        raise ValidationError(f"{len(seqs)} records but {len(y)} labels")
    if censored is None:
        censored = np.zeros(len(seqs), dtype=bool)
    censored = np.asarray(censored, dtype=bool)
    labels = [SurvivalLabel(float(t), bool(c)) for t, c in zip(y, censored)]
    return SurvivalDataset(seqs, labels)


class CtrFeaturizer(ParamsMixin):
    """Transformer from observation sequences to cumulative stay-time vectors.

    kind "grid" partitions a box into one-hot cells; kind "kernel" uses
    normalized radial-basis weights around points sampled from the fit data.
    fit learns the state function, transform maps records to (N, K) rows.
    """

    def __init__(self, kind: str = "grid", segments: int = 5,
                 value_range=(-1.0, 1.0), clamp: bool = False,
                 n_bases: int = 100, gamma: float = 1.0, decay: float = 1.0,
                 normalize: bool = False, random_state: int = 0):
        self.kind = kind
        self.segments = segments
        self.value_range = value_range
        self.clamp = clamp
        self.n_bases = n_bases
        self.gamma = gamma
        self.decay = decay
        self.normalize = normalize
        self.random_state = random_state

    def fit(self, X, y=None):
        seqs = _sequences_of(X)
        pooled = np.concatenate([s.observations for s in seqs], axis=0)
        n_dims = pooled.shape[1]
        if self.kind == "grid":
            if self.value_range is None:
                ranges = tuple(
                    (float(pooled[:, j].min()), float(pooled[:, j].max()))
                    for j in range(n_dims)
                )
                grid = build_grid(ranges, self.segments)
                self.state_ = DiscreteStateFunction(grid, clamp=True)
            else:
                grid = build_grid(self.value_range, self.segments, n_dims=n_dims)
                self.state_ = DiscreteStateFunction(grid, clamp=self.clamp)
        elif self.kind == "kernel":
            rng = np.random.default_rng(self.random_state)
            bases = sample_bases(pooled, self.n_bases, rng)
            self.state_ = KernelStateFunction(KernelBasisSet(bases, gamma=self.gamma))
        else:
            raise ConfigurationError(f"unknown featurizer kind {self.kind!r}")
        self.n_states_ = self.state_.n_states
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "state_"):
            raise ValidationError("this featurizer is not fitted; call fit first")
        seqs = _sequences_of(X)
        return compute_ctr_batch(seqs, self.state_, decay=self.decay,
                                 normalize=self.normalize)

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X, y).transform(X)


class StayTimeRegressor(ParamsMixin):
    """Survival-time regressor over stay-time features, estimator-style.

    Constructor parameters mirror TrainConfig one for one; fit accepts a
    labeled SurvivalDataset, or sequences plus event times (and an optional
    censoring mask).  score returns the concordance index, so higher is
    better and 0.5 is chance.
    """

    def __init__(self, model: str = "ctr-d", loss: str = "squared",
                 seed: int = 0, epochs: int = 200, batch_size: int = 64,
                 learning_rate: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, adam_eps: float = 1e-8,
                 decay_init: float = 0.999, decay_trainable: bool = True,
                 segments=5, value_range=(-1.0, 1.0), n_bases: int = 100,
                 gamma: float = 1.0, gamma_grid=(0.01, 0.1, 1.0, 10.0, 100.0),
                 n_states: int = 100, f_hidden=(100,), g_hidden=(100, 100),
                 dropout: float = 0.5, batchnorm: bool = True,
                 patience: int = 20, val_fraction: float = 0.2,
                 standardize=None, normalize_ctr: bool = False):
        self.model = model
        self.loss = loss
        self.seed = seed
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.decay_init = decay_init
        self.decay_trainable = decay_trainable
        self.segments = segments
        self.value_range = value_range
        self.n_bases = n_bases
        self.gamma = gamma
        self.gamma_grid = gamma_grid
        self.n_states = n_states
        self.f_hidden = f_hidden
        self.g_hidden = g_hidden
        self.dropout = dropout
        self.batchnorm = batchnorm
        self.patience = patience
        self.val_fraction = val_fraction
        self.standardize = standardize
        self.normalize_ctr = normalize_ctr

    def _config(self) -> TrainConfig:
        return TrainConfig(**self.get_params())

    def fit(self, X, y=None, censored=None):
        dataset = _as_labeled_dataset(X, y, censored)
        self.model_ = train_model(dataset, self._config())
        self.best_epoch_ = self.model_.best_epoch
        self.best_val_score_ = self.model_.best_val_score
        return self

    def _require_fitted(self):
        if not hasattr(self, "model_"):
            raise ValidationError("this estimator is not fitted; call fit first")

    def predict(self, X) -> np.ndarray:
        self._require_fitted()
        return self.model_.predict(_sequences_of(X))

    def score(self, X, y=None, censored=None) -> float:
        self._require_fitted()
        dataset = _as_labeled_dataset(X, y, censored)
        preds = self.model_.predict(dataset.sequences)
        return c_index(preds, dataset.event_times(), dataset.censor_mask())
