"""Losses, configuration, and gradient training of the survival regressor.

The predictor f is a small MLP reading either a cumulative stay-time vector
(discrete, kernel, or neural state function) or a static summary-feature
vector.  Everything trainable, including the state network g of the neural
variant and the decay factor, is updated jointly by Adam: the chain rule runs
from the loss through f's input gradient into the stay-time weights.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConfigurationError,
    DivergenceError,
    UndefinedResultError,
    ValidationError,
)
from .nn import AdamState, Mlp, adam_step, grad_check, log_sigmoid
from .representation import DecayParameter, decay_exponents, sigmoid, stay_times
from .sequences import SurvivalDataset
from .states import (
    DiscreteStateFunction,
    KernelBasisSet,
    KernelStateFunction,
    NeuralStateFunction,
    StateFunction,
    build_grid,
    sample_bases,
)

MODEL_KINDS = ("ctr-d", "ctr-k", "ctr-n", "static")
LOSS_KINDS = ("squared", "combined")
STATIC_QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


def squared_loss(preds, times):
    """Mean squared error over the minibatch and its gradient in preds."""
    preds = np.asarray(preds, dtype=float)
    times = np.asarray(times, dtype=float)
    if preds.shape != times.shape:
        raise ValidationError("predictions and times disagree on shape")
    diff = preds - times
    loss = float(np.mean(diff**2))
    return loss, 2.0 * diff / preds.shape[0]


def admissible_pairs(times, censored):
    """Index pairs (n, l) with times[n] < times[l] and n uncensored.

    These are the pairs whose ordering a survival model can be scored on:
    the event of n was observed, and l is known to have lasted longer
    (whether or not l's own event was observed).
    """
    times = np.asarray(times, dtype=float)
    censored = np.asarray(censored, dtype=bool)
    earlier = times[:, None] < times[None, :]
    earlier &= ~censored[:, None]
    return np.nonzero(earlier)


def combined_loss(preds, times, censored):
    """Squared loss over uncensored records plus a pairwise ranking penalty.

    The ranking term averages -ln sigmoid(pred_l - pred_n) over admissible
    pairs, so a pair predicted in the wrong order (earlier event scored
    higher) is penalized and a tied pair costs exactly ln 2.  Batches with no
    admissible pairs contribute a ranking term of zero.  Returns
    (loss, grad); callers can count zero-pair batches via admissible_pairs.
    """
    preds = np.asarray(preds, dtype=float)
    times = np.asarray(times, dtype=float)
    censored = np.asarray(censored, dtype=bool)
    grad = np.zeros_like(preds)
    unc = ~censored
    n_unc = int(unc.sum())
    if n_unc:
        diff = preds[unc] - times[unc]
        loss = float(np.mean(diff**2))
        grad[unc] = 2.0 * diff / n_unc
    else:
        loss = 0.0
    idx_n, idx_l = admissible_pairs(times, censored)
    if idx_n.size:
        margins = preds[idx_l] - preds[idx_n]
        loss += float(np.mean(-log_sigmoid(margins)))
        # d/dm of -ln sigmoid(m) is sigmoid(m) - 1
        pair_grad = (sigmoid(margins) - 1.0) / idx_n.size
        np.add.at(grad, idx_l, pair_grad)
        np.add.at(grad, idx_n, -pair_grad)
    return loss, grad


def static_features(seq) -> np.ndarray:
    """Per-column summary of the M x (D+1) matrix of observations plus stay times.

    Each column yields mean, population std, and the {0.1, 0.25, 0.5, 0.75,
    0.9} quantiles (linear interpolation), giving 7 * (D + 1) features.
    """
    cols = np.column_stack([seq.observations, stay_times(seq, 1.0)])
    feats = np.empty((cols.shape[1], 2 + len(STATIC_QUANTILES)))
    feats[:, 0] = cols.mean(axis=0)
    feats[:, 1] = cols.std(axis=0)
    feats[:, 2:] = np.quantile(cols, STATIC_QUANTILES, axis=0).T
    return feats.ravel()


def static_features_batch(sequences) -> np.ndarray:
    return np.stack([static_features(s) for s in sequences])


@dataclass
class Standardizer:
    """Column-wise z-normalization with statistics frozen at fit time."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, rows: np.ndarray, skip_binary: bool = False) -> "Standardizer":
        rows = np.asarray(rows, dtype=float)
        mean = rows.mean(axis=0)
        scale = rows.std(axis=0)
        scale[scale == 0.0] = 1.0
        if skip_binary:
            binary = np.array(
                [set(np.unique(rows[:, j])) <= {0.0, 1.0} for j in range(rows.shape[1])]
            )
            mean[binary] = 0.0
            scale[binary] = 1.0
        return cls(mean, scale)

    @classmethod
    def identity(cls, n: int) -> "Standardizer":
        return cls(np.zeros(n), np.ones(n))

    def transform(self, rows: np.ndarray) -> np.ndarray:
        return (np.asarray(rows, dtype=float) - self.mean) / self.scale


@dataclass(frozen=True)
class TrainConfig:
    """Everything that determines a training run, including the seed."""

    model: str
    loss: str = "squared"
    seed: int = 0
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    decay_init: float = 0.999
    decay_trainable: bool = True
    segments: int | tuple = 5
    value_range: tuple | None = (-1.0, 1.0)
    n_bases: int = 100
    gamma: float = 1.0
    gamma_grid: tuple = (0.01, 0.1, 1.0, 10.0, 100.0)
    n_states: int = 100
    f_hidden: tuple = (100,)
    g_hidden: tuple = (100, 100)
    dropout: float = 0.5
    batchnorm: bool = True
    patience: int = 20
    val_fraction: float = 0.2
    standardize: bool | None = None
    normalize_ctr: bool = False

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ConfigurationError(f"unknown model kind {self.model!r}")
        if self.loss not in LOSS_KINDS:
            raise ConfigurationError(f"unknown loss kind {self.loss!r}")
        if self.epochs < 1:
            raise ConfigurationError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be at least 1")
        if self.loss == "combined" and self.batch_size < 2:
            raise ConfigurationError("the combined loss needs batches of at least 2")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigurationError("val_fraction must lie strictly between 0 and 1")
        if self.patience < 0:
            raise ConfigurationError("patience must be nonnegative")
        if not 0.0 < self.decay_init <= 1.0:
            raise ConfigurationError("decay_init must lie in (0, 1]")
        if self.decay_trainable and self.decay_init >= 1.0:
            raise ConfigurationError("a trainable decay must start strictly below 1")
        if self.gamma <= 0:
            raise ConfigurationError("gamma must be positive")
        if self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be positive")
        for name in ("gamma_grid", "f_hidden", "g_hidden"):
            v = getattr(self, name)
            if isinstance(v, list):
                object.__setattr__(self, name, tuple(v))
        if isinstance(self.segments, list):
            object.__setattr__(self, "segments", tuple(self.segments))
        if isinstance(self.value_range, list):
            object.__setattr__(self, "value_range", tuple(self.value_range))

    @property
    def wants_standardize(self) -> bool:
        if self.standardize is None:
            return self.loss == "combined"
        return bool(self.standardize)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = list(v)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


@dataclass
class TrainedModel:
    """A trained predictor plus everything needed to featurize new records."""

    config: TrainConfig
    predictor: Mlp
    state: StateFunction | None
    decay: DecayParameter | None
    obs_standardizer: Standardizer | None
    dem_standardizer: Standardizer | None
    static_standardizer: Standardizer | None
    history: list
    best_epoch: int
    best_val_score: float
    pairless_batches: int = 0

    def _prep_obs(self, X: np.ndarray) -> np.ndarray:
        if self.obs_standardizer is None:
            return X
        return self.obs_standardizer.transform(X)

    def _demographics(self, sequences) -> np.ndarray | None:
        if sequences[0].demographics is None:
            return None
        dem = np.stack([s.demographics for s in sequences])
        if self.dem_standardizer is not None:
            dem = self.dem_standardizer.transform(dem)
        return dem

    def features(self, X) -> np.ndarray:
        """The matrix fed to the predictor for the given records."""
        sequences = X.sequences if isinstance(X, SurvivalDataset) else list(X)
        if self.config.model == "static":
            feats = static_features_batch(sequences)
            if self.static_standardizer is not None:
                feats = self.static_standardizer.transform(feats)
            return feats
        lam = self.decay.value
        rows = []
        for seq in sequences:
            W = self.state.weights_matrix(self._prep_obs(seq.observations))
            d = stay_times(seq, lam)
            z = d @ W
            if self.config.normalize_ctr:
                z = z / d.sum()
            rows.append(z)
        Z = np.stack(rows)
        dem = self._demographics(sequences)
        if dem is not None:
            Z = np.concatenate([Z, dem], axis=1)
        return Z

    def predict(self, X) -> np.ndarray:
        """Predicted event time for each record (eval mode, deterministic)."""
        return self.predictor.forward(self.features(X))[:, 0]


def split_validation(n: int, censored, fraction: float, rng, stratify: bool = True):
    """Shuffled train/validation index split, optionally stratified by censoring."""
    censored = np.asarray(censored, dtype=bool)
    if stratify and censored.any() and (~censored).any():
        strata = [np.flatnonzero(censored), np.flatnonzero(~censored)]
    else:
        strata = [np.arange(n)]
    val_parts, train_parts = [], []
    for s in strata:
        s = s[rng.permutation(len(s))]
        n_val = int(round(fraction * len(s)))
        val_parts.append(s[:n_val])
        train_parts.append(s[n_val:])
    val_idx = np.concatenate(val_parts)
    train_idx = np.concatenate(train_parts)
    if len(val_idx) == 0 or len(train_idx) == 0:
        raise ValidationError(
            f"validation split is degenerate: {len(train_idx)} train / {len(val_idx)} val"
        )
    return np.sort(train_idx), np.sort(val_idx)


class _RecordCache:
    """Per-record quantities that stay fixed across training steps."""

    def __init__(self, sequences, prep, state_kind, grid=None, basis=None,
                 clamp=False):
        self.base = [s.gaps() for s in sequences]
        self.expo = [decay_exponents(s) for s in sequences]
        self.rows = [prep(s.observations) for s in sequences]
        self.counts = np.array([s.n_observations for s in sequences])
        if state_kind == "ctr-d":
            self.weight_rows = [grid.one_hot(r, clamp=clamp) for r in self.rows]
        elif state_kind == "ctr-k":
            self.weight_rows = [basis.weights(r) for r in self.rows]
        else:
            self.weight_rows = None  # neural: recomputed every step

    def gather(self, indices):
        base = np.concatenate([self.base[i] for i in indices])
        expo = np.concatenate([self.expo[i] for i in indices])
        rows = np.concatenate([self.rows[i] for i in indices])
        counts = self.counts[indices]
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        W = None
        if self.weight_rows is not None:
            W = np.concatenate([self.weight_rows[i] for i in indices])
        return base, expo, rows, counts, starts, W


def _segment_sum(values, starts):
    return np.add.reduceat(values, starts, axis=0)


def _require_finite(x, context):
    arr = np.asarray(x)
    if not np.all(np.isfinite(arr)):
        raise DivergenceError(f"non-finite value in {context}")


@dataclass
class _Components:
    """Everything one configured model needs for a forward/backward pass.

    Built once per training run and shared verbatim by the gradient checker,
    so the checked code path is the trained code path.
    """

    config: TrainConfig
    times: np.ndarray
    censored: np.ndarray
    train_idx: np.ndarray
    val_idx: np.ndarray
    f: Mlp
    gnet: Mlp | None
    state: StateFunction | None
    decay: DecayParameter | None
    dem: np.ndarray | None
    feats_all: np.ndarray | None
    obs_std: Standardizer | None
    dem_std: Standardizer | None
    static_std: Standardizer | None
    train_cache: _RecordCache | None
    val_cache: _RecordCache | None
    rng_shuffle: np.random.Generator
    rng_dropout: np.random.Generator

    def params(self) -> dict:
        p = {f"f/{k}": v for k, v in self.f.params().items()}
        if self.gnet is not None:
            p.update({f"g/{k}": v for k, v in self.gnet.params().items()})
        if self.decay is not None and self.decay.trainable:
            p["decay/raw"] = self.decay.raw
        return p

    def assemble(self, cache, local_idx, global_idx, mode, rng,
                 update_stats=None):
        """Predictor input for a batch plus what the backward pass needs."""
        config = self.config
        if config.model == "static":
            return self.feats_all[global_idx], None
        base, expo, rows, counts, starts, W = cache.gather(local_idx)
        lam = self.decay.value
        u = base * lam**expo
        gcache = None
        if config.model == "ctr-n":
            if mode == "train":
                W, gcache = self.gnet.forward(
                    rows, mode="train", rng=rng, want_cache=True,
                    update_stats=update_stats,
                )
            else:
                W = self.gnet.forward(rows)
        Z = _segment_sum(u[:, None] * W, starts)
        totals = None
        if config.normalize_ctr:
            totals = _segment_sum(u, starts)
            Z = Z / totals[:, None]
        aux = {
            "u": u, "expo": expo, "W": W, "starts": starts, "counts": counts,
            "gcache": gcache, "totals": totals, "Z": Z,
        }
        X = Z
        if self.dem is not None:
            X = np.concatenate([Z, self.dem[global_idx]], axis=1)
        return X, aux

    def ctr_backward(self, gz, aux):
        """Gradients of the loss through z into g and the decay raw value."""
        config = self.config
        decay = self.decay
        out = {}
        u, expo, W, starts, counts = (
            aux["u"], aux["expo"], aux["W"], aux["starts"], aux["counts"],
        )
        gz_eff = gz
        if config.normalize_ctr:
            gz_eff = gz / aux["totals"][:, None]
        gz_rows = np.repeat(gz_eff, counts, axis=0)
        if config.model == "ctr-n":
            gW = gz_rows * u[:, None]
            ggrads, _ = self.gnet.backward(gW, aux["gcache"])
            out["g"] = ggrads
        if decay.trainable:
            lam = decay.value
            s_rows = np.sum(gz_rows * W, axis=1)
            dldlam = float(np.sum(s_rows * u * expo) / lam)
            if config.normalize_ctr:
                # the totals also move with the decay value
                dtot = _segment_sum(u * expo, starts) / lam
                z_dot = np.sum(gz_eff * aux["Z"], axis=1)
                dldlam -= float(np.sum(z_dot * dtot))
            out["decay"] = np.array([dldlam * decay.value_grad()])
        return out

    def batch_loss_and_grads(self, cache, local_idx, global_idx, rng,
                             update_stats=None):
        """Train-mode forward and backward over one batch; gradients are
        keyed exactly like params()."""
        config = self.config
        X, aux = self.assemble(cache, local_idx, global_idx, "train", rng,
                               update_stats=update_stats)
        out, fcache = self.f.forward(X, mode="train", rng=rng,
                                     want_cache=True, update_stats=update_stats)
        preds = out[:, 0]
        t = self.times[global_idx]
        if config.loss == "squared":
            loss, dpred = squared_loss(preds, t)
        else:
            loss, dpred = combined_loss(preds, t, self.censored[global_idx])
        fgrads, dX = self.f.backward(dpred[:, None], fcache)
        grads = {f"f/{k}": v for k, v in fgrads.items()}
        if config.model != "static":
            extra = self.ctr_backward(dX[:, : aux["Z"].shape[1]], aux)
            if "g" in extra:
                grads.update({f"g/{k}": v for k, v in extra["g"].items()})
            if "decay" in extra:
                grads["decay/raw"] = extra["decay"]
        return loss, grads

    def predict_validation(self) -> np.ndarray:
        X, _ = self.assemble(self.val_cache, np.arange(len(self.val_idx)),
                             self.val_idx, "eval", None)
        return self.f.forward(X)[:, 0]


def _build_components(dataset: SurvivalDataset, config: TrainConfig) -> _Components:
    """Split the data, fit preprocessing on the training side only, and build
    the state function and networks for one model."""
    dataset.require_labels()
    times = dataset.event_times()
    censored = dataset.censor_mask()
    n = len(dataset)

    ss = np.random.SeedSequence(config.seed)
    rng_split, rng_finit, rng_ginit, rng_bases, rng_shuffle, rng_dropout = (
        np.random.default_rng(s) for s in ss.spawn(6)
    )

    stratify = bool(censored.any())
    train_idx, val_idx = split_validation(
        n, censored, config.val_fraction, rng_split, stratify
    )
    train_seqs = [dataset.sequences[i] for i in train_idx]
    val_seqs = [dataset.sequences[i] for i in val_idx]

    standardize = config.wants_standardize
    obs_std = dem_std = static_std = None
    if standardize and config.model != "static":
        pooled = np.concatenate([s.observations for s in train_seqs])
        obs_std = Standardizer.fit(pooled)
    prep = (lambda X: obs_std.transform(X)) if obs_std is not None else (lambda X: X)

    dem = None
    if dataset.n_demographics:
        dem_all = np.stack([s.demographics for s in dataset.sequences])
        if standardize:
            dem_std = Standardizer.fit(dem_all[train_idx], skip_binary=True)
            dem_all = dem_std.transform(dem_all)
        dem = dem_all

    grid = basis = gnet = None
    state: StateFunction | None = None
    decay = None
    feats_all = None
    clamp = False
    if config.model == "static":
        feats_all = static_features_batch(dataset.sequences)
        if standardize:
            static_std = Standardizer.fit(feats_all[train_idx])
            feats_all = static_std.transform(feats_all)
        n_ctr = feats_all.shape[1]
    else:
        decay = DecayParameter(config.decay_init, trainable=config.decay_trainable)
        d_in = dataset.n_features
        if config.model == "ctr-d":
            # a configured range describes raw observations; once they are
            # standardized the grid has to come from the prepped data instead
            if config.value_range is None or standardize:
                pooled = np.concatenate([prep(s.observations) for s in train_seqs])
                ranges = [(pooled[:, j].min(), pooled[:, j].max()) for j in range(d_in)]
                clamp = True  # unseen records may step outside the training range
                grid = build_grid(ranges, config.segments)
            else:
                grid = build_grid(config.value_range, config.segments, n_dims=d_in)
            state = DiscreteStateFunction(grid, clamp=clamp)
        elif config.model == "ctr-k":
            pooled = np.concatenate([prep(s.observations) for s in train_seqs])
            points = sample_bases(pooled, config.n_bases, rng_bases)
            basis = KernelBasisSet(points, gamma=config.gamma)
            state = KernelStateFunction(basis)
        else:
            gnet = Mlp(
                [d_in, *config.g_hidden, config.n_states],
                out_activation="softmax",
                batchnorm=config.batchnorm,
                dropout=config.dropout,
                rng=rng_ginit,
            )
            state = NeuralStateFunction(gnet)
        n_ctr = state.n_states

    n_dem = 0 if dem is None else dem.shape[1]
    f = Mlp(
        [n_ctr + n_dem, *config.f_hidden, 1],
        out_activation="identity",
        batchnorm=config.batchnorm,
        dropout=config.dropout,
        rng=rng_finit,
    )

    if config.model == "static":
        train_cache = val_cache = None
    else:
        train_cache = _RecordCache(
            train_seqs, prep, config.model, grid=grid, basis=basis, clamp=clamp
        )
        val_cache = _RecordCache(
            val_seqs, prep, config.model, grid=grid, basis=basis, clamp=clamp
        )

    return _Components(
        config=config,
        times=times,
        censored=censored,
        train_idx=train_idx,
        val_idx=val_idx,
        f=f,
        gnet=gnet,
        state=state,
        decay=decay,
        dem=dem,
        feats_all=feats_all,
        obs_std=obs_std,
        dem_std=dem_std,
        static_std=static_std,
        train_cache=train_cache,
        val_cache=val_cache,
        rng_shuffle=rng_shuffle,
        rng_dropout=rng_dropout,
    )


def train_model(dataset: SurvivalDataset, config: TrainConfig) -> TrainedModel:
    """Train one model; early-stops on validation C-index and returns the
    parameter snapshot that scored best there."""
    from .evaluation import c_index  # local import to avoid a module cycle

    comp = _build_components(dataset, config)
    config = comp.config
    times, censored = comp.times, comp.censored
    train_idx, val_idx = comp.train_idx, comp.val_idx
    f, gnet, decay = comp.f, comp.gnet, comp.decay

    params = comp.params()
    adam = AdamState(
        lr=config.learning_rate, beta1=config.beta1, beta2=config.beta2,
        eps=config.adam_eps,
    )

    local_order = np.arange(len(train_idx))
    history = []
    best = (-np.inf, -1)
    best_snap = None
    pairless = 0
    for epoch in range(1, config.epochs + 1):
        order = local_order[comp.rng_shuffle.permutation(len(local_order))]
        batch_losses = []
        for start in range(0, len(order), config.batch_size):
            batch_local = order[start : start + config.batch_size]
            batch_global = train_idx[batch_local]
            loss, grads = comp.batch_loss_and_grads(
                comp.train_cache, batch_local, batch_global, comp.rng_dropout
            )
            if config.loss == "combined":
                if admissible_pairs(times[batch_global], censored[batch_global])[0].size == 0:
                    pairless += 1
            _require_finite(loss, f"loss at epoch {epoch}")
            for name, g in grads.items():
                _require_finite(g, f"gradient {name} at epoch {epoch}")
            adam_step(params, grads, adam)
            batch_losses.append(loss)

        val_score = c_index(
            comp.predict_validation(), times[val_idx], censored[val_idx]
        )
        history.append(
            {
                "epoch": epoch,
                "train_loss": float(np.mean(batch_losses)),
                "val_score": float(val_score),
            }
        )
        if val_score > best[0]:
            best = (val_score, epoch)
            best_snap = {
                "f": f.snapshot(),
                "g": None if gnet is None else gnet.snapshot(),
                "decay": None if decay is None else decay.snapshot(),
            }
        if epoch - best[1] >= config.patience and epoch < config.epochs:
            break

    if best_snap is not None:
        f.restore(best_snap["f"])
        if gnet is not None:
            gnet.restore(best_snap["g"])
        if decay is not None:
            decay.restore(best_snap["decay"])

    return TrainedModel(
        config=config,
        predictor=f,
        state=comp.state,
        decay=decay,
        obs_standardizer=comp.obs_std,
        dem_standardizer=comp.dem_std,
        static_standardizer=comp.static_std,
        history=history,
        best_epoch=best[1],
        best_val_score=float(best[0]),
        pairless_batches=pairless,
    )


def gradient_check_model(dataset: SurvivalDataset, config: TrainConfig,
                         eps: float = 1e-5,
                         max_entries: int | None = None) -> dict:
    """Finite-difference check of the production backward pass.

    Runs the same assembly the training loop uses, in deterministic mode:
    dropout forced off, batch-norm on batch statistics with frozen running
    stats.  Returns max relative error per parameter block; blocks cover f,
    and for ctr-n also g and the decay raw value when trainable.
    """
    config = replace(config, dropout=0.0)
    comp = _build_components(dataset, config)
    local = np.arange(min(config.batch_size, len(comp.train_idx)))
    global_idx = comp.train_idx[local]

    def loss_and_grads():
        return comp.batch_loss_and_grads(
            comp.train_cache, local, global_idx, None, update_stats=False
        )

    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xC7EC]))
    return grad_check(comp.params(), loss_and_grads, eps=eps,
                      max_entries=max_entries, rng=rng)


@dataclass
class HyperSearchResult:
    best_config: TrainConfig
    best_model: TrainedModel
    candidates: list  # (overrides, validation score) in grid order


def default_grid(config: TrainConfig) -> list:
    """The exhaustive candidate grid a model kind searches by default."""
    if config.model == "ctr-k":
        return [{"gamma": g} for g in config.gamma_grid]
    return [{}]


def hyper_search(dataset: SurvivalDataset, config: TrainConfig,
                 grid: list | None = None) -> HyperSearchResult:
    """Exhaustive search over candidate overrides, scored by validation C-index.

    Candidates run in grid order with identical seeds, so they share the same
    validation split; ties keep the earliest candidate.
    """
    if grid is None:
        grid = default_grid(config)
    if not grid:
        raise ConfigurationError("hyper_search needs at least one candidate")
    best = None
    candidates = []
    for overrides in grid:
        cfg = replace(config, **overrides)
        model = train_model(dataset, cfg)
        score = model.best_val_score
        candidates.append((dict(overrides), float(score)))
        if best is None or score > best[1]:
            best = (model, score)
    return HyperSearchResult(
        best_config=best[0].config, best_model=best[0], candidates=candidates
    )
