"""Feature extraction, standardization, config plumbing, and the training loop."""

import numpy as np
import pytest

from staytime import (
    ConfigurationError,
    ObservationSequence,
    SurvivalDataset,
    SurvivalLabel,
    ValidationError,
)
from staytime.training import (
    STATIC_QUANTILES,
    Standardizer,
    TrainConfig,
    hyper_search,
    split_validation,
    static_features,
    train_model,
)


def toy_dataset(n=40, m=6, d=2, seed=7, censor_rate=0.25):
    """Small synthetic survival set: target grows with total stay time."""
    rng = np.random.default_rng(seed)
    seqs, labels = [], []
    for i in range(n):
        obs = rng.uniform(-1.0, 1.0, size=(m, d))
        dur = rng.uniform(0.1, 1.0, size=m)
        seqs.append(ObservationSequence(obs, durations=dur, record_id=f"t{i}"))
        y = float(dur.sum() + 0.05 * rng.standard_normal() + 1.0)
        labels.append(SurvivalLabel(y, bool(rng.random() < censor_rate)))
    return SurvivalDataset(seqs, labels)


class TestStaticFeatures:
    def test_quantile_worked_example(self):
        # obs column [1,2,3,4] at q=0.25 interpolates to 1.75; q=0.5 to 2.5
        seq = ObservationSequence(
            np.array([[1.0], [2.0], [3.0], [4.0]]), durations=np.ones(4)
        )
        feats = static_features(seq)
        # layout: per column, [mean, std, q10, q25, q50, q75, q90]
        assert feats.shape == (14,)
        assert feats[0] == 2.5  # mean
        assert feats[1] == pytest.approx(np.sqrt(1.25))  # population std
        assert feats[3] == 1.75
        assert feats[4] == 2.5

    def test_matches_numpy_reference_per_column(self):
        rng = np.random.default_rng(11)
        obs = rng.normal(size=(9, 3))
        dur = rng.uniform(0.2, 2.0, size=9)
        seq = ObservationSequence(obs, durations=dur)
        feats = static_features(seq)
        cols = np.column_stack([obs, dur])
        expected = []
        for j in range(4):
            col = cols[:, j]
            expected.extend(
                [col.mean(), col.std()]
                + [np.quantile(col, q) for q in STATIC_QUANTILES]
            )
        np.testing.assert_allclose(feats, expected, rtol=1e-14)

    def test_width_scales_with_dimension(self):
        for d in (1, 2, 5):
            seq = ObservationSequence(
                np.zeros((3, d)), durations=np.ones(3)
            )
            assert static_features(seq).shape == (7 * (d + 1),)

    def test_single_observation_sequence(self):
        seq = ObservationSequence(np.array([[2.0, -1.0]]), durations=np.array([0.5]))
        feats = static_features(seq)
        # every quantile of a singleton equals the value itself, std is 0
        np.testing.assert_allclose(
            feats, [2.0, 0.0] + [2.0] * 5 + [-1.0, 0.0] + [-1.0] * 5 + [0.5, 0.0] + [0.5] * 5
        )


class TestStandardizer:
    def test_transform_centers_and_scales(self):
        rng = np.random.default_rng(4)
        X = rng.normal(3.0, 2.0, size=(200, 3))
        std = Standardizer.fit(X)
        Z = std.transform(X)
        np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(Z.std(axis=0), 1.0, rtol=1e-12)

    def test_constant_column_maps_to_zero(self):
        X = np.column_stack([np.full(10, 7.0), np.arange(10.0)])
        std = Standardizer.fit(X)
        Z = std.transform(X)
        np.testing.assert_array_equal(Z[:, 0], np.zeros(10))

    def test_binary_columns_skipped_when_asked(self):
        rng = np.random.default_rng(5)
        X = np.column_stack([rng.integers(0, 2, 50).astype(float), rng.normal(size=50)])
        std = Standardizer.fit(X, skip_binary=True)
        Z = std.transform(X)
        np.testing.assert_array_equal(Z[:, 0], X[:, 0])
        assert abs(Z[:, 1].mean()) < 1e-12

    def test_identity(self):
        X = np.arange(6.0).reshape(3, 2)
        np.testing.assert_array_equal(Standardizer.identity(2).transform(X), X)


class TestTrainConfig:
    def test_roundtrip_through_dict(self):
        cfg = TrainConfig(model="ctr-k", loss="combined", seed=3, gamma=0.5)
        again = TrainConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigurationError):
            TrainConfig.from_dict({"model": "ctr-d", "bogus": 1})

    def test_unknown_model_rejected(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(model="ctr-x")

    def test_combined_loss_standardizes_by_default(self):
        assert TrainConfig(model="ctr-d", loss="combined").wants_standardize
        assert not TrainConfig(model="ctr-d", loss="squared").wants_standardize
        assert TrainConfig(model="ctr-d", loss="squared", standardize=True).wants_standardize

    def test_trainable_decay_must_start_below_one(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(model="ctr-d", decay_init=1.0, decay_trainable=True)
        TrainConfig(model="ctr-d", decay_init=1.0, decay_trainable=False)


class TestSplitValidation:
    def test_partition_covers_everything_once(self):
        rng = np.random.default_rng(0)
        censored = np.array([False] * 30 + [True] * 10)
        tr, va = split_validation(40, censored, 0.2, rng)
        assert len(set(tr) | set(va)) == 40
        assert len(set(tr) & set(va)) == 0

    def test_stratified_split_keeps_censor_share(self):
        rng = np.random.default_rng(1)
        censored = np.array([False] * 80 + [True] * 20)
        tr, va = split_validation(100, censored, 0.2, rng, stratify=True)
        assert censored[va].sum() == 4
        assert len(va) == 20

    def test_degenerate_split_rejected(self):
        rng = np.random.default_rng(2)
        with pytest.raises(ValidationError):
            split_validation(3, np.zeros(3, bool), 0.01, rng)


def tiny_config(model, **kw):
    base = dict(
        model=model,
        seed=0,
        epochs=8,
        batch_size=16,
        segments=3,
        value_range=(-1.0, 1.0),
        n_bases=8,
        n_states=6,
        f_hidden=(8,),
        g_hidden=(8,),
        dropout=0.0,
        patience=4,
    )
    base.update(kw)
    return TrainConfig(**base)


class TestTrainModel:
    @pytest.mark.parametrize("model", ["ctr-d", "ctr-k", "ctr-n", "static"])
    def test_smoke_all_model_kinds(self, model):
        data = toy_dataset()
        trained = train_model(data, tiny_config(model))
        preds = trained.predict(data)
        assert preds.shape == (40,)
        assert np.all(np.isfinite(preds))
        assert len(trained.history) >= 1

    @pytest.mark.parametrize("model", ["ctr-d", "ctr-n"])
    def test_same_seed_is_bitwise_identical(self, model):
        data = toy_dataset()
        cfg = tiny_config(model)
        p1 = train_model(data, cfg).predict(data)
        p2 = train_model(data, cfg).predict(data)
        np.testing.assert_array_equal(p1, p2)

    def test_different_seed_changes_fit(self):
        data = toy_dataset()
        p1 = train_model(data, tiny_config("ctr-d", seed=0)).predict(data)
        p2 = train_model(data, tiny_config("ctr-d", seed=1)).predict(data)
        assert not np.array_equal(p1, p2)

    def test_training_reduces_squared_loss(self):
        data = toy_dataset(censor_rate=0.0)
        cfg = tiny_config("ctr-d", epochs=60, patience=60, decay_trainable=False)
        trained = train_model(data, cfg)
        losses = [h["train_loss"] for h in trained.history]
        assert losses[-1] < losses[0]

    def test_combined_loss_runs_with_censoring(self):
        data = toy_dataset(censor_rate=0.3)
        trained = train_model(data, tiny_config("ctr-d", loss="combined"))
        assert np.all(np.isfinite(trained.predict(data)))

    def test_trainable_decay_moves_from_init(self):
        data = toy_dataset(censor_rate=0.0)
        cfg = tiny_config("ctr-d", epochs=40, patience=40, decay_init=0.9)
        trained = train_model(data, cfg)
        assert trained.decay.trainable
        assert trained.decay.value != pytest.approx(0.9, abs=1e-12)
        assert 0.0 < trained.decay.value < 1.0

    def test_fixed_decay_stays_put(self):
        data = toy_dataset()
        cfg = tiny_config("ctr-d", decay_trainable=False, decay_init=1.0)
        trained = train_model(data, cfg)
        assert trained.decay.value == 1.0

    def test_early_stopping_restores_best_epoch(self):
        data = toy_dataset()
        cfg = tiny_config("ctr-d", epochs=30, patience=3)
        trained = train_model(data, cfg)
        best = max(h["val_score"] for h in trained.history)
        assert trained.best_val_score == best

    def test_unlabeled_dataset_rejected(self):
        data = toy_dataset()
        bare = SurvivalDataset(data.sequences, None)
        with pytest.raises(ValidationError):
            train_model(bare, tiny_config("ctr-d"))


class TestHyperSearch:
    def test_kernel_grid_tries_every_gamma(self):
        data = toy_dataset(n=30)
        cfg = tiny_config("ctr-k", gamma_grid=(0.1, 1.0), epochs=4)
        result = hyper_search(data, cfg)
        tried = [c["gamma"] for c, _ in result.candidates]
        assert tried == [0.1, 1.0]
        assert result.best_config.gamma in (0.1, 1.0)

    def test_single_candidate_for_grid_free_models(self):
        data = toy_dataset(n=30)
        result = hyper_search(data, tiny_config("ctr-d", epochs=4))
        assert len(result.candidates) == 1

    def test_best_score_is_max_of_candidates(self):
        data = toy_dataset(n=30)
        cfg = tiny_config("ctr-k", gamma_grid=(0.01, 1.0, 100.0), epochs=4)
        result = hyper_search(data, cfg)
        scores = [s for _, s in result.candidates]
        assert max(scores) == pytest.approx(
            result.best_model.best_val_score, abs=0
        )
