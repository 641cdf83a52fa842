import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from radpipe.distembed import (
    MultiquantileModel,
    TrainingConfig,
    batch_loss_and_grads,
    pinball_grad,
    pinball_loss,
    quantile_grid,
    train,
)
from radpipe.ecdf import CohortKey
from radpipe.errors import ConfigError, DivergenceError


def _toy_model(n_cohorts=3, k=5, seed=0):
    return MultiquantileModel(
        list(range(n_cohorts)), k_breakpoints=k, embed_dim=4, hidden=(8, 8), seed=seed
    )


class TestPinball:
    def test_quantile_grid(self):
        assert np.array_equal(quantile_grid(4), [0.2, 0.4, 0.6, 0.8])

    def test_loss_hand_value(self):
        # K=1, tau=0.5: loss is half the absolute error
        assert pinball_loss(np.array([3.0]), 5.0) == pytest.approx(1.0)
        assert pinball_loss(np.array([7.0]), 5.0) == pytest.approx(1.0)

    def test_loss_minimized_at_the_target_quantile(self):
        rng = np.random.default_rng(0)
        y = rng.exponential(1.0, 4000)
        tau_grid = quantile_grid(3)
        optimal = np.quantile(y, tau_grid)
        base = np.mean([pinball_loss(optimal, yi) for yi in y])
        for shift in (-0.3, 0.3):
            shifted = np.mean([pinball_loss(optimal + shift, yi) for yi in y])
            assert shifted > base

    def test_grad_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        b = np.sort(rng.uniform(0, 10, (6, 4)), axis=1)
        y = rng.uniform(0, 10, 6)
        g = pinball_grad(b, y)
        eps = 1e-6
        for i in range(6):
            for k in range(4):
                hi = b.copy()
                hi[i, k] += eps
                lo = b.copy()
                lo[i, k] -= eps
                num = (pinball_loss(hi[i], y[i]) - pinball_loss(lo[i], y[i])) / (2 * eps)
                assert g[i, k] == pytest.approx(num, abs=1e-9)


class TestMultiquantileModel:
    @given(st.integers(0, 2**31 - 1), st.integers(1, 50))
    def test_breakpoints_strictly_increasing_and_positive(self, seed, k):
        model = MultiquantileModel([0, 1], k_breakpoints=k, embed_dim=4,
                                   hidden=(8,), seed=seed)
        for cohort in (0, 1):
            b = model.breakpoints(cohort)
            assert b[0] > 0
            assert np.all(np.diff(b) > 0)

    def test_unknown_cohort_raises(self):
        with pytest.raises(ConfigError):
            _toy_model().breakpoints(99)

    def test_quantile_of_learned_grid_rule(self):
        model = _toy_model(k=4)
        b = model.breakpoints(0)
        # below the first breakpoint -> k=1 -> 1/(K+1)
        assert model.quantile_of_learned(0, b[0] - 1e-9) == pytest.approx(1 / 5)
        assert model.quantile_of_learned(0, b[2]) == pytest.approx(3 / 5)
        # above every breakpoint clamps below 1
        assert model.quantile_of_learned(0, b[-1] + 1.0) == pytest.approx(1 - 1 / 10)

    def test_quantile_of_learned_literal_rule(self):
        model = _toy_model(k=4)
        b = model.breakpoints(0)
        assert model.quantile_of_learned(0, b[1], rule="literal") == pytest.approx(2 / 4 )
        with pytest.raises(ConfigError):
            model.quantile_of_learned(0, 1.0, rule="nope")

    def test_quantile_of_learned_interpolated_monotone(self):
        model = _toy_model(k=10)
        s = np.linspace(0.0, float(model.breakpoints(0)[-1]) * 1.2, 50)
        q = model.quantile_of_learned(0, s, interpolate=True)
        assert np.all(np.diff(q) >= 0)
        assert np.all((q > 0) & (q < 1))

    def test_save_load_round_trip(self, tmp_path):
        keys = [CohortKey("user_x_durationbin", 3, 1), CohortKey("video", 5)]
        model = MultiquantileModel(keys, k_breakpoints=6, embed_dim=4,
                                   hidden=(8,), seed=2)
        path = tmp_path / "model.npz"
        model.save(path)
        loaded = MultiquantileModel.load(path)
        assert loaded.cohorts == keys
        for key in keys:
            assert np.array_equal(loaded.breakpoints(key), model.breakpoints(key))

    def test_invalid_k(self):
        with pytest.raises(ConfigError):
            MultiquantileModel([0], k_breakpoints=0)


class TestTraining:
    def test_config_validation(self):
        with pytest.raises(ConfigError):
            TrainingConfig(learning_rate=0.0)
        with pytest.raises(ConfigError):
            TrainingConfig(max_epochs=0)

    def test_batch_grads_match_finite_differences(self):
        from gradcheck import numeric_grads, relative_error

        rng = np.random.default_rng(3)
        model = _toy_model()
        rows = rng.integers(0, 3, 12)
        y = rng.uniform(0.5, 5.0, 12)
        _, analytic = batch_loss_and_grads(model, rows, y)
        numeric = numeric_grads(
            lambda: batch_loss_and_grads(model, rows, y)[0], model.params
        )
        assert relative_error(analytic, numeric) < 1e-5

    def test_training_reduces_loss_toward_quantiles(self):
        rng = np.random.default_rng(4)
        groups = {c: rng.normal(5.0 + c, 1.0, 400) for c in range(3)}
        model = _toy_model(k=9, seed=5)
        cfg = TrainingConfig(learning_rate=0.02, max_epochs=150,
                             early_stop_patience=150, batch_size=256, seed=6)
        result = train(model, groups, cfg)
        assert result.train_curve[-1] < 0.5 * result.train_curve[0]
        for c in range(3):
            b = model.breakpoints(c)
            target = np.quantile(groups[c], quantile_grid(9))
            assert np.mean(np.abs(b - target)) < 0.5

    def test_early_stopping_restores_best(self):
        rng = np.random.default_rng(7)
        groups = {0: rng.normal(3.0, 1.0, 200)}
        val = {0: rng.normal(3.0, 1.0, 200)}
        model = _toy_model(n_cohorts=1, seed=8)
        cfg = TrainingConfig(learning_rate=0.05, max_epochs=200,
                             early_stop_patience=3, batch_size=64, seed=9)
        result = train(model, groups, cfg, val)
        assert len(result.val_curve) < 200
        assert result.best_epoch <= len(result.val_curve) - 1

    def test_divergence_raises(self):
        rng = np.random.default_rng(10)
        groups = {0: rng.normal(3.0, 1.0, 100)}
        model = _toy_model(n_cohorts=1, seed=11)
        cfg = TrainingConfig(learning_rate=500.0, max_epochs=50,
                             early_stop_patience=50, batch_size=32, seed=12,
                             divergence_factor=2.0)
        with pytest.raises(DivergenceError):
            train(model, groups, cfg)
