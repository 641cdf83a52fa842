import numpy as np
import pytest

from radpipe.data import InteractionRecord
from radpipe.distembed import TrainingConfig
from radpipe.ecdf import CohortKey, EmpiricalCdf, build_all_cdf_tables, label_records
from radpipe.data import DurationBinner
from radpipe.errors import ConfigError, DivergenceError
from radpipe.preference import (
    LabeledData,
    MlpRegressor,
    build_id_maps,
    combine_uv_quantile,
    combine_uv_watch_time,
    mse_loss_and_grads,
    predict_watch_time,
    prepare,
    raw_prediction_to_watch_time,
    train_regressor,
)

BINNER = DurationBinner(boundaries=np.array([100.0, 200.0]), D=3)


def _records(n=400, seed=0):
    rng = np.random.default_rng(seed)
    return [
        InteractionRecord(
            user_id=int(rng.integers(0, 12)),
            video_id=int(rng.integers(0, 9)),
            watch_time=float(rng.uniform(0, 250)),
            duration=float(rng.uniform(50, 280)),
            timestamp=i,
        )
        for i in range(n)
    ]


def _labeled(records):
    tables = build_all_cdf_tables(records, BINNER)
    return label_records(records, tables, BINNER)


class TestPrepare:
    def test_dense_coding(self):
        records = _records(50)
        labels = _labeled(records)
        ui, vi = build_id_maps(records)
        data = prepare(records, labels, "rad_v", ui, vi)
        assert data.user_rows.max() < len(ui)
        assert np.array_equal(data.targets, labels.q_video)

    def test_raw_log_transform(self):
        records = _records(50)
        labels = _labeled(records)
        ui, vi = build_id_maps(records)
        data = prepare(records, labels, "raw_log", ui, vi)
        assert np.allclose(data.targets, np.log1p(labels.raw))

    def test_unknown_kind(self):
        records = _records(10)
        with pytest.raises(ConfigError):
            prepare(records, _labeled(records), "nope", *build_id_maps(records))


class TestMlpRegressor:
    def test_predict_and_parameter_count(self):
        ui = {10: 0, 20: 1}
        vi = {5: 0}
        model = MlpRegressor(ui, vi, "rad_v", embed_dim=4, hidden=(8,), seed=0)
        out = model.predict([10, 20], [5, 5])
        assert out.shape == (2,)
        emb = 2 * 4 + 1 * 4
        mlp = 8 * 8 + 8 + 8 * 1 + 1
        assert model.parameter_count == emb + mlp

    def test_save_load_round_trip(self, tmp_path):
        model = MlpRegressor({1: 0, 2: 1}, {3: 0, 4: 1}, "pcr",
                             embed_dim=4, hidden=(8,), seed=1)
        path = tmp_path / "model.npz"
        model.save(path)
        loaded = MlpRegressor.load(path)
        assert loaded.label_kind == "pcr"
        assert np.array_equal(
            loaded.predict([1, 2], [3, 4]), model.predict([1, 2], [3, 4])
        )

    def test_unknown_label_kind(self):
        with pytest.raises(ConfigError):
            MlpRegressor({1: 0}, {2: 0}, "nope")

    def test_grads_match_finite_differences(self):
        from gradcheck import numeric_grads, relative_error

        rng = np.random.default_rng(2)
        model = MlpRegressor({i: i for i in range(4)}, {i: i for i in range(3)},
                             "raw", embed_dim=3, hidden=(6,), seed=3)
        data = LabeledData(
            user_rows=rng.integers(0, 4, 10),
            video_rows=rng.integers(0, 3, 10),
            targets=rng.uniform(0, 2, 10),
        )
        _, analytic = mse_loss_and_grads(model, data)
        numeric = numeric_grads(lambda: mse_loss_and_grads(model, data)[0],
                                model.params)
        assert relative_error(analytic, numeric) < 1e-6


class TestTrainRegressor:
    def test_loss_decreases(self):
        records = _records(600, seed=5)
        labels = _labeled(records)
        ui, vi = build_id_maps(records)
        data = prepare(records, labels, "rad_v", ui, vi)
        model = MlpRegressor(ui, vi, "rad_v", embed_dim=8, hidden=(16,), seed=6)
        cfg = TrainingConfig(learning_rate=0.01, max_epochs=40,
                             early_stop_patience=40, batch_size=128, seed=7)
        result = train_regressor(model, data, None, cfg)
        assert result.train_curve[-1] < 0.5 * result.train_curve[0]

    def test_divergence_raises(self):
        records = _records(100, seed=8)
        labels = _labeled(records)
        ui, vi = build_id_maps(records)
        data = prepare(records, labels, "raw", ui, vi)
        model = MlpRegressor(ui, vi, "raw", embed_dim=4, hidden=(8,), seed=9)
        cfg = TrainingConfig(learning_rate=50.0, max_epochs=30,
                             early_stop_patience=30, batch_size=32, seed=10,
                             divergence_factor=2.0)
        with pytest.raises(DivergenceError):
            train_regressor(model, data, None, cfg)


class TestInverseMapping:
    def test_predict_watch_time_uses_cohort_cdf(self):
        cdf = EmpiricalCdf(cohort=CohortKey("video", 1), samples=np.array([0.0, 10.0]))
        assert predict_watch_time(0.5, cdf) == 5.0

    def test_fallback_to_global(self):
        global_cdf = EmpiricalCdf(
            cohort=CohortKey("video", -1), samples=np.array([0.0, 100.0])
        )
        assert predict_watch_time(0.5, None, global_cdf) == 50.0
        with pytest.raises(ConfigError):
            predict_watch_time(0.5, None, None)

    def test_out_of_range_predictions_clamped(self):
        cdf = EmpiricalCdf(cohort=CohortKey("video", 1), samples=np.arange(10.0))
        assert predict_watch_time(1.7, cdf) == predict_watch_time(0.9999, cdf)
        assert predict_watch_time(-0.3, cdf) == predict_watch_time(0.0001, cdf)

    def test_raw_prediction_mapping(self):
        assert raw_prediction_to_watch_time(123.0, "raw") == 123.0
        assert raw_prediction_to_watch_time(np.log1p(50.0), "raw_log") == pytest.approx(50.0)
        assert raw_prediction_to_watch_time(-4.0, "raw") == 0.0
        with pytest.raises(ConfigError):
            raw_prediction_to_watch_time(0.5, "rad_v")


class TestCombining:
    def test_mean_of_sides(self):
        out, fallback = combine_uv_watch_time(10.0, 20.0)
        assert out == 15.0 and fallback is False

    def test_one_sided_flags(self):
        out, fallback = combine_uv_watch_time(pred_u=None, pred_v=7.0)
        assert out == 7.0 and fallback is True
        with pytest.raises(ConfigError):
            combine_uv_watch_time(None, None)

    def test_quantile_fusion_clips_model_outputs(self):
        # out-of-range regressor outputs survive the probit transform
        out = combine_uv_quantile(np.array([1.3, 0.5]), np.array([-0.2, 0.5]))
        assert np.all((out > 0) & (out < 1))
        assert out[1] == pytest.approx(0.5)

    def test_agreeing_quantiles_sharpen(self):
        assert combine_uv_quantile(0.8, 0.8) > 0.8
