import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from radpipe.data import DurationBinner, InteractionRecord
from radpipe.ecdf import (
    CohortKey,
    EmpiricalCdf,
    build_all_cdf_tables,
    build_cdfs,
    cohort_key_for,
    label_records,
)
from radpipe.errors import ConfigError

KEY = CohortKey("video", 1)
BINNER = DurationBinner(boundaries=np.array([100.0, 200.0, 300.0]), D=4)


class TestEmpiricalCdf:
    def test_midrank_with_ties(self):
        cdf = EmpiricalCdf(cohort=KEY, samples=np.array([1.0, 2.0, 2.0, 3.0]))
        assert cdf.quantile_of(2.0) == (1 + 0.5 * 2) / 4
        assert cdf.quantile_of(2.0, tie_rule="leq") == 3 / 4
        assert cdf.quantile_of(2.0, tie_rule="strict") == 1 / 4

    def test_clamps(self):
        cdf = EmpiricalCdf(cohort=KEY, samples=np.array([1.0, 2.0, 3.0, 4.0]))
        assert cdf.quantile_of(-100.0) == 1 / 8
        assert cdf.quantile_of(100.0) == 1 - 1 / 8

    def test_unknown_tie_rule(self):
        cdf = EmpiricalCdf(cohort=KEY, samples=np.array([1.0]))
        with pytest.raises(ConfigError):
            cdf.quantile_of(1.0, tie_rule="nope")

    def test_empty_raises(self):
        with pytest.raises(ConfigError):
            EmpiricalCdf(cohort=KEY, samples=np.array([]))

    def test_unsorted_input_sorted(self):
        cdf = EmpiricalCdf(cohort=KEY, samples=np.array([3.0, 1.0, 2.0]))
        assert np.all(np.diff(cdf.samples) >= 0)

    def test_inverse_quantile_interpolates(self):
        cdf = EmpiricalCdf(cohort=KEY, samples=np.array([0.0, 10.0]))
        # plotting positions 0.25 and 0.75
        assert cdf.inverse_quantile(0.25) == 0.0
        assert cdf.inverse_quantile(0.75) == 10.0
        assert cdf.inverse_quantile(0.5) == 5.0
        assert cdf.inverse_quantile(0.01) == 0.0  # floors at the sample range

    def test_inverse_quantile_domain(self):
        cdf = EmpiricalCdf(cohort=KEY, samples=np.array([1.0, 2.0]))
        with pytest.raises(ConfigError):
            cdf.inverse_quantile(0.0)
        with pytest.raises(ConfigError):
            cdf.inverse_quantile(1.0)

    @given(
        st.lists(st.floats(0, 1e6), min_size=1, max_size=60),
        st.lists(st.floats(-1e5, 1.1e6), min_size=2, max_size=20),
    )
    def test_quantile_monotone_and_bounded(self, samples, queries):
        cdf = EmpiricalCdf(cohort=KEY, samples=np.array(samples))
        q = cdf.quantile_of(np.sort(np.array(queries)))
        assert np.all(np.diff(q) >= 0)
        n = len(samples)
        assert np.all(q >= 1 / (2 * n)) and np.all(q <= 1 - 1 / (2 * n))

    @given(st.lists(st.floats(0, 1e6), min_size=2, max_size=60, unique=True))
    def test_inverse_quantile_monotone(self, samples):
        cdf = EmpiricalCdf(cohort=KEY, samples=np.array(samples))
        grid = np.linspace(0.01, 0.99, 25)
        assert np.all(np.diff(cdf.inverse_quantile(grid)) >= 0)


class TestCohortKeys:
    def test_bin_required_iff_binned(self):
        CohortKey("video", 3)
        CohortKey("duration_bin", 2, 2)
        with pytest.raises(ConfigError):
            CohortKey("video", 3, 1)
        with pytest.raises(ConfigError):
            CohortKey("user_x_durationbin", 3)
        with pytest.raises(ConfigError):
            CohortKey("nope", 1)

    def test_cohort_key_for(self):
        r = InteractionRecord(7, 9, 50.0, 150.0, 0)
        assert cohort_key_for(r, "video") == CohortKey("video", 9)
        assert cohort_key_for(r, "user_x_durationbin", BINNER) == CohortKey(
            "user_x_durationbin", 7, 1
        )
        assert cohort_key_for(r, "duration_bin", BINNER) == CohortKey(
            "duration_bin", 1, 1
        )
        assert cohort_key_for(
            r, "user_cluster_x_durationbin", BINNER, {7: 3}
        ) == CohortKey("user_cluster_x_durationbin", 3, 1)

    def test_missing_dependencies_raise(self):
        r = InteractionRecord(7, 9, 50.0, 150.0, 0)
        with pytest.raises(ConfigError):
            cohort_key_for(r, "duration_bin")
        with pytest.raises(ConfigError):
            cohort_key_for(r, "user_cluster_x_durationbin", BINNER)


def _train_records():
    rng = np.random.default_rng(3)
    return [
        InteractionRecord(
            user_id=int(rng.integers(0, 5)),
            video_id=int(rng.integers(0, 4)),
            watch_time=float(rng.uniform(0, 400)),
            duration=float(rng.uniform(50, 350)),
            timestamp=i,
        )
        for i in range(300)
    ]


class TestLabeling:
    def test_build_cdfs_groups_by_cohort(self):
        train = _train_records()
        table = build_cdfs(train, "video")
        assert sum(cdf.n for cdf in table.values()) == len(train)
        assert set(table) == {CohortKey("video", r.video_id) for r in train}

    def test_build_cdfs_empty_raises(self):
        with pytest.raises(ConfigError):
            build_cdfs([], "video")

    def test_label_records_quantiles_and_pcr(self):
        train = _train_records()
        tables = build_all_cdf_tables(train, BINNER)
        labels = label_records(train, tables, BINNER)
        for arr in (labels.q_video, labels.q_user, labels.q_d2q):
            assert np.all((arr > 0) & (arr < 1))
        assert np.all(labels.pcr <= 1.0)
        assert not labels.fallback_video.any()
        # spot-check one record against a direct cohort lookup
        r = train[17]
        cdf = tables["video"][CohortKey("video", r.video_id)]
        assert labels.q_video[17] == cdf.quantile_of(r.watch_time)
        assert labels.video_support[17] == cdf.n

    def test_cold_cohort_falls_back(self):
        train = _train_records()
        tables = build_all_cdf_tables(train, BINNER)
        cold = [InteractionRecord(99, 99, 10.0, 150.0, 0)]
        labels = label_records(cold, tables, BINNER)
        assert labels.q_video[0] == 0.5
        assert labels.fallback_video[0] and labels.fallback_user[0]
        assert labels.video_support[0] == 0

    def test_pcr_unclipped_option(self):
        train = [InteractionRecord(0, 0, 200.0, 100.0, 0)] * 2
        tables = build_all_cdf_tables(train, BINNER)
        labels = label_records(train, tables, BINNER, clip_pcr=False)
        assert labels.pcr[0] == 2.0

    def test_labels_for_kinds(self):
        train = _train_records()
        tables = build_all_cdf_tables(train, BINNER)
        labels = label_records(train, tables, BINNER)
        assert labels.labels_for("rad_v") is labels.q_video
        assert labels.labels_for("raw_log") is labels.raw
        with pytest.raises(ConfigError):
            labels.labels_for("nope")

    def test_cluster_user_kind(self):
        train = _train_records()
        clusters = {u: u % 2 for u in range(5)}
        tables = build_all_cdf_tables(train, BINNER, clusters)
        labels = label_records(
            train, tables, BINNER, clusters, user_kind="user_cluster_x_durationbin"
        )
        assert np.all((labels.q_user > 0) & (labels.q_user < 1))
        with pytest.raises(ConfigError):
            label_records(train, tables, BINNER, clusters, user_kind="video")
