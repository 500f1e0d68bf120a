import numpy as np
import pandas as pd
import pytest
from hypothesis import given, strategies as st

from attnvol.attention import (
    AttentionIndexBuilder,
    asvi,
    build_index,
    prune_topics,
)
from attnvol.exceptions import DataError


def panel_from(columns: dict) -> pd.DataFrame:
    n = len(next(iter(columns.values())))
    idx = pd.date_range("2021-06-01", periods=n, freq="D")
    return pd.DataFrame(columns, index=idx, dtype=float)


class TestPruneTopics:
    def test_perfectly_correlated_pair_retained(self):
        panel = panel_from({"a": [1, 2, 3, 4, 5], "b": [2, 4, 6, 8, 10]})
        kept, removed = prune_topics(panel)
        assert list(kept.columns) == ["a", "b"]
        assert removed == []

    def test_anticorrelated_topic_removed(self):
        a = [1.0, 2.0, 3.0, 4.0, 5.0]
        panel = panel_from({"a": a, "b": a, "c": [6 - x for x in a]})
        # corr(c, mean(a, b)) = -1 is the most negative, so c goes first;
        # the survivors correlate at +1 and the loop stops
        kept, removed = prune_topics(panel)
        assert list(kept.columns) == ["a", "b"]
        assert removed == ["c"]

    def test_single_topic_unchanged(self):
        panel = panel_from({"a": [1, 2, 3]})
        kept, removed = prune_topics(panel)
        pd.testing.assert_frame_equal(kept, panel)
        assert removed == []

    def test_zero_variance_topic_removed_first(self, caplog):
        panel = panel_from({"a": [1, 2, 3, 4, 5], "flat": [7, 7, 7, 7, 7]})
        with caplog.at_level("WARNING"):
            kept, removed = prune_topics(panel)
        assert removed == ["flat"]
        assert "zero-variance" in caplog.text

    def test_terminates_within_topic_count(self):
        rng = np.random.default_rng(7)
        cols = {f"t{i}": rng.uniform(0, 100, 30) for i in range(10)}
        kept, removed = prune_topics(panel_from(cols))
        assert len(removed) <= 9
        assert kept.shape[1] + len(removed) == 10


class TestBuildIndex:
    def test_constant_topic_at_100(self):
        panel = panel_from({"a": [100, 100, 100]})
        out = build_index(panel, zero_offset=1)
        assert out.tolist() == pytest.approx([np.log(101)] * 3)
        assert out.iloc[0] == pytest.approx(4.61512, abs=1e-5)

    def test_all_zero_topics_offset_one(self):
        panel = panel_from({"a": [0.0], "b": [0.0]})
        assert build_index(panel, zero_offset=1).iloc[0] == 0.0

    def test_offset_zero(self):
        panel = panel_from({"a": [20.0], "b": [40.0]})
        assert build_index(panel, zero_offset=0).iloc[0] == pytest.approx(3.4012, abs=1e-4)

    def test_offset_zero_with_zero_mean_errors(self):
        panel = panel_from({"a": [0.0]})
        with pytest.raises(DataError):
            build_index(panel, zero_offset=0)

    @given(
        base=st.floats(0, 99),
        bump=st.floats(0.01, 1.0),
        other=st.floats(0, 100),
    )
    def test_monotone_in_any_topic(self, base, bump, other):
        low = panel_from({"a": [base], "b": [other]})
        high = panel_from({"a": [base + bump], "b": [other]})
        assert build_index(high).iloc[0] >= build_index(low).iloc[0]


class TestAsvi:
    def test_constant_series_is_zero(self):
        idx = pd.date_range("2021-06-01", periods=10, freq="D")
        svi = pd.Series(40.0, index=idx)
        out = asvi(svi, window_days=3)
        assert len(out) == 7
        assert np.allclose(out, 0.0)

    def test_hand_value(self):
        idx = pd.date_range("2021-06-01", periods=4, freq="D")
        svi = pd.Series([4.0, 4.0, 4.0, 9.0], index=idx)
        out = asvi(svi, window_days=3, zero_offset=1)
        # ln(10) - ln(5) = ln 2
        assert out.iloc[0] == pytest.approx(np.log(2), abs=1e-10)

    def test_window_one_is_log_ratio(self):
        idx = pd.date_range("2021-06-01", periods=3, freq="D")
        svi = pd.Series([10.0, 20.0, 5.0], index=idx)
        out = asvi(svi, window_days=1, zero_offset=0)
        assert out.tolist() == pytest.approx(
            [np.log(20 / 10), np.log(5 / 20)], abs=1e-12
        )

    def test_short_series_empty_with_warning(self, caplog):
        idx = pd.date_range("2021-06-01", periods=3, freq="D")
        svi = pd.Series([1.0, 2.0, 3.0], index=idx)
        with caplog.at_level("WARNING"):
            out = asvi(svi, window_days=5)
        assert out.empty


class TestAttentionIndexBuilder:
    def test_fit_transform_prunes_and_builds(self):
        a = [1.0, 2.0, 3.0, 4.0, 5.0]
        panel = panel_from({"a": a, "b": a, "c": [6 - x for x in a]})
        builder = AttentionIndexBuilder().fit(panel)
        assert builder.topics_ == ["a", "b"]
        out = builder.transform(panel)
        assert out.iloc[0] == pytest.approx(np.log(2.0))

    def test_get_params_round_trip(self):
        builder = AttentionIndexBuilder(zero_offset=2.0, prune=False)
        params = builder.get_params()
        assert params == {"zero_offset": 2.0, "prune": False}

    def test_transform_missing_topic_errors(self):
        panel = panel_from({"a": [1, 2, 3, 4, 5], "b": [1, 2, 3, 4, 5]})
        builder = AttentionIndexBuilder().fit(panel)
        with pytest.raises(DataError):
            builder.transform(panel[["a"]])
