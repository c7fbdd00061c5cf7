import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entity_entropy.reports import (histogram, kde_curve, read_csv, scott_bandwidth,
                                    silverman_bandwidth, write_csv, write_json)

entropies = st.lists(st.floats(0, 12, allow_nan=False), min_size=1, max_size=200)
# millibit resolution keeps any data-driven bandwidth resolvable by the grid cap
entropy_grid = st.lists(st.integers(0, 12_000).map(lambda k: k / 1000), min_size=1, max_size=200)


class TestHistogram:
    @given(entropies)
    def test_counts_sum_to_entities(self, values):
        h = histogram(values, 50, upper=12.0)
        assert h.counts.sum() == len(values)
        assert len(h.edges) == 51
        assert (h.edges[0], h.edges[-1]) == (0.0, 12.0)

    def test_all_zero(self):
        h = histogram([0.0] * 4)
        assert h.counts[0] == 4


class TestKde:
    @settings(max_examples=100, deadline=None)
    @given(entropy_grid)
    def test_integrates_to_one(self, values):
        curve = kde_curve(values)
        assert (curve.density >= 0).all()
        assert curve.integral() == pytest.approx(1.0, rel=0.01)

    def test_silverman_value(self):
        v = np.arange(10.0)
        sd = v.std(ddof=1)
        iqr = 6.75 - 2.25
        assert silverman_bandwidth(v) == pytest.approx(0.9 * min(sd, iqr / 1.34) * 10 ** -0.2)

    def test_iqr_zero_falls_back_to_sd(self):
        v = np.array([0.0] * 9 + [5.0])
        assert silverman_bandwidth(v) == pytest.approx(0.9 * v.std(ddof=1) * 10 ** -0.2)

    def test_no_spread_uses_fallback(self):
        assert kde_curve([1.0, 1.0, 1.0]).bandwidth == 0.25

    def test_scott_and_fixed(self):
        v = [0.0, 1.0, 3.0]
        assert kde_curve(v, "scott").bandwidth == pytest.approx(scott_bandwidth(v))
        assert kde_curve(v, 0.4).bandwidth == 0.4

    def test_matches_scipy(self):
        from scipy.stats import gaussian_kde
        v = np.random.default_rng(1).gamma(1.0, 1.0, 300)
        curve = kde_curve(v, 0.3)
        ref = gaussian_kde(v, bw_method=0.3 / v.std(ddof=1))(curve.x)
        np.testing.assert_allclose(curve.density, ref, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("bw", ["silvermann", -1.0])
    def test_invalid(self, bw):
        with pytest.raises(ValueError):
            kde_curve([1.0, 2.0], bw)


class TestWriters:
    def test_csv_round_trip(self, tmp_path):
        n = write_csv(tmp_path / "t.csv", ["a", "b", "c"], [(1, 0.1, None), ("x", np.float64(2.5), True)])
        assert n == 2
        rows = read_csv(tmp_path / "t.csv")
        assert rows == [{"a": "1", "b": "0.1", "c": ""}, {"a": "x", "b": "2.5", "c": "true"}]

    def test_float_repr_is_exact(self, tmp_path):
        write_csv(tmp_path / "t.csv", ["v"], [(1 / 3,)])
        assert float(read_csv(tmp_path / "t.csv")[0]["v"]) == 1 / 3

    def test_json_sanitises(self, tmp_path):
        write_json(tmp_path / "t.json", {"b": np.int64(3), "a": math.nan})
        assert (tmp_path / "t.json").read_text() == '{\n  "a": null,\n  "b": 3\n}\n'
