import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_qss.analysis import (
    CSV_HEADER,
    aggregate,
    comparison_rows,
    detection_scaling,
    qkd_rounds,
    qkd_success,
    wilson_interval,
    write_summary_csv,
)
from qudit_qss.protocol import ProtocolConfig, run_session

GRID = [(N, d, p) for N in range(1, 13) for d in (2, 3, 5, 23) for p in (0.5, 0.8, 0.95)]


class TestQkd:
    def test_worked_example(self):
        assert qkd_rounds(10, 23, 0.8) == 86

    def test_exact_boundary_round_trip(self):
        assert qkd_rounds(1, 2, 0.75) == 2
        assert qkd_success(1, 2, 2) == 0.75

    def test_single_trial(self):
        for d in (2, 3, 7):
            assert qkd_success(1, d, 1) == pytest.approx(1 / d)

    def test_worked_example_success(self):
        assert qkd_success(10, 23, 86) >= 0.8
        assert qkd_success(10, 23, 85) < 0.8

    @pytest.mark.parametrize("N,d,p", GRID)
    def test_ceiling_is_tight(self, N, d, p):
        m = qkd_rounds(N, d, p)
        assert qkd_success(N, d, m) >= p
        if m > 1:
            assert qkd_success(N, d, m - 1) < p

    @settings(max_examples=200, deadline=None)
    @given(
        N=st.integers(1, 30),
        d=st.integers(2, 50),
        p=st.floats(0.01, 0.99),
        q=st.floats(0.01, 0.99),
    )
    def test_monotone_in_p(self, N, d, p, q):
        lo, hi = sorted((p, q))
        assert qkd_rounds(N, d, lo) <= qkd_rounds(N, d, hi)
        assert qkd_success(N, d, qkd_rounds(N, d, hi)) >= hi

    def test_diverges_as_p_approaches_one(self):
        ms = [qkd_rounds(5, 7, 1 - 10.0 ** -k) for k in range(1, 8)]
        assert ms == sorted(ms) and ms[-1] > 100

    @pytest.mark.parametrize("args", [(0, 3, 0.5), (3, 1, 0.5), (3, 3, 0.0), (3, 3, 1.0)])
    def test_domain(self, args):
        with pytest.raises(ValueError):
            qkd_rounds(*args)

    def test_success_needs_positive_m(self):
        with pytest.raises(ValueError):
            qkd_success(1, 3, 0)


class TestDetectionScaling:
    def test_perfect_detectors(self):
        assert all(detection_scaling(s, 7, 1.0) == 1.0 for s in ("ghz", "single_qudit", "qkd"))

    def test_ghz_example(self):
        assert detection_scaling("ghz", 5, 0.9) == pytest.approx(0.531441, abs=1e-12)

    def test_exact_powers(self):
        eta = 0.73
        for N in range(1, 10):
            assert detection_scaling("ghz", N, eta) == eta ** (N + 1)
            assert detection_scaling("qkd", N, eta) == eta ** N
            assert detection_scaling("single_qudit", N, eta) == eta

    def test_single_qudit_dominates(self):
        for N in range(1, 8):
            for eta in (0.1, 0.5, 0.99):
                assert detection_scaling("single_qudit", N, eta) > detection_scaling("ghz", N, eta)

    def test_monotone_in_N(self):
        eta = 0.8
        for scheme in ("ghz", "qkd"):
            vals = [detection_scaling(scheme, N, eta) for N in range(1, 10)]
            assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            detection_scaling("bb84", 2, 0.5)
        with pytest.raises(ValueError):
            detection_scaling("ghz", 2, 1.5)


class TestAggregate:
    def test_empty(self):
        assert aggregate([]) == []

    def test_rates_and_throughput(self):
        cf = 0.25
        ts = [run_session(ProtocolConfig(3, 2, 4000, check_fraction=cf, seed=s)) for s in range(3)]
        rows = {r.metric: r for r in aggregate(ts)}
        n = 12000
        assert rows["valid_rate"].n_samples == n
        assert abs(rows["valid_rate"].value - 1 / 3) <= 3 * math.sqrt((1 / 3) * (2 / 3) / n)
        p = (1 / 3) * (1 - cf)
        assert abs(rows["throughput"].value - p) <= 3 * math.sqrt(p * (1 - p) / n)
        assert rows["violation_rate"].value == 0.0
        for r in rows.values():
            assert r.ci_low <= r.value <= r.ci_high

    def test_groups_by_config(self):
        ts = [run_session(ProtocolConfig(d, 2, 300, seed=1)) for d in (3, 5)]
        assert {r.d for r in aggregate(ts)} == {3, 5}

    def test_csv_header(self):
        buf = io.StringIO()
        write_summary_csv(comparison_rows(10, 23, 0.8, 1.0), buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert "qkd,23,10,rounds_m,86,,," in lines


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert wilson_interval(0, 0) == (0.0, 1.0)
    assert wilson_interval(0, 10)[0] == 0.0
