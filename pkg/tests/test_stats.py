import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singpoints.errors import DimensionError
from singpoints.linalg import RngStream
from singpoints.stats import (
    MomentTable,
    TestReport,
    ks2_critical_value,
    ks_critical_value,
    ks_statistic,
    mean_and_stderr,
    reports_to_json,
    run_trials,
    two_sample_ks,
    variance_and_stderr,
)

floats = st.floats(-10, 10, allow_nan=False)


def _brute_ks(x, cdf):
    x = np.asarray(x, float)
    n = x.size
    best = 0.0
    for v in x:
        F = cdf(v)
        below = np.sum(x < v) / n
        upto = np.sum(x <= v) / n
        best = max(best, abs(upto - F), abs(below - F))
    return best


def _brute_ks2(a, b):
    grid = np.concatenate([a, b])
    return max(abs(np.mean(a <= g) - np.mean(b <= g)) for g in grid)


def test_ks_examples():
    assert ks_statistic([0.5], lambda x: np.clip(x, 0, 1)) == pytest.approx(0.5)
    with pytest.raises(DimensionError):
        ks_statistic([], lambda x: x)


def test_ks_self_sample_below_critical():
    x = RngStream(1).generator.uniform(size=10_000)
    assert ks_statistic(x, lambda t: t) <= 1.63 / 100


@given(st.lists(floats, min_size=1, max_size=100))
@settings(max_examples=60)
def test_ks_matches_brute_force(x):
    cdf = lambda t: 1 / (1 + np.exp(-np.asarray(t)))  # noqa: E731
    assert ks_statistic(x, cdf) == pytest.approx(_brute_ks(x, cdf), abs=1e-12)


@given(st.lists(floats, min_size=1, max_size=50), st.randoms())
def test_ks_permutation_invariant(x, rnd):
    y = list(x)
    rnd.shuffle(y)
    cdf = lambda t: np.clip((np.asarray(t) + 10) / 20, 0, 1)  # noqa: E731
    assert ks_statistic(x, cdf) == ks_statistic(y, cdf)


@given(st.lists(floats, min_size=1, max_size=60), st.lists(floats, min_size=1, max_size=60))
@settings(max_examples=60)
def test_two_sample_ks_properties(a, b):
    a, b = np.array(a), np.array(b)
    d = two_sample_ks(a, b)
    assert d == pytest.approx(_brute_ks2(a, b), abs=1e-12)
    assert d == two_sample_ks(b, a)
    assert two_sample_ks(a, a) == 0


def test_two_sample_ks_disjoint():
    assert two_sample_ks([0, 1, 2], [5, 6]) == 1
    with pytest.raises(DimensionError):
        two_sample_ks([], [1])


def test_critical_values():
    assert ks_critical_value(10_000, 0.01) == pytest.approx(0.016276, abs=1e-6)
    assert ks2_critical_value(5000, 5000, 0.01) == pytest.approx(1.62762 * math.sqrt(2 / 5000), rel=1e-4)


def test_mean_and_variance_stderr():
    g = RngStream(2).generator
    x = g.standard_normal(40_000)
    m, se = mean_and_stderr(x)
    assert se == pytest.approx(1 / 200, rel=0.05)
    v, sev = variance_and_stderr(x)
    assert abs(v - 1) <= 4 * sev
    assert sev == pytest.approx(math.sqrt(2 / 40_000), rel=0.1)
    z = x + 1j * g.standard_normal(40_000)
    mz, sez = mean_and_stderr(z)
    assert isinstance(mz, complex | np.complexfloating) and sez == pytest.approx(math.sqrt(2) / 200, rel=0.05)


def test_report_modes():
    assert TestReport("a", 1.0, 1.1, 0.05, 0.15, 10, 0).passed
    assert not TestReport("a", 1.0, 1.2, 0.05, 0.15, 10, 0).passed
    assert TestReport("b", 0.01, 0, 0, 0.02, 10, 0, "upper").passed
    assert not TestReport("c", -3.5, 0, 1, 3, 10, 0, "absolute").passed
    with pytest.raises(ValueError):
        TestReport("d", 0, 0, 0, 0, 0, 0, "sideways")


def test_report_json_and_line():
    r = TestReport("x", 0.5, 0.4, 0.05, 0.15, 100, 7, details={"v": np.float64(2.0), "c": 1 + 2j})
    assert r.z_score == pytest.approx(2.0)
    obj = json.loads(reports_to_json([r]))[0]
    assert obj["passed"] is True and obj["details"] == {"v": 2.0, "c": [1.0, 2.0]}
    assert r.line().startswith("[PASS] x:")


def test_moment_table_report():
    t = MomentTable(["a", "b"], [1.02, 0.1j], [1.0, 0.0], [0.01, 0.05])
    assert np.allclose(t.z_scores(), [2.0, 2.0])
    assert t.report("t", 3.0, 10, 0).passed
    assert not t.report("t", 1.0, 10, 0).passed
    assert t.report("t", 1.0, 10, 0, allowance=0.05).details["worst_label"] == "b"
    back = MomentTable.from_json(json.loads(json.dumps(t.to_json())))
    assert back.labels == t.labels and np.allclose(back.empirical, t.empirical)
    assert len(t.select(lambda l: l == "a")) == 1
    with pytest.raises(DimensionError):
        MomentTable(["a"], [1, 2], [1], [1])


def test_run_trials_thread_independent():
    f = lambda s: s.generator.standard_normal(3).tolist()  # noqa: E731
    a = run_trials(f, 50, RngStream(3), threads=1)
    b = run_trials(f, 50, RngStream(3), threads=4)
    assert a == b
