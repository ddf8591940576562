from functools import lru_cache

import numpy as np
import pytest

from tests.factories import line_instance, make_instance
from zone_router.data.model import TimeMatrix
from zone_router.exceptions import RouteValidationError
from zone_router.scoring import (
    SCORE_COLUMNS,
    ScoreBreakdown,
    aggregate_score,
    combine_score,
    erp,
    normalize_times,
    route_score,
    score_instance,
    score_table,
    sequence_deviation,
)


def random_times(ids, rng):
    values = rng.uniform(1.0, 100.0, size=(len(ids), len(ids)))
    np.fill_diagonal(values, 0.0)
    return TimeMatrix(tuple(ids), values)


def random_pair(n, rng):
    ids = ["d"] + [f"s{i}" for i in range(1, n + 1)]
    b = ["d"] + list(rng.permutation(ids[1:]))
    return ids, b


def straight_line_sd(a, b):
    n = len(a) - 1
    if n <= 1:
        return 0.0
    total = 0
    previous = 0
    for stop_id in b[1:]:
        current = a.index(stop_id)
        total += abs(current - previous) - 1
        previous = current
    return min(max(2.0 * total / (n * (n - 1)), 0.0), 1.0)


def all_alignments(a, b, ntimes, gap):
    """(cost, edits) of every alignment of a and b"""

    @lru_cache(maxsize=None)
    def align(i, j):
        if i == 0 and j == 0:
            return [(0.0, 0)]
        result = []
        if i > 0 and j > 0:
            sub = ntimes[a[i - 1], b[j - 1]]
            result.extend((cost + sub, edits + int(sub != 0)) for cost, edits in align(i - 1, j - 1))
        if j > 0:
            result.extend((cost + gap, edits + 1) for cost, edits in align(i, j - 1))
        if i > 0:
            result.extend((cost + gap, edits + 1) for cost, edits in align(i - 1, j))
        return result

    return align(len(a), len(b))


def test_sd_identity():
    a = ("d", "s1", "s2", "s3")
    assert sequence_deviation(a, a) == 0.0


def test_sd_swap():
    a = ("d", "s1", "s2", "s3")
    b = ("d", "s1", "s3", "s2")
    assert sequence_deviation(a, b) == pytest.approx(1.0 / 3.0)


def test_sd_single_stop():
    assert sequence_deviation(("d", "s1"), ("d", "s1")) == 0.0


def test_sd_bounds_and_straight_line():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a, b = random_pair(int(rng.integers(1, 12)), rng)
        sd = sequence_deviation(a, b)
        assert 0.0 <= sd <= 1.0
        assert sd == pytest.approx(straight_line_sd(a, b))


def test_sd_zero_only_for_identity():
    rng = np.random.default_rng(1)
    for _ in range(200):
        a, b = random_pair(6, rng)
        assert (sequence_deviation(a, b) == 0.0) == (tuple(a) == tuple(b))


def test_stop_set_mismatch():
    with pytest.raises(ValueError):
        sequence_deviation(("d", "s1", "s2"), ("d", "s1", "s3"))
    with pytest.raises(ValueError):
        sequence_deviation(("d", "s1"), ("s1", "d"))


def test_normalize_mean():
    times = TimeMatrix(("a", "b"), [[0.0, 6.0], [8.0, 0.0]])
    np.testing.assert_allclose(normalize_times(times).values, [[0.0, 6.0 / 7.0], [8.0 / 7.0, 0.0]])


def test_normalize_constant():
    values = np.full((4, 4), 600.0)
    np.fill_diagonal(values, 0.0)
    normalized = normalize_times(TimeMatrix(tuple("abcd"), values)).values
    np.testing.assert_allclose(normalized, values / 600.0)


def test_normalize_zero_matrix():
    normalized = normalize_times(TimeMatrix(("a", "b"), np.zeros((2, 2)))).values
    np.testing.assert_array_equal(normalized, np.zeros((2, 2)))


def test_normalize_random_mean_is_one():
    rng = np.random.default_rng(2)
    times = random_times(["d"] + [f"s{i}" for i in range(9)], rng)
    normalized = normalize_times(times).values
    assert normalized[~np.eye(10, dtype=bool)].mean() == pytest.approx(1.0, abs=1e-9)


def test_erp_identity():
    rng = np.random.default_rng(3)
    ids, _ = random_pair(7, rng)
    assert erp(ids, ids, random_times(ids, rng)) == (0.0, 0)


def test_erp_two_stop_swap():
    ntimes = TimeMatrix(("d", "x", "y"), [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])
    a = ("d", "x", "y")
    b = ("d", "y", "x")
    alignments = all_alignments(a, b, ntimes, 1000.0)
    optimum = min(cost for cost, _ in alignments)
    assert erp(a, b, ntimes, gap_penalty=1000.0) == (pytest.approx(optimum), 2)
    assert optimum == pytest.approx(1.0)
    assert route_score(a, b, ntimes, 1000.0).route_score == pytest.approx(0.5)


def test_erp_exhaustive_alignment():
    rng = np.random.default_rng(4)
    gaps = [0.05, 0.5, 1000.0]
    for trial in range(500):
        gap = gaps[trial % len(gaps)]
        # depot plus up to 6 stops, sequences of length <= 7
        a, b = random_pair(int(rng.integers(1, 7)), rng)
        ntimes = normalize_times(random_times(a, rng))
        alignments = all_alignments(tuple(a), tuple(b), ntimes, gap)
        optimum = min(cost for cost, _ in alignments)
        cost, edits = erp(a, b, ntimes, gap_penalty=gap)
        assert cost == pytest.approx(optimum)
        tolerance = 1e-9 * max(1.0, optimum)
        optimal_edits = {e for c, e in alignments if abs(c - optimum) <= tolerance}
        assert edits in optimal_edits


def test_erp_large_gap_is_pure_substitution():
    rng = np.random.default_rng(5)
    for _ in range(50):
        a, b = random_pair(8, rng)
        ntimes = normalize_times(random_times(a, rng))
        cost, edits = erp(a, b, ntimes, gap_penalty=1000.0)
        assert cost == pytest.approx(sum(ntimes[u, v] for u, v in zip(a, b)))
        assert edits == sum(u != v for u, v in zip(a, b))


def test_route_score_identity_law():
    rng = np.random.default_rng(6)
    for _ in range(1000):
        a, _ = random_pair(int(rng.integers(1, 10)), rng)
        ntimes = normalize_times(random_times(a, rng))
        assert route_score(a, a, ntimes) == ScoreBreakdown(0.0, 0.0, 0, 0.0)


def test_combine_score():
    assert combine_score(0.25, 4.0, 8) == pytest.approx(0.125)
    assert combine_score(0.0, 0.0, 0) == 0.0
    assert combine_score(0.5, 3.0, 0) == 0.0


def test_route_score_arithmetic():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a, b = random_pair(6, rng)
        breakdown = route_score(a, b, normalize_times(random_times(a, rng)))
        expected = 0.0 if breakdown.erp_e == 0 else breakdown.sd * breakdown.erp_n / breakdown.erp_e
        assert breakdown.route_score == pytest.approx(expected)


def test_scale_invariance():
    rng = np.random.default_rng(8)
    ids, b = random_pair(6, rng)
    times = random_times(ids, rng)
    scaled = TimeMatrix(times.stop_ids, times.values * 60.0)
    base = make_instance(ids, times.values, actual=ids)
    minutes = make_instance(ids, scaled.values, actual=ids)
    assert score_instance(minutes, b).route_score == pytest.approx(score_instance(base, b).route_score)


def test_score_instance_without_benchmark():
    instance = make_instance(["d", "a"], [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        score_instance(instance, ("d", "a"))


def test_aggregate():
    breakdowns = [ScoreBreakdown(0.0, 0.0, 0, 0.0), ScoreBreakdown(0.5, 1.0, 2, 0.25)]
    assert aggregate_score(breakdowns) == pytest.approx(0.125)
    with pytest.raises(ValueError):
        aggregate_score([])


def test_score_table():
    instances = [line_instance(3, route_id="R2"), line_instance(3, route_id="R1"), line_instance(2, route_id="R3")]
    candidates = {
        "R1": ("D", "S01", "S02", "S03"),
        "R2": ("D", "S03", "S02", "S01"),
    }
    table = score_table(instances, candidates)
    assert list(table.columns) == list(SCORE_COLUMNS)
    assert list(table["route_id"]) == ["R1", "R2"]
    assert table["route_score"].iloc[0] == 0.0
    assert table["route_score"].iloc[1] > 0.0


def test_score_table_rejects_foreign_stops():
    candidates = {"R1": ("D", "S01", "S02", "X")}
    with pytest.raises(RouteValidationError, match="R1"):
        score_table([line_instance(3)], candidates)
