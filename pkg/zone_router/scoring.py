"""Similarity of a candidate stop sequence to the benchmark one

route_score = SD * ERP_n / ERP_e, 0 for identical sequences
"""

import dataclasses
from typing import Iterable

import numpy as np
import pandas as pd

from zone_router import config
from zone_router.cache import cache
from zone_router.data.model import RouteInstance, TimeMatrix
from zone_router.exceptions import RouteValidationError
from zone_router.util import off_diagonal

SCORE_COLUMNS = ("route_id", "sd", "erp_n", "erp_e", "route_score")


@dataclasses.dataclass(frozen=True)
class ScoreBreakdown:
    sd: float
    erp_n: float
    erp_e: int
    route_score: float


def normalize_times(times: TimeMatrix) -> TimeMatrix:
    """Travel times divided by their mean off-diagonal value"""
    values = times.values
    if len(times) < 2:
        return TimeMatrix(times.stop_ids, np.zeros_like(values))
    mean = off_diagonal(values).mean()
    if mean == 0:
        return TimeMatrix(times.stop_ids, np.zeros_like(values))
    return TimeMatrix(times.stop_ids, values / mean)


@cache()
def normalized_times(instance: RouteInstance) -> TimeMatrix:
    return normalize_times(instance.times)


def _check_same_stops(a, b):
    if len(a) != len(b) or set(a) != set(b) or len(set(a)) != len(a):
        raise ValueError("Sequences must visit the same set of stops exactly once")
    if a and a[0] != b[0]:
        raise ValueError(f"Sequences start at different depots {a[0]} and {b[0]}")


def sequence_deviation(a, b) -> float:
    """Sequence deviation of b from benchmark a, in [0, 1]"""
    a = tuple(a)
    b = tuple(b)
    _check_same_stops(a, b)
    n = len(a) - 1
    if n <= 1:
        return 0.0
    position = {stop_id: i for i, stop_id in enumerate(a)}
    positions = np.array([position[stop_id] for stop_id in b])
    total = np.sum(np.abs(np.diff(positions)) - 1)
    return float(min(max(2.0 * total / (n * (n - 1)), 0.0), 1.0))


def erp(a, b, ntimes: TimeMatrix, gap_penalty=None):
    """Edit distance with real penalty, (minimal cost, number of non-zero cost edits)

    Substitution of a[i] by b[j] costs ntimes[a[i], b[j]], a gap costs gap_penalty.
    Among optimal alignments substitutions are preferred, then deletions from b, then insertions into b.
    """
    gap = config.GAP_PENALTY if gap_penalty is None else float(gap_penalty)
    a = tuple(a)
    b = tuple(b)
    _check_same_stops(a, b)
    substitution = ntimes.submatrix(a, b).tolist()
    n, m = len(a), len(b)
    cost = np.zeros((n + 1, m + 1))
    edits = np.zeros((n + 1, m + 1), dtype=int)
    gap_edit = int(gap > 0)
    for i in range(1, n + 1):
        cost[i, 0] = cost[i - 1, 0] + gap
        edits[i, 0] = edits[i - 1, 0] + gap_edit
    for j in range(1, m + 1):
        cost[0, j] = cost[0, j - 1] + gap
        edits[0, j] = edits[0, j - 1] + gap_edit
    for i in range(1, n + 1):
        row = substitution[i - 1]
        for j in range(1, m + 1):
            sub = row[j - 1]
            best = cost[i - 1, j - 1] + sub
            count = edits[i - 1, j - 1] + int(sub != 0)
            # b[j - 1] is deleted
            candidate = cost[i, j - 1] + gap
            if candidate < best:
                best = candidate
                count = edits[i, j - 1] + gap_edit
            # a[i - 1] is inserted into b
            candidate = cost[i - 1, j] + gap
            if candidate < best:
                best = candidate
                count = edits[i - 1, j] + gap_edit
            cost[i, j] = best
            edits[i, j] = count
    return float(cost[n, m]), int(edits[n, m])


def combine_score(sd, erp_n, erp_e) -> float:
    return 0.0 if erp_e == 0 else sd * erp_n / erp_e


def route_score(a, b, ntimes: TimeMatrix, gap_penalty=None) -> ScoreBreakdown:
    sd = sequence_deviation(a, b)
    erp_n, erp_e = erp(a, b, ntimes, gap_penalty)
    score = combine_score(sd, erp_n, erp_e)
    return ScoreBreakdown(sd=sd, erp_n=erp_n, erp_e=erp_e, route_score=score)


def score_instance(instance: RouteInstance, candidate, gap_penalty=None) -> ScoreBreakdown:
    if instance.actual is None:
        raise ValueError(f"Route {instance.id} has no benchmark sequence")
    return route_score(instance.actual, candidate, normalized_times(instance), gap_penalty)


def aggregate_score(breakdowns: Iterable[ScoreBreakdown]) -> float:
    scores = [breakdown.route_score for breakdown in breakdowns]
    if not scores:
        raise ValueError("Cannot aggregate an empty set of scores")
    return float(np.mean(scores))


def score_table(instances, candidates, gap_penalty=None) -> pd.DataFrame:
    """One row per route that has both a benchmark and a candidate, sorted by route id"""
    rows = []
    for instance in sorted(instances, key=lambda instance: instance.id):
        if instance.id not in candidates:
            continue
        try:
            breakdown = score_instance(instance, candidates[instance.id], gap_penalty)
        except ValueError as e:
            raise RouteValidationError(instance.id, str(e)) from e
        rows.append({"route_id": instance.id, **dataclasses.asdict(breakdown)})
    return pd.DataFrame(rows, columns=list(SCORE_COLUMNS))
