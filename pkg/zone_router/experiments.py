"""Experiment harness: per-depot training, evaluation reports, h sweep and run manifests"""

import dataclasses
import hashlib
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from itertools import groupby
from pathlib import Path
from typing import Dict, Mapping

import numpy as np
import orjson
import pandas as pd

from zone_router.exceptions import ConfigurationError, SolverError, ZoningError
from zone_router.learning import BOConfig, optimize
from zone_router.routers import HierarchicalRouter, get_router, is_zone_contiguous
from zone_router.scoring import SCORE_COLUMNS, score_instance
from zone_router.util import read_json, write_json
from zone_router.version import version_string
from zone_router.zones import build_partition

ALL_STATIONS = "*"
HISTOGRAM_BIN = 0.01

ROUTE_COLUMNS = ("route_id", "station", "method") + SCORE_COLUMNS[1:] + ("zone_contiguous", "max_zone_solves")


def config_hash(effective_config: Mapping) -> str:
    return hashlib.sha256(orjson.dumps(effective_config, option=orjson.OPT_SORT_KEYS)).hexdigest()


def write_manifest(output, command, inputs, seeds, effective_config):
    """<output>.manifest.json next to the main output of a subcommand"""
    output = Path(output)
    path = output.with_name(output.name + ".manifest.json")
    write_json(
        path,
        {
            "command": command,
            "inputs": {name: str(value) for name, value in inputs.items()},
            "seeds": seeds,
            "config": dict(effective_config),
            "config_hash": config_hash(effective_config),
            "version": version_string,
        },
    )
    return path


def by_station(instances):
    instances = sorted(instances, key=lambda instance: (instance.station, instance.id))
    return {station: list(group) for station, group in groupby(instances, key=lambda instance: instance.station)}


def train(instances, method="hrlp", bo_config: BOConfig = None, per_depot=True, **router_options):
    """Weights per depot (or a single pooled set under "*") and the concatenated BO histories"""
    router = get_router(method, **router_options)
    if not router.theta_dim:
        raise ConfigurationError(f'Method "{method}" has no weights to train')
    groups = by_station(instances) if per_depot else {ALL_STATIONS: list(instances)}
    if not groups:
        raise ValueError("No training routes")
    thetas = {}
    histories = []
    for station, routes in groups.items():
        logging.info(f"Training {method} for depot {station} on {len(routes)} routes")
        result = optimize(routes, bo_config, router)
        thetas[station] = result.theta.tolist()
        history = result.history
        history.insert(0, "station", station)
        histories.append(history)
    return thetas, pd.concat(histories, ignore_index=True)


def read_thetas(path) -> Dict[str, np.ndarray]:
    record = read_json(path)
    if isinstance(record, list):
        return {ALL_STATIONS: np.asarray(record, dtype=float)}
    return {station: np.asarray(theta, dtype=float) for station, theta in record.items()}


def write_thetas(path, thetas):
    write_json(path, {station: list(map(float, theta)) for station, theta in thetas.items()})


def station_theta(thetas, station):
    if thetas is None:
        return None
    if station in thetas:
        return thetas[station]
    return thetas.get(ALL_STATIONS)


def _route_row(args):
    method, router, instance, theta, gap_penalty = args
    try:
        if isinstance(router, HierarchicalRouter):
            sequence, zone_routes = router.route_detailed(instance, theta)
            max_solves = max((zone_route.solves for zone_route in zone_routes), default=0)
        else:
            sequence = router.route(instance, theta)
            max_solves = 0
        breakdown = score_instance(instance, sequence, gap_penalty)
    except (SolverError, ZoningError, ValueError) as e:
        logging.warning(f"Route {instance.id} is skipped for {method}: {e}")
        return None, None
    zone_of = build_partition(instance, True).zone_of
    row = {
        "route_id": instance.id,
        "station": instance.station,
        "method": method,
        **dataclasses.asdict(breakdown),
        "zone_contiguous": is_zone_contiguous(sequence, zone_of),
        "max_zone_solves": max_solves,
    }
    return row, sequence


@dataclasses.dataclass(frozen=True, eq=False)
class EvalReport:
    routes: pd.DataFrame
    summary: pd.DataFrame
    per_depot: pd.DataFrame
    histograms: pd.DataFrame
    box_stats: pd.DataFrame
    sequences: Mapping[str, Mapping[str, tuple]]


def eval_run(
    instances,
    methods=("tsp", "hrlp"),
    thetas: Mapping[str, Mapping[str, np.ndarray]] = None,
    gap_penalty=None,
    jobs=1,
    router_options: Mapping[str, Mapping] = None,
) -> EvalReport:
    """Route and score every instance with every method

    thetas maps method to depot to weights, depots without weights are skipped with a warning.
    """
    thetas = thetas or {}
    router_options = router_options or {}
    instances = sorted((instance for instance in instances if instance.actual is not None), key=lambda x: x.id)
    tasks = []
    for method in methods:
        router = get_router(method, **router_options.get(method, {}))
        skipped = set()
        for instance in instances:
            theta = None
            if router.theta_dim:
                theta = station_theta(thetas.get(method), instance.station)
                if theta is None:
                    skipped.add(instance.station)
                    continue
            tasks.append((method, router, instance, theta, gap_penalty))
        for station in sorted(skipped):
            logging.warning(f"No {method} weights for depot {station}, its routes are skipped")

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(_route_row, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_route_row(task) for task in tasks]

    rows = [row for row, _ in results if row is not None]
    sequences = {}
    for row, sequence in results:
        if row is not None:
            sequences.setdefault(row["method"], {})[row["route_id"]] = sequence
    routes = pd.DataFrame(rows, columns=list(ROUTE_COLUMNS))
    routes = routes.sort_values(["method", "route_id"], kind="stable").reset_index(drop=True)
    return EvalReport(
        routes=routes,
        summary=summary_table(routes),
        per_depot=per_depot_table(routes),
        histograms=histogram_table(routes),
        box_stats=box_stats_table(routes),
        sequences=sequences,
    )


def summary_table(routes: pd.DataFrame) -> pd.DataFrame:
    grouped = routes.groupby("method", sort=True)
    return pd.DataFrame(
        {
            "routes": grouped["route_score"].size(),
            "mean_score": grouped["route_score"].mean(),
            "mean_sd": grouped["sd"].mean(),
            "contiguity_rate": grouped["zone_contiguous"].mean(),
        }
    ).reset_index()


def per_depot_table(routes: pd.DataFrame) -> pd.DataFrame:
    grouped = routes.groupby(["station", "method"], sort=True)["route_score"]
    return pd.DataFrame({"routes": grouped.size(), "mean_score": grouped.mean()}).reset_index()


def histogram_table(routes: pd.DataFrame, width=HISTOGRAM_BIN) -> pd.DataFrame:
    """Score counts per method in bins of the given width starting at 0"""
    frames = []
    top = routes["route_score"].max() if len(routes) else 0.0
    n_bins = max(1, math.ceil(top / width))
    edges = np.round(np.arange(n_bins + 1) * width, 10)
    for method, group in routes.groupby("method", sort=True):
        counts, _ = np.histogram(group["route_score"], bins=edges)
        frames.append(pd.DataFrame({"method": method, "bin_start": edges[:-1], "bin_end": edges[1:], "count": counts}))
    if not frames:
        return pd.DataFrame(columns=["method", "bin_start", "bin_end", "count"])
    return pd.concat(frames, ignore_index=True)


def box_stats_table(routes: pd.DataFrame) -> pd.DataFrame:
    rows = []
    for method, group in routes.groupby("method", sort=True):
        scores = group["route_score"].to_numpy()
        q1, median, q3 = np.percentile(scores, [25, 50, 75])
        iqr = q3 - q1
        inside = scores[(scores >= q1 - 1.5 * iqr) & (scores <= q3 + 1.5 * iqr)]
        rows.append(
            {
                "method": method,
                "min": scores.min(),
                "q1": q1,
                "median": median,
                "q3": q3,
                "max": scores.max(),
                "mean": scores.mean(),
                "whisker_low": inside.min(),
                "whisker_high": inside.max(),
                "outliers": int(len(scores) - len(inside)),
            }
        )
    return pd.DataFrame(rows)


def sweep_h(
    train_instances, test_instances, hs, bo_config: BOConfig = None, per_depot=True, gap_penalty=None, **options
):
    """Train and evaluate the hierarchical router for every candidate budget h"""
    rows = []
    for h in hs:
        start = time.perf_counter()
        thetas, _ = train(train_instances, "hrlp", bo_config, per_depot, h=h, **options)
        train_seconds = time.perf_counter() - start
        start = time.perf_counter()
        report = eval_run(
            test_instances,
            methods=("hrlp",),
            thetas={"hrlp": thetas},
            gap_penalty=gap_penalty,
            router_options={"hrlp": {"h": h, **options}},
        )
        test_seconds = time.perf_counter() - start
        routes = report.routes
        rows.append(
            {
                "h": h,
                "routes": len(routes),
                "mean_score": routes["route_score"].mean(),
                "train_seconds": train_seconds,
                "test_seconds": test_seconds,
                "max_zone_solves": int(routes["max_zone_solves"].max()) if len(routes) else 0,
            }
        )
        logging.info(f"h = {h}: mean score {rows[-1]['mean_score']:.5f}")
    return pd.DataFrame(rows)


def write_frame(path, frame: pd.DataFrame):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
