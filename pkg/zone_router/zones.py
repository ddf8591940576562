"""Zone partition of a route, zone features and the weighted zone cost matrix"""

import dataclasses
import logging
from typing import Mapping, Tuple

import numpy as np
import pandas as pd
from immutabledict import immutabledict

from zone_router.cache import cache
from zone_router.config import THETA_BOUNDS
from zone_router.data.model import RouteInstance
from zone_router.exceptions import ZoningError
from zone_router.util import main_zone, minmax_normalize, project, ratio_matrix

DEPOT_ZONE = "DEPOT"
FALLBACK_ZONE = "Z-1.1A"

ZONE_FEATURES = (
    "mean_time",
    "centroid_distance",
    "depot_time_ratio",
    "to_depot_time_ratio",
    "same_main_zone",
)
STOP_FEATURES = (
    "time",
    "depot_time_ratio",
    "to_depot_time_ratio",
    "package_ratio",
)


@dataclasses.dataclass(frozen=True)
class ZonePartition:
    # DEPOT_ZONE first, then zone ids in lexicographic order
    zone_ids: Tuple[str, ...]
    members: Mapping[str, Tuple[str, ...]]
    zone_of: Mapping[str, str]
    repaired: Tuple[str, ...] = ()

    @property
    def zones(self) -> Tuple[str, ...]:
        return self.zone_ids[1:]

    def __len__(self):
        return len(self.zone_ids)


def repair_zones(instance: RouteInstance, single_zone_fallback=False):
    """Zone of every delivery stop, unzoned stops take the zone of the nearest zoned stop"""
    zone_of = {stop.id: stop.zone for stop in instance.stops if not stop.is_depot}
    unzoned = [stop_id for stop_id, zone in zone_of.items() if zone is None]
    if not unzoned:
        return zone_of, ()
    zoned = [stop_id for stop_id, zone in zone_of.items() if zone is not None]
    if not zoned:
        if not single_zone_fallback:
            raise ZoningError(
                f"Route {instance.id} has no zoned stops, use the single-zone fallback to route it as one zone"
            )
        logging.warning(f"Route {instance.id} has no zoned stops, all stops are put into zone {FALLBACK_ZONE}")
        return dict.fromkeys(zone_of, FALLBACK_ZONE), tuple(unzoned)
    times = instance.times.submatrix(unzoned, zoned)
    for stop_id, row in zip(unzoned, times):
        zone_of[stop_id] = min(zip(row, (zone_of[v] for v in zoned)))[1]
    logging.warning(f"Route {instance.id}: {len(unzoned)} unzoned stops are assigned to the nearest zone")
    return zone_of, tuple(unzoned)


@cache()
def build_partition(instance: RouteInstance, single_zone_fallback=False) -> ZonePartition:
    zone_of, repaired = repair_zones(instance, single_zone_fallback)
    zones = sorted(set(zone_of.values()))
    members = {DEPOT_ZONE: (instance.depot.id,)}
    for zone in zones:
        members[zone] = tuple(stop_id for stop_id in instance.delivery_ids if zone_of[stop_id] == zone)
    zone_of[instance.depot.id] = DEPOT_ZONE
    return ZonePartition(
        zone_ids=(DEPOT_ZONE, *zones),
        members=immutabledict(members),
        zone_of=immutabledict(zone_of),
        repaired=repaired,
    )


def mean_times(instance: RouteInstance, partition: ZonePartition):
    """Mean travel time from the stops of zone i to the stops of zone j"""
    m = len(partition)
    result = np.zeros((m, m))
    for i, zone_i in enumerate(partition.zone_ids):
        for j, zone_j in enumerate(partition.zone_ids):
            if i != j:
                result[i, j] = instance.times.submatrix(partition.members[zone_i], partition.members[zone_j]).mean()
    return result


def centroid_distances(instance: RouteInstance, partition: ZonePartition):
    depot = instance.depot
    centroids = []
    for zone in partition.zone_ids:
        stops = [instance.stop_by_id[stop_id] for stop_id in partition.members[zone]]
        x, y = project([stop.lat for stop in stops], [stop.lng for stop in stops], depot.lat, depot.lng)
        centroids.append((x.mean(), y.mean()))
    centroids = np.array(centroids)
    return np.hypot(*(centroids[:, np.newaxis, :] - centroids[np.newaxis, :, :]).transpose(2, 0, 1))


def _depot_ratio(values):
    """values[j] / values[i] between zones, 1 for pairs involving the depot pseudo-zone"""
    m = len(values)
    result = np.ones((m, m))
    if m > 1:
        result[1:, 1:] = ratio_matrix(values[1:], values[1:])
    return result


def same_main_zone(partition: ZonePartition):
    main_zones = [None] + [main_zone(zone) for zone in partition.zones]
    m = len(main_zones)
    result = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i != j and main_zones[i] is not None and main_zones[i] == main_zones[j]:
                result[i, j] = 1.0
    return result


@dataclasses.dataclass(frozen=True, eq=False)
class FeatureTensor:
    """values[k, i, j] is the k-th feature of the ordered node pair (i, j), nodes follow node_ids"""

    node_ids: Tuple[str, ...]
    names: Tuple[str, ...]
    values: np.ndarray

    def to_frame(self, route_id=None) -> pd.DataFrame:
        m = len(self.node_ids)
        i, j = np.nonzero(~np.eye(m, dtype=bool))
        frame = pd.DataFrame(
            {
                "route_id": route_id,
                "from": np.asarray(self.node_ids, dtype=object)[i],
                "to": np.asarray(self.node_ids, dtype=object)[j],
            }
        )
        for k, name in enumerate(self.names):
            frame[name] = self.values[k, i, j]
        return frame


def raw_zone_features(instance: RouteInstance, partition: ZonePartition) -> np.ndarray:
    times = mean_times(instance, partition)
    raw = np.stack(
        [
            times,
            centroid_distances(instance, partition),
            _depot_ratio(times[0, :]),
            _depot_ratio(times[:, 0]),
            same_main_zone(partition),
        ]
    )
    raw[:, np.arange(len(partition)), np.arange(len(partition))] = 0.0
    return raw


@cache()
def zone_features(instance: RouteInstance, partition: ZonePartition) -> FeatureTensor:
    return FeatureTensor(
        node_ids=partition.zone_ids,
        names=ZONE_FEATURES,
        values=minmax_normalize(raw_zone_features(instance, partition)),
    )


def raw_stop_features(instance: RouteInstance) -> np.ndarray:
    times = instance.times.values
    counts = np.array([instance.package_counts[stop_id] for stop_id in instance.stop_ids], dtype=float)
    raw = np.stack(
        [
            times,
            ratio_matrix(times[0, :], times[0, :]),
            ratio_matrix(times[:, 0], times[:, 0]),
            ratio_matrix(counts, counts),
        ]
    )
    raw[:, np.arange(len(times)), np.arange(len(times))] = 0.0
    return raw


@cache()
def stop_features(instance: RouteInstance) -> FeatureTensor:
    return FeatureTensor(
        node_ids=instance.stop_ids,
        names=STOP_FEATURES,
        values=minmax_normalize(raw_stop_features(instance)),
    )


def check_theta(theta, dim) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    low, high = THETA_BOUNDS
    if theta.shape != (dim,):
        raise ValueError(f"theta must have {dim} components, {theta.shape} given")
    if not np.all((theta >= low) & (theta <= high)):
        raise ValueError(f"theta components must be in [{low}, {high}], {theta.tolist()} given")
    return theta


def cost_matrix(features: FeatureTensor, theta) -> np.ndarray:
    """c[i, j] = sum_k theta[k] * features[k, i, j], zero diagonal"""
    theta = check_theta(theta, len(features.names))
    costs = np.tensordot(theta, features.values, axes=1)
    np.fill_diagonal(costs, 0.0)
    return costs


zone_cost_matrix = cost_matrix
