import dataclasses
import hashlib
from collections import Counter
from datetime import datetime
from functools import cached_property
from typing import Mapping, Optional, Tuple

import numpy as np
from immutabledict import immutabledict

from zone_router.exceptions import RouteValidationError

DEPOT = "depot"
DELIVERY = "delivery"

RATINGS = ("high", "medium", "low")
PACKAGE_STATUSES = ("rejected", "delivered", "delivery-attempted")

StopSequence = Tuple[str, ...]


@dataclasses.dataclass(frozen=True)
class Stop:
    id: str
    lat: float
    lng: float
    zone: Optional[str] = None
    kind: str = DELIVERY

    @property
    def is_depot(self) -> bool:
        return self.kind == DEPOT


@dataclasses.dataclass(frozen=True)
class Package:
    id: str
    stop: str
    status: str
    # width, length, height in cm
    dims: Tuple[float, float, float]
    time_window: Optional[Tuple[datetime, datetime]] = None
    service_time: float = 0.0

    def __post_init__(self):
        if self.status not in PACKAGE_STATUSES:
            raise ValueError(f"Package {self.id} has unknown status {self.status!r}")
        if any(d < 0 for d in self.dims):
            raise ValueError(f"Package {self.id} has negative dimensions {self.dims}")
        if self.time_window is not None and self.time_window[0] > self.time_window[1]:
            raise ValueError(f"Package {self.id} time window starts after it ends")

    @property
    def volume(self) -> float:
        width, length, height = self.dims
        return width * length * height


@dataclasses.dataclass(frozen=True, eq=False)
class TimeMatrix:
    """Dense square matrix of travel times (seconds) or normalized travel times, rows and columns follow stop_ids"""

    stop_ids: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.stop_ids), len(self.stop_ids)):
            raise ValueError(f"Matrix shape {values.shape} doesn't match {len(self.stop_ids)} stops")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @cached_property
    def index(self) -> Mapping[str, int]:
        return immutabledict((stop_id, i) for i, stop_id in enumerate(self.stop_ids))

    def __getitem__(self, pair):
        u, v = pair
        return self.values[self.index[u], self.index[v]]

    def indices(self, stop_ids):
        return np.array([self.index[stop_id] for stop_id in stop_ids], dtype=int)

    def submatrix(self, rows, columns=None):
        rows = self.indices(rows)
        columns = rows if columns is None else self.indices(columns)
        return self.values[np.ix_(rows, columns)]

    def __len__(self):
        return len(self.stop_ids)

    def __eq__(self, other):
        if not isinstance(other, TimeMatrix):
            return NotImplemented
        return self.stop_ids == other.stop_ids and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclasses.dataclass(frozen=True, eq=False)
class RouteInstance:
    id: str
    station: str
    departure: datetime
    # cm^3
    capacity: float
    stops: Tuple[Stop, ...]
    packages: Tuple[Package, ...]
    times: TimeMatrix
    actual: Optional[StopSequence] = None
    rating: Optional[str] = None

    @property
    def depot(self) -> Stop:
        return self.stops[0]

    @property
    def stop_ids(self) -> Tuple[str, ...]:
        return self.times.stop_ids

    @property
    def delivery_ids(self) -> Tuple[str, ...]:
        return self.stop_ids[1:]

    @cached_property
    def stop_by_id(self) -> Mapping[str, Stop]:
        return immutabledict((stop.id, stop) for stop in self.stops)

    @cached_property
    def package_counts(self) -> Mapping[str, int]:
        counts = Counter(package.stop for package in self.packages)
        return immutabledict((stop_id, counts.get(stop_id, 0)) for stop_id in self.stop_ids)

    @cached_property
    def package_volumes(self) -> Mapping[str, float]:
        volumes = dict.fromkeys(self.stop_ids, 0.0)
        for package in self.packages:
            volumes[package.stop] += package.volume
        return immutabledict(volumes)

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(self.id.encode())
        for stop in self.stops:
            h.update(f"{stop.id}|{stop.lat!r}|{stop.lng!r}|{stop.zone}|{stop.kind};".encode())
        h.update(self.times.values.tobytes())
        for stop_id in self.stop_ids:
            h.update(f"{stop_id}:{self.package_counts[stop_id]}:{self.package_volumes[stop_id]!r};".encode())
        if self.actual is not None:
            h.update("|".join(self.actual).encode())
        return h.hexdigest()

    def with_actual(self, actual: StopSequence) -> "RouteInstance":
        return dataclasses.replace(self, actual=tuple(actual))

    def __eq__(self, other):
        if not isinstance(other, RouteInstance):
            return NotImplemented
        return all(getattr(self, f.name) == getattr(other, f.name) for f in dataclasses.fields(self))

    __hash__ = None


def is_complete_sequence(instance: RouteInstance, sequence) -> bool:
    """A complete StopSequence starts at the depot and visits every stop exactly once"""
    sequence = tuple(sequence)
    return (
        len(sequence) == len(instance.stop_ids)
        and len(sequence) > 0
        and sequence[0] == instance.depot.id
        and set(sequence) == set(instance.stop_ids)
    )


def validate_instance(instance: RouteInstance) -> RouteInstance:
    route_id = instance.id
    if not route_id:
        raise RouteValidationError(route_id, "empty route id")
    ids = [stop.id for stop in instance.stops]
    if any(not stop_id for stop_id in ids):
        raise RouteValidationError(route_id, "empty stop id")
    if len(set(ids)) != len(ids):
        raise RouteValidationError(route_id, "stop ids are not unique")
    depots = [stop for stop in instance.stops if stop.is_depot]
    if len(depots) != 1:
        raise RouteValidationError(route_id, f"exactly one depot is expected, {len(depots)} found")
    if not instance.stops[0].is_depot:
        raise RouteValidationError(route_id, "depot must be the first stop")
    if depots[0].zone is not None:
        raise RouteValidationError(route_id, f"depot {depots[0].id} has zone {depots[0].zone}")
    if tuple(ids) != instance.times.stop_ids:
        raise RouteValidationError(route_id, "travel time matrix doesn't cover the route stop set")
    values = instance.times.values
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise RouteValidationError(route_id, "travel times must be finite and non-negative")
    if np.any(np.diag(values) != 0):
        raise RouteValidationError(route_id, "travel time matrix diagonal must be zero")
    known = set(ids)
    for package in instance.packages:
        if package.stop not in known:
            raise RouteValidationError(route_id, f"package {package.id} references unknown stop {package.stop}")
    if instance.actual is not None and not is_complete_sequence(instance, instance.actual):
        raise RouteValidationError(route_id, "actual sequence is not a permutation of all stops starting at the depot")
    if instance.rating is not None and instance.rating not in RATINGS:
        raise RouteValidationError(route_id, f"unknown rating {instance.rating!r}")
    return instance
