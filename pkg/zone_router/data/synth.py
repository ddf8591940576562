"""Synthetic route instances: planar zone clusters around a depot"""

import dataclasses
import logging
import math
import string
from datetime import datetime
from itertools import product
from typing import Optional, Tuple

import numpy as np

from zone_router.data.model import DEPOT, Package, RouteInstance, Stop, TimeMatrix, validate_instance
from zone_router.exceptions import DegenerateGeometryError
from zone_router.util import unproject

ORIGIN = (47.6, -122.3)
DEPARTURE = datetime(2018, 7, 20, 15, 0, 0)
CAPACITY = 4.0e6
# travel-time noise has its own stream, so stop ids and packages do not depend on it
NOISE_STREAM = 1


@dataclasses.dataclass(frozen=True)
class SynthSpec:
    n_zones: int
    stops_per_zone: Tuple[int, int] = (3, 5)
    seed: int = 0
    # meters, zone centres lie on a circle around the depot
    radius: float = 2000.0
    spread: float = 300.0
    # m/s
    speed: float = 8.0
    # upper bound of the uniform non-negative noise added to travel times, seconds
    noise: float = 0.0
    # extra time of clockwise moves around the depot, 0 keeps the matrix symmetric
    circulation: float = 0.0
    packages_per_stop: Tuple[int, int] = (1, 3)
    route_id: Optional[str] = None
    station: str = "SYN1"

    def __post_init__(self):
        if self.n_zones < 1:
            raise ValueError(f"n_zones must be positive, {self.n_zones} given")
        low, high = self.stops_per_zone
        if not 1 <= low <= high:
            raise ValueError(f"Invalid stops per zone range {self.stops_per_zone}")
        if self.speed <= 0:
            raise ValueError(f"Speed must be positive, {self.speed} given")
        if self.noise < 0 or self.circulation < 0 or self.spread < 0 or self.radius < 0:
            raise ValueError("noise, circulation, spread and radius must be non-negative")


def zone_id(k):
    """Neighbouring zones share a main zone: A-1.1A, A-1.2A, A-2.1A, ..."""
    return f"A-{k // 2 + 1}.{k % 2 + 1}A"


def stop_codes(n, rng):
    length = 2
    while len(string.ascii_uppercase) ** length < n:
        length += 1
    codes = ["".join(letters) for letters in product(string.ascii_uppercase, repeat=length)]
    return [codes[i] for i in rng.choice(len(codes), size=n, replace=False)]


def travel_times(x, y, speed, noise=0.0, circulation=0.0, radius=1.0, rng=None):
    """Euclidean time plus optional noise and clockwise penalty, zero diagonal"""
    dist = np.hypot(x[:, np.newaxis] - x[np.newaxis, :], y[:, np.newaxis] - y[np.newaxis, :])
    times = dist / speed
    if circulation > 0:
        # cross < 0 for clockwise moves around the depot at the origin
        cross = x[:, np.newaxis] * y[np.newaxis, :] - y[:, np.newaxis] * x[np.newaxis, :]
        times = times + circulation * np.maximum(0.0, -cross) / (max(radius, 1.0) * speed)
    if noise > 0:
        times = times + rng.uniform(0.0, noise, size=times.shape)
    np.fill_diagonal(times, 0.0)
    return times


def nearest_neighbor_order(times, start, candidates):
    order = []
    current = start
    remaining = list(candidates)
    while remaining:
        # ties go to the earliest candidate
        current = min(remaining, key=lambda j: times[current, j])
        remaining.remove(current)
        order.append(current)
    return order


def synth_instance(spec: SynthSpec) -> RouteInstance:
    """Clustered instance whose benchmark visits zones counter-clockwise, stops by nearest neighbour"""
    rng = np.random.default_rng(spec.seed)
    low, high = spec.stops_per_zone
    sizes = rng.integers(low, high + 1, size=spec.n_zones)

    angles = 1.5 * np.pi * np.arange(spec.n_zones) / max(spec.n_zones - 1, 1)
    x = [0.0]
    y = [0.0]
    zones = [None]
    for k, (angle, size) in enumerate(zip(angles, sizes)):
        offsets = rng.normal(0.0, 1.0, size=(2, size)) * spec.spread
        x.extend(spec.radius * math.cos(angle) + offsets[0])
        y.extend(spec.radius * math.sin(angle) + offsets[1])
        zones.extend([zone_id(k)] * size)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.ptp(x) == 0 and np.ptp(y) == 0:
        raise DegenerateGeometryError("All synthetic stops coincide")

    noise_rng = np.random.default_rng([spec.seed, NOISE_STREAM])
    times = travel_times(x, y, spec.speed, spec.noise, spec.circulation, spec.radius, noise_rng)

    benchmark = []
    position = 0
    for k in range(spec.n_zones):
        members = [i for i, zone in enumerate(zones) if zone == zone_id(k)]
        order = nearest_neighbor_order(times, position, members)
        benchmark.extend(order)
        position = order[-1]

    ids = stop_codes(len(x), rng)
    lat, lng = unproject(x, y, *ORIGIN)
    stops = [
        Stop(id=ids[i], lat=float(lat[i]), lng=float(lng[i]), zone=zones[i], kind=DEPOT)
        if i == 0
        else Stop(id=ids[i], lat=float(lat[i]), lng=float(lng[i]), zone=zones[i])
        for i in range(len(x))
    ]
    # depot first, then deliveries in lexicographic order
    order = [0] + sorted(range(1, len(x)), key=lambda i: ids[i])

    packages = []
    for i in range(1, len(x)):
        for j in range(rng.integers(spec.packages_per_stop[0], spec.packages_per_stop[1] + 1)):
            packages.append(
                Package(
                    id=f"PKG-{ids[i]}-{j}",
                    stop=ids[i],
                    status="delivered",
                    dims=tuple(float(d) for d in np.round(rng.uniform(10.0, 60.0, size=3), 1)),
                    service_time=float(np.round(rng.uniform(30.0, 120.0))),
                )
            )

    route_id = spec.route_id or f"SYN_{spec.seed}_{spec.n_zones}"
    instance = RouteInstance(
        id=route_id,
        station=spec.station,
        departure=DEPARTURE,
        capacity=CAPACITY,
        stops=tuple(stops[i] for i in order),
        packages=tuple(sorted(packages, key=lambda package: (package.stop, package.id))),
        times=TimeMatrix(tuple(ids[i] for i in order), times[np.ix_(order, order)]),
        actual=tuple([ids[0]] + [ids[i] for i in benchmark]),
        rating="high",
    )
    return validate_instance(instance)


def synth_dataset(spec: SynthSpec, n_routes: int, n_stations: int = 1):
    """n_routes instances with consecutive seeds, spread over SYN1..SYN<n_stations>"""
    instances = []
    for i in range(n_routes):
        route_spec = dataclasses.replace(
            spec,
            seed=spec.seed + i,
            route_id=f"RouteID_SYN{i:04d}",
            station=f"SYN{i % n_stations + 1}",
        )
        instances.append(synth_instance(route_spec))
    logging.info(f"Generated {n_routes} synthetic routes with {spec.n_zones} zones each")
    return instances


def plant_benchmarks(instances, router, theta=None):
    """Replace benchmark sequences by the router's output, so that theta scores zero"""
    return [instance.with_actual(router.route(instance, theta)) for instance in instances]
