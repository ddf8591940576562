import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, List, NamedTuple

import numpy as np

from zone_router.data.model import (
    DELIVERY,
    DEPOT,
    Package,
    RouteInstance,
    Stop,
    StopSequence,
    TimeMatrix,
    validate_instance,
)
from zone_router.exceptions import InputError, RouteValidationError
from zone_router.util import read_json, write_json

ROUTE_DATA = "route_data.json"
ACTUAL_SEQUENCES = "actual_sequences.json"
TRAVEL_TIMES = "travel_times.json"
PACKAGE_DATA = "package_data.json"

STOP_TYPES = {"Station": DEPOT, "Dropoff": DELIVERY}
SCAN_STATUSES = {"DELIVERED": "delivered", "DELIVERY_ATTEMPTED": "delivery-attempted", "REJECTED": "rejected"}
DATETIME_FORMAT = "%Y-%m-%d %H:%M:%S"


class Dataset(NamedTuple):
    instances: List[RouteInstance]
    errors: List[RouteValidationError]


def _invert(d):
    return {value: key for key, value in d.items()}


def _parse_datetime(s):
    if s is None:
        return None
    return datetime.fromisoformat(s)


def _parse_stops(route_id, stops) -> List[Stop]:
    parsed = []
    for stop_id, record in stops.items():
        try:
            kind = STOP_TYPES[record["type"]]
        except KeyError as e:
            raise RouteValidationError(route_id, f"stop {stop_id} has unknown type {record.get('type')!r}") from e
        zone = record.get("zone_id") or None
        parsed.append(Stop(id=stop_id, lat=float(record["lat"]), lng=float(record["lng"]), zone=zone, kind=kind))
    # depot first, then deliveries in lexicographic order
    parsed.sort(key=lambda stop: (not stop.is_depot, stop.id))
    return parsed


def _parse_times(route_id, stop_ids, times) -> TimeMatrix:
    if times is None:
        raise RouteValidationError(route_id, "no travel times")
    unknown = set(times) - set(stop_ids)
    if unknown:
        raise RouteValidationError(route_id, f"travel times reference unknown stops {sorted(unknown)}")
    values = np.empty((len(stop_ids), len(stop_ids)), dtype=float)
    for i, u in enumerate(stop_ids):
        row = times.get(u)
        if row is None:
            raise RouteValidationError(route_id, f"no travel times from stop {u}")
        for j, v in enumerate(stop_ids):
            try:
                values[i, j] = float(row[v])
            except (KeyError, TypeError) as e:
                raise RouteValidationError(route_id, f"no travel time from {u} to {v}") from e
    return TimeMatrix(tuple(stop_ids), values)


def _parse_actual(route_id, stop_ids, record):
    if record is None:
        return None
    order = record.get("actual", record) if isinstance(record, dict) else record
    if isinstance(order, list):
        return tuple(order)
    unknown = set(order) - set(stop_ids)
    if unknown:
        raise RouteValidationError(route_id, f"actual sequence references unknown stops {sorted(unknown)}")
    return tuple(sorted(order, key=lambda stop_id: (order[stop_id], stop_id)))


def _parse_packages(route_id, stop_ids, packages) -> List[Package]:
    if packages is None:
        return []
    known = set(stop_ids)
    parsed = []
    for stop_id in sorted(packages):
        if stop_id not in known:
            raise RouteValidationError(route_id, f"packages reference unknown stop {stop_id}")
        for package_id in sorted(packages[stop_id]):
            record = packages[stop_id][package_id]
            window = record.get("time_window") or {}
            start = _parse_datetime(window.get("start_time_utc"))
            end = _parse_datetime(window.get("end_time_utc"))
            dims = record.get("dimensions") or {}
            try:
                package = Package(
                    id=package_id,
                    stop=stop_id,
                    status=SCAN_STATUSES.get(record.get("scan_status"), "delivered"),
                    dims=(
                        float(dims.get("width_cm", 0.0)),
                        float(dims.get("depth_cm", 0.0)),
                        float(dims.get("height_cm", 0.0)),
                    ),
                    time_window=None if start is None or end is None else (start, end),
                    service_time=float(record.get("planned_service_time_seconds") or 0.0),
                )
            except ValueError as e:
                raise RouteValidationError(route_id, str(e)) from e
            parsed.append(package)
    return parsed


def parse_route(route_id, route, actual=None, times=None, packages=None) -> RouteInstance:
    stops = _parse_stops(route_id, route.get("stops") or {})
    if not stops or not stops[0].is_depot:
        raise RouteValidationError(route_id, "route has no depot")
    stop_ids = [stop.id for stop in stops]
    rating = route.get("route_score")
    instance = RouteInstance(
        id=route_id,
        station=route.get("station_code") or "",
        departure=datetime.fromisoformat(f"{route['date_YYYY_MM_DD']} {route['departure_time_utc']}"),
        capacity=float(route.get("executor_capacity_cm3") or 0.0),
        stops=tuple(stops),
        packages=tuple(_parse_packages(route_id, stop_ids, packages)),
        times=_parse_times(route_id, stop_ids, times),
        actual=_parse_actual(route_id, stop_ids, actual),
        rating=None if rating is None else rating.lower(),
    )
    return validate_instance(instance)


def ingest(dir_path) -> Dataset:
    """Load challenge-format JSON files, one RouteInstance per route id

    Routes failing validation are logged and returned in Dataset.errors
    """
    dir_path = Path(dir_path)
    route_data = read_json(dir_path / ROUTE_DATA)
    actual_sequences = read_json(dir_path / ACTUAL_SEQUENCES)
    travel_times = read_json(dir_path / TRAVEL_TIMES)
    package_data = read_json(dir_path / PACKAGE_DATA)

    instances = []
    errors = []
    for route_id in sorted(route_data):
        try:
            instance = parse_route(
                route_id,
                route_data[route_id],
                actual=actual_sequences.get(route_id),
                times=travel_times.get(route_id),
                packages=package_data.get(route_id),
            )
        except RouteValidationError as e:
            logging.warning(str(e))
            errors.append(e)
            continue
        except (KeyError, TypeError, ValueError) as e:
            error = RouteValidationError(route_id, f"cannot parse route record: {e}")
            logging.warning(str(error))
            errors.append(error)
            continue
        unzoned = [stop.id for stop in instance.stops if not stop.is_depot and stop.zone is None]
        if unzoned:
            logging.info(f"Route {route_id} has {len(unzoned)} stops without zone, they will be repaired")
        instances.append(instance)
    logging.info(f"Ingested {len(instances)} routes from {dir_path}, {len(errors)} failed validation")
    return Dataset(instances, errors)


def _format_datetime(dt):
    return dt.strftime(DATETIME_FORMAT)


def route_record(instance: RouteInstance) -> dict:
    stop_types = _invert(STOP_TYPES)
    return {
        "station_code": instance.station,
        "date_YYYY_MM_DD": instance.departure.strftime("%Y-%m-%d"),
        "departure_time_utc": instance.departure.strftime("%H:%M:%S"),
        "executor_capacity_cm3": instance.capacity,
        "route_score": None if instance.rating is None else instance.rating.capitalize(),
        "stops": {
            stop.id: {"lat": stop.lat, "lng": stop.lng, "type": stop_types[stop.kind], "zone_id": stop.zone}
            for stop in instance.stops
        },
    }


def package_record(instance: RouteInstance) -> dict:
    statuses = _invert(SCAN_STATUSES)
    record = {stop_id: {} for stop_id in instance.stop_ids}
    for package in instance.packages:
        width, length, height = package.dims
        window = package.time_window
        record[package.stop][package.id] = {
            "scan_status": statuses[package.status],
            "time_window": {
                "start_time_utc": None if window is None else _format_datetime(window[0]),
                "end_time_utc": None if window is None else _format_datetime(window[1]),
            },
            "planned_service_time_seconds": package.service_time,
            "dimensions": {"depth_cm": length, "height_cm": height, "width_cm": width},
        }
    return record


def sequence_record(sequence: StopSequence, key="actual") -> dict:
    return {key: {stop_id: i for i, stop_id in enumerate(sequence)}}


def serialize(instances, dir_path):
    """Write instances in the challenge layout, ingest(serialize(x)) reproduces x"""
    dir_path = Path(dir_path)
    instances = sorted(instances, key=lambda instance: instance.id)
    write_json(dir_path / ROUTE_DATA, {instance.id: route_record(instance) for instance in instances})
    write_json(
        dir_path / ACTUAL_SEQUENCES,
        {instance.id: sequence_record(instance.actual) for instance in instances if instance.actual is not None},
    )
    write_json(
        dir_path / TRAVEL_TIMES,
        {
            instance.id: {
                u: {v: float(instance.times.values[i, j]) for j, v in enumerate(instance.stop_ids)}
                for i, u in enumerate(instance.stop_ids)
            }
            for instance in instances
        },
    )
    write_json(dir_path / PACKAGE_DATA, {instance.id: package_record(instance) for instance in instances})
    logging.info(f"Wrote {len(instances)} routes to {dir_path}")


def read_sequences(path) -> Dict[str, StopSequence]:
    """Sequences file: route id -> {"actual"|"proposed": {stop: order}} or route id -> [stop, ...]"""
    record = read_json(path)
    sequences = {}
    for route_id, value in record.items():
        if isinstance(value, dict) and len(value) == 1 and isinstance(next(iter(value.values())), dict):
            value = next(iter(value.values()))
        if isinstance(value, dict):
            sequences[route_id] = tuple(sorted(value, key=lambda stop_id: (value[stop_id], stop_id)))
        elif isinstance(value, list):
            sequences[route_id] = tuple(value)
        else:
            raise InputError(f"Cannot read sequence of route {route_id} from {path}")
    return sequences


def write_sequences(path, sequences: Dict[str, StopSequence], key="proposed"):
    write_json(path, {route_id: sequence_record(sequences[route_id], key=key) for route_id in sorted(sequences)})
