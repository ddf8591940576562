"""Zone-level tour, then per-zone shortest Hamiltonian paths between candidate entry and exit stops"""

import dataclasses
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from zone_router import config
from zone_router.data.model import RouteInstance, StopSequence
from zone_router.routers._base import _BaseRouter
from zone_router.routing import path_cost, savings_path, savings_tour, two_opt
from zone_router.zones import (
    DEPOT_ZONE,
    ZONE_FEATURES,
    ZonePartition,
    build_partition,
    zone_cost_matrix,
    zone_features,
)


@dataclasses.dataclass(frozen=True)
class CandidateSet:
    zone: str
    # ranked, best first
    entries: Tuple[str, ...]
    exits: Tuple[str, ...]
    # full exit ranking, used when entries and exits leave no valid pair
    exit_ranking: Tuple[str, ...] = ()


@dataclasses.dataclass(frozen=True)
class ZoneRoute:
    zone: str
    entry: str
    exit: str
    stops: Tuple[str, ...]
    cost: float
    solves: int


def is_zone_contiguous(sequence: Sequence[str], zone_of: Mapping[str, Optional[str]]) -> bool:
    """Stops of every zone form a single block of the sequence, the depot is ignored"""
    closed = set()
    current = None
    for stop_id in sequence:
        zone = zone_of.get(stop_id)
        if zone is None or zone == DEPOT_ZONE:
            continue
        if zone != current:
            if zone in closed:
                return False
            if current is not None:
                closed.add(current)
            current = zone
    return True


def solve_zone_sequence(instance: RouteInstance, partition: ZonePartition, theta, two_opt_pass=False):
    """Zones in visiting order, starting with the depot pseudo-zone"""
    costs = zone_cost_matrix(zone_features(instance, partition), theta)
    if len(partition) <= 2:
        return partition.zone_ids
    tour = savings_tour(costs, depot=0)
    if two_opt_pass:
        tour = two_opt(costs, tour, closed=True)
    return tuple(partition.zone_ids[i] for i in tour)


def _ranked(stop_ids, scores):
    return tuple(stop_id for _, stop_id in sorted(zip(scores, stop_ids)))


def candidate_sets(instance: RouteInstance, partition: ZonePartition, zone_sequence, zone, h) -> CandidateSet:
    """Top-h entry stops (closest from the previous zone) and exit stops (closest to the next one)

    The last zone returns to the depot: its exits are the h - 1 stops closest to the depot plus the depot itself.
    """
    if h < 1:
        raise ValueError(f"h must be positive, {h} given")
    position = zone_sequence.index(zone)
    members = partition.members[zone]
    previous = partition.members[zone_sequence[position - 1]]
    entry_scores = instance.times.submatrix(previous, members).mean(axis=0)
    entries = _ranked(members, entry_scores)[:h]
    depot = instance.depot.id
    if position + 1 < len(zone_sequence):
        following = partition.members[zone_sequence[position + 1]]
        exit_ranking = _ranked(members, instance.times.submatrix(members, following).mean(axis=1))
        exits = exit_ranking[:h]
    else:
        exit_ranking = _ranked(members, instance.times.submatrix(members, [depot])[:, 0])
        exits = exit_ranking[: h - 1] + (depot,)
    return CandidateSet(zone=zone, entries=entries, exits=exits, exit_ranking=exit_ranking)


class HierarchicalRouter(_BaseRouter):
    method = "hrlp"
    theta_dim = len(ZONE_FEATURES)
    default_theta = np.array([10.0, 1.0, 1.0, 1.0, 1.0])

    def __init__(self, h=None, link_aware=False, two_opt=False, single_zone_fallback=False):
        super().__init__(two_opt=two_opt)
        self.h = config.CANDIDATES_H if h is None else int(h)
        if self.h < 1:
            raise ValueError(f"h must be positive, {self.h} given")
        self.link_aware = link_aware
        self.single_zone_fallback = single_zone_fallback

    @property
    def options(self):
        return {
            **super().options,
            "h": self.h,
            "link_aware": self.link_aware,
            "single_zone_fallback": self.single_zone_fallback,
        }

    def _path(self, instance, nodes, entry, exit):
        costs = instance.times.submatrix(nodes)
        origin = nodes.index(entry)
        destination = nodes.index(exit)
        path = savings_path(costs, origin, destination)
        if self.two_opt:
            path = two_opt(costs, path, closed=False)
        return [nodes[i] for i in path], path_cost(costs, path)

    def route_zone(self, instance: RouteInstance, candidates: CandidateSet, members, previous_exit) -> ZoneRoute:
        depot = instance.depot.id
        pairs = [(a, b) for a in candidates.entries for b in candidates.exits if a != b or len(members) == 1]
        if not pairs:
            # h = 1 and the only entry is the only exit, take the next exit of the ranking
            promoted = next(b for b in candidates.exit_ranking if b not in candidates.exits)
            pairs = [(a, promoted) for a in candidates.entries]

        best = None
        solves = 0
        for a, b in pairs:
            if b == depot:
                nodes = list(members) + [depot]
                stops, cost = self._path(instance, nodes, a, b)
                stops = stops[:-1]
                solves += 1
            elif len(members) == 1:
                stops, cost = [a], 0.0
            else:
                stops, cost = self._path(instance, list(members), a, b)
                solves += 1
            if candidates.exits[-1] == depot and b != depot:
                # last zone, return leg from a delivery exit
                cost += instance.times[b, depot]
            objective = cost + instance.times[previous_exit, a] if self.link_aware else cost
            if best is None or objective < best[0]:
                zone_route = ZoneRoute(zone=candidates.zone, entry=a, exit=b, stops=tuple(stops), cost=cost, solves=0)
                best = (objective, zone_route)
        return dataclasses.replace(best[1], solves=solves)

    def route_detailed(self, instance: RouteInstance, theta=None):
        theta = self.default_theta if theta is None else theta
        partition = build_partition(instance, self.single_zone_fallback)
        zone_sequence = solve_zone_sequence(instance, partition, theta, self.two_opt)
        sequence = [instance.depot.id]
        zone_routes = []
        for zone in zone_sequence[1:]:
            candidates = candidate_sets(instance, partition, zone_sequence, zone, self.h)
            zone_route = self.route_zone(instance, candidates, partition.members[zone], sequence[-1])
            sequence.extend(zone_route.stops)
            zone_routes.append(zone_route)
        return tuple(sequence), tuple(zone_routes)

    def route(self, instance: RouteInstance, theta=None) -> StopSequence:
        sequence, _ = self.route_detailed(instance, theta)
        return sequence


def route_instance(instance: RouteInstance, theta, h=None, **options) -> StopSequence:
    return HierarchicalRouter(h=h, **options).route(instance, theta)


def route_instance_detailed(instance: RouteInstance, theta, h=None, **options):
    return HierarchicalRouter(h=h, **options).route_detailed(instance, theta)
