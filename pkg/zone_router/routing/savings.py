"""Clarke-Wright savings for a single uncapacitated vehicle

Nodes are matrix indices, ties are broken by the smaller index, so callers order
their nodes lexicographically by id.
"""

import numpy as np

from zone_router.exceptions import SolverError


def check_costs(costs):
    costs = np.asarray(costs, dtype=float)
    if costs.ndim != 2 or costs.shape[0] != costs.shape[1]:
        raise SolverError(f"Cost matrix must be square, {costs.shape} given")
    if not np.all(np.isfinite(costs)):
        raise SolverError("Cost matrix contains non-finite entries")
    return costs


def _merge(nodes, order):
    """Join directed fragments tail -> head following order until a single fragment remains"""
    fragment_of = {node: node for node in nodes}
    fragments = {node: [node] for node in nodes}
    while len(fragments) > 1:
        merged = False
        for i, j in order:
            fi = fragment_of[i]
            fj = fragment_of[j]
            if fi == fj or fragments[fi][-1] != i or fragments[fj][0] != j:
                continue
            fragments[fi].extend(fragments[fj])
            for node in fragments.pop(fj):
                fragment_of[node] = fi
            merged = True
            if len(fragments) == 1:
                break
        if not merged:
            raise SolverError("Savings merge stalled")
    (fragment,) = fragments.values()
    return fragment


def _pair_order(nodes, savings):
    """Ordered pairs (i, j), i != j, by descending savings, then (i, j)"""
    nodes = np.asarray(nodes, dtype=int)
    i, j = np.meshgrid(nodes, nodes, indexing="ij")
    mask = i != j
    i = i[mask]
    j = j[mask]
    order = np.lexsort((j, i, -savings[i, j]))
    return list(zip(i[order].tolist(), j[order].tolist()))


def savings_tour(costs, depot=0):
    """Closed tour starting at depot"""
    costs = check_costs(costs)
    nodes = [node for node in range(costs.shape[0]) if node != depot]
    if len(nodes) <= 1:
        return [depot] + nodes
    savings = costs[:, depot][:, np.newaxis] + costs[depot, :][np.newaxis, :] - costs
    fragment = _merge(nodes, _pair_order(nodes, savings))
    return [depot] + fragment


def savings_path(costs, origin, destination):
    """Open Hamiltonian path over all matrix nodes from origin to destination

    Savings on the interior nodes closed by a virtual depot that is left as origin and
    entered as destination, s(i, j) = c(i, destination) + c(origin, j) - c(i, j).
    """
    costs = check_costs(costs)
    n = costs.shape[0]
    if n == 1 and origin == destination:
        return [origin]
    if origin == destination:
        raise SolverError("Path with more than one node needs distinct origin and destination")
    interior = [node for node in range(n) if node != origin and node != destination]
    if not interior:
        return [origin, destination]
    savings = costs[:, destination][:, np.newaxis] + costs[origin, :][np.newaxis, :] - costs
    fragment = _merge(interior, _pair_order(interior, savings))
    return [origin] + fragment + [destination]


def tour_cost(costs, tour):
    costs = np.asarray(costs, dtype=float)
    tour = np.asarray(tour, dtype=int)
    if len(tour) < 2:
        return 0.0
    return float(costs[tour, np.roll(tour, -1)].sum())


def path_cost(costs, path):
    costs = np.asarray(costs, dtype=float)
    path = np.asarray(path, dtype=int)
    if len(path) < 2:
        return 0.0
    return float(costs[path[:-1], path[1:]].sum())
