from itertools import permutations

from zone_router.exceptions import SolverError
from zone_router.routing.savings import check_costs, path_cost, tour_cost

MAX_NODES = 10

TOUR = "tour"
PATH = "path"


def brute_force(costs, mode=TOUR, depot=0, origin=None, destination=None):
    """Exact optimum by enumeration, the lexicographically first one among equal costs"""
    costs = check_costs(costs)
    n = costs.shape[0]
    if n > MAX_NODES:
        raise SolverError(f"Brute force is limited to {MAX_NODES} nodes, {n} given")
    if mode == TOUR:
        fixed_head, fixed_tail = [depot], []
        cost = tour_cost
    elif mode == PATH:
        if origin is None or destination is None:
            raise ValueError("Path mode needs origin and destination")
        if n == 1 and origin == destination:
            return [origin]
        if origin == destination:
            raise SolverError("Path with more than one node needs distinct origin and destination")
        fixed_head, fixed_tail = [origin], [destination]
        cost = path_cost
    else:
        raise ValueError(f"Unknown brute force mode {mode!r}")

    interior = sorted(set(range(n)) - set(fixed_head) - set(fixed_tail))
    best = None
    best_cost = None
    for order in permutations(interior):
        candidate = fixed_head + list(order) + fixed_tail
        value = cost(costs, candidate)
        if best is None or value < best_cost - 1e-12 * max(1.0, abs(best_cost)):
            best = candidate
            best_cost = value
    return best
