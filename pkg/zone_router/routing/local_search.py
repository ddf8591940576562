import numpy as np

from zone_router.routing.savings import path_cost, tour_cost


def two_opt(costs, sequence, closed=True):
    """Segment reversals while they shorten the sequence, first node (and last one of a path) fixed"""
    costs = np.asarray(costs, dtype=float)
    sequence = list(sequence)
    cost = tour_cost if closed else path_cost
    last = len(sequence) if closed else len(sequence) - 1
    current = cost(costs, sequence)
    improved = True
    while improved:
        improved = False
        for i in range(1, last - 1):
            for j in range(i + 1, last):
                candidate = sequence[:i] + sequence[i : j + 1][::-1] + sequence[j + 1 :]
                value = cost(costs, candidate)
                if value < current - 1e-9:
                    sequence = candidate
                    current = value
                    improved = True
    return sequence
