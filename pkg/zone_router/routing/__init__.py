from zone_router.routing.brute_force import MAX_NODES, brute_force
from zone_router.routing.local_search import two_opt
from zone_router.routing.savings import path_cost, savings_path, savings_tour, tour_cost
