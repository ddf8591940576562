from zone_router.routers._base import _BaseRouter
from zone_router.routers.hierarchical import (
    CandidateSet,
    HierarchicalRouter,
    ZoneRoute,
    candidate_sets,
    is_zone_contiguous,
    route_instance,
    route_instance_detailed,
    solve_zone_sequence,
)
from zone_router.routers.stop_level import StopLevelRouter, stop_level_route
from zone_router.routers.tsp import StandardTspRouter, standard_tsp

router_classes = _BaseRouter.get_routers


def get_router(method, **options):
    try:
        router_class = _BaseRouter.get_router_class(method)
    except KeyError as e:
        raise ValueError(f'No router for method "{method}", use one of: {", ".join(router_classes())}') from e
    return router_class(**options)
