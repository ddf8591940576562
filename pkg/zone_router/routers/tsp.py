from zone_router.data.model import RouteInstance, StopSequence
from zone_router.routers._base import _BaseRouter


class StandardTspRouter(_BaseRouter):
    """Savings tour over raw travel times, no learnable weights"""

    method = "tsp"

    def route(self, instance: RouteInstance, theta=None) -> StopSequence:
        if len(instance.stop_ids) <= 2:
            return instance.stop_ids
        return self.tour(instance.times.values, instance.stop_ids)


def standard_tsp(instance: RouteInstance, two_opt=False) -> StopSequence:
    return StandardTspRouter(two_opt=two_opt).route(instance)
