import numpy as np

from zone_router.data.model import RouteInstance, StopSequence
from zone_router.routers._base import _BaseRouter
from zone_router.zones import STOP_FEATURES, cost_matrix, stop_features


class StopLevelRouter(_BaseRouter):
    """Savings tour over theta-weighted stop features, zones are ignored"""

    method = "stop-bo"
    theta_dim = len(STOP_FEATURES)
    default_theta = np.array([10.0, 1.0, 1.0, 1.0])

    def route(self, instance: RouteInstance, theta=None) -> StopSequence:
        theta = self.default_theta if theta is None else theta
        costs = cost_matrix(stop_features(instance), theta)
        if len(instance.stop_ids) <= 2:
            return instance.stop_ids
        return self.tour(costs, instance.stop_ids)


def stop_level_route(instance: RouteInstance, theta, two_opt=False) -> StopSequence:
    return StopLevelRouter(two_opt=two_opt).route(instance, theta)
