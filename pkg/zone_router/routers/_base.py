from typing import Optional

from zone_router.data.model import RouteInstance, StopSequence
from zone_router.routing import savings_tour, two_opt


class _BaseRouter:
    __routers = {}

    method: Optional[str] = None
    theta_dim = 0
    default_theta = None

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.method is None:
            return
        name = cls._normalize_name(cls.method)
        if name in _BaseRouter.__routers:
            raise ValueError(f'Router method "{cls.method}" already exists')
        _BaseRouter.__routers[name] = cls

    def __init__(self, two_opt=False):
        self.two_opt = two_opt

    @staticmethod
    def _normalize_name(name):
        return name.replace(" ", "-").replace("_", "-").lower()

    @classmethod
    def get_routers(cls):
        return cls.__routers.copy()

    @classmethod
    def get_router_class(cls, method):
        return cls.__routers[cls._normalize_name(method)]

    @property
    def options(self):
        return {"two_opt": self.two_opt}

    def tour(self, costs, stop_ids) -> StopSequence:
        """Savings tour over costs whose rows follow stop_ids, depot at index 0"""
        tour = savings_tour(costs, depot=0)
        if self.two_opt:
            tour = two_opt(costs, tour, closed=True)
        return tuple(stop_ids[i] for i in tour)

    def route(self, instance: RouteInstance, theta=None) -> StopSequence:
        raise NotImplementedError
