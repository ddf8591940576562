import functools

from cachetools import LRUCache, cached
from cachetools.keys import hashkey

from zone_router.config import CACHE_TYPE

MAXSIZE = 1 << 12

_lru_cache = LRUCache(MAXSIZE)


def instance_key(name, instance, *args, **kwargs):
    """Key of a function whose first argument is a RouteInstance, instances are identified by content"""
    return hashkey(name, instance.fingerprint, *args, **kwargs)


def _create_memory_cache():
    def memory_cache():
        def decorator(f):
            key = functools.partial(instance_key, f"{f.__module__}.{f.__qualname__}")
            return functools.wraps(f)(cached(cache=_lru_cache, key=key)(f))

        return decorator

    return memory_cache


def _create_no_cache():
    def no_cache():
        def decorator(f):
            return f

        return decorator

    return no_cache


CACHE_CREATORS = {
    "memory": _create_memory_cache,
    "none": _create_no_cache,
}


def _get_cache():
    try:
        return CACHE_CREATORS[CACHE_TYPE.lower().strip()]()
    except KeyError as e:
        raise ValueError(f'CACHE_TYPE must be one of: {", ".join(CACHE_CREATORS)}') from e


def clear():
    _lru_cache.clear()


def currsize():
    return _lru_cache.currsize


cache = _get_cache()
