def setup_config(item):
    from zone_router import config

    config.CACHE_TYPE = "memory"
    config.GAP_PENALTY = 1000.0
    config.CANDIDATES_H = 2
    config.BO_INITIAL_POINTS = 20
    config.BO_ITERATIONS = 100
    config.BO_SEED = 0
    config.TRAIN_FRACTION = 0.7
    config.SPLIT_SEED = 42
    config.JOBS = 1


def setup_cache(item):
    from zone_router import cache

    cache.clear()


def pytest_runtest_setup(item):
    setup_config(item)
    setup_cache(item)
