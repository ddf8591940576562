import logging
import math
from itertools import groupby

import numpy as np

from zone_router import config


def filter_high_quality(instances):
    return [instance for instance in instances if instance.rating == "high"]


def _train_size(n, train_fraction):
    # half-up rounding, 0.7 * 2718 = 1902.6 -> 1903
    return int(math.floor(train_fraction * n + 0.5))


def _check_fraction(train_fraction):
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), {train_fraction} given")


def _split(instances, train_fraction, rng):
    permutation = rng.permutation(len(instances))
    k = _train_size(len(instances), train_fraction)
    return [instances[i] for i in permutation[:k]], [instances[i] for i in permutation[k:]]


def split_train_test(instances, train_fraction=None, seed=None):
    """Seeded shuffle split of the pooled corpus, |train| = round(train_fraction * n)"""
    train_fraction = config.TRAIN_FRACTION if train_fraction is None else train_fraction
    seed = config.SPLIT_SEED if seed is None else seed
    _check_fraction(train_fraction)
    instances = list(instances)
    if not instances:
        raise ValueError("Cannot split an empty set of routes")
    train, test = _split(instances, train_fraction, np.random.default_rng(seed))
    logging.info(f"Pooled split: {len(train)} train, {len(test)} test routes")
    return train, test


def split_train_test_by_station(instances, train_fraction=None, seed=None):
    """Same split applied to every depot independently, depots in lexicographic order"""
    train_fraction = config.TRAIN_FRACTION if train_fraction is None else train_fraction
    seed = config.SPLIT_SEED if seed is None else seed
    _check_fraction(train_fraction)
    instances = sorted(instances, key=lambda instance: (instance.station, instance.id))
    if not instances:
        raise ValueError("Cannot split an empty set of routes")
    rng = np.random.default_rng(seed)
    train = []
    test = []
    for station, group in groupby(instances, key=lambda instance: instance.station):
        station_train, station_test = _split(list(group), train_fraction, rng)
        train.extend(station_train)
        test.extend(station_test)
    logging.info(f"Per-depot split: {len(train)} train, {len(test)} test routes")
    return train, test


SPLITTERS = {
    "pooled": split_train_test,
    "per-depot": split_train_test_by_station,
}
