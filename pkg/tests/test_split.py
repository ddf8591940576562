import dataclasses

import pytest

from tests.factories import line_instance
from zone_router import config
from zone_router.data import filter_high_quality, split_train_test, split_train_test_by_station
from zone_router.data.split import _train_size


def routes(n, station="S1"):
    return [dataclasses.replace(line_instance(2, route_id=f"{station}_{i:03d}"), station=station) for i in range(n)]


def ids(instances):
    return [instance.id for instance in instances]


def test_seventy_thirty():
    train, test = split_train_test(routes(10), 0.7, seed=1)
    assert len(train) == 7
    assert len(test) == 3
    assert sorted(ids(train) + ids(test)) == ids(routes(10))


def test_deterministic_under_seed():
    assert split_train_test(routes(20), seed=3) == split_train_test(routes(20), seed=3)
    assert ids(split_train_test(routes(20), seed=3)[0]) != ids(split_train_test(routes(20), seed=4)[0])


def test_rounding():
    assert _train_size(2718, 0.7) == 1903
    assert 2718 - _train_size(2718, 0.7) == 815
    assert _train_size(10, 0.75) == 8


def test_defaults_from_config():
    config.TRAIN_FRACTION = 0.5
    train, test = split_train_test(routes(10))
    assert len(train) == 5


def test_empty_input():
    with pytest.raises(ValueError):
        split_train_test([])


def test_invalid_fraction():
    with pytest.raises(ValueError):
        split_train_test(routes(5), 1.0)


def test_per_depot():
    instances = routes(10, "S1") + routes(5, "S2")
    train, test = split_train_test_by_station(instances, 0.7, seed=0)
    assert sum(instance.station == "S1" for instance in train) == 7
    # 3.5 rounds up
    assert sum(instance.station == "S2" for instance in train) == 4
    assert len(train) + len(test) == 15
    assert not set(ids(train)) & set(ids(test))


def test_filter_high_quality():
    instances = routes(4)
    instances[1] = dataclasses.replace(instances[1], rating="medium")
    assert ids(filter_high_quality(instances)) == ["S1_000", "S1_002", "S1_003"]
