import dataclasses

import numpy as np
import pytest

from tests.factories import make_instance
from zone_router.data import SynthSpec, synth_instance
from zone_router.exceptions import ZoningError
from zone_router.routing import savings_tour
from zone_router.util import minmax_normalize
from zone_router.zones import (
    DEPOT_ZONE,
    FALLBACK_ZONE,
    STOP_FEATURES,
    ZONE_FEATURES,
    FeatureTensor,
    build_partition,
    check_theta,
    cost_matrix,
    raw_stop_features,
    raw_zone_features,
    stop_features,
    zone_features,
)


def repair_fixture(c_to_b):
    times = [
        [0.0, 4.0, 4.0, 4.0],
        [4.0, 0.0, 9.0, 9.0],
        [4.0, 9.0, 0.0, 9.0],
        [4.0, 5.0, c_to_b, 0.0],
    ]
    return make_instance(["D", "a", "b", "c"], times, zones=[None, "A-2.1B", "A-1.1A", None])


def test_repair_nearest_zone():
    partition = build_partition(repair_fixture(c_to_b=3.0))
    assert partition.zone_of["c"] == "A-1.1A"
    assert partition.repaired == ("c",)


def test_repair_tie_goes_to_smaller_zone_id():
    partition = build_partition(repair_fixture(c_to_b=5.0))
    assert partition.zone_of["c"] == "A-1.1A"
    partition = build_partition(repair_fixture(c_to_b=5.5))
    assert partition.zone_of["c"] == "A-2.1B"


def test_partition_layout():
    partition = build_partition(repair_fixture(c_to_b=3.0))
    assert partition.zone_ids == (DEPOT_ZONE, "A-1.1A", "A-2.1B")
    assert partition.zones == ("A-1.1A", "A-2.1B")
    assert partition.members[DEPOT_ZONE] == ("D",)
    assert partition.members["A-1.1A"] == ("b", "c")
    assert partition.zone_of["D"] == DEPOT_ZONE
    assert len(partition) == 3


def test_all_stops_unzoned():
    instance = make_instance(["D", "a", "b"], np.ones((3, 3)) - np.eye(3))
    with pytest.raises(ZoningError):
        build_partition(instance)
    partition = build_partition(instance, single_zone_fallback=True)
    assert partition.zones == (FALLBACK_ZONE,)
    assert partition.members[FALLBACK_ZONE] == ("a", "b")


def test_partition_cover_with_deleted_labels():
    rng = np.random.default_rng(0)
    for seed in range(20):
        instance = synth_instance(SynthSpec(n_zones=4, seed=seed))
        drop = rng.random(len(instance.stops)) < 0.3
        drop[0] = False
        stops = tuple(dataclasses.replace(stop, zone=None) if d else stop for stop, d in zip(instance.stops, drop))
        partition = build_partition(dataclasses.replace(instance, stops=stops))
        members = [stop_id for zone in partition.zones for stop_id in partition.members[zone]]
        assert sorted(members) == sorted(instance.delivery_ids)
        assert all(partition.zone_of[stop_id] in partition.zones for stop_id in instance.delivery_ids)


def singletons_fixture():
    times = [
        [0.0, 3.0, 6.0],
        [2.0, 0.0, 7.0],
        [4.0, 5.0, 0.0],
    ]
    return make_instance(["D", "a", "b"], times, zones=[None, "A-1.2B", "A-2.2B"])


def test_mean_time_of_singletons():
    instance = singletons_fixture()
    raw = raw_zone_features(instance, build_partition(instance))
    assert raw[0, 1, 2] == 7.0
    assert raw[0, 2, 1] == 5.0
    assert raw[0, 0, 1] == 3.0


def test_mean_time_of_zones():
    times = np.arange(25, dtype=float).reshape(5, 5)
    np.fill_diagonal(times, 0.0)
    instance = make_instance(["D", "a", "b", "c", "d"], times, zones=[None, "A-1.1A", "A-1.1A", "B-1.1A", "B-1.1A"])
    raw = raw_zone_features(instance, build_partition(instance))
    # rows a, b to columns c, d
    assert raw[0, 1, 2] == pytest.approx(np.mean([8.0, 9.0, 13.0, 14.0]))
    assert raw[0, 0, 2] == pytest.approx(np.mean([3.0, 4.0]))


def test_depot_ratio_convention():
    instance = singletons_fixture()
    raw = raw_zone_features(instance, build_partition(instance))
    np.testing.assert_allclose(raw[2], [[0.0, 1.0, 1.0], [1.0, 0.0, 2.0], [1.0, 0.5, 0.0]])
    np.testing.assert_allclose(raw[3], [[0.0, 1.0, 1.0], [1.0, 0.0, 2.0], [1.0, 0.5, 0.0]])


def test_same_main_zone():
    times = np.ones((4, 4)) - np.eye(4)
    instance = make_instance(["D", "a", "b", "c"], times, zones=[None, "A-1.2B", "A-1.3C", "A-2.2B"])
    raw = raw_zone_features(instance, build_partition(instance))
    np.testing.assert_array_equal(
        raw[4],
        [
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ],
    )


def test_unparseable_zone_never_matches():
    times = np.ones((3, 3)) - np.eye(3)
    instance = make_instance(["D", "a", "b"], times, zones=[None, "north", "north-2"])
    raw = raw_zone_features(instance, build_partition(instance))
    assert not raw[4].any()


def test_centroid_distance():
    coords = [(47.6, -122.3), (47.61, -122.3), (47.6, -122.3)]
    times = np.ones((3, 3)) - np.eye(3)
    instance = make_instance(["D", "a", "b"], times, zones=[None, "A-1.1A", "A-1.2A"], coords=coords)
    raw = raw_zone_features(instance, build_partition(instance))
    # 0.01 degree of latitude
    assert raw[1, 1, 2] == pytest.approx(1111.95, rel=1e-4)
    assert raw[1, 0, 2] == pytest.approx(0.0, abs=1e-6)
    np.testing.assert_allclose(raw[1], raw[1].T)


def test_normalized_features_in_unit_interval():
    instance = synth_instance(SynthSpec(n_zones=5, seed=3, noise=10.0))
    features = zone_features(instance, build_partition(instance))
    assert features.names == ZONE_FEATURES
    assert features.values.shape == (5, 6, 6)
    assert features.values.min() >= 0.0
    assert features.values.max() <= 1.0
    assert not np.any(features.values[:, np.arange(6), np.arange(6)])


def test_constant_feature_normalizes_to_zero():
    values = np.stack([np.full((3, 3), 7.0), np.arange(9.0).reshape(3, 3)])
    normalized = minmax_normalize(values)
    np.testing.assert_array_equal(normalized[0], np.zeros((3, 3)))
    assert normalized[1].max() == 1.0


def test_cost_of_single_pair():
    values = np.zeros((5, 2, 2))
    values[:, 0, 1] = [0.5, 0.2, 0.1, 0.1, 1.0]
    features = FeatureTensor(("x", "y"), ZONE_FEATURES, values)
    costs = cost_matrix(features, [2.0, 1.0, 1.0, 1.0, 3.0])
    assert costs[0, 1] == pytest.approx(4.4)
    assert costs[1, 0] == 0.0


def test_cost_of_zero_features():
    features = FeatureTensor(("x", "y", "z"), ZONE_FEATURES, np.zeros((5, 3, 3)))
    np.testing.assert_array_equal(cost_matrix(features, np.ones(5)), np.zeros((3, 3)))


def test_theta_bounds():
    with pytest.raises(ValueError):
        check_theta([1.0, 0.0, 0.0, 0.0, 0.0], 5)
    with pytest.raises(ValueError):
        check_theta([1.0, 1.0, 1.0, 1.0, 10.5], 5)
    with pytest.raises(ValueError):
        check_theta([1.0, 1.0, 1.0, 1.0], 5)
    np.testing.assert_array_equal(check_theta([1, 10, 1, 10, 1], 5), [1.0, 10.0, 1.0, 10.0, 1.0])


def test_cost_is_linear_in_theta():
    rng = np.random.default_rng(1)
    for seed in range(10):
        instance = synth_instance(SynthSpec(n_zones=6, seed=seed))
        features = zone_features(instance, build_partition(instance))
        theta = rng.uniform(1.0, 5.0, size=5)
        costs = cost_matrix(features, theta)
        doubled = cost_matrix(features, 2.0 * theta)
        np.testing.assert_allclose(doubled, 2.0 * costs)
        assert savings_tour(doubled) == savings_tour(costs)


def test_stop_features_fixture():
    times = [
        [0.0, 2.0, 4.0],
        [3.0, 0.0, 5.0],
        [6.0, 1.0, 0.0],
    ]
    instance = make_instance(["D", "a", "b"], times, package_counts=[0, 2, 1])
    features = stop_features(instance)
    assert features.names == STOP_FEATURES
    assert features.node_ids == ("D", "a", "b")
    np.testing.assert_allclose(
        features.values,
        [
            [[0.0, 0.2, 0.6], [0.4, 0.0, 0.8], [1.0, 0.0, 0.0]],
            [[0.0, 1.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.25, 0.0]],
            [[0.0, 1.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.25, 0.0]],
            [[0.0, 1.0, 1.0], [0.0, 0.0, 0.25], [0.0, 1.0, 0.0]],
        ],
    )


def test_equal_package_counts():
    times = np.arange(16, dtype=float).reshape(4, 4)
    np.fill_diagonal(times, 0.0)
    instance = make_instance(["D", "a", "b", "c"], times, package_counts=[0, 3, 3, 3])
    raw = raw_stop_features(instance)
    np.testing.assert_allclose(raw[3, 1:, 1:], np.ones((3, 3)) - np.eye(3))


def test_feature_frame():
    instance = singletons_fixture()
    frame = zone_features(instance, build_partition(instance)).to_frame(instance.id)
    assert len(frame) == 6
    assert list(frame.columns) == ["route_id", "from", "to", *ZONE_FEATURES]
    assert set(frame["route_id"]) == {"R1"}
