from datetime import datetime

import numpy as np
import pytest

from tests.factories import line_instance, make_instance
from zone_router.data.model import Package, TimeMatrix, is_complete_sequence, validate_instance
from zone_router.exceptions import RouteValidationError


def test_time_matrix_shape():
    with pytest.raises(ValueError):
        TimeMatrix(("a", "b"), np.zeros((3, 3)))


def test_time_matrix_is_read_only():
    matrix = TimeMatrix(("a", "b"), [[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ValueError):
        matrix.values[0, 1] = 5.0
    assert matrix["b", "a"] == 2.0
    np.testing.assert_array_equal(matrix.submatrix(["b"], ["a", "b"]), [[2.0, 0.0]])


def test_package_volume():
    package = Package(id="p", stop="s", status="delivered", dims=(2.0, 3.0, 4.0))
    assert package.volume == 24.0


def test_package_negative_dims():
    with pytest.raises(ValueError):
        Package(id="p", stop="s", status="delivered", dims=(-1.0, 3.0, 4.0))


def test_package_window_order():
    with pytest.raises(ValueError):
        Package(
            id="p",
            stop="s",
            status="delivered",
            dims=(1.0, 1.0, 1.0),
            time_window=(datetime(2018, 7, 20, 16), datetime(2018, 7, 20, 15)),
        )


def test_package_unknown_status():
    with pytest.raises(ValueError):
        Package(id="p", stop="s", status="lost", dims=(1.0, 1.0, 1.0))


def test_validate_line_instance():
    instance = line_instance(4)
    assert validate_instance(instance) is instance


def test_validate_nonzero_diagonal():
    times = np.ones((3, 3))
    instance = make_instance(["D", "a", "b"], times)
    with pytest.raises(RouteValidationError) as excinfo:
        validate_instance(instance)
    assert excinfo.value.route_id == "R1"


def test_validate_negative_time():
    times = np.array([[0.0, -1.0], [1.0, 0.0]])
    with pytest.raises(RouteValidationError):
        validate_instance(make_instance(["D", "a"], times))


def test_validate_incomplete_actual():
    instance = line_instance(3)
    with pytest.raises(RouteValidationError):
        validate_instance(instance.with_actual(instance.actual[:-1]))


def test_complete_sequences_under_shuffles():
    instance = line_instance(8)
    rng = np.random.default_rng(0)
    for _ in range(100):
        deliveries = list(instance.delivery_ids)
        rng.shuffle(deliveries)
        sequence = [instance.depot.id] + deliveries
        assert is_complete_sequence(instance, sequence)
        assert not is_complete_sequence(instance, sequence[:-1])
        assert not is_complete_sequence(instance, sequence[1:] + sequence[:1])
        assert not is_complete_sequence(instance, sequence[:-1] + sequence[1:2])


def test_fingerprint_depends_on_content():
    a = line_instance(3)
    b = line_instance(4)
    assert a.id == b.id
    assert a.fingerprint != b.fingerprint
    assert a.fingerprint == line_instance(3).fingerprint
    assert a == line_instance(3)
    assert a != b


def test_package_aggregates():
    instance = make_instance(
        ["D", "a", "b"],
        [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
        package_counts=[0, 2, 3],
    )
    assert instance.package_counts == {"D": 0, "a": 2, "b": 3}
    assert instance.package_volumes["b"] == pytest.approx(3000.0)
