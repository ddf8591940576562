import numpy as np
import pytest
from scipy.stats import norm

from zone_router.learning import expected_improvement, expected_improvement_from, gp_fit, gp_posterior, maximize_ei
from zone_router.learning.gp import Hyperparameters


def test_at_best():
    assert expected_improvement_from(0.2, 0.5, 0.2) == pytest.approx(0.5 * 0.3989422804)
    assert expected_improvement_from(0.2, 0.5, 0.2) == pytest.approx(0.5 * norm.pdf(0.0))


def test_zero_std():
    assert expected_improvement_from(0.3, 0.0, 0.2) == 0.0
    assert expected_improvement_from(0.1, 0.0, 0.2) == pytest.approx(0.1)


def test_vectorized():
    ei = expected_improvement_from(np.array([0.1, 0.3, 0.2]), np.array([0.0, 0.0, 0.1]), 0.2)
    np.testing.assert_allclose(ei, [0.1, 0.0, 0.1 * norm.pdf(0.0)])


def test_monte_carlo():
    mean, std, best = 0.3, 0.2, 0.25
    rng = np.random.default_rng(0)
    samples = np.maximum(best - rng.normal(mean, std, size=1_000_000), 0.0)
    standard_error = samples.std() / np.sqrt(len(samples))
    assert abs(expected_improvement_from(mean, std, best) - samples.mean()) < 3 * standard_error


def test_non_negative():
    rng = np.random.default_rng(1)
    mean = rng.normal(size=1000)
    std = rng.uniform(0.0, 2.0, size=1000)
    assert np.all(expected_improvement_from(mean, std, 0.0) >= 0.0)


def fitted_state():
    rng = np.random.default_rng(3)
    x = rng.uniform(1.0, 10.0, size=(12, 3))
    y = np.sum((x - 4.0) ** 2, axis=1) / 100.0
    return gp_fit(x, y, Hyperparameters.initial(3, y)), x, y


def test_expected_improvement_uses_posterior():
    state, x, y = fitted_state()
    theta = np.array([[5.0, 5.0, 5.0]])
    mean, std = gp_posterior(state, theta)
    assert expected_improvement(state, theta, y.min()) == pytest.approx(
        expected_improvement_from(mean, std, y.min())[0]
    )


def test_maximize_within_bounds():
    state, x, y = fitted_state()
    theta = maximize_ei(state, y.min(), (1.0, 10.0), np.random.default_rng(4), starts=16)
    assert theta.shape == (3,)
    assert np.all((theta >= 1.0) & (theta <= 10.0))
    assert expected_improvement(state, theta, y.min())[0] >= expected_improvement(state, x, y.min()).max()


def test_maximize_is_reproducible():
    state, _, y = fitted_state()
    first = maximize_ei(state, y.min(), (1.0, 10.0), np.random.default_rng(5), starts=8)
    second = maximize_ei(state, y.min(), (1.0, 10.0), np.random.default_rng(5), starts=8)
    np.testing.assert_array_equal(first, second)
