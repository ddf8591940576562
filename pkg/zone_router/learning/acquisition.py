import numpy as np
from scipy.stats import norm

from zone_router.learning.gp import GPState, gp_posterior

ACQUISITION_STARTS = 64
MIN_STEP = 1e-3
MAX_SWEEPS = 100


def expected_improvement_from(mean, std, best):
    """Expected improvement of a minimization, max(best - mean, 0) where std is 0"""
    mean, std = np.broadcast_arrays(np.asarray(mean, dtype=float), np.asarray(std, dtype=float))
    improvement = best - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = improvement / std
        ei = improvement * norm.cdf(z) + std * norm.pdf(z)
    result = np.where(std > 0, ei, np.maximum(improvement, 0.0))
    return float(result) if result.ndim == 0 else result


def expected_improvement(state: GPState, theta, best_loss):
    mean, std = gp_posterior(state, theta)
    return expected_improvement_from(mean, std, best_loss)


def maximize_ei(state: GPState, best_loss, bounds, rng, starts=ACQUISITION_STARTS):
    """Coordinate descent from uniform starts, all points projected into bounds"""
    low, high = bounds
    dim = state.x.shape[1]
    points = rng.uniform(low, high, size=(starts, dim))
    values = expected_improvement(state, points, best_loss)
    steps = np.full(starts, (high - low) / 4.0)
    for _ in range(MAX_SWEEPS):
        active = steps >= MIN_STEP
        if not active.any():
            break
        improved = np.zeros(starts, dtype=bool)
        for k in range(dim):
            for sign in (1.0, -1.0):
                candidates = points.copy()
                candidates[:, k] = np.clip(candidates[:, k] + sign * steps, low, high)
                candidate_values = expected_improvement(state, candidates, best_loss)
                better = active & (candidate_values > values)
                points[better] = candidates[better]
                values[better] = candidate_values[better]
                improved |= better
        steps[~improved] /= 2.0
    return np.clip(points[np.argmax(values)], low, high)
