"""Gaussian-process regression with a squared-exponential kernel"""

import dataclasses
import logging
from typing import Tuple

import numpy as np
from scipy import linalg, optimize

from zone_router.exceptions import GPError

INITIAL_LENGTHSCALE = 2.0
NOISE_VARIANCE = 1e-6
JITTERS = (0.0, 1e-10, 1e-8, 1e-6, 1e-4)
LENGTHSCALE_RANGE = (1e-2, 1e3)
SIGNAL_VARIANCE_RANGE = (1e-12, 1e6)


@dataclasses.dataclass(frozen=True, eq=False)
class Hyperparameters:
    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float = NOISE_VARIANCE

    @classmethod
    def initial(cls, dim, y, lengthscale=INITIAL_LENGTHSCALE, noise_variance=NOISE_VARIANCE):
        variance = float(np.var(y)) if len(y) > 0 else 0.0
        return cls(
            lengthscales=np.full(dim, float(lengthscale)),
            signal_variance=variance if variance > 0 else 1.0,
            noise_variance=noise_variance,
        )


@dataclasses.dataclass(frozen=True, eq=False)
class GPState:
    x: np.ndarray
    y: np.ndarray
    hyperparameters: Hyperparameters
    prior_mean: float
    cholesky: np.ndarray
    alpha: np.ndarray
    jitter: float = 0.0


def se_kernel(x1, x2, lengthscales, signal_variance):
    x1 = np.atleast_2d(x1)
    x2 = np.atleast_2d(x2)
    d = (x1[:, np.newaxis, :] - x2[np.newaxis, :, :]) / lengthscales
    return signal_variance * np.exp(-0.5 * np.sum(d**2, axis=-1))


def _cholesky(gram):
    scale = max(float(np.mean(np.diag(gram))), 1.0)
    for jitter in JITTERS:
        try:
            return linalg.cholesky(gram + jitter * scale * np.eye(len(gram)), lower=True), jitter * scale
        except linalg.LinAlgError:
            continue
    raise GPError(f"Gram matrix is not positive definite even with jitter {JITTERS[-1] * scale}")


def gp_fit(x, y, hyperparameters: Hyperparameters = None, prior_mean=None) -> GPState:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise GPError("At least one observation is needed")
    if hyperparameters is None:
        hyperparameters = Hyperparameters.initial(x.shape[1], y)
    if hyperparameters.noise_variance <= 0:
        raise GPError("Noise variance must be positive")
    prior_mean = float(np.mean(y)) if prior_mean is None else float(prior_mean)
    gram = se_kernel(x, x, hyperparameters.lengthscales, hyperparameters.signal_variance)
    gram[np.diag_indices_from(gram)] += hyperparameters.noise_variance
    cholesky, jitter = _cholesky(gram)
    alpha = linalg.cho_solve((cholesky, True), y - prior_mean)
    return GPState(
        x=x,
        y=y,
        hyperparameters=hyperparameters,
        prior_mean=prior_mean,
        cholesky=cholesky,
        alpha=alpha,
        jitter=jitter,
    )


def gp_posterior(state: GPState, theta) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation of the latent function, one value per row of theta"""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    hp = state.hyperparameters
    k = se_kernel(theta, state.x, hp.lengthscales, hp.signal_variance)
    mean = state.prior_mean + k @ state.alpha
    v = linalg.solve_triangular(state.cholesky, k.T, lower=True)
    variance = np.maximum(hp.signal_variance - np.sum(v**2, axis=0), 0.0)
    return mean, np.sqrt(variance)


def log_marginal_likelihood(state: GPState) -> float:
    residual = state.y - state.prior_mean
    n = len(residual)
    return float(
        -0.5 * residual @ state.alpha - np.sum(np.log(np.diag(state.cholesky))) - 0.5 * n * np.log(2.0 * np.pi)
    )


def _unpack(log_params, noise_variance):
    lengthscales = np.clip(np.exp(log_params[:-1]), *LENGTHSCALE_RANGE)
    signal_variance = float(np.clip(np.exp(log_params[-1]), *SIGNAL_VARIANCE_RANGE))
    return Hyperparameters(lengthscales, signal_variance, noise_variance)


def fit_hyperparameters(x, y, initial: Hyperparameters, rng, starts=5) -> Hyperparameters:
    """Maximum marginal likelihood lengthscales and signal variance, Nelder-Mead from several starts"""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    noise_variance = initial.noise_variance

    def objective(log_params):
        try:
            return -log_marginal_likelihood(gp_fit(x, y, _unpack(log_params, noise_variance)))
        except GPError:
            return np.inf

    x0 = np.append(np.log(initial.lengthscales), np.log(initial.signal_variance))
    best = (objective(x0), x0)
    for start in range(starts):
        point = x0 if start == 0 else x0 + rng.normal(0.0, 1.0, size=x0.shape)
        result = optimize.minimize(objective, point, method="Nelder-Mead", options={"maxiter": 200 * len(x0)})
        if np.isfinite(result.fun) and result.fun < best[0]:
            best = (result.fun, result.x)
    hyperparameters = _unpack(best[1], noise_variance)
    logging.debug(
        f"GP hyperparameters: lengthscales {hyperparameters.lengthscales.round(3).tolist()}, "
        f"signal variance {hyperparameters.signal_variance:.3g}"
    )
    return hyperparameters
