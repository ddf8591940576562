"""Bayesian optimization of router weights against benchmark sequences"""

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Tuple

import numpy as np
import pandas as pd
from scipy.stats import qmc

from zone_router import config
from zone_router.exceptions import ConfigurationError, SolverError, ZoningError
from zone_router.learning.acquisition import ACQUISITION_STARTS, maximize_ei
from zone_router.learning.gp import Hyperparameters, fit_hyperparameters, gp_fit
from zone_router.routers import HierarchicalRouter, StopLevelRouter
from zone_router.scoring import score_instance
from zone_router.zones import check_theta

REFIT_EVERY = 10


@dataclasses.dataclass(frozen=True)
class BOConfig:
    initial_points: int = dataclasses.field(default_factory=lambda: config.BO_INITIAL_POINTS)
    # total number of loss evaluations, initial points included
    iterations: int = dataclasses.field(default_factory=lambda: config.BO_ITERATIONS)
    bounds: Tuple[float, float] = config.THETA_BOUNDS
    seed: int = dataclasses.field(default_factory=lambda: config.BO_SEED)
    refit_every: int = REFIT_EVERY
    acquisition_starts: int = ACQUISITION_STARTS
    gap_penalty: float = dataclasses.field(default_factory=lambda: config.GAP_PENALTY)
    jobs: int = dataclasses.field(default_factory=lambda: config.JOBS)

    def __post_init__(self):
        if not 0 < self.initial_points < self.iterations:
            raise ConfigurationError(
                f"Initial points ({self.initial_points}) must be positive and fewer than iterations ({self.iterations})"
            )
        low, high = self.bounds
        if not low < high:
            raise ConfigurationError(f"Invalid bounds {self.bounds}")
        if self.refit_every < 1 or self.acquisition_starts < 1 or self.jobs < 1:
            raise ConfigurationError("refit_every, acquisition_starts and jobs must be positive")


@dataclasses.dataclass(frozen=True, eq=False)
class OptimizationResult:
    theta: np.ndarray
    loss: float
    history: pd.DataFrame


_ROUTE_FAILURES = (SolverError, ZoningError, ValueError)


def _route_score(args):
    router, instance, theta, gap_penalty = args
    try:
        return score_instance(instance, router.route(instance, theta), gap_penalty).route_score
    except _ROUTE_FAILURES as e:
        logging.warning(f"Route {instance.id} is skipped from the loss: {e}")
        return None


def loss(theta, routes, router=None, h=None, gap_penalty=None, jobs=1) -> float:
    """Mean route score of the router's sequences, routes failing to route are skipped"""
    if not routes:
        raise ValueError("Loss needs at least one route")
    router = HierarchicalRouter(h=h) if router is None else router
    theta = check_theta(theta, router.theta_dim) if router.theta_dim else None
    tasks = [(router, instance, theta, gap_penalty) for instance in routes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            scores = list(executor.map(_route_score, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        scores = [_route_score(task) for task in tasks]
    scores = [score for score in scores if score is not None]
    if not scores:
        raise SolverError("No route could be routed")
    if len(scores) < len(routes):
        logging.warning(f"Loss is computed over {len(scores)} of {len(routes)} routes")
    return float(np.mean(scores))


def initial_design(dim, n, bounds, seed):
    """Scrambled Halton points scaled into the box"""
    low, high = bounds
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    return qmc.scale(sampler.random(n), np.full(dim, low), np.full(dim, high))


def history_frame(thetas, losses) -> pd.DataFrame:
    thetas = np.asarray(thetas, dtype=float)
    frame = pd.DataFrame({"iter": np.arange(1, len(losses) + 1)})
    for k in range(thetas.shape[1]):
        frame[f"theta_{k + 1}"] = thetas[:, k]
    frame["loss"] = np.asarray(losses, dtype=float)
    frame["best_so_far"] = np.minimum.accumulate(frame["loss"].to_numpy())
    return frame


def optimize(routes, bo_config: BOConfig = None, router=None) -> OptimizationResult:
    """Minimize the loss over the weight box: quasi-random initial design, then GP expected improvement"""
    bo_config = BOConfig() if bo_config is None else bo_config
    router = HierarchicalRouter() if router is None else router
    dim = router.theta_dim
    rng = np.random.default_rng(bo_config.seed)

    def evaluate(theta):
        value = loss(theta, routes, router, gap_penalty=bo_config.gap_penalty, jobs=bo_config.jobs)
        thetas.append(np.asarray(theta, dtype=float))
        losses.append(value)
        logging.info(
            f"BO {router.method} iteration {len(losses)}/{bo_config.iterations}: "
            f"theta {np.round(theta, 3).tolist()}, loss {value:.5f}, best {min(losses):.5f}"
        )

    thetas = []
    losses = []
    for theta in initial_design(dim, bo_config.initial_points, bo_config.bounds, bo_config.seed):
        evaluate(theta)

    hyperparameters = Hyperparameters.initial(dim, losses)
    for i in range(bo_config.initial_points, bo_config.iterations):
        if (i - bo_config.initial_points) % bo_config.refit_every == 0:
            start = Hyperparameters.initial(dim, losses)
            start = dataclasses.replace(start, lengthscales=hyperparameters.lengthscales)
            hyperparameters = fit_hyperparameters(thetas, losses, start, rng)
        state = gp_fit(thetas, losses, hyperparameters)
        theta = maximize_ei(state, min(losses), bo_config.bounds, rng, bo_config.acquisition_starts)
        evaluate(theta)

    best = int(np.argmin(losses))
    return OptimizationResult(theta=thetas[best], loss=losses[best], history=history_frame(thetas, losses))


def stop_level_bo(routes, bo_config: BOConfig = None, two_opt=False) -> OptimizationResult:
    return optimize(routes, bo_config, StopLevelRouter(two_opt=two_opt))
