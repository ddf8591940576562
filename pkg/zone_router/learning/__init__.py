from zone_router.learning.acquisition import expected_improvement, expected_improvement_from, maximize_ei
from zone_router.learning.bayes_opt import BOConfig, OptimizationResult, initial_design, loss, optimize, stop_level_bo
from zone_router.learning.gp import GPState, Hyperparameters, fit_hyperparameters, gp_fit, gp_posterior
