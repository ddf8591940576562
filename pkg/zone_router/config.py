import os

CACHE_TYPE = os.environ.get("CACHE_TYPE", "memory")
LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")

GAP_PENALTY = float(os.environ.get("GAP_PENALTY", 1000.0))
CANDIDATES_H = int(os.environ.get("CANDIDATES_H", 2))

BO_INITIAL_POINTS = int(os.environ.get("BO_INITIAL_POINTS", 20))
BO_ITERATIONS = int(os.environ.get("BO_ITERATIONS", 100))
BO_SEED = int(os.environ.get("BO_SEED", 0))

TRAIN_FRACTION = float(os.environ.get("TRAIN_FRACTION", 0.7))
SPLIT_SEED = int(os.environ.get("SPLIT_SEED", 42))

JOBS = int(os.environ.get("JOBS", 1))

THETA_BOUNDS = (1.0, 10.0)
