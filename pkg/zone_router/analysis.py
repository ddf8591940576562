"""Route difficulty analysis: route features against the score of generated sequences"""

import dataclasses
import logging
from typing import Mapping, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from zone_router.data.model import RouteInstance
from zone_router.exceptions import RankDeficiencyError, SingleClassError
from zone_router.routing import tour_cost
from zone_router.util import off_diagonal
from zone_router.zones import build_partition

FEATURE_COLUMNS = (
    "stop_number",
    "actual_seq_cost",
    "depot_first_zone",
    "depot_last_zone",
    "mean_pac_volume",
    "std_pac_volume",
    "std_depot_stops",
    "std_tra_stops",
)

LOW_SCORE = 0.01
HIGH_SCORE = 0.1
LOW = -1
HIGH = 1
CLASS_NAMES = {LOW: "low-score", HIGH: "high-score"}

SVM_EPOCHS = 10_000


def route_features(instance: RouteInstance) -> dict:
    """Unnormalized route features, the benchmark sequence gives the visiting order"""
    if instance.actual is None:
        raise ValueError(f"Route {instance.id} has no benchmark sequence")
    times = instance.times
    depot = instance.depot.id
    deliveries = instance.delivery_ids
    features = dict.fromkeys(FEATURE_COLUMNS, 0.0)
    features["stop_number"] = float(len(deliveries))
    features["actual_seq_cost"] = tour_cost(times.values, times.indices(instance.actual))
    if not deliveries:
        return features

    partition = build_partition(instance, True)
    first_zone = partition.zone_of[instance.actual[1]]
    last_zone = partition.zone_of[instance.actual[-1]]
    features["depot_first_zone"] = float(times.submatrix([depot], partition.members[first_zone]).mean())
    features["depot_last_zone"] = float(times.submatrix([depot], partition.members[last_zone]).mean())

    volumes = np.array([instance.package_volumes[stop_id] for stop_id in deliveries])
    features["mean_pac_volume"] = float(volumes.mean())
    features["std_pac_volume"] = float(volumes.std())
    features["std_depot_stops"] = float(times.submatrix([depot], deliveries).std())
    if len(deliveries) > 1:
        features["std_tra_stops"] = float(off_diagonal(times.submatrix(deliveries)).std())
    return features


def normalize_columns(frame: pd.DataFrame) -> pd.DataFrame:
    """Min-max scaling of every column into [0, 1], constant columns become 0"""
    scaled = frame.astype(float)
    for column in frame.columns:
        low, high = scaled[column].min(), scaled[column].max()
        scaled[column] = (scaled[column] - low) / (high - low) if high > low else 0.0
    return scaled


def feature_table(instances, scores: Mapping[str, float]) -> pd.DataFrame:
    """Corpus-normalized features of the routes having a score, sorted by route id"""
    instances = sorted((instance for instance in instances if instance.id in scores), key=lambda x: x.id)
    raw = pd.DataFrame([route_features(instance) for instance in instances], columns=list(FEATURE_COLUMNS))
    table = normalize_columns(raw)
    table.insert(0, "route_id", [instance.id for instance in instances])
    table["route_score"] = [float(scores[instance.id]) for instance in instances]
    positive = table["route_score"] > 0
    table["log_score"] = np.log(table["route_score"].where(positive))
    return table


@dataclasses.dataclass(frozen=True, eq=False)
class RegressionResult:
    columns: Tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    n_obs: int
    excluded: int = 0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "feature": list(self.columns),
                "coefficient": self.coefficients,
                "std_error": self.std_errors,
                "t": self.t_values,
                "p": self.p_values,
            }
        )


def collinear_columns(x, columns):
    """Columns that don't increase the rank of the columns before them"""
    collinear = []
    kept = []
    for k, name in enumerate(columns):
        if np.linalg.matrix_rank(x[:, kept + [k]]) > len(kept):
            kept.append(k)
        else:
            collinear.append(name)
    return collinear


def ols(x, y, columns) -> RegressionResult:
    """Least squares with classical standard errors, x already holds the intercept column if any"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = x.shape
    if n <= k:
        raise ValueError(f"Regression needs more observations ({n}) than columns ({k})")
    coefficients, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < k:
        raise RankDeficiencyError(collinear_columns(x, list(columns)))
    residuals = y - x @ coefficients
    s2 = residuals @ residuals / (n - k)
    std_errors = np.sqrt(np.diag(s2 * np.linalg.inv(x.T @ x)))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = coefficients / std_errors
    p_values = 2.0 * stats.t.sf(np.abs(t_values), df=n - k)
    return RegressionResult(
        columns=tuple(columns),
        coefficients=coefficients,
        std_errors=std_errors,
        t_values=t_values,
        p_values=p_values,
        residuals=residuals,
        n_obs=n,
    )


def regress_log_score(table: pd.DataFrame) -> RegressionResult:
    usable = table[table["route_score"] > 0]
    excluded = len(table) - len(usable)
    if excluded:
        logging.warning(f"{excluded} routes with zero score are excluded from the regression")
    x = np.column_stack([np.ones(len(usable)), usable[list(FEATURE_COLUMNS)].to_numpy()])
    result = ols(x, usable["log_score"].to_numpy(), ("const",) + FEATURE_COLUMNS)
    return dataclasses.replace(result, excluded=excluded)


def score_labels(scores) -> np.ndarray:
    """LOW below 0.01, HIGH above 0.1, 0 for the rest"""
    scores = np.asarray(scores, dtype=float)
    return np.where(scores < LOW_SCORE, LOW, np.where(scores > HIGH_SCORE, HIGH, 0))


@dataclasses.dataclass(frozen=True, eq=False)
class LinearSvm:
    weights: np.ndarray
    bias: float
    # best objective value so far after each epoch
    objective_history: np.ndarray

    def decision_function(self, x):
        return np.asarray(x, dtype=float) @ self.weights + self.bias


def svm_objective(w, x, y, reg):
    margins = y * (x @ w)
    return 0.5 * reg * (w @ w) + np.mean(np.maximum(0.0, 1.0 - margins))


def svm_fit(x, labels, c=1.0, epochs=SVM_EPOCHS) -> LinearSvm:
    """Linear SVM, full-batch hinge-loss subgradient descent with step 1 / (reg * t), reg = 1 / (c * n)

    The bias is an extra weight on a constant feature, the best iterate is kept.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(labels, dtype=float)
    if len(np.unique(y)) < 2:
        raise SingleClassError("SVM needs examples of both classes")
    n = len(y)
    reg = 1.0 / (c * n)
    augmented = np.column_stack([x, np.ones(n)])
    w = np.zeros(augmented.shape[1])
    best_w = w.copy()
    best = svm_objective(w, augmented, y, reg)
    history = np.empty(epochs)
    for t in range(1, epochs + 1):
        active = y * (augmented @ w) < 1.0
        gradient = reg * w - (y[active, np.newaxis] * augmented[active]).sum(axis=0) / n
        w = w - gradient / (reg * t)
        objective = svm_objective(w, augmented, y, reg)
        if objective < best:
            best = objective
            best_w = w.copy()
        history[t - 1] = best
    return LinearSvm(weights=best_w[:-1], bias=float(best_w[-1]), objective_history=history)


def svm_predict(model: LinearSvm, x) -> np.ndarray:
    return np.where(model.decision_function(x) >= 0.0, HIGH, LOW)


def classification_report(y_true, y_pred) -> pd.DataFrame:
    """Precision, recall and F1 per class plus macro and weighted averages and accuracy"""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    rows = []
    for label in (LOW, HIGH):
        tp = np.sum((y_pred == label) & (y_true == label))
        predicted = np.sum(y_pred == label)
        support = np.sum(y_true == label)
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        rows.append(
            {"class": CLASS_NAMES[label], "precision": precision, "recall": recall, "f1": f1, "support": int(support)}
        )
    report = pd.DataFrame(rows)
    support = report["support"].to_numpy()
    metrics = report[["precision", "recall", "f1"]]
    total = support.sum()
    macro = metrics.mean()
    weighted = metrics.mul(support, axis=0).sum() / total if total else macro * 0.0
    accuracy = float(np.mean(y_true == y_pred)) if len(y_true) else 0.0
    averages = pd.DataFrame(
        [
            {"class": "macro avg", **macro.to_dict(), "support": int(total)},
            {"class": "weighted avg", **weighted.to_dict(), "support": int(total)},
            {"class": "accuracy", "precision": accuracy, "recall": accuracy, "f1": accuracy, "support": int(total)},
        ]
    )
    return pd.concat([report, averages], ignore_index=True)


@dataclasses.dataclass(frozen=True, eq=False)
class SvmResult:
    model: LinearSvm
    report: pd.DataFrame
    n_train: int
    n_test: int

    def weights_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"feature": list(FEATURE_COLUMNS) + ["bias"], "weight": np.append(self.model.weights, self.model.bias)}
        )


def svm_analysis(table: pd.DataFrame, c=1.0, seed=0, test_fraction=0.2, epochs=SVM_EPOCHS) -> SvmResult:
    labels = score_labels(table["route_score"])
    labeled = labels != 0
    x = table.loc[labeled, list(FEATURE_COLUMNS)].to_numpy()
    y = labels[labeled]
    if len(np.unique(y)) < 2:
        raise SingleClassError("Both low-score and high-score routes are needed")
    permutation = np.random.default_rng(seed).permutation(len(y))
    n_test = int(np.floor(test_fraction * len(y) + 0.5))
    test, train = permutation[:n_test], permutation[n_test:]
    model = svm_fit(x[train], y[train], c=c, epochs=epochs)
    evaluated = test if len(test) else train
    report = classification_report(y[evaluated], svm_predict(model, x[evaluated]))
    return SvmResult(model=model, report=report, n_train=len(train), n_test=len(test))


def welch_test(low, high):
    low = np.asarray(low, dtype=float)
    high = np.asarray(high, dtype=float)
    diff = float(high.mean() - low.mean())
    if low.var() == 0 and high.var() == 0:
        # degenerate, scipy returns nan
        return diff, (0.0 if diff == 0 else np.copysign(np.inf, diff)), (1.0 if diff == 0 else 0.0)
    result = stats.ttest_ind(high, low, equal_var=False)
    return diff, float(result.statistic), float(result.pvalue)


def mean_difference_report(table: pd.DataFrame, labels=None) -> pd.DataFrame:
    labels = score_labels(table["route_score"]) if labels is None else np.asarray(labels)
    if not np.any(labels == LOW) or not np.any(labels == HIGH):
        raise SingleClassError("Both low-score and high-score routes are needed")
    rows = []
    for column in FEATURE_COLUMNS:
        values = table[column].to_numpy(dtype=float)
        low = values[labels == LOW]
        high = values[labels == HIGH]
        diff, t, p = welch_test(low, high)
        rows.append({"feature": column, "mean_low": low.mean(), "mean_high": high.mean(), "diff": diff, "t": t, "p": p})
    return pd.DataFrame(rows)
