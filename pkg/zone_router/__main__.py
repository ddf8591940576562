#!/usr/bin/env python3

import argparse
import logging
import sys
from pathlib import Path

import pandas as pd

from zone_router import config
from zone_router.analysis import feature_table, mean_difference_report, regress_log_score, svm_analysis
from zone_router.data import (
    SynthSpec,
    filter_high_quality,
    ingest,
    plant_benchmarks,
    read_sequences,
    serialize,
    synth_dataset,
    write_sequences,
)
from zone_router.data.split import SPLITTERS
from zone_router.exceptions import ConfigurationError, InputError, RouteValidationError
from zone_router.experiments import (
    eval_run,
    read_thetas,
    station_theta,
    sweep_h,
    train,
    write_frame,
    write_manifest,
    write_thetas,
)
from zone_router.learning import BOConfig
from zone_router.routers import get_router, router_classes
from zone_router.scoring import score_table
from zone_router.util import read_json, write_json
from zone_router.zones import build_partition, zone_features

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIGURATION = 2


def defaults():
    """Lowest precedence layer of the effective configuration"""
    return {
        "gap": config.GAP_PENALTY,
        "h": config.CANDIDATES_H,
        "n0": config.BO_INITIAL_POINTS,
        "iters": config.BO_ITERATIONS,
        "seed": config.BO_SEED,
        "train_fraction": config.TRAIN_FRACTION,
        "split_seed": config.SPLIT_SEED,
        "split": "per-depot",
        "jobs": config.JOBS,
        "method": "hrlp",
        "methods": "tsp,hrlp",
        "hs": "2,3,4,5",
        "two_opt": False,
        "link_aware": False,
        "single_zone": False,
        "high_quality_only": True,
        "svm_c": 1.0,
        "log_level": config.LOG_LEVEL,
    }


def effective_config(args):
    """Flags override the config file, the config file overrides environment defaults"""
    effective = defaults()
    if args.config is not None:
        try:
            from_file = read_json(args.config)
        except InputError as e:
            raise ConfigurationError(str(e)) from e
        if not isinstance(from_file, dict):
            raise ConfigurationError(f"Config file {args.config} must hold a JSON object")
        unknown = sorted(set(from_file) - set(effective))
        if unknown:
            raise ConfigurationError(f"Unknown config keys: {', '.join(unknown)}")
        for key, value in from_file.items():
            if isinstance(effective[key], bool) and not isinstance(value, bool):
                raise ConfigurationError(f"Config key {key} must be true or false, {value!r} given")
            try:
                effective[key] = type(effective[key])(value)
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f"Invalid value {value!r} of config key {key}") from e
    for key in effective:
        value = getattr(args, key, None)
        if value is not None:
            effective[key] = value
    check_config(effective)
    return effective


def _methods(value):
    return [method.strip() for method in value.split(",") if method.strip()]


def check_config(effective):
    routers = router_classes()
    for method in [effective["method"], *_methods(effective["methods"])]:
        if method not in routers:
            raise ConfigurationError(f'Unknown method "{method}", use one of: {", ".join(routers)}')
    if effective["h"] < 1:
        raise ConfigurationError(f"h must be positive, {effective['h']} given")
    try:
        if any(int(h) < 1 for h in effective["hs"].split(",")):
            raise ConfigurationError(f"All h values must be positive, {effective['hs']} given")
    except ValueError as e:
        raise ConfigurationError(f"Invalid h list {effective['hs']!r}") from e
    if not 0.0 < effective["train_fraction"] < 1.0:
        raise ConfigurationError(f"train_fraction must be in (0, 1), {effective['train_fraction']} given")
    if effective["gap"] < 0:
        raise ConfigurationError(f"Gap penalty must be non-negative, {effective['gap']} given")
    if effective["jobs"] < 1:
        raise ConfigurationError(f"jobs must be positive, {effective['jobs']} given")
    if effective["split"] not in SPLITTERS:
        raise ConfigurationError(f'Unknown split "{effective["split"]}", use one of: {", ".join(SPLITTERS)}')
    if effective["svm_c"] <= 0:
        raise ConfigurationError(f"SVM C must be positive, {effective['svm_c']} given")


def router_options(effective, method):
    options = {"two_opt": effective["two_opt"]}
    if method == "hrlp":
        options.update(
            h=effective["h"],
            link_aware=effective["link_aware"],
            single_zone_fallback=effective["single_zone"],
        )
    return options


def bo_config(effective):
    return BOConfig(
        initial_points=effective["n0"],
        iterations=effective["iters"],
        seed=effective["seed"],
        gap_penalty=effective["gap"],
        jobs=effective["jobs"],
    )


def load(effective, path):
    dataset = ingest(path)
    instances = dataset.instances
    if effective["high_quality_only"]:
        instances = filter_high_quality(instances)
        logging.info(f"{len(instances)} high quality routes are used")
    return dataset, instances


def split(effective, instances):
    return SPLITTERS[effective["split"]](instances, effective["train_fraction"], effective["split_seed"])


def parse_theta(value):
    """A JSON file of weights or an inline comma separated list"""
    if value is None:
        return None
    if Path(value).exists():
        return read_thetas(value)
    try:
        return {"*": [float(x) for x in value.split(",")]}
    except ValueError as e:
        raise ConfigurationError(f"Theta must be a file or a comma separated list, {value!r} given") from e


def cmd_ingest(args, effective):
    dataset = ingest(args.input)
    rows = [
        {
            "route_id": instance.id,
            "station": instance.station,
            "stops": len(instance.delivery_ids),
            "packages": len(instance.packages),
            "rating": instance.rating,
            "has_actual": instance.actual is not None,
        }
        for instance in dataset.instances
    ]
    if args.out is not None:
        columns = ["route_id", "station", "stops", "packages", "rating", "has_actual"]
        write_frame(args.out, pd.DataFrame(rows, columns=columns))
        write_manifest(args.out, "ingest", {"in": args.input}, {}, effective)
    for error in dataset.errors:
        print(error, file=sys.stderr)
    print(f"{len(dataset.instances)} routes ingested, {len(dataset.errors)} failed validation")
    return EXIT_VALIDATION if dataset.errors else EXIT_OK


def cmd_synth(args, effective):
    spec = SynthSpec(
        n_zones=args.zones,
        stops_per_zone=(args.min_stops, args.max_stops),
        seed=effective["seed"],
        noise=args.noise,
        circulation=args.circulation,
    )
    instances = synth_dataset(spec, args.routes, args.stations)
    if args.plant is not None:
        theta = parse_theta(args.plant_theta)
        router = get_router(args.plant, **router_options(effective, args.plant))
        instances = plant_benchmarks(instances, router, None if theta is None else next(iter(theta.values())))
    serialize(instances, args.out)
    write_manifest(Path(args.out) / "route_data.json", "synth", {}, {"seed": effective["seed"]}, effective)
    return EXIT_OK


def cmd_route(args, effective):
    _, instances = load(effective, args.input)
    method = effective["method"]
    router = get_router(method, **router_options(effective, method))
    thetas = parse_theta(args.theta)
    sequences = {}
    frames = []
    for instance in instances:
        theta = station_theta(thetas, instance.station)
        if router.theta_dim and theta is None:
            logging.warning(f"No weights for depot {instance.station}, default weights are used for {instance.id}")
        sequences[instance.id] = router.route(instance, theta)
        if args.dump_features is not None and method == "hrlp":
            partition = build_partition(instance, effective["single_zone"])
            frames.append(zone_features(instance, partition).to_frame(instance.id))
    write_sequences(args.out, sequences)
    if frames:
        write_frame(args.dump_features, pd.concat(frames, ignore_index=True))
    write_manifest(args.out, "route", {"in": args.input, "theta": args.theta}, {}, effective)
    return EXIT_OK


def cmd_score(args, effective):
    dataset = ingest(args.input)
    instances = dataset.instances
    if args.benchmark is not None:
        benchmarks = read_sequences(args.benchmark)
        instances = [
            instance.with_actual(benchmarks[instance.id]) for instance in instances if instance.id in benchmarks
        ]
    candidates = read_sequences(args.candidate)
    table = score_table(instances, candidates, effective["gap"])
    write_frame(args.out, table)
    write_manifest(args.out, "score", {"in": args.input, "candidate": args.candidate}, {}, effective)
    return EXIT_OK


def cmd_train(args, effective):
    _, instances = load(effective, args.input)
    train_set, _ = split(effective, instances)
    method = effective["method"]
    thetas, history = train(
        train_set,
        method,
        bo_config(effective),
        effective["split"] == "per-depot",
        **router_options(effective, method),
    )
    write_thetas(args.out, thetas)
    if args.history is not None:
        write_frame(args.history, history)
    seeds = {"bo": effective["seed"], "split": effective["split_seed"]}
    write_manifest(args.out, "train", {"in": args.input}, seeds, effective)
    return EXIT_OK


def cmd_eval(args, effective):
    _, instances = load(effective, args.input)
    if not args.all_routes:
        _, instances = split(effective, instances)
    methods = _methods(effective["methods"])
    thetas = {}
    for method, value in (("hrlp", args.theta), ("stop-bo", args.stop_theta)):
        if method in methods:
            if value is None:
                raise ConfigurationError(f"Weights of {method} are required to evaluate it")
            thetas[method] = parse_theta(value)
    report = eval_run(
        instances,
        methods=methods,
        thetas=thetas,
        gap_penalty=effective["gap"],
        jobs=effective["jobs"],
        router_options={method: router_options(effective, method) for method in methods},
    )
    out = Path(args.out)
    write_frame(out, report.routes)
    for name in ("summary", "per_depot", "histograms", "box_stats"):
        write_frame(out.with_name(f"{out.stem}.{name}.csv"), getattr(report, name))
    seeds = {"split": effective["split_seed"]}
    inputs = {"in": args.input, "theta": args.theta, "stop_theta": args.stop_theta}
    write_manifest(out, "eval", inputs, seeds, effective)
    print(report.summary.to_string(index=False))
    return EXIT_OK


def cmd_analyze(args, effective):
    dataset = ingest(args.input)
    scores = pd.read_csv(args.scores)
    if "method" in scores.columns:
        scores = scores[scores["method"] == effective["method"]]
    table = feature_table(dataset.instances, dict(zip(scores["route_id"], scores["route_score"])))
    regression = regress_log_score(table)
    svm = svm_analysis(table, c=effective["svm_c"], seed=effective["seed"])
    differences = mean_difference_report(table)
    out = Path(args.out)
    report = {
        "routes": len(table),
        "regression": {
            "n_obs": regression.n_obs,
            "excluded_zero_score": regression.excluded,
            "table": regression.to_frame().to_dict(orient="records"),
        },
        "svm": {
            "n_train": svm.n_train,
            "n_test": svm.n_test,
            "metrics": svm.report.to_dict(orient="records"),
            "weights": svm.weights_frame().to_dict(orient="records"),
        },
        "mean_difference": differences.to_dict(orient="records"),
    }
    write_json(out, report)
    write_frame(out.with_name(f"{out.stem}.features.csv"), table)
    write_frame(out.with_name(f"{out.stem}.regression.csv"), regression.to_frame())
    write_frame(out.with_name(f"{out.stem}.svm.csv"), svm.report)
    write_frame(out.with_name(f"{out.stem}.mean_difference.csv"), differences)
    write_manifest(out, "analyze", {"in": args.input, "scores": args.scores}, {"svm": effective["seed"]}, effective)
    return EXIT_OK


def cmd_sweep_h(args, effective):
    _, instances = load(effective, args.input)
    train_set, test_set = split(effective, instances)
    options = router_options(effective, "hrlp")
    options.pop("h")
    table = sweep_h(
        train_set,
        test_set,
        [int(h) for h in effective["hs"].split(",")],
        bo_config(effective),
        effective["split"] == "per-depot",
        effective["gap"],
        **options,
    )
    write_frame(args.out, table)
    seeds = {"bo": effective["seed"], "split": effective["split_seed"]}
    write_manifest(args.out, "sweep-h", {"in": args.input}, seeds, effective)
    print(table.to_string(index=False))
    return EXIT_OK


def _add_common(parser):
    parser.add_argument("--config", default=None, help="JSON file with option values, flags take precedence")
    parser.add_argument("--log-level", dest="log_level", default=None)
    parser.add_argument("--jobs", type=int, default=None, help="worker processes for route-level work")
    parser.add_argument("--gap", type=float, default=None, help="gap penalty of the edit distance")
    parser.add_argument("--seed", type=int, default=None)


def _add_split(parser):
    parser.add_argument("--split", choices=sorted(SPLITTERS), default=None)
    parser.add_argument("--train-fraction", dest="train_fraction", type=float, default=None)
    parser.add_argument("--split-seed", dest="split_seed", type=int, default=None)
    parser.add_argument(
        "--high-quality-only", dest="high_quality_only", action=argparse.BooleanOptionalAction, default=None
    )


def _add_router(parser):
    parser.add_argument("--h", type=int, default=None, help="number of entry and exit candidates per zone")
    parser.add_argument("--two-opt", dest="two_opt", action="store_true", default=None)
    parser.add_argument("--link-aware", dest="link_aware", action="store_true", default=None)
    parser.add_argument("--single-zone", dest="single_zone", action="store_true", default=None)


def _add_bo(parser):
    parser.add_argument("--n0", type=int, default=None, help="number of initial points")
    parser.add_argument("--iters", type=int, default=None, help="total number of loss evaluations")


def parse_args(args):
    parser = argparse.ArgumentParser(prog="zone-router", description="Zone-based last-mile route sequencing")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("ingest", help="validate a challenge-format dataset")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None, help="per-route summary CSV")
    p.set_defaults(func=cmd_ingest)

    p = subparsers.add_parser("synth", help="generate a synthetic dataset")
    _add_common(p)
    _add_router(p)
    p.add_argument("--out", required=True)
    p.add_argument("--routes", type=int, default=10)
    p.add_argument("--zones", type=int, default=4)
    p.add_argument("--min-stops", dest="min_stops", type=int, default=3)
    p.add_argument("--max-stops", dest="max_stops", type=int, default=5)
    p.add_argument("--stations", type=int, default=1)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--circulation", type=float, default=0.0)
    p.add_argument("--plant", default=None, help="replace benchmarks by the output of this router")
    p.add_argument("--plant-theta", dest="plant_theta", default=None)
    p.set_defaults(func=cmd_synth)

    p = subparsers.add_parser("route", help="generate stop sequences")
    _add_common(p)
    _add_router(p)
    _add_split(p)
    p.add_argument("--method", default=None)
    p.add_argument("--theta", default=None, help="weights file or inline comma separated weights")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-features", dest="dump_features", default=None)
    p.set_defaults(func=cmd_route, high_quality_only=False)

    p = subparsers.add_parser("score", help="score candidate sequences against benchmarks")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True, help="dataset providing travel times")
    p.add_argument("--benchmark", default=None, help="benchmark sequences, the dataset ones by default")
    p.add_argument("--candidate", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = subparsers.add_parser("train", help="learn router weights by Bayesian optimization")
    _add_common(p)
    _add_router(p)
    _add_split(p)
    _add_bo(p)
    p.add_argument("--method", default=None)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--history", default=None)
    p.set_defaults(func=cmd_train)

    p = subparsers.add_parser("eval", help="evaluate methods on the test split")
    _add_common(p)
    _add_router(p)
    _add_split(p)
    p.add_argument("--methods", default=None, help="comma separated methods")
    p.add_argument("--theta", default=None)
    p.add_argument("--stop-theta", dest="stop_theta", default=None)
    p.add_argument("--all-routes", dest="all_routes", action="store_true", help="evaluate without splitting")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = subparsers.add_parser("analyze", help="route difficulty analysis")
    _add_common(p)
    p.add_argument("--method", default=None)
    p.add_argument("--svm-c", dest="svm_c", type=float, default=None)
    p.add_argument("--scores", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = subparsers.add_parser("sweep-h", help="train and evaluate for several h")
    _add_common(p)
    _add_router(p)
    _add_split(p)
    _add_bo(p)
    p.add_argument("--hs", default=None, help="comma separated h values")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep_h)

    return parser.parse_args(args)


def main(argv=None):
    args = parse_args(argv)
    try:
        effective = effective_config(args)
    except ConfigurationError as e:
        logging.basicConfig(level=logging.INFO)
        logging.error(str(e))
        return EXIT_CONFIGURATION
    logging.basicConfig(level=effective["log_level"].upper())
    try:
        return args.func(args, effective)
    except ConfigurationError as e:
        logging.error(str(e))
        return EXIT_CONFIGURATION
    except (InputError, RouteValidationError) as e:
        logging.error(str(e))
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
