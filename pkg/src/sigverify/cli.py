"""Command-line front end: enroll, verify, benchmark, synth, features.

Exit codes: 0 success (or genuine verdict), 1 operational error, 2 usage
error, 3 forgery verdict.  Machine-readable results go to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .benchmark import BenchmarkSpec, run_benchmark
from .calibration import GridSpec
from .dataset import (
    SyntheticSpec,
    generate_synthetic,
    load_feature_dataset,
    load_probe,
    split_protocol,
    write_feature_dataset,
)
from .errors import SigverifyError
from .features import (
    FeatureSelectionConfig,
    WeightingConfig,
    select_writer_features,
)
from .dataset import feature_matrix
from .verifier import (
    enroll_writer,
    find_model,
    load_models,
    save_models,
    verify_signature,
)


def _typed(name, convert, check, requirement):
    def parse(text):
        try:
            value = convert(text)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"{name} must be {requirement}, got {text!r}"
            ) from None
        if not check(value):
            raise argparse.ArgumentTypeError(
                f"{name} must be {requirement}, got {text!r}"
            )
        return value

    return parse


_ratio = _typed("value", float, lambda v: 0 < v <= 1, "a ratio in (0, 1]")
_pos_int = _typed("value", int, lambda v: v >= 1, "a positive integer")
_nonneg_int = _typed("value", int, lambda v: v >= 0, "a nonnegative integer")
_pos_float = _typed("value", float, lambda v: v > 0, "a positive number")
_nonneg_float = _typed("value", float, lambda v: v >= 0, "a nonnegative number")
_gt1_float = _typed("value", float, lambda v: v > 1, "a number > 1")


def _eps_value(text):
    if text == "auto":
        return None
    return _pos_float(text)


def _add_selection_flags(parser):
    group = parser.add_argument_group("feature selection")
    group.add_argument(
        "--c", type=_pos_float, default=1.0,
        help="dispersion scale constant",
    )
    group.add_argument(
        "--eps", type=_eps_value, default="auto", metavar="FLOAT|auto",
        help="DBSCAN radius over per-feature dispersions ('auto' adapts to "
             "their spread)",
    )
    group.add_argument(
        "--min-pts", type=_pos_int, default=3,
        help="DBSCAN core-point neighborhood size",
    )
    group.add_argument(
        "--retention-ratio", type=_ratio, default=0.8,
        help="fraction of the original feature count to keep",
    )
    group.add_argument(
        "--k", type=_pos_int, default=2,
        help="cluster count for the feature-weighting stage",
    )
    group.add_argument(
        "--p", type=_gt1_float, default=2.0,
        help="Minkowski exponent for the feature-weighting stage",
    )
    group.add_argument(
        "--trials", type=_pos_int, default=20,
        help="random restarts averaged into the feature weights",
    )


def _add_grid_flags(parser):
    group = parser.add_argument_group("calibration grid")
    group.add_argument("--eta-min", type=_gt1_float, default=1.25,
                       help="smallest interval span (std units)")
    group.add_argument("--eta-max", type=_gt1_float, default=4.0,
                       help="largest interval span (std units)")
    group.add_argument("--eta-step", type=_pos_float, default=0.25,
                       help="interval span step")
    group.add_argument("--alpha-min", type=_nonneg_float, default=0.0,
                       help="smallest threshold slack (score-std units)")
    group.add_argument("--alpha-max", type=_nonneg_float, default=3.0,
                       help="largest threshold slack (score-std units)")
    group.add_argument("--alpha-step", type=_pos_float, default=0.25,
                       help="threshold slack step")


def _add_split_flags(parser):
    parser.add_argument(
        "--validation-count", type=_nonneg_int, default=None,
        help="held-out genuine samples for calibration (default: half the "
             "genuines left after training)",
    )
    parser.add_argument(
        "--pool-per-writer", type=_pos_int, default=1,
        help="calibration impostor samples drawn per other writer",
    )


def _selection_config(args) -> FeatureSelectionConfig:
    eps = args.eps if args.eps != "auto" else None
    return FeatureSelectionConfig(
        mom_constant=args.c,
        dbscan_eps=eps,
        dbscan_min_pts=args.min_pts,
        retention_ratio=args.retention_ratio,
        weighting=WeightingConfig(
            cluster_count=args.k,
            minkowski_exponent=args.p,
            trials=args.trials,
        ),
    )


def _grid(args) -> GridSpec:
    return GridSpec.from_bounds(
        eta_min=args.eta_min,
        eta_max=args.eta_max,
        eta_step=args.eta_step,
        alpha_min=args.alpha_min,
        alpha_max=args.alpha_max,
        alpha_step=args.alpha_step,
    )


def cmd_enroll(args) -> int:
    dataset = load_feature_dataset(args.dataset)
    config = _selection_config(args)
    grid = _grid(args)
    writer_ids = [args.writer] if args.writer else dataset.writer_ids()
    models = []
    for writer_id in writer_ids:
        try:
            model = enroll_writer(
                dataset,
                writer_id,
                args.category,
                selection_config=config,
                grid=grid,
                seed=args.seed,
                validation_count=args.validation_count,
                pool_per_writer=args.pool_per_writer,
            )
        except SigverifyError as exc:
            if args.writer:
                raise
            print(f"skipping writer {writer_id}: {exc}", file=sys.stderr)
            continue
        models.append(model)
        print(
            f"{model.writer_id},{model.selection.size},"
            f"{model.eta!r},{model.alpha!r},{model.theta!r}"
        )
    if not models:
        raise SigverifyError("no writer could be enrolled for this category")
    save_models(models, args.out)
    print(f"enrolled {len(models)} writer(s) -> {args.out}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    models = load_models(args.models)
    writer_id, sample = load_probe(args.probe)
    model = find_model(models, writer_id)
    decision = verify_signature(sample, model)
    print(decision.record())
    return 0 if decision.verdict == "genuine" else 3


def cmd_benchmark(args) -> int:
    categories = None
    if args.category:
        categories = [c for chunk in args.category for c in chunk.split(",") if c]
    spec = BenchmarkSpec(
        dataset_path=args.dataset,
        categories=categories,
        selection=_selection_config(args),
        grid=_grid(args),
        seeds=args.seed if args.seed else [0],
        output_dir=args.out,
        validation_count=args.validation_count,
        pool_per_writer=args.pool_per_writer,
        figures=not args.no_figures,
    )
    report = run_benchmark(spec)
    print("category,pooled_eer,mean_far,mean_frr,writers_evaluated,writers_skipped")
    for s in report.categories:
        print(
            f"{s.category},{s.pooled_eer!r},{s.mean_far!r},{s.mean_frr!r},"
            f"{s.writers_evaluated},{s.writers_skipped}"
        )
    if args.out:
        print(f"report files written to {args.out}", file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        writers=args.writers,
        genuine_per_writer=args.genuine,
        forgeries_per_writer=args.forgeries,
        feature_count=args.features,
        genuine_scale=args.sigma,
        forgery_offset=args.delta,
        writer_spread=args.writer_spread,
        name=Path(args.out).stem,
    )
    dataset = generate_synthetic(spec, args.seed)
    write_feature_dataset(dataset, args.out)
    print(args.out)
    return 0


def cmd_features(args) -> int:
    dataset = load_feature_dataset(args.dataset)
    config = _selection_config(args)
    writer_ids = [args.writer] if args.writer else dataset.writer_ids()
    for writer_id in writer_ids:
        try:
            split = split_protocol(
                dataset,
                writer_id,
                args.category,
                validation_count=args.validation_count,
                seed=args.seed,
                pool_per_writer=args.pool_per_writer,
            )
            train = feature_matrix(split.train_genuine)
            if config.weighting.seed is None:
                config = replace(
                    config, weighting=replace(config.weighting, seed=args.seed)
                )
            fs = select_writer_features(train, config)
        except SigverifyError as exc:
            if args.writer:
                raise
            print(f"skipping writer {writer_id}: {exc}", file=sys.stderr)
            continue
        # 1-based positions matching the f1..fm dataset columns
        ranked = ";".join(str(int(i) + 1) for i in fs.selected_indices)
        print(f"{writer_id}: [{ranked}]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigverify",
        description="Writer-adaptive online signature verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("enroll", formatter_class=fmt,
                       help="enroll writers into a model store")
    p.add_argument("--dataset", required=True, help="dataset CSV path")
    p.add_argument("--category", required=True,
                   help="protocol category, e.g. S_05 or R_01")
    p.add_argument("--out", required=True, help="model store path (JSON)")
    p.add_argument("--writer", default=None,
                   help="enroll only this writer (default: all eligible)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    _add_split_flags(p)
    _add_selection_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("verify", formatter_class=fmt,
                       help="verify one probe signature against the store")
    p.add_argument("--models", required=True, help="model store path")
    p.add_argument("--probe", required=True,
                   help="probe CSV (header writer_id,sample_id,f1,...,fm "
                        "plus one row)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("benchmark", formatter_class=fmt,
                       help="run the per-category evaluation over a dataset")
    p.add_argument("--dataset", required=True, help="dataset CSV path")
    p.add_argument("--out", default=None, help="output directory for reports")
    p.add_argument("--category", action="append", default=None,
                   help="category to evaluate (repeatable or comma-separated; "
                        "default: feasible subset of S_01,S_05,R_01,R_05)")
    p.add_argument("--seed", type=int, action="append", default=None,
                   help="random seed (repeatable; default 0)")
    p.add_argument("--no-figures", action="store_true",
                   help="skip rendering PNG figures")
    _add_split_flags(p)
    _add_selection_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("synth", formatter_class=fmt,
                       help="generate a synthetic feature dataset CSV")
    p.add_argument("--writers", type=_pos_int, default=20)
    p.add_argument("--genuine", type=_pos_int, default=20,
                   help="genuine samples per writer")
    p.add_argument("--forgeries", type=_nonneg_int, default=20,
                   help="forgery samples per writer")
    p.add_argument("--features", type=_pos_int, default=40,
                   help="feature vector length")
    p.add_argument("--sigma", type=_pos_float, default=1.0,
                   help="per-feature genuine scale")
    p.add_argument("--delta", type=_nonneg_float, default=4.0,
                   help="forgery mean offset in sigma units")
    p.add_argument("--writer-spread", type=_nonneg_float, default=10.0,
                   help="writer-mean spread in sigma units")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("features", formatter_class=fmt,
                       help="dump each writer's ranked feature indices")
    p.add_argument("--dataset", required=True, help="dataset CSV path")
    p.add_argument("--category", required=True,
                   help="protocol category fixing the training count")
    p.add_argument("--writer", default=None,
                   help="dump only this writer (default: all)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    _add_split_flags(p)
    _add_selection_flags(p)
    p.set_defaults(func=cmd_features)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SigverifyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
