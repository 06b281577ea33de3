"""Command line entry point: ``mcrcf {index,knn,predict,evaluate,inspect}``.

Exit codes: 0 success, 1 internal error, 2 usage error, 3 data error.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .encoder import MAX_SCALE_FACTOR, encode_query
from .evaluation import (
    SIMILARITIES,
    ExperimentConfig,
    build_mode_index,
    emit_report,
    run_experiment,
)
from .index import IndexFormatError, load_index, save_index
from .knn import KnnConfig, knn_terms
from .predictor import predict
from .ratings import FORMATS, RatingScale, RatingsError, compute_means, load_ratings
from .scorers import KINDS, ScorerConfig

EXIT_INTERNAL, EXIT_USAGE, EXIT_DATA = 1, 2, 3

MODE_NAMES = {"user": "user_based", "item": "item_based"}


class DataError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _scale_factor(text: str) -> int:
    v = _positive_int(text)
    if v > MAX_SCALE_FACTOR:
        raise argparse.ArgumentTypeError(f"scale factor must be <= {MAX_SCALE_FACTOR}")
    return v


def _int_list(text: str) -> list[int]:
    return [_positive_int(p) for p in text.split(",") if p]


def _scale(text: str) -> RatingScale:
    try:
        return RatingScale.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_data_args(p):
    p.add_argument("--format", choices=FORMATS, default="ml100k")
    p.add_argument("--scale", type=_scale, help="rating scale min:max:step (required for csv)")


def _add_scorer_args(p, similarities=KINDS, default="tf"):
    p.add_argument("--similarity", choices=similarities, default=default)
    p.add_argument("--bm25-k1", type=float, default=1.2)
    p.add_argument("--bm25-b", type=float, default=0.75)
    p.add_argument("--mu", type=float, default=2000.0)
    p.add_argument("--lambda", dest="jm_lambda", type=float, default=0.1)


def _scorer(args, kind=None) -> ScorerConfig:
    return ScorerConfig(kind or args.similarity, args.bm25_k1, args.bm25_b, args.mu, args.jm_lambda)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcrcf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="encode a ratings file and write an index")
    p.add_argument("--input", required=True, type=Path)
    _add_data_args(p)
    p.add_argument("--mode", choices=list(MODE_NAMES), default="user")
    p.add_argument("--scale-factor", type=_scale_factor, default=100)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("knn", help="print the neighbors of one indexed document")
    p.add_argument("--index", required=True, type=Path)
    p.add_argument("--query-id", required=True, type=int)
    p.add_argument("--k", type=_positive_int, default=20)
    p.add_argument("--m", type=_positive_int, default=10)
    p.add_argument("--normalize-query", action="store_true", help="divide scores by the query norm")
    _add_scorer_args(p)

    p = sub.add_parser("predict", help="predict one rating")
    p.add_argument("--index", required=True, type=Path)
    p.add_argument("--train", required=True, type=Path)
    _add_data_args(p)
    p.add_argument("--user", required=True, type=int)
    p.add_argument("--item", required=True, type=int)
    p.add_argument("--k", type=_positive_int, default=20)
    p.add_argument("--m", type=_positive_int, default=10)
    _add_scorer_args(p)

    p = sub.add_parser("evaluate", help="run a repeated-split MAE experiment")
    p.add_argument("--input", required=True, type=Path)
    _add_data_args(p)
    p.add_argument("--modes", default="user,item")
    p.add_argument("--similarities", default="tf")
    p.add_argument("--k-list", type=_int_list, default=[10])
    p.add_argument("--m", type=_positive_int, default=10)
    p.add_argument("--scale-factor", type=_scale_factor, default=100)
    p.add_argument("--splits", type=_positive_int, default=10)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rounding", choices=("rounded", "raw"), default="rounded")
    _add_scorer_args(p)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("inspect", help="print index statistics")
    p.add_argument("--index", required=True, type=Path)
    return parser


def _load(args, path):
    if args.format == "csv" and args.scale is None:
        raise DataError("csv input requires --scale")
    return load_ratings(path, args.format, args.scale)


def cmd_index(args, out) -> None:
    dataset = _load(args, args.input)
    means = compute_means(dataset)
    index = build_mode_index(dataset, means, MODE_NAMES[args.mode], args.scale_factor)
    save_index(index, args.out)
    print(f"indexed {len(index)} documents -> {args.out}", file=sys.stderr)


def cmd_knn(args, out) -> None:
    index = load_index(args.index)
    if args.query_id not in index:
        raise DataError(f"id {args.query_id} is not in the index")
    query = index.document_terms(args.query_id)
    hits = knn_terms(
        index,
        query,
        KnnConfig(args.k, args.m),
        _scorer(args),
        exclude_self=args.query_id,
        normalize_query=args.normalize_query,
    )
    for n in hits:
        print(f"{n.neighbor_id}\t{n.similarity:.9g}", file=out)


def cmd_predict(args, out) -> None:
    index = load_index(args.index)
    train = _load(args, args.train)
    means = compute_means(train)
    mode = index.mode
    entity = args.user if mode == "user_based" else args.item
    profiles = train.profiles(mode)
    neighbors = []
    if entity in profiles and entity in index:
        query = encode_query(profiles[entity], means.of(mode)[entity], index.scale_factor)
        neighbors = knn_terms(
            index, query, KnnConfig(args.k, args.m), _scorer(args), exclude_self=entity
        )
    p = predict(mode, args.user, args.item, neighbors, train, means)
    print(f"value\t{p.value:.4f}", file=out)
    print(f"rounded\t{p.rounded:g}", file=out)
    print(f"source\t{p.source}", file=out)
    print(f"neighbor_count_used\t{p.neighbor_count_used}", file=out)


def cmd_evaluate(args, out) -> None:
    modes = [MODE_NAMES.get(m.strip(), m.strip()) for m in args.modes.split(",") if m.strip()]
    sims = [s.strip() for s in args.similarities.split(",") if s.strip()]
    for s in sims:
        if s not in SIMILARITIES:
            raise UsageError(f"unknown similarity {s!r}; choose from {', '.join(SIMILARITIES)}")
    if args.format == "csv" and args.scale is None:
        raise DataError("csv input requires --scale")
    try:
        config = ExperimentConfig(
            dataset_path=args.input,
            dataset_format=args.format,
            modes=modes,
            similarities=sims,
            k_values=args.k_list,
            m=args.m,
            scale_factor=args.scale_factor,
            split_count=args.splits,
            train_fraction=args.train_fraction,
            base_seed=args.seed,
            rounding=args.rounding,
            scorer=_scorer(args, "tf"),
            scale=args.scale,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not 0 < args.train_fraction < 1:
        raise UsageError("--train-fraction must lie strictly between 0 and 1")
    report = run_experiment(config)
    fmt = "tsv" if args.out.suffix == ".tsv" else "csv"
    emit_report(report, args.out, fmt)
    print(f"wrote {len(report.rows)} rows -> {args.out}", file=sys.stderr)


def cmd_inspect(args, out) -> None:
    index = load_index(args.index)
    stats = index.stats("PRATE")
    rows = [
        ("mode", index.mode),
        ("scale_factor", index.scale_factor),
        ("documents", len(index)),
        ("empty_documents", int((index.lengths == 0).sum())),
        ("terms_prate", len(index.postings["PRATE"])),
        ("terms_nrate", len(index.postings["NRATE"])),
        ("total_terms", stats.total_terms),
        ("avg_doc_length", f"{stats.avg_doc_length:.6g}"),
    ]
    for k, v in rows:
        print(f"{k}\t{v}", file=out)


class UsageError(Exception):
    pass


COMMANDS = {
    "index": cmd_index,
    "knn": cmd_knn,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "inspect": cmd_inspect,
}


def main(argv=None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = out or sys.stdout
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"mcrcf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, RatingsError, IndexFormatError, OSError) as exc:
        print(f"mcrcf {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        logging.getLogger(__name__).exception("internal error")
        print(f"mcrcf {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
