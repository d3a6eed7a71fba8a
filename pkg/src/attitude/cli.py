"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from typing import Sequence

from . import batch, clustering, forecasting, plot, stream, synthfeed
from ._io import atomic_write, fmt_float
from .errors import DataError, MalformedRow
from .sentiment import load_lexicon, score_text

logger = logging.getLogger("attitude")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text} is not > 0")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="attitude", description="Detect and forecast attitude patterns in comment streams.")
    p.add_argument("--quiet", action="store_true", help="suppress progress messages")
    p.add_argument("--seed", dest="global_seed", type=int, default=0, help="default seed for seeded subcommands")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("score", help="score text with a lexicon")
    s.add_argument("--lexicon", required=True)
    s.add_argument("--text", action="append", help="text to score (repeatable; default: lines of stdin)")

    s = sub.add_parser("replay", help="replay a corpus through the stream layer")
    s.add_argument("--corpus", required=True)
    s.add_argument("--lexicon")
    s.add_argument("--rescore", action="store_true")
    s.add_argument("--poll-interval", type=_positive_float, default=0.1)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--speedup", type=_positive_float, default=1.0)
    g.add_argument("--instant", action="store_true")
    s.add_argument("--horizon", type=_positive_int, default=30000)
    s.add_argument("--events", required=True)
    s.add_argument("--dashboard", required=True)

    s = sub.add_parser("featurize", help="bin-average corpus timelines into feature vectors")
    s.add_argument("--corpus", required=True)
    s.add_argument("--channel", choices=["pos", "neg"], required=True)
    s.add_argument("--rescore", action="store_true")
    s.add_argument("--lexicon")
    s.add_argument("--bins", type=_positive_int, default=batch.DEFAULT_BINS)
    s.add_argument("--bin-width", type=_positive_int, default=batch.DEFAULT_BIN_WIDTH)
    s.add_argument("--out", required=True)

    s = sub.add_parser("cluster", help="fit a cluster model on feature vectors")
    s.add_argument("--features", required=True)
    s.add_argument("--k", type=_positive_int, default=3)
    s.add_argument("--algo", choices=["kmeans", "minibatch"], default="kmeans")
    s.add_argument("--seed", type=int)
    s.add_argument("--max-iter", type=_positive_int, default=300)
    s.add_argument("--batch-size", type=_positive_int, default=32)
    s.add_argument("--iterations", type=_positive_int, default=200)
    s.add_argument("--bin-width", type=_positive_int, default=batch.DEFAULT_BIN_WIDTH)
    s.add_argument("--out", required=True)

    s = sub.add_parser("predict", help="forecast the continuation of a post")
    s.add_argument("--model", required=True)
    s.add_argument("--train", required=True)
    s.add_argument("--target", required=True, help="post id from --train, or a CSV of prefixes/vectors")
    s.add_argument("--prefix-len", type=_positive_int, default=forecasting.DEFAULT_PREFIX_LEN)
    s.add_argument("--out", required=True)

    s = sub.add_parser("evaluate", help="cross-validate the two-step forecaster")
    s.add_argument("--features", required=True)
    s.add_argument("--folds", type=int, default=10)
    s.add_argument("--k", type=_positive_int, default=3)
    s.add_argument("--seed", type=int)
    s.add_argument("--prefix-len", type=_positive_int, default=forecasting.DEFAULT_PREFIX_LEN)
    s.add_argument("--algo", choices=["kmeans", "minibatch"], default="kmeans")
    s.add_argument("--out", help="also write the report to this file")

    s = sub.add_parser("gen", help="generate a synthetic archetype corpus")
    for kind in synthfeed.ARCHETYPES:
        s.add_argument(f"--{kind}", type=int, default=0, metavar="N", help=f"number of {kind} posts")
        s.add_argument(f"--{kind}-base", type=float, default=synthfeed.DEFAULT_BASE[kind])
    s.add_argument("--sigma", type=float, default=0.03)
    s.add_argument("--comments-per-bin", type=_positive_int, default=3)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--labels", required=True)

    s = sub.add_parser("plot", help="render a dashboard or feature CSV as SVG")
    s.add_argument("--series", required=True)
    s.add_argument("--post")
    s.add_argument("--out", required=True)
    return p


def _seed(args) -> int:
    return args.global_seed if getattr(args, "seed", None) is None else args.seed


def cmd_score(args) -> int:
    lex = load_lexicon(args.lexicon)
    texts = args.text if args.text is not None else [ln.rstrip("\n") for ln in sys.stdin]
    for t in texts:
        s = score_text(t, lex)
        print(",".join(fmt_float(x) for x in s.as_tuple()))
    return EXIT_OK


def cmd_replay(args) -> int:
    lex = load_lexicon(args.lexicon) if args.lexicon else None
    config = stream.StreamConfig(
        poll_interval_s=args.poll_interval,
        speedup=math.inf if args.instant else args.speedup,
        horizon_s=args.horizon,
    )
    sinks = [stream.JsonlEventSink(args.events), stream.DashboardCsvSink(args.dashboard)]
    summary = stream.run_replay(config, args.corpus, lex, sinks, rescore=args.rescore)
    logger.info("replayed %d comments, %d events", summary.comments, summary.events)
    return EXIT_OK


def cmd_featurize(args) -> int:
    if args.rescore and not args.lexicon:
        raise UsageError("--rescore requires --lexicon")
    lex = load_lexicon(args.lexicon) if args.lexicon else None
    timelines = batch.load_corpus(args.corpus, lex, rescore=args.rescore)
    vectors, skipped = batch.featurize_corpus(timelines, args.channel, args.bins, args.bin_width)
    batch.write_features(args.out, vectors)
    logger.info("wrote %d vectors, skipped %d post(s)", len(vectors), len(skipped))
    return EXIT_OK


def _single_channel(vectors):
    channels = {v.channel for v in vectors}
    if len(channels) > 1:
        raise DataError("feature file mixes channels; split it first")
    return vectors


def cmd_cluster(args) -> int:
    vectors = _single_channel(batch.read_features(args.features, args.bin_width))
    if args.algo == "kmeans":
        model = clustering.kmeans(vectors, args.k, _seed(args), max_iter=args.max_iter)
    else:
        model = clustering.minibatch_kmeans(
            vectors, args.k, _seed(args), batch_size=args.batch_size, iterations=args.iterations
        )
    model.save(args.out)
    for prof in clustering.describe_clusters(model, vectors):
        logger.info("cluster %d: %d posts, %s", prof.index, prof.size, prof.label)
    return EXIT_OK


def _read_targets(path: str, prefix_len: int, dim: int):
    """Rows of a feature CSV, or bare comma-separated value lines."""
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
    if first.startswith("post_id,"):
        return [(v.post_id, v.values) for v in batch.read_features(path)]
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for i, rec in enumerate(csv.reader(fh), start=1):
            if not rec:
                continue
            try:
                values = tuple(float(x) for x in rec)
            except ValueError:
                raise MalformedRow(i, "expected comma-separated numbers") from None
            if len(values) < prefix_len or len(values) > dim:
                raise MalformedRow(i, f"need between {prefix_len} and {dim} values")
            out.append((f"prefix-{i}", values))
    return out


def cmd_predict(args) -> int:
    model = clustering.ClusterModel.load(args.model)
    train = _single_channel(batch.read_features(args.train, model.bin_width_s))
    by_id = {v.post_id: v for v in train}
    p = args.prefix_len
    if p >= model.dim:
        raise UsageError(f"--prefix-len must be below {model.dim}")
    if args.target in by_id:
        v = by_id[args.target]
        targets = [(v.post_id, v.values)]
    elif os.path.isfile(args.target):
        targets = _read_targets(args.target, p, model.dim)
    else:
        raise DataError(f"{args.target!r} is neither a training post id nor a file")
    forecasts = []
    for pid, values in targets:
        actual = values[p:] if len(values) == model.dim else None
        # a training post never serves as its own donor
        fc = forecasting.predict(values[:p], model, train, pid, actual, exclude={pid})
        forecasts.append(fc)
        if fc.mae is not None:
            logger.info("%s: donor %s, MAE %s", pid, fc.donor_post_id, fmt_float(fc.mae))
    forecasting.write_forecasts(args.out, forecasts)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    vectors = _single_channel(batch.read_features(args.features))
    report = forecasting.cross_validate(
        vectors, folds=args.folds, k=args.k, seed=_seed(args), prefix_len=args.prefix_len, algorithm=args.algo
    )
    text = "\n".join(report.lines()) + "\n"
    sys.stdout.write(text)
    if args.out:
        with atomic_write(args.out) as fh:
            fh.write(text)
    return EXIT_OK


def cmd_gen(args) -> int:
    specs = []
    for kind in synthfeed.ARCHETYPES:
        count = getattr(args, kind)
        if count < 0:
            raise UsageError(f"--{kind} must be >= 0")
        if count:
            base = getattr(args, f"{kind}_base")
            specs.append((synthfeed.ArchetypeSpec(kind, base, args.sigma, args.comments_per_bin), count))
    if not specs:
        raise UsageError("ask for at least one post (--decay/--stable/--surge)")
    synthfeed.generate_corpus(specs, _seed(args), args.out, args.labels)
    logger.info("generated %d posts", sum(c for _, c in specs))
    return EXIT_OK


def cmd_plot(args) -> int:
    plot.plot_file(args.series, args.out, args.post)
    return EXIT_OK


COMMANDS = {
    "score": cmd_score,
    "replay": cmd_replay,
    "featurize": cmd_featurize,
    "cluster": cmd_cluster,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "gen": cmd_gen,
    "plot": cmd_plot,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", force=True)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"attitude {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, ValueError) as exc:
        print(f"attitude {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
