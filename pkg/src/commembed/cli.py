"""Command-line interface: one subcommand per pipeline stage plus queries."""

from __future__ import annotations

import argparse
import glob as globmod
import json
import logging
import sys
from pathlib import Path

from . import cooccur, glove, ingest, pipeline, vecspace
from .classify import (
    ExperimentConfig,
    load_corpus,
    load_report,
    run_experiment,
)


def _write_json(path: str | Path, obj) -> None:
    with open(path, "wt", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_ingest(args: argparse.Namespace) -> int:
    paths = sorted(globmod.glob(args.input))
    if not paths:
        print(f"no input files match {args.input!r}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table, report = ingest.ingest_paths(paths)
    bots = ingest.load_bot_list(args.bots) if args.bots else set()
    table = ingest.filter_bots(table, bots, args.bot_suffix_heuristic)
    sets = ingest.select_active_memberships(table, args.min_comments)
    vocab, restricted = ingest.select_top_subreddits(sets, args.top, report)
    table.save(out / "activity.bin")
    restricted.save(out / "memberships.bin")
    vocab.save_tsv(out / "vocab.tsv")
    _write_json(out / "ingest_report.json", report.as_dict())
    print(
        f"ingested {report.accepted} comments from {len(paths)} file(s): "
        f"{len(vocab)} subreddits retained, {report.parse_errors} parse errors, "
        f"{sum(report.skipped.values())} skips"
    )
    return 0


def cmd_cooccur(args: argparse.Namespace) -> int:
    sets = ingest.MembershipSets.load(args.memberships)
    names = list(sets.subreddit_index.names)
    vocab = ingest.SubredditVocab(names, [len(sets.members[i]) for i in range(len(names))])
    report = cooccur.BuildReport()
    matrix = cooccur.build_cooccurrence(sets, vocab, args.max_memberships, report=report)
    matrix.save(args.out)
    if args.tsv:
        matrix.export_tsv(args.tsv)
    if args.report:
        _write_json(args.report, report.as_dict())
    print(f"built {len(matrix)} co-occurrence entries over {len(vocab)} subreddits")
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    matrix = cooccur.CooccurrenceMatrix.load(args.matrix)
    config = glove.EmbedConfig(
        dim=args.dim,
        epochs=args.epochs,
        learning_rate=args.lr,
        x_max=args.x_max,
        alpha=args.alpha,
        seed=args.seed,
    )
    result = glove.train(
        matrix,
        config,
        deterministic=args.deterministic,
        workers=args.workers,
        combine="main" if args.main_only else "sum",
    )
    out = Path(args.out)
    if out.suffix == ".bin":
        result.embeddings.save_binary(out)
    else:
        result.embeddings.save_text(out)
    if args.loss_trace:
        _write_json(args.loss_trace, result.loss_trace)
    final = result.loss_trace[-1] if result.loss_trace else float("nan")
    print(f"trained {len(matrix)} entries for {config.epochs} epochs; final loss {final:.6g}")
    return 0


def _print_ranked(ranked: list[tuple[str, float]]) -> None:
    for rank, (name, score) in enumerate(ranked, 1):
        print(f"{rank:3d}  {name}  {score:.6f}")


def cmd_query(args: argparse.Namespace) -> int:
    space = vecspace.EmbeddingSpace.load(args.embeddings)
    try:
        if args.mode == "sim":
            print(f"{space.similarity(args.names[0], args.names[1]):.6f}")
        elif args.mode == "nn":
            _print_ranked(space.nearest_neighbors(args.names[0], args.k))
        elif args.mode == "compose":
            _print_ranked(space.compose(args.names[0], args.names[1], args.k))
        else:
            _print_ranked(space.analogy(args.names[0], args.names[1], args.names[2], args.k))
    except vecspace.UnknownNameError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    space = vecspace.EmbeddingSpace.load(args.embeddings)
    if args.type == "composition":
        suite = vecspace.load_composition_suite(args.suite)
    else:
        suite = vecspace.load_analogy_suite(args.suite)
    report = vecspace.run_eval_suite(space, suite, args.k, suite_name=args.suite)
    if args.report:
        report.save(args.report)
    print(
        f"{report.kind}: {report.scored} scored ({report.skips} skipped), "
        f"hits@1 {report.hits_at_1}, hits@5 {report.hits_at_5} "
        f"({100.0 * report.hit_rate(5):.1f}%)"
    )
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    space = None
    if args.channel == "neighborhood":
        if not args.embeddings:
            print("--embeddings is required for the neighborhood channel", file=sys.stderr)
            return 2
        space = vecspace.EmbeddingSpace.load(args.embeddings)
    baseline_preds = None
    baseline_name = None
    if args.baseline:
        baseline = load_report(args.baseline)
        baseline_preds = baseline["predictions"]
        baseline_name = baseline.get("run", args.baseline)
    result = run_experiment(
        corpus,
        ExperimentConfig(
            channel=args.channel,
            folds=args.folds,
            seed=args.seed,
            l2_strength=args.l2,
            neighbor_k=args.neighbor_k,
        ),
        space=space,
        baseline_predictions=baseline_preds,
        baseline_name=baseline_name,
    )
    if args.report:
        result.save_report(args.report)
    r = result.report
    pct = {
        label: (f"{100.0 * v:.2f}%" if v is not None else "n/a")
        for label, v in r["pct_classified_deg"].items()
    }
    print(
        f"channel={args.channel}  accuracy {r['accuracy']:.4f}  "
        f"macro P/R/F1 {r['macro_precision']:.4f}/{r['macro_recall']:.4f}/{r['macro_f1']:.4f}"
    )
    print(f"classified DEG by gold label: {pct}")
    if r["flip_table"]:
        ft = r["flip_table"]
        print(
            f"vs {r['baseline']}: fixed {ft['fixed_by_context']}, "
            f"broken {ft['broken_by_context']}, "
            f"context-sensitive {ft['context_sensitive']}"
        )
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    if args.action == "synth":
        with open(args.spec, "rt", encoding="utf-8") as fh:
            spec = json.load(fh)
        config = pipeline.resolve_config(
            {
                "seed": spec.get("seed", 0),
                "synth": {k: spec.get(k) for k in ("block", "lattice", "context")},
            }
        )
        artifacts = pipeline.run_synth(config, Path(args.out))
        for name, path in sorted(artifacts.items()):
            print(f"{name}: {path}")
        return 0
    config = pipeline.load_config(args.config)
    for item in args.set or []:
        key, _, value = item.partition("=")
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = json.loads(value)
    manifest = pipeline.run_pipeline(config, args.out)
    print(f"pipeline finished: {len(manifest['artifacts'])} artifacts in {args.out}")
    print(f"stages: {', '.join(manifest['stages_run'])}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commembed",
        description="Community embeddings from comment dumps, plus context-aware classification.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="aggregate comment dumps into activity artifacts")
    p.add_argument("--input", required=True, help="glob of NDJSON dump files (may be compressed)")
    p.add_argument("--bots", help="bot account list, one name per line")
    p.add_argument("--min-comments", type=int, default=10, help="active-user threshold")
    p.add_argument("--top", type=int, default=10400, help="subreddits to retain by activity")
    p.add_argument("--bot-suffix-heuristic", action="store_true",
                   help="also drop accounts whose name ends with 'bot'")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cooccur", help="build the subreddit co-occurrence matrix")
    p.add_argument("--memberships", required=True)
    p.add_argument("--out", required=True, help="matrix file (binary)")
    p.add_argument("--tsv", help="optional TSV debug export")
    p.add_argument("--report", help="optional build report JSON")
    p.add_argument("--max-memberships", type=int, default=None,
                   help="skip users active in more subreddits than this")
    p.set_defaults(func=cmd_cooccur)

    p = sub.add_parser("embed", help="train embeddings over a co-occurrence matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--dim", type=int, default=150)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--x-max", type=float, default=100.0)
    p.add_argument("--alpha", type=float, default=0.75)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=True,
                   help="sequential updates, bit-reproducible (default on)")
    p.add_argument("--workers", type=int, default=4, help="threads in parallel mode")
    p.add_argument("--main-only", action="store_true", help="export w instead of w + w~")
    p.add_argument("--out", required=True, help=".bin for binary, anything else for text")
    p.add_argument("--loss-trace", help="optional per-epoch loss JSON")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("query", help="similarity / neighbor / compose / analogy queries")
    p.add_argument("mode", choices=["sim", "nn", "compose", "analogy"])
    p.add_argument("--embeddings", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("names", nargs="+", help="sim: A B | nn: A | compose: A B | analogy: A B C")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="grade a composition or analogy suite")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--type", choices=["composition", "analogy"], required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--report", help="report JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("classify", help="cross-validated classification experiment")
    p.add_argument("--corpus", required=True, help="labeled corpus CSV")
    p.add_argument("--channel", choices=["none", "name", "neighborhood"], default="none")
    p.add_argument("--embeddings", help="embedding file (neighborhood channel)")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--neighbor-k", type=int, default=5)
    p.add_argument("--baseline", help="baseline report JSON for the flip table")
    p.add_argument("--report", help="report JSON path")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("pipeline", help="run the full pipeline or generate synthetic inputs")
    psub = p.add_subparsers(dest="action", required=True)
    prun = psub.add_parser("run", help="execute configured stages")
    prun.add_argument("--config", required=True, help="pipeline config JSON")
    prun.add_argument("--out", required=True, help="output directory")
    prun.add_argument("--set", action="append", metavar="KEY=JSON",
                      help="override config entries, e.g. --set embed.epochs=10")
    prun.set_defaults(func=cmd_pipeline)
    psynth = psub.add_parser("synth", help="generate synthetic dumps/corpora/suites")
    psynth.add_argument("--spec", required=True, help="synthetic spec JSON")
    psynth.add_argument("--out", required=True, help="output directory")
    psynth.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (
        pipeline.PipelineError,
        ingest.fileio.FormatError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
