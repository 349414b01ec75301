"""End-to-end orchestration: synth -> ingest -> cooccur -> embed -> eval/classify.

A run takes a single JSON config, executes the enabled stages in
dependency order, and writes every artifact plus a manifest (resolved
config, seeds, sha256 of each output) into the output directory. In
deterministic mode a repeated run with the same config reproduces every
checksum.
"""

from __future__ import annotations

import copy
import glob as globmod
import json
import logging
from pathlib import Path

from . import __version__, cooccur, fileio, glove, ingest, synth, vecspace
from .classify import ExperimentConfig, load_corpus, run_experiment

log = logging.getLogger(__name__)


class PipelineError(Exception):
    """A stage could not run; the message names the stage and the problem."""


def default_config() -> dict:
    return {
        "seed": 0,
        "deterministic": True,
        "synth": {"block": None, "lattice": None, "context": None},
        "ingest": {
            "enabled": True,
            "input": None,
            "bots": None,
            "min_comments": 10,
            "top": 10400,
            "bot_suffix_heuristic": False,
        },
        "cooccur": {"enabled": True, "max_memberships": None},
        "embed": {
            "enabled": True,
            "dim": 150,
            "epochs": 100,
            "learning_rate": 0.05,
            "x_max": 100.0,
            "alpha": 0.75,
            "workers": 4,
        },
        "eval": {"enabled": False, "composition_suite": None, "analogy_suite": None, "k": 5},
        "classify": {
            "enabled": False,
            "corpus": None,
            "channels": ["none", "name"],
            "folds": 5,
            "l2_strength": 1e-4,
            "neighbor_k": 5,
        },
    }


def resolve_config(overrides: dict | None = None) -> dict:
    """Defaults deep-merged with user overrides (dicts merge, scalars replace)."""

    def merge(base, over):
        for key, value in over.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                merge(base[key], value)
            else:
                base[key] = value

    config = default_config()
    if overrides:
        merge(config, copy.deepcopy(overrides))
    return config


def load_config(path: str | Path) -> dict:
    with open(path, "rt", encoding="utf-8") as fh:
        return resolve_config(json.load(fh))


def _write_json(path: Path, obj) -> None:
    with open(path, "wt", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_synth(config: dict, out_dir: Path) -> dict[str, Path]:
    """Generate whichever synthetic inputs the config asks for."""
    seed = config["seed"]
    spec_block = config["synth"].get("block")
    spec_lattice = config["synth"].get("lattice")
    spec_context = config["synth"].get("context")
    artifacts: dict[str, Path] = {}
    if spec_block and spec_lattice:
        raise PipelineError("synth: choose either a block or a lattice dump, not both")
    block_spec = None
    if spec_block:
        block_spec = synth.BlockSpec(**spec_block)
        artifacts.update(synth.generate_block_dump(block_spec, seed, out_dir))
    if spec_lattice:
        artifacts.update(
            synth.generate_lattice_dump(synth.LatticeSpec(**spec_lattice), seed, out_dir)
        )
    if spec_context is not None:
        params = dict(spec_context)
        over_blocks = params.pop("over_blocks", False)
        if over_blocks:
            if block_spec is None:
                raise PipelineError(
                    "synth: context corpus over_blocks requires a block dump spec"
                )
            cspec = synth.ContextCorpusSpec.over_blocks(block_spec, **params)
        else:
            cspec = synth.ContextCorpusSpec(**params)
        artifacts.update(synth.write_context_corpus(cspec, seed, out_dir))
    return artifacts


def _require(path: Path | None, stage: str, what: str) -> Path:
    if path is None or not Path(path).exists():
        raise PipelineError(f"stage '{stage}': missing {what} ({path})")
    return Path(path)


def run_pipeline(config: dict, out_dir: str | Path) -> dict:
    """Execute enabled stages; returns the manifest (also written to disk)."""
    config = resolve_config(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, Path] = {}
    stages_run: list[str] = []
    seed = config["seed"]
    deterministic = bool(config["deterministic"])

    _write_json(out_dir / "resolved_config.json", config)
    artifacts["resolved_config"] = out_dir / "resolved_config.json"

    if any(config["synth"].get(k) for k in ("block", "lattice", "context")):
        artifacts.update(run_synth(config, out_dir))
        stages_run.append("synth")

    if config["ingest"]["enabled"]:
        cfg = config["ingest"]
        if cfg["input"]:
            paths = sorted(globmod.glob(cfg["input"]))
            if not paths:
                raise PipelineError(f"stage 'ingest': no files match {cfg['input']!r}")
        else:
            paths = [_require(artifacts.get("dump"), "ingest", "comment dump")]
        table, report = ingest.ingest_paths(paths)
        bots_path = cfg["bots"] or artifacts.get("bots")
        bots = ingest.load_bot_list(bots_path) if bots_path else set()
        table = ingest.filter_bots(table, bots, cfg["bot_suffix_heuristic"])
        sets = ingest.select_active_memberships(table, cfg["min_comments"])
        vocab, restricted = ingest.select_top_subreddits(sets, cfg["top"], report)
        table.save(out_dir / "activity.bin")
        restricted.save(out_dir / "memberships.bin")
        vocab.save_tsv(out_dir / "vocab.tsv")
        _write_json(out_dir / "ingest_report.json", report.as_dict())
        artifacts.update(
            {
                "activity": out_dir / "activity.bin",
                "memberships": out_dir / "memberships.bin",
                "vocab": out_dir / "vocab.tsv",
                "ingest_report": out_dir / "ingest_report.json",
            }
        )
        stages_run.append("ingest")

    if config["cooccur"]["enabled"]:
        members_path = _require(
            artifacts.get("memberships", out_dir / "memberships.bin"),
            "cooccur",
            "membership sets",
        )
        sets = ingest.MembershipSets.load(members_path)
        vocab = ingest.SubredditVocab(
            list(sets.subreddit_index.names),
            [len(sets.members[i]) for i in range(len(sets.subreddit_index.names))],
        )
        report = cooccur.BuildReport()
        matrix = cooccur.build_cooccurrence(
            sets, vocab, config["cooccur"]["max_memberships"], report=report
        )
        matrix.save(out_dir / "matrix.bin")
        _write_json(out_dir / "cooccur_report.json", report.as_dict())
        artifacts["matrix"] = out_dir / "matrix.bin"
        artifacts["cooccur_report"] = out_dir / "cooccur_report.json"
        stages_run.append("cooccur")

    if config["embed"]["enabled"]:
        matrix_path = _require(
            artifacts.get("matrix", out_dir / "matrix.bin"), "embed", "co-occurrence matrix"
        )
        matrix = cooccur.CooccurrenceMatrix.load(matrix_path)
        cfg = config["embed"]
        econf = glove.EmbedConfig(
            dim=cfg["dim"],
            epochs=cfg["epochs"],
            learning_rate=cfg["learning_rate"],
            x_max=cfg["x_max"],
            alpha=cfg["alpha"],
            seed=seed,
        )
        result = glove.train(
            matrix, econf, deterministic=deterministic, workers=cfg["workers"]
        )
        result.embeddings.save_binary(out_dir / "embeddings.bin")
        result.embeddings.save_text(out_dir / "embeddings.txt")
        _write_json(out_dir / "loss_trace.json", result.loss_trace)
        artifacts.update(
            {
                "embeddings": out_dir / "embeddings.bin",
                "embeddings_text": out_dir / "embeddings.txt",
                "loss_trace": out_dir / "loss_trace.json",
            }
        )
        stages_run.append("embed")

    if config["eval"]["enabled"]:
        space = vecspace.EmbeddingSpace.load(
            _require(
                artifacts.get("embeddings", out_dir / "embeddings.bin"),
                "eval",
                "embeddings",
            )
        )
        cfg = config["eval"]
        for kind, loader in (
            ("composition", vecspace.load_composition_suite),
            ("analogy", vecspace.load_analogy_suite),
        ):
            suite_path = cfg[f"{kind}_suite"] or artifacts.get(f"{kind}_suite")
            if suite_path is None:
                continue
            suite = loader(_require(Path(suite_path), "eval", f"{kind} suite"))
            # Report the suite by file name so manifests reproduce across
            # output directories.
            report = vecspace.run_eval_suite(
                space, suite, cfg["k"], suite_name=Path(suite_path).name
            )
            report.save(out_dir / f"eval_{kind}.json")
            artifacts[f"eval_{kind}"] = out_dir / f"eval_{kind}.json"
        stages_run.append("eval")

    if config["classify"]["enabled"]:
        cfg = config["classify"]
        corpus_path = cfg["corpus"] or artifacts.get("corpus")
        corpus = load_corpus(_require(corpus_path and Path(corpus_path), "classify", "labeled corpus"))
        space = None
        if "neighborhood" in cfg["channels"]:
            emb_path = _require(
                artifacts.get("embeddings", out_dir / "embeddings.bin"),
                "classify",
                "embeddings for the neighborhood channel",
            )
            space = vecspace.EmbeddingSpace.load(emb_path)
        baseline_preds = None
        for channel in cfg["channels"]:
            result = run_experiment(
                corpus,
                ExperimentConfig(
                    channel=channel,
                    folds=cfg["folds"],
                    seed=seed,
                    l2_strength=cfg["l2_strength"],
                    neighbor_k=cfg["neighbor_k"],
                ),
                space=space,
                baseline_predictions=baseline_preds,
                baseline_name="channel-none" if baseline_preds is not None else None,
            )
            result.save_report(out_dir / f"classify_{channel}.json")
            artifacts[f"classify_{channel}"] = out_dir / f"classify_{channel}.json"
            if channel == "none":
                baseline_preds = result.predictions
        stages_run.append("classify")

    manifest = {
        "version": __version__,
        "seed": seed,
        "deterministic": deterministic,
        "stages_run": stages_run,
        "config": config,
        "artifacts": {
            name: {
                "path": str(Path(path).name),
                "sha256": fileio.sha256_file(path),
                "bytes": Path(path).stat().st_size,
            }
            for name, path in sorted(artifacts.items())
        },
    }
    _write_json(out_dir / "manifest.json", manifest)
    return manifest
