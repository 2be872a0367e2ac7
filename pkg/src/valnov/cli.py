"""Command-line pipeline driver.

Each subcommand runs one pipeline stage into a run directory that
records the resolved config, sha256 digests of its inputs, its outputs,
and a manifest. Errors exit nonzero with a single
``error: <category>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import baseline as baseline_mod
from . import mtl
from .config import RunConfig, load_config, resolved_config_json
from .contrastive import constraint_satisfaction, contrastive_train
from .corpus import (
    ArgumentInstance,
    Split,
    Task,
    class_distribution,
    extract_triplets,
    load_corpus,
    load_instances_jsonl,
    load_triplets_jsonl,
    save_instances_jsonl,
    save_triplets_jsonl,
    topic_overlap,
)
from .encoder import ReferenceEncoder
from .errors import (
    CacheMissError,
    ConfigurationError,
    CoverageError,
    DataError,
    ParseError,
    ProviderError,
    SchemaError,
    TrainingError,
)
from .evaluation import (
    EvalReport,
    evaluate,
    render_text,
    report_from_json,
    report_to_json,
    seed_summary,
)
from .fsutil import atomic_write_text, sha256_file
from .predictions import PredictionSet, load_predictions, mix, save_predictions
from .prompting import ReplayCache, make_provider, prompt_predict, select_few_shot
from .synthetic import (
    make_profile_splits,
    make_separable_corpus,
    write_instances_csv,
)

_ERROR_CATEGORIES: list[tuple[type[Exception], str]] = [
    (SchemaError, "schema"),
    (CoverageError, "coverage"),
    (ParseError, "parse"),
    (DataError, "data"),
    (CacheMissError, "cache-miss"),
    (ProviderError, "provider"),
    (TrainingError, "training"),
    (ConfigurationError, "configuration"),
    (FileNotFoundError, "usage"),
]


class _RunDir:
    """Collects inputs/outputs of one stage and writes the manifest."""

    def __init__(self, path: Path, command: str, config: RunConfig):
        self.path = path
        self.command = command
        self.config = config
        self.inputs: dict[str, dict[str, str]] = {}
        self.output_names: list[str] = []
        path.mkdir(parents=True, exist_ok=True)

    def record_input(self, label: str, path: str | Path) -> None:
        self.inputs[label] = {"path": str(path), "sha256": sha256_file(path)}

    def write_text(self, name: str, text: str) -> Path:
        out = self.path / name
        atomic_write_text(out, text)
        if name not in self.output_names:
            self.output_names.append(name)
        return out

    def track_output(self, name: str) -> None:
        if name not in self.output_names:
            self.output_names.append(name)

    def finalize(self) -> None:
        config_text = resolved_config_json(self.config)
        self.write_text("config.json", config_text)
        manifest = {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": {
                name: sha256_file(self.path / name) for name in sorted(self.output_names)
            },
            "created": datetime.now(timezone.utc).isoformat(),
        }
        atomic_write_text(
            self.path / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True)
        )


def _require_file(path: str | Path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return path


def _load_instances(
    path: str | Path, config: RunConfig, split: Split
) -> list[ArgumentInstance]:
    path = _require_file(path)
    if path.suffix == ".jsonl":
        return load_instances_jsonl(path)
    return load_corpus(path, column_map=config.data.column_map or None, split=split)


def _split_path(config: RunConfig, split: Split) -> str:
    return {
        Split.TRAIN: config.data.train_path,
        Split.DEV: config.data.dev_path,
        Split.TEST: config.data.test_path,
    }[split]


def _save_prediction_file(run: _RunDir, name: str, preds: PredictionSet) -> Path:
    out = run.path / name
    save_predictions(preds, out)
    run.track_output(name)
    return out


# --- subcommands ---


def cmd_prepare_data(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    run = _RunDir(Path(args.run_dir), "prepare-data", config)

    splits_arg = [Split(s.strip()) for s in args.splits.split(",") if s.strip()]
    per_split: dict[Split, list[ArgumentInstance]] = {}
    if args.synthetic == "profile":
        generated = make_profile_splits(seed=config.seed)
        for split in splits_arg:
            per_split[split] = generated[split]
            csv_path = write_instances_csv(per_split[split], run.path / f"{split.value}.csv")
            run.track_output(csv_path.name)
    elif args.synthetic == "separable":
        train, dev = make_separable_corpus()
        for split, instances in ((Split.TRAIN, train), (Split.DEV, dev)):
            if split in splits_arg:
                per_split[split] = instances
                csv_path = write_instances_csv(instances, run.path / f"{split.value}.csv")
                run.track_output(csv_path.name)
    else:
        for split in splits_arg:
            path = _split_path(config, split)
            per_split[split] = _load_instances(path, config, split)
            run.record_input(split.value, path)

    stats: dict[str, object] = {"splits": {}}
    for split, instances in per_split.items():
        save_instances_jsonl(instances, run.path / f"instances-{split.value}.jsonl")
        run.track_output(f"instances-{split.value}.jsonl")
        stats["splits"][split.value] = {
            "size": len(instances),
            "class_distribution": list(class_distribution(instances).counts),
            "topics": len({inst.topic.strip() for inst in instances}),
        }
    overlaps = {}
    named = list(per_split.items())
    for i, (split_a, insts_a) in enumerate(named):
        for split_b, insts_b in named[i + 1 :]:
            overlaps[f"{split_a.value}-{split_b.value}"] = topic_overlap(insts_a, insts_b)
    stats["topic_overlaps"] = overlaps

    if Split.TRAIN in per_split:
        triplets = extract_triplets(per_split[Split.TRAIN])
        save_triplets_jsonl(triplets, run.path / "triplets.jsonl")
        run.track_output("triplets.jsonl")
        stats["train_triplets"] = len(triplets)

    run.write_text("stats.json", json.dumps(stats, indent=2, sort_keys=True))
    run.finalize()
    print(json.dumps(stats, sort_keys=True))
    return 0


def _train_once(
    config: RunConfig,
    run: _RunDir,
    train_set: Sequence[ArgumentInstance],
    dev_set: Sequence[ArgumentInstance],
    seed: int,
    init_encoder: str | None,
    checkpoint_name: str = "checkpoint.json",
) -> tuple[mtl.TrainResult, Path]:
    if config.pretrained.kind != "reference":
        raise ConfigurationError(
            "training updates encoder weights and needs pretrained.kind "
            '"reference"; external encoders are inference-only'
        )
    train_config = config.train_config(seed=seed)
    if init_encoder is not None:
        encoder, _ = mtl.load_encoder_checkpoint(_require_file(init_encoder))
        run.record_input("init-encoder", init_encoder)
        model = mtl.MtlModel(encoder.config, seed=seed, encoder=encoder)
    else:
        model = mtl.MtlModel(config.encoder, seed=seed)
    result = mtl.train(model, train_set, dev_set, train_config)
    out = run.path / checkpoint_name
    mtl.save_checkpoint(result, train_config, out)
    run.track_output(checkpoint_name)
    return result, out


def _write_history_series(run: _RunDir, history, prefix: str = "") -> None:
    loss_lines = "".join(f"{h.epoch} {h.train_loss}\n" for h in history)
    f1_lines = "".join(f"{h.epoch} {h.dev_combined_f1}\n" for h in history)
    run.write_text(f"{prefix}train-loss.dat", loss_lines)
    run.write_text(f"{prefix}dev-combined-f1.dat", f1_lines)


def cmd_train(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    run = _RunDir(Path(args.run_dir), "train", config)
    train_path = args.train or _split_path(config, Split.TRAIN)
    dev_path = args.dev or _split_path(config, Split.DEV)
    train_set = _load_instances(train_path, config, Split.TRAIN)
    dev_set = _load_instances(dev_path, config, Split.DEV)
    run.record_input("train", train_path)
    run.record_input("dev", dev_path)

    seed = config.seed if args.seed is None else args.seed
    result, _ = _train_once(config, run, train_set, dev_set, seed, args.init_encoder)
    _write_history_series(run, result.history)
    run.finalize()
    best = result.history[result.best_epoch]
    print(
        f"best epoch {best.epoch}: dev combined F1 {best.dev_combined_f1:.4f} "
        f"(train loss {best.train_loss:.4f})"
    )
    return 0


def cmd_contrastive_train(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    run = _RunDir(Path(args.run_dir), "contrastive-train", config)
    if args.triplets:
        triplets_path = _require_file(args.triplets)
        triplets = load_triplets_jsonl(triplets_path)
        run.record_input("triplets", triplets_path)
    else:
        train_path = args.train or _split_path(config, Split.TRAIN)
        train_set = _load_instances(train_path, config, Split.TRAIN)
        run.record_input("train", train_path)
        triplets = extract_triplets(train_set)

    encoder = ReferenceEncoder(config.encoder)
    result = contrastive_train(encoder, triplets, config.contrastive)
    satisfied = constraint_satisfaction(
        result.encoder, triplets, dist=config.contrastive.distance
    )
    out = run.path / "encoder-checkpoint.json"
    mtl.save_encoder_checkpoint(result.encoder, result.epoch_losses, out)
    run.track_output("encoder-checkpoint.json")
    run.write_text(
        "contrastive-loss.dat",
        "".join(f"{i} {loss}\n" for i, loss in enumerate(result.epoch_losses)),
    )
    run.write_text(
        "contrastive-stats.json",
        json.dumps(
            {
                "triplets": len(triplets),
                "constraint_satisfaction": satisfied,
                "epoch_losses": result.epoch_losses,
            },
            indent=2,
        ),
    )
    run.finalize()
    print(f"triplet constraints satisfied: {satisfied:.3f} over {len(triplets)} triplets")
    return 0


def _tasks_from_arg(value: str) -> list[Task]:
    if value == "both":
        return [Task.VALIDITY, Task.NOVELTY]
    return [Task(value)]


def cmd_predict(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    run = _RunDir(Path(args.run_dir), "predict", config)
    checkpoint_path = _require_file(args.checkpoint)
    model, _, _, _ = mtl.load_checkpoint(checkpoint_path)
    run.record_input("checkpoint", checkpoint_path)
    on_path = args.on or _split_path(config, Split.TEST)
    instances = _load_instances(on_path, config, Split(args.split))
    run.record_input("instances", on_path)

    predictions = []
    for task in _tasks_from_arg(args.task):
        predictions.extend(model.predict(instances, task))
    preds = PredictionSet(predictions=predictions, source_tag=model.name)
    _save_prediction_file(run, "predictions.csv", preds)
    run.finalize()
    print(f"wrote {len(predictions)} predictions from {model.name}")
    return 0


def cmd_prompt_predict(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    run = _RunDir(Path(args.run_dir), "prompt-predict", config)
    task = Task(args.task)
    train_path = args.train or _split_path(config, Split.TRAIN)
    train_set = _load_instances(train_path, config, Split.TRAIN)
    run.record_input("train", train_path)
    on_path = args.on or _split_path(config, Split.TEST)
    targets = _load_instances(on_path, config, Split(args.split))
    run.record_input("targets", on_path)

    settings = config.prompting
    provider = make_provider(
        settings.provider,
        endpoint=settings.endpoint,
        api_key=os.environ.get(settings.api_key_env),
        mock_reply=settings.mock_reply,
    )
    cache = ReplayCache(args.cache_dir or settings.cache_dir)
    few_shot = select_few_shot(train_set, task)
    preds = prompt_predict(
        targets,
        few_shot,
        provider,
        cache,
        decoding=settings.decoding(),
        parallelism=settings.parallelism,
        requests_per_second=settings.requests_per_second,
    )
    _save_prediction_file(run, "predictions.csv", preds)
    run.write_text(
        "few-shot.json",
        json.dumps(
            {
                "task": task.value,
                "example_ids": [ex.id for ex in few_shot.examples],
            },
            indent=2,
        ),
    )
    flagged = sum(1 for p in preds if p.flagged)
    run.finalize()
    print(f"wrote {len(targets)} {task.value} predictions ({flagged} flagged)")
    return 0


def cmd_baseline(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    run = _RunDir(Path(args.run_dir), "baseline", config)
    train_path = args.train or _split_path(config, Split.TRAIN)
    train_set = _load_instances(train_path, config, Split.TRAIN)
    run.record_input("train", train_path)
    on_path = args.on or _split_path(config, Split.TEST)
    targets = _load_instances(on_path, config, Split(args.split))
    run.record_input("targets", on_path)

    c_by_task = {
        Task.VALIDITY: config.baseline.c_validity,
        Task.NOVELTY: config.baseline.c_novelty,
    }
    all_predictions = []
    objectives = {}
    for task in _tasks_from_arg(args.task):
        tfidf, fit = baseline_mod.fit_baseline(
            train_set,
            task,
            C=c_by_task[task],
            steps=config.baseline.steps,
            seed=config.baseline.seed,
        )
        model_name = f"model-{task.value}.json"
        baseline_mod.save_baseline(run.path / model_name, fit.model, tfidf)
        run.track_output(model_name)
        objectives[task.value] = fit.objective
        all_predictions.extend(
            baseline_mod.predict_corpus(fit.model, tfidf, targets, task)
        )
    preds = PredictionSet(predictions=all_predictions, source_tag="svm")
    _save_prediction_file(run, "predictions.csv", preds)
    run.write_text("baseline-stats.json", json.dumps({"objective": objectives}, indent=2))
    run.finalize()
    print(f"wrote {len(all_predictions)} svm predictions")
    return 0


def cmd_mix(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    run = _RunDir(Path(args.run_dir), "mix", config)
    validity_path = _require_file(args.validity)
    novelty_path = _require_file(args.novelty)
    validity_set = load_predictions(validity_path)
    novelty_set = load_predictions(novelty_path)
    run.record_input("validity", validity_path)
    run.record_input("novelty", novelty_path)
    mixed = mix(validity_set, novelty_set)
    _save_prediction_file(run, "predictions.csv", mixed)
    run.finalize()
    print(f"mixed predictions: {mixed.source_tag}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    run = _RunDir(Path(args.run_dir), "evaluate", config)
    predictions_path = _require_file(args.predictions)
    preds = load_predictions(predictions_path)
    run.record_input("predictions", predictions_path)
    golds_path = args.golds or _split_path(config, Split.TEST)
    golds = _load_instances(golds_path, config, Split(args.split))
    run.record_input("golds", golds_path)

    metric = args.metric or config.combined_metric
    tag = "+".join(sorted({p.source for p in preds}))
    report = evaluate(preds, golds, metric=metric, source_tag=tag)
    run.write_text("report.json", report_to_json(report))
    text = render_text(report)
    run.write_text("report.txt", text)
    run.finalize()
    print(text, end="")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    report_path = _require_file(args.report)
    with open(report_path, encoding="utf-8") as fh:
        report = report_from_json(fh.read())
    text = render_text(report)
    if args.out:
        atomic_write_text(args.out, text)
    print(text, end="")
    return 0


def cmd_seed_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    run = _RunDir(Path(args.run_dir), "seed-sweep", config)
    train_path = args.train or _split_path(config, Split.TRAIN)
    dev_path = args.dev or _split_path(config, Split.DEV)
    train_set = _load_instances(train_path, config, Split.TRAIN)
    dev_set = _load_instances(dev_path, config, Split.DEV)
    run.record_input("train", train_path)
    run.record_input("dev", dev_path)

    n_runs = args.runs if args.runs is not None else config.sweep.runs
    base_seed = config.seed if args.seed is None else args.seed
    seeds = list(range(base_seed, base_seed + n_runs))

    def one(seed: int) -> tuple[int, list, EvalReport]:
        sub = _RunDir(run.path / f"seed-{seed}", "train", config)
        result, _ = _train_once(config, sub, train_set, dev_set, seed, args.init_encoder)
        _write_history_series(sub, result.history)
        report = evaluate(
            result.model.predict_both(dev_set),
            dev_set,
            metric=config.combined_metric,
            source_tag=f"{result.model.name}(seed={seed})",
        )
        sub.write_text("report.json", report_to_json(report))
        sub.finalize()
        history = [h.as_tuple() for h in result.history]
        return seed, history, report

    workers = max(1, config.sweep.parallelism)
    if workers == 1:
        results = [one(seed) for seed in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, seeds))

    summary = seed_summary(results)
    run.write_text(
        "seed-summary.json",
        json.dumps(
            {
                "seeds": seeds,
                "n_runs": summary.n_runs,
                "mean_combined_f1": summary.mean_combined_f1,
                "std_combined_f1": summary.std_combined_f1,
                "loss_envelope": summary.loss_envelope,
            },
            indent=2,
        ),
    )
    for idx, label in ((0, "min"), (1, "mean"), (2, "max")):
        run.write_text(
            f"loss-{label}.dat",
            "".join(f"{e} {row[idx]}\n" for e, row in enumerate(summary.loss_envelope)),
        )
    run.finalize()
    print(
        f"{summary.n_runs} runs: dev combined F1 "
        f"{summary.mean_combined_f1:.4f} +/- {summary.std_combined_f1:.4f}"
    )
    return 0


# --- parser ---


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default=None, help="JSON run config (defaults apply)")
    sub.add_argument("--run-dir", required=True, help="output directory for this stage")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="valnov",
        description="Argument validity/novelty pipeline: data, training, "
        "prompting, baseline, mixing, evaluation.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("prepare-data", help="load/generate corpora, emit stats")
    _add_common(p)
    p.add_argument("--splits", default="train,dev,test")
    p.add_argument(
        "--synthetic",
        choices=["profile", "separable"],
        default=None,
        help="generate a bundled synthetic corpus instead of reading data files",
    )
    p.set_defaults(func=cmd_prepare_data)

    p = commands.add_parser("train", help="multi-task training with best-epoch selection")
    _add_common(p)
    p.add_argument("--train", default=None, help="override train file")
    p.add_argument("--dev", default=None, help="override dev file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--init-encoder", default=None, help="encoder checkpoint to start from")
    p.set_defaults(func=cmd_train)

    p = commands.add_parser("contrastive-train", help="triplet-loss encoder pretraining")
    _add_common(p)
    p.add_argument("--train", default=None, help="instances to extract triplets from")
    p.add_argument("--triplets", default=None, help="pre-extracted triplets JSONL")
    p.set_defaults(func=cmd_contrastive_train)

    p = commands.add_parser("predict", help="classify with a trained checkpoint")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--on", default=None, help="instances file (default: test path)")
    p.add_argument("--split", default="test", help="split tag for CSV loading")
    p.add_argument("--task", choices=["validity", "novelty", "both"], default="both")
    p.set_defaults(func=cmd_predict)

    p = commands.add_parser("prompt-predict", help="few-shot completion classification")
    _add_common(p)
    p.add_argument("--task", choices=["validity", "novelty"], required=True)
    p.add_argument("--train", default=None, help="few-shot example pool")
    p.add_argument("--on", default=None, help="instances file (default: test path)")
    p.add_argument("--split", default="test")
    p.add_argument("--cache-dir", default=None, help="override replay cache directory")
    p.set_defaults(func=cmd_prompt_predict)

    p = commands.add_parser("baseline", help="TF-IDF + SVM baseline")
    _add_common(p)
    p.add_argument("--task", choices=["validity", "novelty", "both"], default="both")
    p.add_argument("--train", default=None)
    p.add_argument("--on", default=None)
    p.add_argument("--split", default="test")
    p.set_defaults(func=cmd_baseline)

    p = commands.add_parser("mix", help="validity from one file, novelty from another")
    _add_common(p)
    p.add_argument("--validity", required=True)
    p.add_argument("--novelty", required=True)
    p.set_defaults(func=cmd_mix)

    p = commands.add_parser("evaluate", help="score predictions against gold labels")
    _add_common(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--golds", default=None, help="gold instances (default: test path)")
    p.add_argument("--split", default="test")
    p.add_argument("--metric", default=None, help="combined metric key")
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser("report", help="render a saved report.json")
    p.add_argument("--report", required=True)
    p.add_argument("--out", default=None, help="also write the text table here")
    p.set_defaults(func=cmd_report)

    p = commands.add_parser("seed-sweep", help="train across seeds, aggregate variance")
    _add_common(p)
    p.add_argument("--train", default=None)
    p.add_argument("--dev", default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--init-encoder", default=None)
    p.set_defaults(func=cmd_seed_sweep)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except tuple(cls for cls, _ in _ERROR_CATEGORIES) as exc:
        for cls, category in _ERROR_CATEGORIES:
            if isinstance(exc, cls):
                print(f"error: {category}: {exc}", file=sys.stderr)
                break
        return 2


if __name__ == "__main__":
    sys.exit(main())
