"""Shared-encoder multi-task classifier and its training loop.

One encoder feeds two binary heads (validity, novelty). Training
alternates tasks at random per batch, accumulates gradients, applies
decoupled-weight-decay Adam, and keeps the checkpoint with the best
dev-set combined F1. No parameters are frozen: either task's gradients
flow through the whole encoder; the head that was not selected for a
step is left untouched by that step's update.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import ArgumentInstance, LabelValue, Task, mapped_value
from .encoder import EncoderConfig, ReferenceEncoder
from .errors import ConfigurationError, TrainingError
from .evaluation import DEFAULT_COMBINED_METRIC, combined_score
from .fsutil import atomic_write_text
from .optim import AdamW
from .predictions import Prediction

# Profile name -> (learning rate, epochs, gradient accumulation). The two
# submission profiles come from the published hyperparameter table; "desk"
# is scaled for the from-scratch reference encoder.
TRAIN_PROFILES: dict[str, tuple[float, int, int]] = {
    "clteaml-2": (1e-5, 9, 1),
    "clteaml-4": (5e-6, 6, 4),
    "desk": (5e-2, 10, 1),
}


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-5
    epochs: int = 9
    grad_accumulation: int = 1
    batch_size: int = 16
    weight_decay: float = 0.01
    seed: int = 0
    task_probabilities: tuple[float, float] = (0.5, 0.5)
    combined_metric: str = DEFAULT_COMBINED_METRIC

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ConfigurationError("learning_rate must be >= 0")
        if self.epochs < 1 or self.grad_accumulation < 1 or self.batch_size < 1:
            raise ConfigurationError("epochs, grad_accumulation, batch_size must be >= 1")
        if self.weight_decay < 0:
            raise ConfigurationError("weight_decay must be >= 0")
        _check_probabilities(self.task_probabilities)

    @classmethod
    def from_profile(cls, name: str, **overrides) -> "TrainConfig":
        if name not in TRAIN_PROFILES:
            raise ConfigurationError(
                f"unknown training profile {name!r}; known: {sorted(TRAIN_PROFILES)}"
            )
        lr, epochs, grad_acc = TRAIN_PROFILES[name]
        base = dict(learning_rate=lr, epochs=epochs, grad_accumulation=grad_acc)
        base.update(overrides)
        return cls(**base)


def _check_probabilities(probabilities: Sequence[float]) -> None:
    if len(probabilities) != 2 or min(probabilities) < 0 or abs(sum(probabilities) - 1.0) > 1e-9:
        raise ConfigurationError(
            f"task probabilities must be a non-negative pair summing to 1, got {probabilities}"
        )


def sample_task(rng: np.random.Generator, probabilities: Sequence[float] = (0.5, 0.5)) -> Task:
    """Bernoulli draw between the two tasks."""
    _check_probabilities(probabilities)
    return Task.VALIDITY if rng.random() < probabilities[0] else Task.NOVELTY


def instance_text(instance: ArgumentInstance) -> str:
    """Single encoder input string; mirrors the prompt block structure."""
    return (
        f"topic: {instance.topic} premise: {instance.premise} "
        f"conclusion: {instance.conclusion}"
    )


class MtlModel:
    """Reference encoder plus one affine head of 2 logits per task.

    Logit order within a pair is (negative, positive), matching the
    confusion-matrix orientation.
    """

    def __init__(
        self,
        encoder_config: EncoderConfig,
        seed: int = 0,
        name: str = "mtl",
        encoder: ReferenceEncoder | None = None,
    ):
        # a pre-trained encoder (e.g. from the contrastive stage) can be
        # passed in; it must match the declared config
        if encoder is not None and encoder.config != encoder_config:
            raise ConfigurationError("provided encoder does not match encoder_config")
        self.encoder = encoder if encoder is not None else ReferenceEncoder(encoder_config)
        self.name = name
        rng = np.random.default_rng(seed)
        dim = encoder_config.projection_dim
        self.heads: dict[Task, dict[str, np.ndarray]] = {
            Task.VALIDITY: {"w": rng.normal(0.0, 0.1, (2, dim)), "b": np.zeros(2)},
            Task.NOVELTY: {"w": rng.normal(0.0, 0.1, (2, dim)), "b": np.zeros(2)},
        }

    def parameters(self) -> dict[str, np.ndarray]:
        params = {f"encoder.{k}": v for k, v in self.encoder.parameters().items()}
        for task in (Task.VALIDITY, Task.NOVELTY):
            params[f"head.{task.value}.w"] = self.heads[task]["w"]
            params[f"head.{task.value}.b"] = self.heads[task]["b"]
        return params

    def snapshot(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.parameters().items()}

    def restore(self, snapshot: dict[str, np.ndarray]) -> None:
        live = self.parameters()
        for key, value in snapshot.items():
            live[key][...] = value

    def forward(self, batch: Sequence[ArgumentInstance], task: Task) -> np.ndarray:
        """(n, 2) logits from the selected head only."""
        if not batch:
            raise ConfigurationError("forward needs a non-empty batch")
        task = Task(task)
        embeddings = self.encoder.encode([instance_text(i) for i in batch])
        head = self.heads[task]
        return embeddings @ head["w"].T + head["b"]

    def predict(self, instances: Sequence[ArgumentInstance], task: Task) -> list[Prediction]:
        """Argmax labels; an exact logit tie resolves to negative."""
        task = Task(task)
        if not instances:
            return []
        logits = self.forward(instances, task)
        out = []
        for inst, pair in zip(instances, logits):
            value = LabelValue.POSITIVE if pair[1] > pair[0] else LabelValue.NEGATIVE
            out.append(
                Prediction(instance_id=inst.id, task=task, value=value, source=self.name)
            )
        return out

    def predict_both(self, instances: Sequence[ArgumentInstance]) -> list[Prediction]:
        return self.predict(instances, Task.VALIDITY) + self.predict(
            instances, Task.NOVELTY
        )


def cross_entropy_and_grad(
    logits: np.ndarray, targets: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean two-class cross-entropy over the batch and dL/dlogits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = logits.shape[0]
    log_probs = shifted - np.log(exp.sum(axis=1, keepdims=True))
    loss = -log_probs[np.arange(n), targets].mean()
    d_logits = probs
    d_logits[np.arange(n), targets] -= 1.0
    return float(loss), d_logits / n


def batch_loss_and_grads(
    model: MtlModel, batch: Sequence[ArgumentInstance], task: Task
) -> tuple[float, dict[str, np.ndarray]]:
    """Cross-entropy on the selected head plus gradients for the encoder
    and that head."""
    task = Task(task)
    cache = model.encoder.forward([instance_text(i) for i in batch])
    head = model.heads[task]
    logits = cache.outputs @ head["w"].T + head["b"]
    targets = np.array(
        [int(mapped_value(i, task) is LabelValue.POSITIVE) for i in batch]
    )
    loss, d_logits = cross_entropy_and_grad(logits, targets)
    grads = {
        f"head.{task.value}.w": d_logits.T @ cache.outputs,
        f"head.{task.value}.b": d_logits.sum(axis=0),
    }
    d_embeddings = d_logits @ head["w"]
    for name, grad in model.encoder.backward(cache, d_embeddings).items():
        grads[f"encoder.{name}"] = grad
    return loss, grads


class _TaskStream:
    """Per-task instance stream, shuffled without replacement; reshuffles
    once exhausted."""

    def __init__(self, instances: Sequence[ArgumentInstance], rng: np.random.Generator):
        self.instances = list(instances)
        self.rng = rng
        self.order: list[int] = []
        self.cursor = 0

    def next_batch(self, size: int) -> list[ArgumentInstance]:
        if self.cursor >= len(self.order):
            self.order = list(self.rng.permutation(len(self.instances)))
            self.cursor = 0
        end = min(self.cursor + size, len(self.order))
        batch = [self.instances[i] for i in self.order[self.cursor:end]]
        self.cursor = end
        return batch


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    dev_combined_f1: float

    def as_tuple(self) -> tuple[int, float, float]:
        return (self.epoch, self.train_loss, self.dev_combined_f1)


@dataclass
class TrainResult:
    model: MtlModel
    history: list[EpochRecord]
    best_epoch: int


def select_best(history: Sequence[tuple[int, float] | EpochRecord]) -> int:
    """Epoch index with the highest combined F1; ties go to the earliest."""
    if not history:
        raise ConfigurationError("empty history")
    scores = [
        h.dev_combined_f1 if isinstance(h, EpochRecord) else h[1] for h in history
    ]
    best = 0
    for i, score in enumerate(scores):
        if score > scores[best]:
            best = i
    return best


def train(
    model: MtlModel,
    train_set: Sequence[ArgumentInstance],
    dev_set: Sequence[ArgumentInstance],
    config: TrainConfig,
) -> TrainResult:
    """Task-alternating training with dev-set checkpoint selection.

    Returns the model restored to the best-epoch parameters plus the
    per-epoch history. Deterministic given config.seed.
    """
    if not train_set or not dev_set:
        raise ConfigurationError("train and dev sets must be non-empty")
    rng = np.random.default_rng(config.seed)
    streams = {
        Task.VALIDITY: _TaskStream(train_set, np.random.default_rng(rng.integers(2**63))),
        Task.NOVELTY: _TaskStream(train_set, np.random.default_rng(rng.integers(2**63))),
    }
    optimizer = AdamW(config.learning_rate, weight_decay=config.weight_decay)
    params = model.parameters()
    steps_per_epoch = max(1, -(-len(train_set) // config.batch_size))

    history: list[EpochRecord] = []
    best_f1 = -1.0
    best_epoch = 0
    best_params = model.snapshot()
    step = 0
    accumulated: dict[str, np.ndarray] = {}
    since_update = 0

    for epoch in range(config.epochs):
        losses = []
        for _ in range(steps_per_epoch):
            step += 1
            task = sample_task(rng, config.task_probabilities)
            batch = streams[task].next_batch(config.batch_size)
            loss, grads = batch_loss_and_grads(model, batch, task)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at step {step} (task {task.value})")
            losses.append(loss)
            for name, grad in grads.items():
                if name in accumulated:
                    accumulated[name] += grad
                else:
                    accumulated[name] = grad.copy()
            since_update += 1
            if since_update >= config.grad_accumulation:
                for name in accumulated:
                    accumulated[name] /= since_update
                optimizer.step(params, accumulated)
                accumulated = {}
                since_update = 0

        dev_f1 = combined_score(
            model.predict_both(dev_set), dev_set, metric=config.combined_metric
        )
        history.append(
            EpochRecord(
                epoch=epoch,
                train_loss=float(np.mean(losses)),
                dev_combined_f1=dev_f1,
            )
        )
        if dev_f1 > best_f1:
            best_f1 = dev_f1
            best_epoch = epoch
            best_params = model.snapshot()

    model.restore(best_params)
    return TrainResult(model=model, history=history, best_epoch=best_epoch)


# --- checkpoint format: JSON, format/version header, flat parameter lists ---

CHECKPOINT_FORMAT = "valnov-mtl-checkpoint"
ENCODER_CHECKPOINT_FORMAT = "valnov-encoder-checkpoint"
CHECKPOINT_VERSION = 1


def _pack_params(params: dict[str, np.ndarray]) -> dict:
    return {
        name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
        for name, arr in params.items()
    }


def _unpack_params(packed: dict, params: dict[str, np.ndarray]) -> None:
    for name, rec in packed.items():
        params[name][...] = np.array(rec["data"]).reshape(rec["shape"])


def save_checkpoint(
    result: TrainResult, config: TrainConfig, path: str | Path
) -> None:
    model = result.model
    blob = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "name": model.name,
        "encoder_config": {
            "vocab_buckets": model.encoder.config.vocab_buckets,
            "embed_dim": model.encoder.config.embed_dim,
            "projection_dim": model.encoder.config.projection_dim,
            "seed": model.encoder.config.seed,
        },
        "train_config": {
            "learning_rate": config.learning_rate,
            "epochs": config.epochs,
            "grad_accumulation": config.grad_accumulation,
            "batch_size": config.batch_size,
            "weight_decay": config.weight_decay,
            "seed": config.seed,
            "task_probabilities": list(config.task_probabilities),
            "combined_metric": config.combined_metric,
        },
        "best_epoch": result.best_epoch,
        "history": [list(h.as_tuple()) for h in result.history],
        "params": _pack_params(model.parameters()),
    }
    atomic_write_text(Path(path), json.dumps(blob))


def load_checkpoint(path: str | Path) -> tuple[MtlModel, TrainConfig, list[EpochRecord], int]:
    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("format") != CHECKPOINT_FORMAT:
        raise ConfigurationError(f"{path}: not a {CHECKPOINT_FORMAT} file")
    if blob.get("version") != CHECKPOINT_VERSION:
        raise ConfigurationError(f"{path}: unsupported checkpoint version {blob.get('version')}")
    enc_cfg = EncoderConfig(**blob["encoder_config"])
    tc = blob["train_config"]
    config = TrainConfig(
        learning_rate=tc["learning_rate"],
        epochs=tc["epochs"],
        grad_accumulation=tc["grad_accumulation"],
        batch_size=tc["batch_size"],
        weight_decay=tc["weight_decay"],
        seed=tc["seed"],
        task_probabilities=tuple(tc["task_probabilities"]),
        combined_metric=tc["combined_metric"],
    )
    model = MtlModel(enc_cfg, seed=tc["seed"], name=blob.get("name", "mtl"))
    _unpack_params(blob["params"], model.parameters())
    history = [EpochRecord(int(e), float(l), float(f)) for e, l, f in blob["history"]]
    return model, config, history, int(blob["best_epoch"])


def save_encoder_checkpoint(
    encoder: ReferenceEncoder, epoch_losses: Sequence[float], path: str | Path
) -> None:
    blob = {
        "format": ENCODER_CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "encoder_config": {
            "vocab_buckets": encoder.config.vocab_buckets,
            "embed_dim": encoder.config.embed_dim,
            "projection_dim": encoder.config.projection_dim,
            "seed": encoder.config.seed,
        },
        "epoch_losses": [float(x) for x in epoch_losses],
        "params": _pack_params(encoder.parameters()),
    }
    atomic_write_text(Path(path), json.dumps(blob))


def load_encoder_checkpoint(path: str | Path) -> tuple[ReferenceEncoder, list[float]]:
    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("format") != ENCODER_CHECKPOINT_FORMAT:
        raise ConfigurationError(f"{path}: not a {ENCODER_CHECKPOINT_FORMAT} file")
    if blob.get("version") != CHECKPOINT_VERSION:
        raise ConfigurationError(
            f"{path}: unsupported checkpoint version {blob.get('version')}"
        )
    encoder = ReferenceEncoder(EncoderConfig(**blob["encoder_config"]))
    _unpack_params(blob["params"], encoder.parameters())
    return encoder, [float(x) for x in blob["epoch_losses"]]
