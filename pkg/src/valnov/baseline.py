"""TF-IDF + linear SVM baseline.

Stems and counts the concatenated premise/conclusion text, weights
counts by smoothed inverse document frequency with L2 normalization,
and trains one linear SVM per task by projected subgradient descent on
the primal objective (Pegasos-style schedule, tail-averaged iterate).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import ArgumentInstance, LabelValue, Task, mapped_value
from .encoder import tokenize
from .errors import ConfigurationError, DataError
from .fsutil import atomic_write_text
from .predictions import Prediction, PredictionSet
from .stemming import stem

DEFAULT_C = {Task.VALIDITY: 0.09, Task.NOVELTY: 4.7}

SparseVector = dict[int, float]


def document_text(instance: ArgumentInstance) -> str:
    return f"{instance.premise} {instance.conclusion}"


def _terms(document: str) -> list[str]:
    return [stem(token) for token in tokenize(document)]


@dataclass(frozen=True, eq=False)
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    document_count: int


def tfidf_fit(documents: Sequence[str]) -> TfidfModel:
    """Fit vocabulary and smoothed idf: ln((1 + N) / (1 + df)) + 1."""
    if not documents:
        raise ConfigurationError("cannot fit TF-IDF on an empty corpus")
    df: Counter[str] = Counter()
    for document in documents:
        df.update(set(_terms(document)))
    vocabulary = {term: idx for idx, term in enumerate(sorted(df))}
    n_docs = len(documents)
    idf = np.zeros(len(vocabulary))
    for term, idx in vocabulary.items():
        idf[idx] = math.log((1 + n_docs) / (1 + df[term])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=idf, document_count=n_docs)


def tfidf_transform(model: TfidfModel, document: str) -> SparseVector:
    """tf·idf weights, L2-normalized; unseen terms dropped; {} is the zero vector."""
    counts = Counter(_terms(document))
    vector: SparseVector = {}
    for term, tf in counts.items():
        idx = model.vocabulary.get(term)
        if idx is not None:
            vector[idx] = tf * model.idf[idx]
    norm = math.sqrt(sum(v * v for v in vector.values()))
    if norm > 0:
        vector = {idx: v / norm for idx, v in vector.items()}
    return vector


@dataclass(frozen=True, eq=False)
class LinearSvm:
    weights: np.ndarray
    bias: float
    C: float


@dataclass(frozen=True, eq=False)
class SvmFit:
    model: LinearSvm
    objective: float
    trace: tuple[float, ...]


def _sparse_dot(weights: np.ndarray, x: SparseVector) -> float:
    return sum(weights[idx] * value for idx, value in x.items())


def svm_objective(
    weights: np.ndarray,
    bias: float,
    X: Sequence[SparseVector],
    y: Sequence[int],
    C: float,
) -> float:
    """Primal value (1/2)const‖w‖² + C·Σ hinge."""
    hinge = sum(
        max(0.0, 1.0 - label * (_sparse_dot(weights, x) + bias))
        for x, label in zip(X, y)
    )
    return 0.5 * float(weights @ weights) + C * hinge


def svm_train(
    X: Sequence[SparseVector],
    y: Sequence[int],
    dim: int,
    C: float,
    steps: int | None = None,
    seed: int = 0,
    trace_every: int = 0,
) -> SvmFit:
    """Projected subgradient descent on the primal SVM objective.

    λ = 1/(C·n), step size η_t = 1/(λ(t+1)), iterates projected onto the
    ball of radius 1/√λ; the returned model is the average of the second
    half of the trajectory. The bias is updated with the same step size
    but is neither decayed nor projected.
    """
    n = len(X)
    if n == 0 or set(y) != {-1, 1}:
        raise DataError("svm_train needs at least one example of each class")
    if C <= 0:
        raise ConfigurationError("C must be positive")
    if steps is None:
        steps = 50 * n
    lam = 1.0 / (C * n)
    radius = 1.0 / math.sqrt(lam)
    rng = np.random.default_rng(seed)

    w = np.zeros(dim)
    b = 0.0
    tail_start = steps // 2
    avg_w = np.zeros(dim)
    avg_b = 0.0
    avg_count = 0
    trace: list[float] = []
    order = np.empty(0, dtype=np.int64)

    for t in range(steps):
        if t % n == 0:
            order = rng.permutation(n)
        i = int(order[t % n])
        eta = 1.0 / (lam * (t + 1))
        violates = y[i] * (_sparse_dot(w, X[i]) + b) < 1.0
        w *= t / (t + 1.0)
        if violates:
            for idx, value in X[i].items():
                w[idx] += eta * y[i] * value
            b += eta * y[i]
        norm = float(np.linalg.norm(w))
        if norm > radius:
            w *= radius / norm
        if t >= tail_start:
            avg_w += w
            avg_b += b
            avg_count += 1
            if trace_every and avg_count % trace_every == 0:
                trace.append(
                    svm_objective(avg_w / avg_count, avg_b / avg_count, X, y, C)
                )

    final_w = avg_w / avg_count
    final_b = avg_b / avg_count
    model = LinearSvm(weights=final_w, bias=final_b, C=C)
    return SvmFit(
        model=model,
        objective=svm_objective(final_w, final_b, X, y, C),
        trace=tuple(trace),
    )


def fit_baseline(
    instances: Sequence[ArgumentInstance],
    task: Task,
    C: float | None = None,
    steps: int | None = None,
    seed: int = 0,
) -> tuple[TfidfModel, SvmFit]:
    """Fit TF-IDF on the training text and train the per-task SVM."""
    task = Task(task)
    if C is None:
        C = DEFAULT_C[task]
    documents = [document_text(inst) for inst in instances]
    tfidf = tfidf_fit(documents)
    X = [tfidf_transform(tfidf, doc) for doc in documents]
    y = [
        1 if mapped_value(inst, task) is LabelValue.POSITIVE else -1
        for inst in instances
    ]
    fit = svm_train(X, y, dim=len(tfidf.vocabulary), C=C, steps=steps, seed=seed)
    return tfidf, fit


def baseline_predict(
    model: LinearSvm,
    tfidf: TfidfModel,
    instance: ArgumentInstance,
    task: Task,
    source: str = "svm",
) -> Prediction:
    """sign(w·x + b): positive half-space → positive label, 0 → negative."""
    x = tfidf_transform(tfidf, document_text(instance))
    score = _sparse_dot(model.weights, x) + model.bias
    value = LabelValue.POSITIVE if score > 0 else LabelValue.NEGATIVE
    return Prediction(instance_id=instance.id, task=Task(task), value=value, source=source)


def predict_corpus(
    model: LinearSvm,
    tfidf: TfidfModel,
    instances: Sequence[ArgumentInstance],
    task: Task,
    source: str = "svm",
) -> PredictionSet:
    predictions = [
        baseline_predict(model, tfidf, inst, task, source=source) for inst in instances
    ]
    return PredictionSet(predictions=predictions, source_tag=source)


def save_baseline(path: str | Path, model: LinearSvm, tfidf: TfidfModel) -> None:
    payload = {
        "vocabulary": tfidf.vocabulary,
        "idf": tfidf.idf.tolist(),
        "document_count": tfidf.document_count,
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "C": model.C,
    }
    atomic_write_text(Path(path), json.dumps(payload, ensure_ascii=False))


def load_baseline(path: str | Path) -> tuple[LinearSvm, TfidfModel]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    tfidf = TfidfModel(
        vocabulary={term: int(idx) for term, idx in payload["vocabulary"].items()},
        idf=np.asarray(payload["idf"], dtype=float),
        document_count=int(payload["document_count"]),
    )
    model = LinearSvm(
        weights=np.asarray(payload["weights"], dtype=float),
        bias=float(payload["bias"]),
        C=float(payload["C"]),
    )
    return model, tfidf
