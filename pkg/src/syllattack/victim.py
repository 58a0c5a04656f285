"""Trainable in-process victim: a bag-of-syllables softmax classifier.

Deliberately the simplest deterministic classifier with enough signal for
substitution attacks to bite, and with an exact analytic gradient so training
can be checked against finite differences. Real victims attach over HTTP via
``oracle.RemoteVictim``; this one exists for desk-scale experiments and tests.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .data import DatasetRecord
from .oracle import ProbabilityDistribution
from .segmentation import DEFAULT_POLICY, DelimiterPolicy, segment

log = logging.getLogger(__name__)

MODEL_FORMAT = "syllattack-reference-victim"
UNK_POLICIES = ("drop",)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.5
    epochs: int = 300
    l2: float = 1e-4
    seed: int = 0


@dataclass
class ReferenceVictimModel:
    """Multinomial logistic regression over syllable unigram counts.

    ``weights`` is K x (V+1); the last column is the bias, fed by a constant
    feature of 1. Unknown syllables (including the mask token) follow
    ``unk_policy``; with "drop" they contribute nothing, so masking a
    syllable strictly removes its evidence.
    """

    labels: tuple[str, ...]
    vocab: dict[str, int]
    weights: np.ndarray
    unk_policy: str = "drop"
    policy: DelimiterPolicy = DEFAULT_POLICY
    max_batch: int = 1024
    training_losses: list[float] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.unk_policy not in UNK_POLICIES:
            raise ValueError(f"unsupported unk_policy {self.unk_policy!r}")
        v = len(self.vocab)
        if sorted(self.vocab.values()) != list(range(v)):
            raise ValueError("vocab indices must be dense in [0, V)")
        if self.weights.shape != (len(self.labels), v + 1):
            raise ValueError(
                f"weights shape {self.weights.shape} != ({len(self.labels)}, {v + 1})"
            )
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("non-finite weights")

    @property
    def num_features(self) -> int:
        return len(self.vocab)

    def featurize(self, text: str) -> dict[int, float]:
        """Sparse syllable counts over V+1 features; index V is the bias."""
        counts: dict[int, float] = {}
        for token in segment(text, self.policy).syllables:
            idx = self.vocab.get(token)
            if idx is None:
                continue  # "drop" policy: out-of-vocabulary evidence vanishes
            counts[idx] = counts.get(idx, 0.0) + 1.0
        counts[self.num_features] = 1.0
        return counts

    def _dense(self, text: str) -> np.ndarray:
        x = np.zeros(self.num_features + 1, dtype=np.float64)
        for idx, c in self.featurize(text).items():
            x[idx] = c
        return x

    def classify_batch(self, texts) -> list[ProbabilityDistribution]:
        # One text at a time on purpose: results must not depend on batching.
        return [self._classify_one(t) for t in texts]

    def _classify_one(self, text: str) -> ProbabilityDistribution:
        logits = self.weights @ self._dense(text)
        probs = _softmax(logits)
        return ProbabilityDistribution(tuple(float(p) for p in probs), self.labels)

    def save(self, path: str) -> None:
        doc = {
            "format": MODEL_FORMAT,
            "version": 1,
            "num_features": self.num_features,
            "labels": list(self.labels),
            "vocab": self.vocab,
            "weights": [[float(w) for w in row] for row in self.weights],
            "unk_policy": self.unk_policy,
            "delimiters": sorted(self.policy.delimiters),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, ensure_ascii=False)

    @classmethod
    def load(cls, path: str) -> "ReferenceVictimModel":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path}: not a reference victim model file")
        weights = np.array(doc["weights"], dtype=np.float64)
        return cls(
            labels=tuple(doc["labels"]),
            vocab={str(k): int(v) for k, v in doc["vocab"].items()},
            weights=weights,
            unk_policy=doc["unk_policy"],
            policy=DelimiterPolicy(frozenset(doc["delimiters"])),
        )


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def loss_and_gradient(
    weights: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy plus (l2/2)*||W||^2 over non-bias columns, with gradient.

    X is (N, V+1) with the constant bias feature last, y the class indices.
    """
    n = X.shape[0]
    logits = X @ weights.T  # (N, K)
    zmax = logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(logits - zmax).sum(axis=1)) + zmax[:, 0]
    ce = float((lse - logits[np.arange(n), y]).mean())
    reg = weights.copy()
    reg[:, -1] = 0.0
    loss = ce + 0.5 * l2 * float((reg * reg).sum())

    probs = np.exp(logits - lse[:, None])
    probs[np.arange(n), y] -= 1.0
    grad = probs.T @ X / n + l2 * reg
    return loss, grad


def train_reference(
    records: list[DatasetRecord],
    config: TrainConfig = TrainConfig(),
    *,
    policy: DelimiterPolicy = DEFAULT_POLICY,
    unk_policy: str = "drop",
) -> ReferenceVictimModel:
    """Full-batch gradient descent from zero weights; deterministic per config.

    The loss trajectory is checked after the run; an increase is reported as
    divergence (warning) and left visible in ``model.training_losses``.
    """
    if not records:
        raise ValueError("empty dataset")
    labels = tuple(sorted({r.label for r in records}))
    if len(labels) < 2:
        raise ValueError(f"need at least 2 classes, got {labels}")
    label_idx = {lbl: i for i, lbl in enumerate(labels)}

    token_lists = [segment(r.text, policy).syllables for r in records]
    vocab_tokens = sorted({t for toks in token_lists for t in toks})
    vocab = {t: i for i, t in enumerate(vocab_tokens)}
    v = len(vocab)

    X = np.zeros((len(records), v + 1), dtype=np.float64)
    for row, toks in enumerate(token_lists):
        for t in toks:
            X[row, vocab[t]] += 1.0
        X[row, v] = 1.0
    y = np.array([label_idx[r.label] for r in records], dtype=np.intp)

    weights = np.zeros((len(labels), v + 1), dtype=np.float64)
    losses: list[float] = []
    for _ in range(config.epochs):
        loss, grad = loss_and_gradient(weights, X, y, config.l2)
        losses.append(loss)
        weights -= config.learning_rate * grad

    if any(b > a for a, b in zip(losses, losses[1:])):
        log.warning(
            "training loss increased at lr=%g; run may have diverged", config.learning_rate
        )

    return ReferenceVictimModel(
        labels=labels,
        vocab=vocab,
        weights=weights,
        unk_policy=unk_policy,
        policy=policy,
        training_losses=losses,
    )


def accuracy(model: ReferenceVictimModel, records: list[DatasetRecord]) -> float:
    """Fraction of records whose argmax prediction matches the stored label."""
    if not records:
        return math.nan
    hits = 0
    for rec, dist in zip(records, model.classify_batch([r.text for r in records])):
        best = max(range(len(dist.probs)), key=lambda i: (dist.probs[i], -i))
        if model.labels[best] == rec.label:
            hits += 1
    return hits / len(records)
