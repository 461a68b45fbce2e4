"""Multiclass text classification: hashed n-gram features plus multinomial
logistic regression, trained by mini-batch gradient descent.

The same engine serves both detection tasks (5 trust levels, 4 topics).
Feature hashing is signed (one hash bit carries the sign) with a
power-of-two dimension, so models are reproducible across platforms; the
hash function is blake2b-64 and is versioned in the model file. A small
backend seam lets external model services answer classify_batch() through
the same contract the evaluation machinery uses.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from scipy import sparse

HASH_NAME = "blake2b-64"
FORMAT_VERSION = 1

_TOKEN_RE = re.compile(r"[0-9a-z]+")


class ModelError(ValueError):
    """Model/featurizer mismatch or malformed model file."""


class TrainingError(ValueError):
    """Dataset unsuitable for training (e.g. a single class)."""


class BackendError(RuntimeError):
    """External backend unavailable or inconsistent with the class list."""


@dataclass(frozen=True)
class FeaturizerConfig:
    dim: int = 2**18
    ngram_orders: tuple[int, ...] = (1, 2)
    lowercase: bool = True

    def __post_init__(self) -> None:
        if self.dim <= 0 or self.dim & (self.dim - 1):
            raise ValueError("dim must be a power of two")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    lr_decay: float = 1e-4
    epochs: int = 10
    l2_penalty: float = 1e-6
    batch_size: int = 32
    ngram_orders: tuple[int, ...] = (1, 2)
    dim: int = 2**18
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("learning_rate, epochs and batch_size must be positive")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric boundaries."""
    return _TOKEN_RE.findall(text.lower())


def _hash64(key: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest(), "big"
    )


def hashed_features(text: str, config: FeaturizerConfig) -> dict[int, float]:
    """Signed-hash n-gram counts, L2-normalized. Empty text gives the empty
    (zero) vector."""
    tokens = tokenize(text) if config.lowercase else _TOKEN_RE.findall(text)
    weights: dict[int, float] = {}
    for order in config.ngram_orders:
        for i in range(len(tokens) - order + 1):
            h = _hash64(" ".join(tokens[i : i + order]))
            index = (h >> 1) % config.dim
            sign = 1.0 if h & 1 else -1.0
            weights[index] = weights.get(index, 0.0) + sign
    norm = np.sqrt(sum(w * w for w in weights.values()))
    if norm > 0:
        weights = {i: w / norm for i, w in weights.items()}
    return weights


def featurize_matrix(texts: Sequence[str], config: FeaturizerConfig) -> sparse.csr_matrix:
    """Stack per-text hashed feature vectors into a CSR matrix."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for text in texts:
        vec = hashed_features(text, config)
        for i in sorted(vec):
            indices.append(i)
            data.append(vec[i])
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.array(data), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(texts), config.dim),
    )


@dataclass
class Model:
    classes: list[str]
    weights: np.ndarray  # |classes| x dim
    bias: np.ndarray  # |classes|
    featurizer: FeaturizerConfig
    train_config: TrainConfig
    seed: int
    final_loss: float = float("nan")

    def __post_init__(self) -> None:
        if not self.classes or len(set(self.classes)) != len(self.classes):
            raise ModelError("classes must be non-empty and unique")
        if not np.all(np.isfinite(self.weights)) or not np.all(np.isfinite(self.bias)):
            raise ModelError("model parameters must be finite")


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _logits(model: Model, x: sparse.csr_matrix) -> np.ndarray:
    if x.shape[1] != model.weights.shape[1]:
        raise ModelError(
            f"feature dimension {x.shape[1]} does not match model "
            f"dimension {model.weights.shape[1]}"
        )
    return x @ model.weights.T + model.bias


def predict_proba(model: Model, text: str) -> np.ndarray:
    """Class-probability vector for one text (softmax over the model's
    class order)."""
    x = featurize_matrix([text], model.featurizer)
    return softmax(_logits(model, x))[0]


def predict(model: Model, text: str) -> str:
    """Most probable class; exact ties go to the lowest class index."""
    return model.classes[int(np.argmax(predict_proba(model, text)))]


def loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    x: sparse.csr_matrix,
    y: np.ndarray,
    l2_penalty: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Average cross-entropy + l2_penalty * ||W||^2, with its analytic
    gradient. y holds class indices."""
    n = x.shape[0]
    probs = softmax(x @ weights.T + bias)
    nll = -np.log(np.clip(probs[np.arange(n), y], 1e-300, None)).mean()
    loss = nll + l2_penalty * float((weights**2).sum())
    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    grad_w = np.asarray((delta.T @ x) / n) + 2.0 * l2_penalty * weights
    grad_b = delta.mean(axis=0)
    return loss, grad_w, grad_b


def train(
    texts: Sequence[str],
    labels: Sequence[str],
    config: TrainConfig | None = None,
    classes: Sequence[str] | None = None,
) -> Model:
    """Fit multinomial logistic regression by seeded mini-batch gradient
    descent with an inverse-scaling learning-rate schedule."""
    config = config or TrainConfig()
    if len(texts) != len(labels):
        raise TrainingError("texts and labels must be the same length")
    if classes is None:
        classes = sorted(set(labels))
    classes = list(classes)
    present = set(labels)
    if len(present) < 2:
        raise TrainingError("training needs at least two classes with examples")
    unknown = present - set(classes)
    if unknown:
        raise TrainingError(f"labels outside the declared class list: {unknown}")

    feat = FeaturizerConfig(dim=config.dim, ngram_orders=config.ngram_orders)
    x = featurize_matrix(texts, feat)
    class_index = {c: i for i, c in enumerate(classes)}
    y = np.array([class_index[l] for l in labels])

    rng = np.random.default_rng(config.seed)
    n = len(texts)
    w = np.zeros((len(classes), config.dim))
    b = np.zeros(len(classes))
    step = 0
    loss = float("nan")
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, grad_w, grad_b = loss_and_grad(
                w, b, x[batch], y[batch], config.l2_penalty
            )
            lr = config.learning_rate / (1.0 + step * config.lr_decay)
            w -= lr * grad_w
            b -= lr * grad_b
            step += 1
    final_loss, _, _ = loss_and_grad(w, b, x, y, config.l2_penalty)
    return Model(
        classes=classes,
        weights=w,
        bias=b,
        featurizer=feat,
        train_config=config,
        seed=config.seed,
        final_loss=final_loss,
    )


def save_model(model: Model, path) -> None:
    """Single-JSON persistence: weights row-major as decimal floats."""
    doc = {
        "format_version": FORMAT_VERSION,
        "hash": HASH_NAME,
        "classes": model.classes,
        "dim": model.featurizer.dim,
        "ngram_orders": list(model.featurizer.ngram_orders),
        "lowercase": model.featurizer.lowercase,
        "weights": [[float(v) for v in row] for row in model.weights],
        "bias": [float(v) for v in model.bias],
        "train_config": {
            "learning_rate": model.train_config.learning_rate,
            "lr_decay": model.train_config.lr_decay,
            "epochs": model.train_config.epochs,
            "l2_penalty": model.train_config.l2_penalty,
            "batch_size": model.train_config.batch_size,
        },
        "seed": model.seed,
        "final_loss": model.final_loss,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelError(f"unsupported model format: {doc.get('format_version')}")
    tc = doc.get("train_config", {})
    config = TrainConfig(
        learning_rate=tc.get("learning_rate", 0.1),
        lr_decay=tc.get("lr_decay", 1e-4),
        epochs=tc.get("epochs", 10),
        l2_penalty=tc.get("l2_penalty", 1e-6),
        batch_size=tc.get("batch_size", 32),
        ngram_orders=tuple(doc["ngram_orders"]),
        dim=doc["dim"],
        seed=doc.get("seed", 0),
    )
    return Model(
        classes=list(doc["classes"]),
        weights=np.array(doc["weights"], dtype=float),
        bias=np.array(doc["bias"], dtype=float),
        featurizer=FeaturizerConfig(
            dim=doc["dim"],
            ngram_orders=tuple(doc["ngram_orders"]),
            lowercase=doc.get("lowercase", True),
        ),
        train_config=config,
        seed=doc.get("seed", 0),
        final_loss=doc.get("final_loss", float("nan")),
    )


class Backend(Protocol):
    """Prediction contract the evaluation machinery consumes."""

    classes: list[str]

    def classify_batch(self, texts: Sequence[str]) -> np.ndarray: ...


class TrainableBackend(Protocol):
    classes: list[str]

    def fit(self, texts: Sequence[str], labels: Sequence[str]) -> None: ...

    def classify_batch(self, texts: Sequence[str]) -> np.ndarray: ...


class NativeBackend:
    """The in-repo baseline exposed through the backend seam."""

    def __init__(self, classes: Sequence[str], config: TrainConfig | None = None):
        self.classes = list(classes)
        self.config = config or TrainConfig()
        self.model: Model | None = None

    def fit(self, texts: Sequence[str], labels: Sequence[str]) -> None:
        self.model = train(texts, labels, self.config, classes=self.classes)

    def classify_batch(self, texts: Sequence[str]) -> np.ndarray:
        if self.model is None:
            raise BackendError("backend has not been trained")
        x = featurize_matrix(texts, self.model.featurizer)
        return softmax(_logits(self.model, x))


def check_backend(backend: Backend, classes: Sequence[str]) -> None:
    """Reject a backend whose class list disagrees with the dataset's."""
    if list(backend.classes) != list(classes):
        raise BackendError(
            f"backend classes {backend.classes} do not match dataset classes {list(classes)}"
        )
