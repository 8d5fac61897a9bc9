"""Mini-batch SGD training, evaluation, and the few-shot harness.

Plain SGD only: every number here must be reproducible bit for bit
from the seed, which rules out anything with hidden state. Training
determinism is part of the contract, not an afterthought.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .collect import collect_records
from .encoders import ContextEncoderConfig
from .errors import DimensionMismatch, EmptySplit, EmptyTrainingSet, SchemaError
from .network import ModelParams, init_params, loss_and_grads_arrays, predict_batch
from .rulebook import Rulebook
from .schema import STATE_FEATURE_DIM
from .state import DomainDb

FEWSHOT_FRACTIONS = (0.05, 0.1, 0.25, 0.5, 1.0)
FEWSHOT_TEST_FRACTION = 0.2


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    batch_size: int = 32
    epochs: int = 30
    seed: int = 0
    d_hidden: int = 128
    patience: int = 5
    val_fraction: float = 0.0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise SchemaError("learning rate, batch size, and epochs must be positive")
        if self.d_hidden < 1 or self.patience < 1:
            raise SchemaError("d_hidden and patience must be positive")
        if not 0.0 <= self.val_fraction < 1.0:
            raise SchemaError("val_fraction must lie in [0, 1)")

    @staticmethod
    def from_dict(doc: dict) -> TrainConfig:
        known = {
            "learning_rate", "batch_size", "epochs", "seed",
            "d_hidden", "patience", "val_fraction",
        }
        extra = set(doc) - known
        if extra:
            raise SchemaError(f"unknown train config keys: {sorted(extra)}")
        return TrainConfig(**doc)

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "seed": self.seed,
            "d_hidden": self.d_hidden,
            "patience": self.patience,
            "val_fraction": self.val_fraction,
        }


def _assemble(records) -> tuple[np.ndarray, np.ndarray]:
    """Stack records into (X [N, d_ctx+64], labels [N])."""
    if not records:
        raise EmptyTrainingSet("no records")
    d_ctx = records[0].context_feature.shape[0]
    X = np.empty((len(records), d_ctx + STATE_FEATURE_DIM), dtype=np.float64)
    y = np.empty(len(records), dtype=np.intp)
    for i, rec in enumerate(records):
        if rec.context_feature.shape[0] != d_ctx:
            raise DimensionMismatch(
                f"record {i} context dim {rec.context_feature.shape[0]} != {d_ctx}"
            )
        X[i, :d_ctx] = rec.context_feature
        X[i, d_ctx:] = rec.state_feature
        y[i] = rec.gold_action
    return X, y


def train(
    records,
    config: TrainConfig,
    n_actions: int,
    encoder: ContextEncoderConfig,
    backend=None,
) -> tuple[ModelParams, list[float]]:
    """SGD over shuffled mini-batches; returns params and per-epoch loss.

    With val_fraction > 0, a record-level tail slice of one seeded
    shuffle is held out; the best-validation-loss snapshot is returned
    and training stops after `patience` epochs without improvement.
    Otherwise the final-epoch parameters are returned.
    """
    X, y = _assemble(records)
    params = init_params(n_actions, encoder, d_hidden=config.d_hidden, seed=config.seed)
    if X.shape[1] != params.d_in:
        raise DimensionMismatch(
            f"records have input width {X.shape[1]}, model expects {params.d_in}"
        )
    rng = np.random.Generator(np.random.PCG64(config.seed))

    X_val = y_val = None
    if config.val_fraction > 0.0:
        order = rng.permutation(X.shape[0])
        n_val = max(1, int(X.shape[0] * config.val_fraction))
        if n_val >= X.shape[0]:
            raise EmptyTrainingSet("validation slice leaves no training data")
        val_idx, train_idx = order[:n_val], order[n_val:]
        X_val, y_val = X[val_idx], y[val_idx]
        X, y = np.ascontiguousarray(X[train_idx]), y[train_idx]

    history: list[float] = []
    best: tuple[float, dict] | None = None
    stale = 0
    for _ in range(config.epochs):
        order = rng.permutation(X.shape[0])
        epoch_losses = []
        for start in range(0, X.shape[0], config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = loss_and_grads_arrays(
                np.ascontiguousarray(X[idx]), y[idx], params, backend=backend
            )
            epoch_losses.append(loss)
            params.W_fuse -= config.learning_rate * grads["W_fuse"]
            params.b_fuse -= config.learning_rate * grads["b_fuse"]
            params.W_pred -= config.learning_rate * grads["W_pred"]
            params.b_pred -= config.learning_rate * grads["b_pred"]
        history.append(float(np.mean(epoch_losses)))

        if X_val is not None:
            val_loss, _ = loss_and_grads_arrays(X_val, y_val, params, backend=backend)
            if best is None or val_loss < best[0]:
                best = (
                    val_loss,
                    {
                        "W_fuse": params.W_fuse.copy(),
                        "b_fuse": params.b_fuse.copy(),
                        "W_pred": params.W_pred.copy(),
                        "b_pred": params.b_pred.copy(),
                    },
                )
                stale = 0
            else:
                stale += 1
                if stale >= config.patience:
                    break

    if best is not None:
        params = ModelParams(encoder=params.encoder, **best[1])
    return params, history


@dataclass
class EvalReport:
    accuracy: float
    confusion: np.ndarray  # [A, A], rows gold, columns predicted
    precision: np.ndarray  # [A]
    recall: np.ndarray  # [A]
    n_records: int
    action_names: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "n_records": self.n_records,
            "action_names": list(self.action_names),
        }

    def format_text(self) -> str:
        names = self.action_names or tuple(
            f"action_{i}" for i in range(self.confusion.shape[0])
        )
        width = max(len(n) for n in names) + 2
        lines = [
            f"records:  {self.n_records}",
            f"accuracy: {self.accuracy:.4f}",
            "",
            f"{'action'.ljust(width)}{'precision':>10}{'recall':>10}{'gold':>8}",
        ]
        gold_counts = self.confusion.sum(axis=1)
        for i, name in enumerate(names):
            lines.append(
                f"{name.ljust(width)}{self.precision[i]:>10.4f}"
                f"{self.recall[i]:>10.4f}{int(gold_counts[i]):>8}"
            )
        return "\n".join(lines)


def evaluate(records, params: ModelParams, action_names=(), backend=None) -> EvalReport:
    """Argmax accuracy, per-action precision/recall, confusion matrix."""
    X, y = _assemble(records)
    if X.shape[1] != params.d_in:
        raise DimensionMismatch(
            f"records have input width {X.shape[1]}, model expects {params.d_in}"
        )
    probs = predict_batch(X, params, backend=backend)
    pred = probs.argmax(axis=1)
    A = params.n_actions
    confusion = np.zeros((A, A), dtype=np.int64)
    np.add.at(confusion, (y, pred), 1)
    gold_counts = confusion.sum(axis=1).astype(np.float64)
    pred_counts = confusion.sum(axis=0).astype(np.float64)
    diag = np.diag(confusion).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(pred_counts > 0, diag / pred_counts, 0.0)
        recall = np.where(gold_counts > 0, diag / gold_counts, 0.0)
    return EvalReport(
        accuracy=float(np.trace(confusion) / len(records)),
        confusion=confusion,
        precision=precision,
        recall=recall,
        n_records=len(records),
        action_names=tuple(action_names),
    )


def few_shot_curve(
    corpus,
    rulebook: Rulebook,
    db: DomainDb,
    encoder,
    encoder_config: ContextEncoderConfig,
    config: TrainConfig,
    fractions=FEWSHOT_FRACTIONS,
    backend=None,
) -> list[tuple[float, float]]:
    """Accuracy on a fixed test split as the training share grows.

    The test split takes one fifth of a seeded dialogue shuffle; each
    fraction trains on a prefix of the remaining pool, so smaller
    shares are strict subsets of larger ones.

    `config.epochs` is read as the budget for the full pool. A smaller
    share would see proportionally fewer SGD steps at the same epoch
    count, which conflates data size with optimization time, so each
    share reruns epochs until it has spent the full pool's step budget.
    The 1.0 share trains exactly as configured.
    """
    fractions = tuple(fractions)
    if not fractions or any(not 0.0 < f <= 1.0 for f in fractions):
        raise EmptySplit("fractions must lie in (0, 1]")
    if list(fractions) != sorted(fractions):
        raise EmptySplit("fractions must be ascending")
    n = len(corpus)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    order = [corpus[i] for i in rng.permutation(n)]
    n_test = max(1, int(n * FEWSHOT_TEST_FRACTION))
    if n_test >= n:
        raise EmptySplit(f"{n} dialogues cannot give a train/test split")
    test, pool = order[:n_test], order[n_test:]
    test_records = collect_records(test, rulebook, db, encoder)
    pool_records = collect_records(pool, rulebook, db, encoder)

    def batches(count: int) -> int:
        return -(-count // config.batch_size)

    step_budget = config.epochs * batches(len(pool_records))

    rows: list[tuple[float, float]] = []
    for fraction in fractions:
        k = int(len(pool) * fraction)
        if k == 0:
            raise EmptySplit(
                f"fraction {fraction} of {len(pool)} training dialogues is empty"
            )
        subset_records = pool_records if k == len(pool) else collect_records(
            pool[:k], rulebook, db, encoder
        )
        epochs = -(-step_budget // batches(len(subset_records)))
        params, _ = train(
            subset_records,
            replace(config, epochs=epochs),
            rulebook.n_actions,
            encoder_config,
            backend=backend,
        )
        report = evaluate(test_records, params, backend=backend)
        rows.append((fraction, report.accuracy))
    return rows


def format_fewshot_table(rows) -> str:
    lines = [f"{'fraction':>10}{'accuracy':>12}"]
    for fraction, accuracy in rows:
        lines.append(f"{fraction:>10.2f}{accuracy:>12.4f}")
    return "\n".join(lines)


def load_train_config(path: str | Path | None) -> TrainConfig:
    if path is None:
        return TrainConfig()
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"train config is not valid JSON: {exc}") from exc
    return TrainConfig.from_dict(doc)
