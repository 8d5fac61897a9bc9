"""The learned trigger: fusion layer, prediction layer, softmax, gradients.

Architecture, fixed: h = relu(W_fuse @ [ctx; st] + b_fuse), logits =
W_pred @ h + b_pred, probabilities = softmax(logits) with max
subtraction. Loss is mean cross-entropy computed through log-sum-exp.
The heavy arithmetic lives in `_kernels`; this module owns parameter
handling, validation, and the model file format.

Model file: JSON, format_version 1, weights as nested row-major lists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .encoders import ContextEncoderConfig
from .errors import DimensionMismatch, LabelOutOfRange, SchemaError
from .schema import STATE_FEATURE_DIM

INIT_SCALE = 0.05
MODEL_FORMAT_VERSION = 1


@dataclass
class ModelParams:
    """Weights of the two-layer policy plus its context encoder config."""

    encoder: ContextEncoderConfig
    W_fuse: np.ndarray  # [d_hidden, d_ctx + 64]
    b_fuse: np.ndarray  # [d_hidden]
    W_pred: np.ndarray  # [A, d_hidden]
    b_pred: np.ndarray  # [A]

    def __post_init__(self) -> None:
        for name in ("W_fuse", "b_fuse", "W_pred", "b_pred"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise SchemaError(f"{name} contains non-finite values")
            setattr(self, name, arr)
        if self.W_fuse.ndim != 2 or self.W_pred.ndim != 2:
            raise DimensionMismatch("weight matrices must be 2-d")
        if self.b_fuse.shape != (self.W_fuse.shape[0],):
            raise DimensionMismatch("b_fuse does not match W_fuse rows")
        if self.W_pred.shape[1] != self.W_fuse.shape[0]:
            raise DimensionMismatch("W_pred columns do not match d_hidden")
        if self.b_pred.shape != (self.W_pred.shape[0],):
            raise DimensionMismatch("b_pred does not match W_pred rows")
        if self.d_ctx < 1:
            raise DimensionMismatch("fusion input leaves no room for the context")
        if self.encoder.dim != self.d_ctx:
            raise DimensionMismatch(
                f"encoder dim {self.encoder.dim} != W_fuse context width {self.d_ctx}"
            )

    @property
    def d_in(self) -> int:
        return self.W_fuse.shape[1]

    @property
    def d_ctx(self) -> int:
        return self.W_fuse.shape[1] - STATE_FEATURE_DIM

    @property
    def d_hidden(self) -> int:
        return self.W_fuse.shape[0]

    @property
    def n_actions(self) -> int:
        return self.W_pred.shape[0]


def init_params(
    n_actions: int,
    encoder: ContextEncoderConfig,
    d_hidden: int = 128,
    seed: int = 0,
) -> ModelParams:
    """Seeded uniform(-0.05, 0.05) init; draw order W_fuse, b_fuse, W_pred, b_pred."""
    if n_actions < 2:
        raise SchemaError(f"need at least 2 action classes, got {n_actions}")
    if d_hidden < 1:
        raise SchemaError(f"d_hidden must be >= 1, got {d_hidden}")
    d_in = encoder.dim + STATE_FEATURE_DIM
    rng = np.random.Generator(np.random.PCG64(seed))

    def draw(*shape):
        return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)

    return ModelParams(
        encoder=encoder,
        W_fuse=draw(d_hidden, d_in),
        b_fuse=draw(d_hidden),
        W_pred=draw(n_actions, d_hidden),
        b_pred=draw(n_actions),
    )


def _as_batch(ctx: np.ndarray, st: np.ndarray, params: ModelParams) -> np.ndarray:
    ctx = np.asarray(ctx, dtype=np.float64)
    st = np.asarray(st, dtype=np.float64)
    if ctx.shape != (params.d_ctx,):
        raise DimensionMismatch(f"context shape {ctx.shape}, want ({params.d_ctx},)")
    if st.shape != (STATE_FEATURE_DIM,):
        raise DimensionMismatch(f"state shape {st.shape}, want ({STATE_FEATURE_DIM},)")
    return np.ascontiguousarray(np.concatenate([ctx, st])[None, :])


def predict(ctx: np.ndarray, st: np.ndarray, params: ModelParams, backend=None) -> np.ndarray:
    """Probability vector over all actions for one (context, state) pair."""
    kern = backend if backend is not None else _kernels
    X = _as_batch(ctx, st, params)
    _, _, P = kern.forward(X, params.W_fuse, params.b_fuse, params.W_pred, params.b_pred)
    return P[0]


def predict_batch(X: np.ndarray, params: ModelParams, backend=None) -> np.ndarray:
    """Row-wise probabilities for a prepared [N, d_ctx+64] input matrix."""
    kern = backend if backend is not None else _kernels
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.d_in:
        raise DimensionMismatch(f"input shape {X.shape}, want (N, {params.d_in})")
    _, _, P = kern.forward(X, params.W_fuse, params.b_fuse, params.W_pred, params.b_pred)
    return P


def loss_and_grads_arrays(
    X: np.ndarray, labels: np.ndarray, params: ModelParams, backend=None
):
    """Mean cross-entropy and exact gradients on a prepared batch.

    Returns (loss, {"W_fuse": g, "b_fuse": g, "W_pred": g, "b_pred": g}).
    """
    kern = backend if backend is not None else _kernels
    X = np.ascontiguousarray(X, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.intp)
    if X.ndim != 2 or X.shape[1] != params.d_in:
        raise DimensionMismatch(f"input shape {X.shape}, want (N, {params.d_in})")
    if labels.ndim != 1 or labels.shape[0] != X.shape[0]:
        raise DimensionMismatch("labels do not align with the batch")
    if X.shape[0] == 0:
        raise DimensionMismatch("batch is empty")
    if labels.min() < 0 or labels.max() >= params.n_actions:
        raise LabelOutOfRange(
            f"labels must lie in 0..{params.n_actions - 1}"
        )
    loss, dW_fuse, db_fuse, dW_pred, db_pred = kern.loss_and_grads_core(
        X, labels, params.W_fuse, params.b_fuse, params.W_pred, params.b_pred
    )
    return loss, {"W_fuse": dW_fuse, "b_fuse": db_fuse, "W_pred": dW_pred, "b_pred": db_pred}


def loss_and_grads(records, params: ModelParams, backend=None):
    """Record-level wrapper over loss_and_grads_arrays."""
    if not records:
        raise DimensionMismatch("batch is empty")
    X = np.stack(
        [np.concatenate([r.context_feature, r.state_feature]) for r in records]
    ).astype(np.float64)
    labels = np.asarray([r.gold_action for r in records], dtype=np.intp)
    return loss_and_grads_arrays(X, labels, params, backend=backend)


# --- model file ---------------------------------------------------------------


def model_to_dict(params: ModelParams) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "encoder": params.encoder.to_dict(),
        "dims": {
            "d_ctx": params.d_ctx,
            "d_state": STATE_FEATURE_DIM,
            "d_hidden": params.d_hidden,
            "n_actions": params.n_actions,
        },
        "weights": {
            "W_fuse": params.W_fuse.tolist(),
            "b_fuse": params.b_fuse.tolist(),
            "W_pred": params.W_pred.tolist(),
            "b_pred": params.b_pred.tolist(),
        },
    }


def save_model(params: ModelParams, path: str | Path) -> None:
    doc = model_to_dict(params)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path: str | Path) -> ModelParams:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise SchemaError("unsupported model file format")
    try:
        weights = doc["weights"]
        params = ModelParams(
            encoder=ContextEncoderConfig.from_dict(doc["encoder"]),
            W_fuse=np.asarray(weights["W_fuse"], dtype=np.float64),
            b_fuse=np.asarray(weights["b_fuse"], dtype=np.float64),
            W_pred=np.asarray(weights["W_pred"], dtype=np.float64),
            b_pred=np.asarray(weights["b_pred"], dtype=np.float64),
        )
    except KeyError as exc:
        raise SchemaError(f"model file missing key {exc}") from exc
    dims = doc.get("dims", {})
    declared = (dims.get("d_ctx"), dims.get("d_hidden"), dims.get("n_actions"))
    actual = (params.d_ctx, params.d_hidden, params.n_actions)
    if declared != actual:
        raise SchemaError(f"model dims {declared} do not match weights {actual}")
    return params
