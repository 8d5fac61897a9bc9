"""Numpy implementation of the network kernels.

Always importable; the compiled extension in `_core` mirrors this
module function for function. Arrays are float64 and C-contiguous.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def forward(X, W_fuse, b_fuse, W_pred, b_pred):
    """Fused-layer forward pass over a batch.

    X: [B, d_in] -> returns (H [B, d_hidden], logits [B, A], P [B, A])
    with H = relu(X W_fuse^T + b_fuse), P = row softmax of logits
    computed with max subtraction.
    """
    Z = X @ W_fuse.T + b_fuse
    H = np.maximum(Z, 0.0)
    logits = H @ W_pred.T + b_pred
    m = logits.max(axis=1, keepdims=True)
    E = np.exp(logits - m)
    P = E / E.sum(axis=1, keepdims=True)
    return H, logits, P


def loss_and_grads_core(X, labels, W_fuse, b_fuse, W_pred, b_pred):
    """Mean cross-entropy and exact gradients for one batch.

    Loss uses log-sum-exp; gradients are plain backprop through the
    relu and softmax. Returns (loss, dW_fuse, db_fuse, dW_pred, db_pred).
    """
    H, logits, P = forward(X, W_fuse, b_fuse, W_pred, b_pred)
    B = X.shape[0]
    rows = np.arange(B)

    m = logits.max(axis=1)
    lse = m + np.log(np.exp(logits - m[:, None]).sum(axis=1))
    loss = float(np.mean(lse - logits[rows, labels]))

    dlogits = P.copy()
    dlogits[rows, labels] -= 1.0
    dlogits /= B
    dW_pred = dlogits.T @ H
    db_pred = dlogits.sum(axis=0)
    dH = dlogits @ W_pred
    dZ = dH * (H > 0.0)
    dW_fuse = dZ.T @ X
    db_fuse = dZ.sum(axis=0)
    return loss, dW_fuse, db_fuse, dW_pred, db_pred
