"""Binarization of the dialogue state into the fixed 64-bit feature vector.

The bit layout is declared in `schema`; this module only reads it.
Recomputing the vector from a state snapshot must reproduce the vector
captured in any trace, so nothing here may depend on anything outside
the DialogueState itself.
"""

from __future__ import annotations

import numpy as np

from .schema import (
    AUX_FLAG_BASE,
    DB_BUCKET_BASE,
    INFORMABLE_SLOTS,
    LAST_ACTION_BASE,
    LAST_ACTION_BITS,
    REQUESTABLE_SLOTS,
    SLOT_FILLED_BASE,
    SLOT_REQUESTED_BASE,
    STATE_FEATURE_DIM,
    TURN_BUCKET_BASE,
    TURN_BUCKET_THRESHOLDS,
)
from .state import DialogueState


def encode_state(state: DialogueState) -> np.ndarray:
    """Project a DialogueState onto {0,1}^64 under the declared layout."""
    vec = np.zeros(STATE_FEATURE_DIM, dtype=np.float64)

    for i, slot in enumerate(INFORMABLE_SLOTS):
        if state.get(f"{slot}_filled"):
            vec[SLOT_FILLED_BASE + i] = 1.0
    for i, slot in enumerate(REQUESTABLE_SLOTS):
        if state.get(f"{slot}_requested"):
            vec[SLOT_REQUESTED_BASE + i] = 1.0

    # db bucket stays dark until the first lookup of the dialogue
    if state.db_result_count is not None:
        if state.db_result_count == 0:
            vec[DB_BUCKET_BASE] = 1.0
        elif state.db_result_count == 1:
            vec[DB_BUCKET_BASE + 1] = 1.0
        else:
            vec[DB_BUCKET_BASE + 2] = 1.0

    if state.last_action is not None and 0 <= state.last_action < LAST_ACTION_BITS:
        vec[LAST_ACTION_BASE + state.last_action] = 1.0

    # unary bound code: one bit per `turn <= threshold` predicate that
    # holds; turns past the last threshold leave the group dark
    for k, threshold in enumerate(TURN_BUCKET_THRESHOLDS):
        if state.turn_index <= threshold:
            vec[TURN_BUCKET_BASE + k] = 1.0

    for flag in state.schema.aux_flags:
        var = state.schema.variable(flag)
        if state.get(flag):
            vec[var.bits[0]] = 1.0

    return vec
