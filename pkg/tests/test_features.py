"""The 64-bit state feature layout."""

from __future__ import annotations

import numpy as np
import pytest

from etadm.features import encode_state
from etadm.schema import STATE_FEATURE_DIM
from etadm.state import DialogueState, Event, SemanticFrame, reset_for_turn

from oracles import random_state, state_bits_oracle


def test_fresh_turn_one_state_sets_only_turn_bounds(rulebook):
    state = DialogueState(rulebook.schema)
    reset_for_turn(state, Event.external("Start"), SemanticFrame(intent="start"))
    state.event_queue.clear()
    vec = encode_state(state)
    # nothing filled, no lookup, no action yet: turn 1 satisfies every
    # turn-count bound and nothing else lights up
    assert np.array_equal(vec[23:27], np.ones(4))
    assert vec.sum() == 4.0


def test_shape_and_binary_values(rulebook):
    rng = np.random.Generator(np.random.PCG64(3))
    for _ in range(50):
        vec = encode_state(random_state(rng, rulebook))
        assert vec.shape == (STATE_FEATURE_DIM,)
        assert set(np.unique(vec)) <= {0.0, 1.0}


def test_matches_layout_oracle(rulebook):
    rng = np.random.Generator(np.random.PCG64(4))
    for _ in range(200):
        state = random_state(rng, rulebook)
        assert np.array_equal(encode_state(state), state_bits_oracle(state))


def test_db_bucket_dark_until_first_lookup(rulebook):
    state = DialogueState(rulebook.schema)
    assert encode_state(state)[7:10].sum() == 0.0
    for count, bit in [(0, 7), (1, 8), (2, 9), (25, 9)]:
        state.db_result_count = count
        vec = encode_state(state)
        assert vec[bit] == 1.0 and vec[7:10].sum() == 1.0


@pytest.mark.parametrize(
    "turn,bits",
    [
        (0, (23, 24, 25, 26)),
        (1, (23, 24, 25, 26)),
        (2, (24, 25, 26)),
        (3, (25, 26)),
        (4, (25, 26)),
        (5, (26,)),
        (8, (26,)),
        (9, ()),
        (40, ()),
    ],
)
def test_turn_bucket_unary_bounds(rulebook, turn, bits):
    state = DialogueState(rulebook.schema)
    state.turn_index = turn
    vec = encode_state(state)
    assert [23 + k for k in range(4) if vec[23 + k] == 1.0] == list(bits)
    assert vec[23:27].sum() == len(bits)


def test_last_action_one_hot(rulebook):
    state = DialogueState(rulebook.schema)
    assert encode_state(state)[10:23].sum() == 0.0
    for action_id in range(rulebook.n_actions):
        state.last_action = action_id
        vec = encode_state(state)
        assert vec[10 + action_id] == 1.0 and vec[10:23].sum() == 1.0


def test_aux_flags_follow_declaration_order(rulebook):
    state = DialogueState(rulebook.schema)
    for i, flag in enumerate(rulebook.schema.aux_flags):
        state.set(flag, True)
        assert encode_state(state)[27 + i] == 1.0
        state.set(flag, False)


def test_reserved_tail_stays_zero(rulebook):
    rng = np.random.Generator(np.random.PCG64(8))
    for _ in range(50):
        assert encode_state(random_state(rng, rulebook))[35:].sum() == 0.0


def test_encoding_is_pure(rulebook):
    rng = np.random.Generator(np.random.PCG64(9))
    state = random_state(rng, rulebook)
    first = encode_state(state)
    assert np.array_equal(first, encode_state(state))
    first[0] = 99.0  # mutating the output must not touch the state
    assert encode_state(state)[0] != 99.0 or state.get("food_filled")
