"""Context encoders: hashing, normalization, window, precomputed vectors."""

from __future__ import annotations

from hashlib import blake2b

import numpy as np
import pytest

from etadm.encoders import (
    CONTEXT_WINDOW,
    ContextEncoderConfig,
    HashedNgramEncoder,
    PrecomputedEncoder,
    encode_turn_context,
    get_encoder,
    save_vectors,
)
from etadm.errors import MissingVector, SchemaError


def test_config_validation():
    with pytest.raises(SchemaError):
        ContextEncoderConfig(kind="word2vec")
    with pytest.raises(SchemaError):
        ContextEncoderConfig(dim=0)
    with pytest.raises(SchemaError):
        ContextEncoderConfig(kind="precomputed")  # needs vectors_path


def test_config_round_trip():
    cfg = ContextEncoderConfig(dim=128, seed=5)
    assert ContextEncoderConfig.from_dict(cfg.to_dict()) == cfg


def test_deterministic_and_normalized(encoder):
    utterances = [("usr", "i want cheap thai food"), ("sys", "What price range?")]
    a = encoder.encode(utterances)
    b = encoder.encode(utterances)
    assert np.array_equal(a, b)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-12


def test_empty_input_is_zero_vector(encoder):
    assert np.linalg.norm(encoder.encode([])) == 0.0
    # blank texts are dropped tag and all
    assert np.linalg.norm(encoder.encode([("usr", "")])) == 0.0
    a = encoder.encode([("usr", "hello")])
    b = encoder.encode([("sys", ""), ("usr", "hello")])
    assert np.array_equal(a, b)


def test_speaker_tag_changes_vector(encoder):
    assert not np.array_equal(
        encoder.encode([("usr", "hello")]), encoder.encode([("sys", "hello")])
    )


def test_unknown_speaker_rejected(encoder):
    with pytest.raises(SchemaError):
        encoder.encode([("bot", "hello")])


def test_seed_changes_hash():
    a = HashedNgramEncoder(ContextEncoderConfig(seed=0)).encode([("usr", "hello")])
    b = HashedNgramEncoder(ContextEncoderConfig(seed=1)).encode([("usr", "hello")])
    assert not np.array_equal(a, b)


def test_single_utterance_gram_count(encoder):
    # "[usr]", "hello", "there" plus two bigrams: at most 5 buckets
    vec = encoder.encode([("usr", "hello there")])
    assert 1 <= np.count_nonzero(vec) <= 5


def test_hash_placement_against_direct_computation():
    cfg = ContextEncoderConfig(dim=64, seed=9)
    vec = HashedNgramEncoder(cfg).encode([("usr", "hello")])
    expected = np.zeros(64)
    for gram in ("[usr]", "hello", "[usr] hello"):
        digest = blake2b(
            gram.encode(), digest_size=8, key=(9).to_bytes(8, "little")
        ).digest()
        h = int.from_bytes(digest, "little")
        expected[(h >> 1) % 64] += 1.0 if h & 1 == 0 else -1.0
    expected /= np.linalg.norm(expected)
    assert np.allclose(vec, expected)


def test_window_keeps_only_the_tail(encoder):
    history = [
        ("usr", "i want thai food"),
        ("sys", "Which part of town?"),
        ("usr", "the north please"),
    ]
    windowed = encode_turn_context(encoder, history)
    direct = encoder.encode(history[-CONTEXT_WINDOW:])
    assert np.array_equal(windowed, direct)
    # older turns must not leak in
    assert np.array_equal(windowed, encode_turn_context(encoder, history[1:]))


def test_case_folding(encoder):
    assert np.array_equal(
        encoder.encode([("usr", "CHEAP Thai")]), encoder.encode([("usr", "cheap thai")])
    )


# --- precomputed vectors --------------------------------------------------------


def test_precomputed_serves_saved_vectors(tmp_path):
    path = tmp_path / "vectors.json"
    rng = np.random.Generator(np.random.PCG64(2))
    stored = {"dlg-0001:0": rng.normal(size=16), "dlg-0001:1": rng.normal(size=16)}
    save_vectors(stored, path)
    enc = get_encoder(
        ContextEncoderConfig(kind="precomputed", dim=16, vectors_path=str(path))
    )
    assert isinstance(enc, PrecomputedEncoder)
    got = enc.encode([("usr", "ignored text")], turn_key="dlg-0001:1")
    assert np.allclose(got, stored["dlg-0001:1"])
    got[0] = 123.0  # caller mutations must not corrupt the store
    assert enc.encode([], turn_key="dlg-0001:1")[0] != 123.0


def test_precomputed_missing_key(tmp_path):
    path = tmp_path / "vectors.json"
    save_vectors({"dlg-0001:0": np.zeros(4)}, path)
    enc = get_encoder(ContextEncoderConfig(kind="precomputed", dim=4, vectors_path=str(path)))
    with pytest.raises(MissingVector):
        enc.encode([], turn_key="dlg-0001:7")
    with pytest.raises(MissingVector):
        enc.encode([])


def test_precomputed_dimension_check(tmp_path):
    path = tmp_path / "vectors.json"
    save_vectors({"a:0": np.zeros(8)}, path)
    with pytest.raises(SchemaError):
        get_encoder(ContextEncoderConfig(kind="precomputed", dim=4, vectors_path=str(path)))
