"""Corpus and record files: round-trips, validation, splitting."""

from __future__ import annotations

import json

import numpy as np
import pytest

from etadm.corpus import (
    AnnotatedDialogue,
    DialogueTurn,
    corpus_from_dict,
    corpus_to_dict,
    load_corpus,
    load_records,
    save_corpus,
    save_records,
    split_records,
)
from etadm.errors import EmptySplit, SchemaError, UnknownActionLabel
from etadm.state import SemanticFrame


def one_dialogue(labels=("Greet",)):
    turn = DialogueTurn(
        user_utterance="hello",
        frame=SemanticFrame(intent="start"),
        action_labels=tuple(labels),
        system_response="Hello!",
    )
    return AnnotatedDialogue(id="dlg-x", turns=(turn,))


def test_corpus_file_round_trip(tmp_path, small_corpus, rulebook):
    path = tmp_path / "corpus.json"
    save_corpus(small_corpus, path)
    loaded = load_corpus(path, rulebook)
    assert loaded == small_corpus


def test_corpus_writer_is_byte_stable(tmp_path, small_corpus):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_corpus(small_corpus, a)
    save_corpus(small_corpus, b)
    assert a.read_bytes() == b.read_bytes()


def test_corpus_validation(rulebook):
    with pytest.raises(SchemaError):
        corpus_from_dict({"version": 7, "dialogues": []}, rulebook)

    doc = corpus_to_dict([one_dialogue()])
    doc["dialogues"][0]["turns"][0]["action_labels"] = []
    with pytest.raises(SchemaError):
        corpus_from_dict(doc, rulebook)

    doc = corpus_to_dict([one_dialogue()])
    doc["dialogues"][0]["turns"][0]["action_labels"] = ["STOP"]
    with pytest.raises(SchemaError):
        corpus_from_dict(doc, rulebook)

    doc = corpus_to_dict([one_dialogue()])
    doc["dialogues"][0]["turns"][0]["action_labels"] = ["Shrug"]
    with pytest.raises(UnknownActionLabel):
        corpus_from_dict(doc, rulebook)

    doc = corpus_to_dict([one_dialogue(), one_dialogue()])  # duplicate ids
    with pytest.raises(SchemaError):
        corpus_from_dict(doc, rulebook)

    doc = corpus_to_dict([one_dialogue()])
    del doc["dialogues"][0]["turns"][0]["frame"]
    with pytest.raises(SchemaError):
        corpus_from_dict(doc, rulebook)


def test_corpus_rejects_bad_json(tmp_path, rulebook):
    path = tmp_path / "corpus.json"
    path.write_text("{{{")
    with pytest.raises(SchemaError):
        load_corpus(path, rulebook)


def test_records_file_round_trip(tmp_path, small_records):
    path = tmp_path / "records.jsonl"
    sample = small_records[:50]
    save_records(sample, path)
    loaded = load_records(path)
    assert len(loaded) == len(sample)
    for a, b in zip(sample, loaded):
        assert a.dialogue_id == b.dialogue_id
        assert a.turn_index == b.turn_index
        assert a.mini_turn_index == b.mini_turn_index
        assert a.gold_action == b.gold_action
        assert np.array_equal(a.context_feature, b.context_feature)
        assert np.array_equal(a.state_feature, b.state_feature)


def test_records_loader_validation(tmp_path):
    path = tmp_path / "records.jsonl"
    path.write_text("not json\n")
    with pytest.raises(SchemaError):
        load_records(path)
    path.write_text(json.dumps({"dialogue_id": "d"}) + "\n")
    with pytest.raises(SchemaError):
        load_records(path)
    path.write_text("\n\n")
    assert load_records(path) == []


def test_split_is_by_dialogue(small_records):
    train, test = split_records(small_records, 0.75, seed=3)
    train_ids = {r.dialogue_id for r in train}
    test_ids = {r.dialogue_id for r in test}
    assert train_ids.isdisjoint(test_ids)
    assert len(train) + len(test) == len(small_records)
    n = len({r.dialogue_id for r in small_records})
    assert len(train_ids) == int(n * 0.75)


def test_split_is_seeded(small_records):
    a = split_records(small_records, 0.8, seed=5)
    b = split_records(small_records, 0.8, seed=5)
    assert [r.dialogue_id for r in a[0]] == [r.dialogue_id for r in b[0]]
    c = split_records(small_records, 0.8, seed=6)
    assert [r.dialogue_id for r in a[0]] != [r.dialogue_id for r in c[0]]


def test_split_bounds(small_records):
    with pytest.raises(EmptySplit):
        split_records(small_records, 0.0, seed=1)
    with pytest.raises(EmptySplit):
        split_records(small_records, 1.5, seed=1)
    with pytest.raises(EmptySplit):
        split_records([], 0.5, seed=1)
    train, test = split_records(small_records, 1.0, seed=1)
    assert test == [] and len(train) == len(small_records)
    with pytest.raises(EmptySplit):
        split_records(small_records[:10], 0.01, seed=1)
