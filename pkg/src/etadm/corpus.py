"""Corpus and training-record schemas with their file formats.

Corpus file: JSON {"version": 1, "dialogues": [...]}, one object per
dialogue with ordered turns of {user_utterance, frame, action_labels,
system_response}. Records file: JSON lines, one MiniTurnRecord per
line. Both writers emit sorted keys so identical content is identical
bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptySplit, SchemaError, UnknownActionLabel
from .rulebook import STOP_NAME, Rulebook
from .state import SemanticFrame

CORPUS_VERSION = 1


@dataclass(frozen=True)
class DialogueTurn:
    user_utterance: str
    frame: SemanticFrame
    action_labels: tuple[str, ...]
    system_response: str


@dataclass(frozen=True)
class AnnotatedDialogue:
    id: str
    turns: tuple[DialogueTurn, ...]


@dataclass(frozen=True)
class MiniTurnRecord:
    """One supervised example: features at a decision point, gold action."""

    dialogue_id: str
    turn_index: int
    mini_turn_index: int
    context_feature: np.ndarray
    state_feature: np.ndarray
    gold_action: int


def _validate_turn(raw: dict, rulebook: Rulebook, where: str) -> DialogueTurn:
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}: turn must be an object")
    for key in ("user_utterance", "frame", "action_labels", "system_response"):
        if key not in raw:
            raise SchemaError(f"{where}: missing key {key!r}")
    labels = raw["action_labels"]
    if not isinstance(labels, list) or not labels:
        raise SchemaError(f"{where}: action_labels must be a nonempty list")
    known = set(rulebook.action_names())
    for label in labels:
        if label == STOP_NAME:
            raise SchemaError(f"{where}: {STOP_NAME} is implicit and may not be annotated")
        if label not in known:
            raise UnknownActionLabel(f"{where}: unknown action label {label!r}")
    try:
        frame = SemanticFrame.from_dict(raw["frame"])
    except SchemaError as exc:
        raise SchemaError(f"{where}: {exc}") from exc
    return DialogueTurn(
        user_utterance=str(raw["user_utterance"]),
        frame=frame,
        action_labels=tuple(labels),
        system_response=str(raw["system_response"]),
    )


def corpus_from_dict(doc: dict, rulebook: Rulebook) -> list[AnnotatedDialogue]:
    if not isinstance(doc, dict) or doc.get("version") != CORPUS_VERSION:
        raise SchemaError("corpus must be an object with version 1")
    dialogues = []
    seen: set[str] = set()
    for d_idx, raw in enumerate(doc.get("dialogues", [])):
        where = f"dialogue[{d_idx}]"
        if not isinstance(raw, dict) or "id" not in raw or "turns" not in raw:
            raise SchemaError(f"{where}: needs id and turns")
        if raw["id"] in seen:
            raise SchemaError(f"{where}: duplicate dialogue id {raw['id']!r}")
        seen.add(raw["id"])
        turns = tuple(
            _validate_turn(t, rulebook, f"{where}.turns[{t_idx}]")
            for t_idx, t in enumerate(raw["turns"])
        )
        dialogues.append(AnnotatedDialogue(id=str(raw["id"]), turns=turns))
    return dialogues


def corpus_to_dict(dialogues) -> dict:
    return {
        "version": CORPUS_VERSION,
        "dialogues": [
            {
                "id": d.id,
                "turns": [
                    {
                        "user_utterance": t.user_utterance,
                        "frame": t.frame.to_dict(),
                        "action_labels": list(t.action_labels),
                        "system_response": t.system_response,
                    }
                    for t in d.turns
                ],
            }
            for d in dialogues
        ],
    }


def load_corpus(path: str | Path, rulebook: Rulebook) -> list[AnnotatedDialogue]:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"corpus is not valid JSON: {exc}") from exc
    return corpus_from_dict(doc, rulebook)


def save_corpus(dialogues, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(corpus_to_dict(dialogues), fh, sort_keys=True, indent=1)
        fh.write("\n")


# --- records ------------------------------------------------------------------


def save_records(records, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            line = {
                "dialogue_id": rec.dialogue_id,
                "turn_index": rec.turn_index,
                "mini_turn_index": rec.mini_turn_index,
                "context_feature": [float(x) for x in rec.context_feature],
                "state_feature": [int(x) for x in rec.state_feature],
                "gold_action": rec.gold_action,
            }
            fh.write(json.dumps(line, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def load_records(path: str | Path) -> list[MiniTurnRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"records line {lineno}: invalid JSON: {exc}") from exc
            try:
                records.append(
                    MiniTurnRecord(
                        dialogue_id=raw["dialogue_id"],
                        turn_index=int(raw["turn_index"]),
                        mini_turn_index=int(raw["mini_turn_index"]),
                        context_feature=np.asarray(raw["context_feature"], dtype=np.float64),
                        state_feature=np.asarray(raw["state_feature"], dtype=np.float64),
                        gold_action=int(raw["gold_action"]),
                    )
                )
            except KeyError as exc:
                raise SchemaError(f"records line {lineno}: missing key {exc}") from exc
    return records


def split_records(records, train_fraction: float, seed: int):
    """Split records at dialogue granularity with a seeded shuffle.

    The train side takes floor(n_dialogues * fraction) dialogues and
    must not be empty; the test side may be (fraction 1.0).
    """
    if not 0.0 < train_fraction <= 1.0:
        raise EmptySplit(f"train fraction must be in (0, 1], got {train_fraction}")
    ids: list[str] = []
    for rec in records:
        if rec.dialogue_id not in ids:
            ids.append(rec.dialogue_id)
    if not ids:
        raise EmptySplit("no records to split")
    rng = np.random.Generator(np.random.PCG64(seed))
    order = [ids[i] for i in rng.permutation(len(ids))]
    n_train = int(len(order) * train_fraction)
    if n_train == 0:
        raise EmptySplit(
            f"fraction {train_fraction} of {len(order)} dialogues leaves an empty train set"
        )
    train_ids = set(order[:n_train])
    train = [r for r in records if r.dialogue_id in train_ids]
    test = [r for r in records if r.dialogue_id not in train_ids]
    return train, test
