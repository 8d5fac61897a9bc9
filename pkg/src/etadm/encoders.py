"""Dialogue context encoders.

The context feature is an opaque fixed-length vector; anything that can
produce one per turn can sit behind this interface. Two implementations
ship: a hashed n-gram bag (the native reference, dependency-free and
deterministic) and a loader for precomputed per-turn vectors so that an
external transformer encoder can be plugged in offline.

Precomputed vectors are keyed "<dialogue_id>:<turn_index>".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from hashlib import blake2b
from pathlib import Path

import numpy as np

from .errors import MissingVector, SchemaError

ENCODER_KINDS = ("hashed_ngram", "precomputed")
SPEAKERS = ("usr", "sys")

# Number of trailing utterances fed to the encoder. A bag of hashed
# ngrams has no attention to pick the recent words out of a long
# transcript, and the state vector already carries the long-range
# memory, so the encoder sees only the utterance the decision is
# actually about. Wider windows drown it: system responses quote venue
# names and phone digits, which are per-dialogue noise that eats most
# of the L2 norm.
CONTEXT_WINDOW = 1


def encode_turn_context(encoder, history, turn_key: str | None = None) -> np.ndarray:
    """Encode the trailing CONTEXT_WINDOW utterances of a history.

    Every context vector in the system (live sessions and replayed
    corpora alike) is produced here, so the window policy cannot drift
    between training and serving.
    """
    return encoder.encode(list(history)[-CONTEXT_WINDOW:], turn_key=turn_key)


@dataclass(frozen=True)
class ContextEncoderConfig:
    kind: str = "hashed_ngram"
    dim: int = 768
    seed: int = 0
    vectors_path: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ENCODER_KINDS:
            raise SchemaError(f"unknown encoder kind {self.kind!r}")
        if self.dim < 1:
            raise SchemaError(f"encoder dim must be >= 1, got {self.dim}")
        if self.kind == "precomputed" and not self.vectors_path:
            raise SchemaError("precomputed encoder needs vectors_path")

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "dim": self.dim, "seed": self.seed}
        if self.vectors_path:
            doc["vectors_path"] = self.vectors_path
        return doc

    @staticmethod
    def from_dict(doc: dict) -> ContextEncoderConfig:
        return ContextEncoderConfig(
            kind=doc.get("kind", "hashed_ngram"),
            dim=int(doc.get("dim", 768)),
            seed=int(doc.get("seed", 0)),
            vectors_path=doc.get("vectors_path"),
        )


def _tokens(utterances) -> list[str]:
    """Flatten (speaker, text) pairs into a tagged lowercase token stream.

    Empty texts are dropped entirely (tag included) so that a live
    session opened with a blank utterance and a recorded blank turn
    produce the same context.
    """
    toks: list[str] = []
    for speaker, text in utterances:
        if speaker not in SPEAKERS:
            raise SchemaError(f"unknown speaker {speaker!r}")
        if not text:
            continue
        toks.append(f"[{speaker}]")
        toks.extend(text.lower().split())
    return toks


class HashedNgramEncoder:
    """Signed hashing of word unigrams and bigrams, L2-normalized."""

    def __init__(self, config: ContextEncoderConfig):
        self.config = config
        self._key = config.seed.to_bytes(8, "little", signed=False)

    def encode(self, utterances, turn_key: str | None = None) -> np.ndarray:
        dim = self.config.dim
        vec = np.zeros(dim, dtype=np.float64)
        toks = _tokens(utterances)
        grams = toks + [f"{a} {b}" for a, b in zip(toks, toks[1:])]
        for gram in grams:
            digest = blake2b(gram.encode("utf-8"), digest_size=8, key=self._key).digest()
            h = int.from_bytes(digest, "little")
            sign = 1.0 if h & 1 == 0 else -1.0
            vec[(h >> 1) % dim] += sign
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec


class PrecomputedEncoder:
    """Serves per-turn vectors exported by an external encoder."""

    def __init__(self, config: ContextEncoderConfig):
        self.config = config
        with open(config.vectors_path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise SchemaError("vector file must map turn keys to arrays")
        self._vectors: dict[str, np.ndarray] = {}
        for key, values in raw.items():
            arr = np.asarray(values, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != config.dim:
                raise SchemaError(
                    f"vector for {key!r} has shape {arr.shape}, want ({config.dim},)"
                )
            self._vectors[key] = arr

    def encode(self, utterances, turn_key: str | None = None) -> np.ndarray:
        if turn_key is None or turn_key not in self._vectors:
            raise MissingVector(f"no precomputed vector for turn {turn_key!r}")
        return self._vectors[turn_key].copy()


def get_encoder(config: ContextEncoderConfig):
    if config.kind == "hashed_ngram":
        return HashedNgramEncoder(config)
    return PrecomputedEncoder(config)


def save_vectors(vectors: dict[str, np.ndarray], path: str | Path) -> None:
    """Write a precomputed-vector file (turn key -> float array)."""
    doc = {key: [float(x) for x in vec] for key, vec in vectors.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
