"""Seeded user simulator producing the synthetic annotated corpus.

Each dialogue samples a goal (the constraints of one venue row plus a
set of requestable targets) and plays it against the rules-only DM; the
DM's winner sequences and responses become the gold annotation, so a
rules replay of the corpus reproduces the labels by construction.

About a fifth of the goals detour through a value with zero matches and
either relax it afterwards or give up and leave. The relax turn and the
give-up turn start from identical state bits, so telling them apart is
only possible from the wording — that contrast is deliberate.
"""

from __future__ import annotations

import numpy as np

from .corpus import AnnotatedDialogue, DialogueTurn
from .rulebook import Rulebook
from .runtime import DmSession, run_turn
from .schema import INFORMABLE_SLOTS
from .state import DomainDb, SemanticFrame, db_lookup, event_for_intent

PLAIN_GREETINGS = ("hello", "hi", "hi there", "good morning")

OPENING_LEADS = (
    "hello, i am looking for a restaurant",
    "hi, can you find me a place to eat",
    "i need a restaurant recommendation",
)

SLOT_PHRASES = {
    "food": (
        "i would like {v} food",
        "{v} food please",
        "a {v} restaurant please",
        "something {v} would be great",
    ),
    "area": (
        "in the {v} of town",
        "somewhere in the {v}",
        "it should be in the {v} part of town",
        "the {v} area please",
    ),
    "pricerange": (
        "i want something {v}",
        "in the {v} price range",
        "it should be {v}",
        "{v} priced please",
    ),
}

REQUEST_PHRASES = {
    "name": ("what is it called", "what is the name of the place"),
    "address": ("what is the address", "can i get the address", "where is it exactly"),
    "phone": ("what is the phone number", "can i have their phone number"),
    "postcode": ("what is the postcode", "could you give me the postcode"),
}

# closing and retry phrases deliberately reuse a tight vocabulary: the
# learned policy has to tell these turns apart from wording alone, and a
# handful of consistent tokens is what a bag of hashed ngrams can carry
RELAX_TEMPLATES = (
    "ok how about {v} instead",
    "ok try {v} instead",
    "ok maybe try {v} instead",
    "ok lets try {v} instead",
)

FAREWELLS = (
    "thank you goodbye bye bye",
    "thanks goodbye bye bye",
    "great thank you goodbye bye",
    "thank you bye bye goodbye",
)

GIVEUP_FAREWELLS = (
    "no never mind goodbye bye bye",
    "no thanks never mind goodbye bye",
    "never mind then goodbye bye bye",
)


def _pick(rng: np.random.Generator, seq):
    return seq[int(rng.integers(len(seq)))]


def _zero_match_detour(rng: np.random.Generator, db: DomainDb, goal: dict[str, str]):
    """A (slot, value) swap that empties the result set, or None."""
    inventory = db.value_inventory()
    options = []
    for slot in INFORMABLE_SLOTS:
        for value in inventory[slot]:
            if value == goal[slot]:
                continue
            probe = dict(goal)
            probe[slot] = value
            if not db_lookup(db, probe):
                options.append((slot, value))
    if not options:
        return None
    return options[int(rng.integers(len(options)))]


def _constraint_utterance(rng, slots, values) -> str:
    parts = [_pick(rng, SLOT_PHRASES[s]).format(v=values[s]) for s in slots]
    return ", ".join(parts)


def _simulate_dialogue(
    rng: np.random.Generator, dialogue_id: str, rulebook: Rulebook, db: DomainDb
) -> AnnotatedDialogue:
    session = DmSession(rulebook, db, policy="rules")
    turns: list[DialogueTurn] = []

    def play(utterance: str, intent: str, informed=None, requested=()):
        frame = SemanticFrame(
            intent=intent,
            informed=dict(informed or {}),
            requested=frozenset(requested),
        )
        result = run_turn(session, event_for_intent(intent), frame, utterance=utterance)
        turns.append(
            DialogueTurn(
                user_utterance=utterance,
                frame=frame,
                action_labels=tuple(
                    rulebook.action_by_id(i).name for i in result.sequence
                ),
                system_response=result.response,
            )
        )

    row = db.rows[int(rng.integers(len(db.rows)))]
    goal = {slot: row.field_value(slot) for slot in INFORMABLE_SLOTS}
    n_requests = int(rng.choice((1, 2, 3), p=(0.25, 0.45, 0.3)))
    pool = ["address", "phone", "postcode"]
    order = [pool[i] for i in rng.permutation(len(pool))]
    requests = order[:n_requests]
    # asking for the name reads oddly bundled with other details, so it
    # always gets a turn of its own right after the venue is offered
    name_turn = rng.random() < 0.2

    detour = _zero_match_detour(rng, db, goal) if rng.random() < 0.35 else None
    give_up = detour is not None and rng.random() < 0.45
    spoken = dict(goal)
    if detour is not None:
        spoken[detour[0]] = detour[1]

    # opening turn: silent, a bare greeting, or greeting plus constraints
    style = rng.random()
    remaining = list(INFORMABLE_SLOTS)
    if style < 0.25:
        play("", "start")
    elif style < 0.45:
        play(_pick(rng, PLAIN_GREETINGS), "start")
    else:
        n = int(rng.integers(1, 4))
        order = [remaining[i] for i in rng.permutation(len(remaining))]
        first = sorted(order[:n], key=INFORMABLE_SLOTS.index)
        utterance = f"{_pick(rng, OPENING_LEADS)}, {_constraint_utterance(rng, first, spoken)}"
        play(utterance, "start", informed={s: spoken[s] for s in first})
        remaining = [s for s in remaining if s not in first]

    # inform phase: deliver the rest, one or two slots per turn, until
    # the constraints complete and the DM queries. The user is
    # cooperative: each reply covers the slot the system just asked
    # about (the first unfilled one), never leaving a question hanging
    # to be repeated verbatim the next turn.
    fold_request = bool(requests) and detour is None and rng.random() < 0.18
    while remaining:
        take = min(len(remaining), 2 if rng.random() < 0.35 else 1)
        asked = remaining[0]
        extra = [s for s in remaining[1:]]
        picks = [extra[i] for i in rng.permutation(len(extra))][: take - 1]
        batch = sorted([asked, *picks], key=INFORMABLE_SLOTS.index)
        utterance = _constraint_utterance(rng, batch, spoken)
        informed = {s: spoken[s] for s in batch}
        requested = ()
        if fold_request and len(batch) == len(remaining):
            slot = requests.pop(0)
            utterance = f"{utterance}, and {_pick(rng, REQUEST_PHRASES[slot])}?"
            requested = (slot,)
        play(utterance, "inform", informed=informed, requested=requested)
        remaining = [s for s in remaining if s not in batch]

    if detour is not None:
        if give_up:
            play(_pick(rng, GIVEUP_FAREWELLS), "bye")
            return AnnotatedDialogue(id=dialogue_id, turns=tuple(turns))
        slot, _ = detour
        play(
            _pick(rng, RELAX_TEMPLATES).format(v=goal[slot]),
            "inform",
            informed={slot: goal[slot]},
        )

    if name_turn:
        play(_pick(rng, REQUEST_PHRASES["name"]) + "?", "request", requested=("name",))
    while requests:
        take = 2 if len(requests) >= 2 and rng.random() < 0.5 else 1
        batch = [requests.pop(0) for _ in range(take)]
        utterance = " and ".join(_pick(rng, REQUEST_PHRASES[s]) for s in batch) + "?"
        play(utterance, "request", requested=tuple(batch))

    play(_pick(rng, FAREWELLS), "bye")
    return AnnotatedDialogue(id=dialogue_id, turns=tuple(turns))


def generate_synthetic_corpus(
    seed: int, n_dialogues: int, rulebook: Rulebook, db: DomainDb
) -> list[AnnotatedDialogue]:
    """Same seed, same inputs: identical corpus, dialogue by dialogue."""
    if n_dialogues < 1:
        raise ValueError(f"need at least one dialogue, got {n_dialogues}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return [
        _simulate_dialogue(rng, f"dlg-{i:04d}", rulebook, db)
        for i in range(n_dialogues)
    ]
