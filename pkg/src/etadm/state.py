"""Dialogue state, events, semantic frames, and the in-memory venue table.

All state mutation is deterministic: applying the same action to the
same state against the same database always yields the same result, so
replayed dialogues produce bit-identical state snapshots.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .errors import QueueNotEmpty, SchemaError, TemplateSlotMissing, UnknownVariable
from .schema import (
    EXTERNAL_EVENTS,
    INFORMABLE_SLOTS,
    REQUESTABLE_SLOTS,
    UNSET,
    Schema,
    StateVariable,
)

DB_FIELDS = ("name", "food", "area", "pricerange", "address", "phone", "postcode")


@dataclass(frozen=True)
class Event:
    name: str
    origin: str  # "external" | "internal"
    payload: dict[str, str] | None = None

    @staticmethod
    def external(name: str) -> Event:
        if name not in EXTERNAL_EVENTS:
            raise SchemaError(f"unknown external event {name!r}")
        return Event(name, "external")

    @staticmethod
    def internal(name: str) -> Event:
        return Event(name, "internal")


def event_for_intent(intent: str) -> Event:
    """Map a frame intent onto the external event opening its turn."""
    if intent == "start":
        return Event.external("Start")
    if intent in ("bye", "end"):
        return Event.external("End")
    return Event.external("Query")


@dataclass(frozen=True)
class SemanticFrame:
    """Structured understanding of one user turn."""

    intent: str = "inform"
    informed: dict[str, str] = field(default_factory=dict)
    requested: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        for slot in self.informed:
            if slot not in INFORMABLE_SLOTS:
                raise SchemaError(f"frame informs unknown slot {slot!r}")
        for slot in self.requested:
            if slot not in REQUESTABLE_SLOTS:
                raise SchemaError(f"frame requests unknown slot {slot!r}")

    def to_dict(self) -> dict:
        return {
            "intent": self.intent,
            "informed": dict(self.informed),
            "requested": sorted(self.requested),
        }

    @staticmethod
    def from_dict(data: dict) -> SemanticFrame:
        if not isinstance(data, dict):
            raise SchemaError(f"frame must be an object, got {type(data).__name__}")
        return SemanticFrame(
            intent=data.get("intent", "inform"),
            informed=dict(data.get("informed", {})),
            requested=frozenset(data.get("requested", [])),
        )


@dataclass(frozen=True)
class Venue:
    """One database row."""

    name: str
    food: str
    area: str
    pricerange: str
    address: str
    phone: str
    postcode: str

    def field_value(self, name: str) -> str:
        return getattr(self, name)


@dataclass
class DomainDb:
    rows: list[Venue]

    def __post_init__(self) -> None:
        seen = set()
        for row in self.rows:
            for f in DB_FIELDS:
                if not row.field_value(f):
                    raise SchemaError(f"venue {row.name!r}: empty field {f!r}")
            key = row.name.lower()
            if key in seen:
                raise SchemaError(f"duplicate venue name {row.name!r}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.rows)

    def value_inventory(self) -> dict[str, tuple[str, ...]]:
        """Known values per informable slot, lowercased and sorted."""
        return {
            slot: tuple(sorted({row.field_value(slot).lower() for row in self.rows}))
            for slot in INFORMABLE_SLOTS
        }


def load_db(path: str | Path) -> DomainDb:
    """Load the venue table from a JSON array of row objects."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise SchemaError("database file must hold a JSON array")
    rows = []
    for i, item in enumerate(data):
        if not isinstance(item, dict) or set(item) != set(DB_FIELDS):
            raise SchemaError(f"database row {i}: expected fields {DB_FIELDS}")
        rows.append(Venue(**{f: str(item[f]) for f in DB_FIELDS}))
    return DomainDb(rows)


def db_lookup(db: DomainDb, informed: dict[str, str]) -> list[Venue]:
    """Rows matching every informed slot exactly (case-insensitive).

    An empty constraint map matches all rows.
    """
    for slot in informed:
        if slot not in INFORMABLE_SLOTS:
            raise SchemaError(f"cannot filter on non-informable slot {slot!r}")
    wanted = {slot: value.lower() for slot, value in informed.items()}
    return [
        row
        for row in db.rows
        if all(row.field_value(slot).lower() == value for slot, value in wanted.items())
    ]


@dataclass
class DialogueState:
    """Mutable per-session state, confined to a single session."""

    schema: Schema
    variables: dict[str, StateVariable] = field(init=False)
    turn_index: int = 0
    mini_turn_index: int = 0
    event_queue: deque[Event] = field(default_factory=deque)
    last_action: int | None = None
    db_result_count: int | None = None  # None until the first lookup
    frame: SemanticFrame = field(default_factory=SemanticFrame)

    def __post_init__(self) -> None:
        self.variables = self.schema.fresh_variables()

    def get(self, name: str) -> object:
        var = self.variables.get(name)
        if var is None:
            raise UnknownVariable(f"no state variable named {name!r}")
        return var.value

    def set(self, name: str, value: object) -> None:
        var = self.variables.get(name)
        if var is None:
            raise UnknownVariable(f"no state variable named {name!r}")
        var.check_value(value)
        var.value = value

    def informed_slots(self) -> dict[str, str]:
        """Currently set informable slot values."""
        out = {}
        for slot in INFORMABLE_SLOTS:
            value = self.variables[slot].value
            if value != UNSET:
                out[slot] = value
        return out

    def snapshot(self) -> dict:
        """Plain-data copy of everything that defines this state; used by
        determinism tests to compare replays bit for bit."""
        return {
            "variables": {name: var.value for name, var in self.variables.items()},
            "turn_index": self.turn_index,
            "mini_turn_index": self.mini_turn_index,
            "event_queue": [(e.name, e.origin) for e in self.event_queue],
            "last_action": self.last_action,
            "db_result_count": self.db_result_count,
            "frame": self.frame.to_dict(),
        }


@dataclass(frozen=True)
class ApplyResult:
    emitted: tuple[Event, ...]
    response: str


_PLACEHOLDER_RE = re.compile(r"\{([a-z][a-z0-9_]*)\}")


def render_template(template: str, state: DialogueState) -> str:
    """Substitute ``{variable}`` placeholders with current state values."""

    def substitute(match: re.Match) -> str:
        name = match.group(1)
        if name not in state.variables:
            raise TemplateSlotMissing(f"template placeholder {{{name}}} is not a state variable")
        value = state.variables[name].value
        if value == UNSET:
            raise TemplateSlotMissing(f"template placeholder {{{name}}} has no value yet")
        return str(value)

    return _PLACEHOLDER_RE.sub(substitute, template)


def apply_action(state: DialogueState, action, db: DomainDb) -> ApplyResult:
    """Execute one action against the state.

    In order: apply the declared mutations, run the database lookup if
    the action carries one (updating the result count and copying the
    top match into the requestable slot variables), enqueue the emitted
    internal events, record the action as last executed, and render the
    response template. STOP is a complete no-op.
    """
    if action.name == "STOP":
        return ApplyResult((), "")

    for name, value in action.mutations:
        state.set(name, value)

    if action.db_query:
        rows = db_lookup(db, state.informed_slots())
        state.db_result_count = len(rows)
        if rows:
            top = rows[0]
            for slot in REQUESTABLE_SLOTS:
                if slot in state.variables:
                    state.set(slot, top.field_value(slot))

    emitted = tuple(Event.internal(name) for name in action.emits)
    state.event_queue.extend(emitted)
    state.last_action = action.id

    return ApplyResult(emitted, render_template(action.response_template, state))


def reset_for_turn(state: DialogueState, external: Event, frame: SemanticFrame) -> None:
    """Open a new turn: bump counters, merge the frame, enqueue the event.

    Informed slots overwrite the slot variables and raise the matching
    ``_filled`` flags; requested slots raise their ``_requested`` flags.
    """
    if state.event_queue:
        raise QueueNotEmpty(f"{len(state.event_queue)} events still pending")
    if external.origin != "external" or external.name not in EXTERNAL_EVENTS:
        raise SchemaError(f"turn must start with an external event, got {external}")

    state.turn_index += 1
    state.mini_turn_index = 0
    for slot, value in frame.informed.items():
        state.set(slot, value)
        state.set(f"{slot}_filled", True)
    for slot in frame.requested:
        state.set(f"{slot}_requested", True)
    state.frame = frame
    state.event_queue.append(external)
