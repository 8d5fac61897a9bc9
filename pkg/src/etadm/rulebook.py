"""Action inventory and trigger rules.

A rulebook binds together everything static about a dialogue domain:
the action inventory (contiguous ids, with the reserved terminal STOP
action last), the trigger table, auxiliary boolean flags, and the
internal event alphabet. Rulebooks are plain JSON on disk; a bundled
restaurant-domain rulebook and venue database ship inside the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import dsl
from .errors import ExprTypeError, SchemaError
from .schema import (
    EXTERNAL_EVENTS,
    MAX_AUX_FLAGS,
    _NAME_RE,
    Schema,
    build_schema,
)

STOP_NAME = "STOP"
OVERRIDE_PRIORITY = 100
MAX_MINI_TURNS = 16


@dataclass(frozen=True)
class ActionDef:
    """One system action: state mutations, emitted events, a reply template."""

    name: str
    id: int
    response_template: str = ""
    mutations: tuple[tuple[str, object], ...] = ()
    emits: tuple[str, ...] = ()
    db_query: bool = False


MODEL_CONDITION = "MODEL"


@dataclass(frozen=True)
class TriggerRule:
    """Fires an action when its event listens and condition both match.

    A condition source of "MODEL" marks the slot where a learned policy
    replaces hand-written expressions; such triggers carry no parsed
    condition or action and never fire through the rule matcher (the
    runtime's policy argument decides when the model predicts).
    """

    id: str
    listens: frozenset[str]
    condition: object | None
    condition_source: str
    action: str | None
    priority: int

    @property
    def is_model(self) -> bool:
        return self.condition_source == MODEL_CONDITION


@dataclass
class Rulebook:
    actions: tuple[ActionDef, ...]
    triggers: tuple[TriggerRule, ...]
    aux_flags: tuple[str, ...]
    internal_events: tuple[str, ...]
    schema: Schema = field(init=False)

    def __post_init__(self):
        self.schema = build_schema(
            aux_flags=self.aux_flags,
            internal_events=self.internal_events,
            action_ids={a.name: a.id for a in self.actions},
        )
        _validate(self)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def stop_id(self) -> int:
        return self.n_actions - 1

    def action(self, name: str) -> ActionDef:
        for act in self.actions:
            if act.name == name:
                return act
        raise SchemaError(f"unknown action {name!r}")

    def action_by_id(self, action_id: int) -> ActionDef:
        if not 0 <= action_id < self.n_actions:
            raise SchemaError(f"action id {action_id} out of range")
        return self.actions[action_id]

    def action_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions)


def _validate(book: Rulebook) -> None:
    if not book.actions:
        raise SchemaError("rulebook has no actions")
    for idx, act in enumerate(book.actions):
        if act.id != idx:
            raise SchemaError(
                f"action ids must be contiguous from 0; {act.name!r} has id {act.id} at index {idx}"
            )
    names = [a.name for a in book.actions]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate action names")
    last = book.actions[-1]
    if last.name != STOP_NAME:
        raise SchemaError(f"last action must be {STOP_NAME!r}, found {last.name!r}")
    if last.mutations or last.emits or last.response_template or last.db_query:
        raise SchemaError(f"{STOP_NAME} must have no mutations, emits, or template")

    event_names = set(EXTERNAL_EVENTS) | set(book.internal_events)
    flag_names = set(book.schema.variables)
    trig_ids = [t.id for t in book.triggers]
    if len(set(trig_ids)) != len(trig_ids):
        raise SchemaError("duplicate trigger ids")
    for trig in book.triggers:
        if not trig.listens:
            raise SchemaError(f"trigger {trig.id!r} listens to no events")
        for ev in trig.listens:
            if ev not in event_names:
                raise SchemaError(f"trigger {trig.id!r} listens to unknown event {ev!r}")
        if trig.is_model:
            continue
        if trig.action not in names:
            raise SchemaError(f"trigger {trig.id!r} fires unknown action {trig.action!r}")
        if trig.action == STOP_NAME:
            raise SchemaError(f"trigger {trig.id!r} may not fire {STOP_NAME}")
        try:
            dsl.typecheck(trig.condition, book.schema)
        except ExprTypeError as exc:
            raise SchemaError(f"trigger {trig.id!r}: {exc}") from exc
    for act in book.actions:
        for ev in act.emits:
            if ev not in book.internal_events:
                raise SchemaError(f"action {act.name!r} emits unknown event {ev!r}")
        for var, value in act.mutations:
            if var not in flag_names:
                raise SchemaError(f"action {act.name!r} mutates unknown variable {var!r}")
            book.schema.variable(var).check_value(value)


# --- JSON (de)serialization --------------------------------------------------


def _require(obj: dict, key: str, ctx: str):
    if key not in obj:
        raise SchemaError(f"{ctx}: missing key {key!r}")
    return obj[key]


def rulebook_from_dict(doc: dict) -> Rulebook:
    if not isinstance(doc, dict):
        raise SchemaError("rulebook document must be an object")
    version = _require(doc, "version", "rulebook")
    if version != 1:
        raise SchemaError(f"unsupported rulebook version {version!r}")
    aux_flags = tuple(_require(doc, "aux_flags", "rulebook"))
    internal_events = tuple(_require(doc, "internal_events", "rulebook"))
    if len(aux_flags) > MAX_AUX_FLAGS:
        raise SchemaError(f"at most {MAX_AUX_FLAGS} aux flags supported")
    for name in aux_flags + internal_events:
        if not isinstance(name, str):
            raise SchemaError("aux flag and event names must be strings")

    actions = []
    for raw in _require(doc, "actions", "rulebook"):
        name = _require(raw, "name", "action")
        mutations = tuple(
            (m["variable"], m["value"]) for m in raw.get("mutations", ())
        )
        actions.append(
            ActionDef(
                name=name,
                id=_require(raw, "id", f"action {name!r}"),
                response_template=raw.get("response_template", ""),
                mutations=mutations,
                emits=tuple(raw.get("emits", ())),
                db_query=bool(raw.get("db_query", False)),
            )
        )

    triggers = []
    for raw in _require(doc, "triggers", "rulebook"):
        trig_id = _require(raw, "id", "trigger")
        if not _NAME_RE.match(trig_id):
            raise SchemaError(f"bad trigger id {trig_id!r}")
        source = _require(raw, "condition", f"trigger {trig_id!r}")
        is_model = source == MODEL_CONDITION
        triggers.append(
            TriggerRule(
                id=trig_id,
                listens=frozenset(_require(raw, "listens", f"trigger {trig_id!r}")),
                condition=None if is_model else dsl.parse(source),
                condition_source=source,
                action=None if is_model else _require(raw, "action", f"trigger {trig_id!r}"),
                priority=int(_require(raw, "priority", f"trigger {trig_id!r}")),
            )
        )

    return Rulebook(
        actions=tuple(actions),
        triggers=tuple(triggers),
        aux_flags=aux_flags,
        internal_events=internal_events,
    )


def rulebook_to_dict(book: Rulebook) -> dict:
    return {
        "version": 1,
        "aux_flags": list(book.aux_flags),
        "internal_events": list(book.internal_events),
        "actions": [
            {
                "name": a.name,
                "id": a.id,
                "response_template": a.response_template,
                "mutations": [{"variable": v, "value": val} for v, val in a.mutations],
                "emits": list(a.emits),
                "db_query": a.db_query,
            }
            for a in book.actions
        ],
        "triggers": [
            {
                "id": t.id,
                "listens": sorted(t.listens),
                "condition": t.condition_source,
                "action": t.action,
                "priority": t.priority,
            }
            for t in book.triggers
        ],
    }


def load_rulebook(path: str | Path) -> Rulebook:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"rulebook is not valid JSON: {exc}") from exc
    return rulebook_from_dict(doc)


def bundled_rulebook() -> Rulebook:
    text = resources.files("etadm.data").joinpath("rulebook.json").read_text("utf-8")
    return rulebook_from_dict(json.loads(text))


def bundled_db_path() -> Path:
    return Path(str(resources.files("etadm.data").joinpath("restaurants.json")))
