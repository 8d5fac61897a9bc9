"""Domain schema: state variables, events, and the 64-bit feature layout.

The restaurant domain is fixed: three informable slots constrain the
database search, four requestable slots can be asked about once a venue
has been found. A schema instance additionally carries the auxiliary
flags and internal event names declared by a rulebook.

Feature layout (64 bits total):

    bits  0..2   <slot>_filled flags, one per informable slot
    bits  3..6   <slot>_requested flags, one per requestable slot
    bits  7..9   database result bucket: zero / one / many
                 (all three stay 0 until the first lookup of the dialogue)
    bits 10..22  last executed action, one-hot by action id; all 0 when
                 no action has run yet
    bits 23..26  turn counter bounds, unary: bit k set iff
                 turn_index <= (1,2,4,8)[k]; dark past turn 8
    bits 27..34  auxiliary flags in rulebook declaration order
    bits 35..63  reserved, always 0
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import SchemaError

INFORMABLE_SLOTS = ("food", "area", "pricerange")
REQUESTABLE_SLOTS = ("name", "address", "phone", "postcode")

EXTERNAL_EVENTS = ("Start", "Query", "End")

STATE_FEATURE_DIM = 64
TURN_BUCKET_THRESHOLDS = (1, 2, 4, 8)

SLOT_FILLED_BASE = 0
SLOT_REQUESTED_BASE = 3
DB_BUCKET_BASE = 7
LAST_ACTION_BASE = 10
LAST_ACTION_BITS = 13
TURN_BUCKET_BASE = 23
AUX_FLAG_BASE = 27
MAX_AUX_FLAGS = 8

UNSET = "unset"

_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")

VARIABLE_KINDS = ("flag", "counter", "text", "enum")


@dataclass
class StateVariable:
    """One named, typed slot in the dialogue state.

    ``bits`` lists the feature-bit indices this variable owns in the
    64-bit state encoding (empty for variables that are not binarized,
    e.g. the slot value texts).
    """

    name: str
    kind: str
    value: object = None
    members: tuple[str, ...] = ()
    bits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not _NAME_RE.match(self.name):
            raise SchemaError(f"invalid variable name {self.name!r}")
        if self.kind not in VARIABLE_KINDS:
            raise SchemaError(f"variable {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "enum" and not self.members:
            raise SchemaError(f"enum variable {self.name!r} declares no members")
        if self.value is None:
            self.value = self.default_value()
        self.check_value(self.value)

    def default_value(self) -> object:
        if self.kind == "flag":
            return False
        if self.kind == "counter":
            return 0
        return UNSET

    def check_value(self, value: object) -> None:
        """Raise SchemaError unless ``value`` is legal for this kind."""
        if self.kind == "flag":
            if not isinstance(value, bool):
                raise SchemaError(f"flag {self.name!r} takes true/false, got {value!r}")
        elif self.kind == "counter":
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise SchemaError(
                    f"counter {self.name!r} takes a nonnegative integer, got {value!r}"
                )
        elif self.kind == "enum":
            if value != UNSET and value not in self.members:
                raise SchemaError(
                    f"enum {self.name!r} takes one of {self.members}, got {value!r}"
                )
        else:  # text
            if not isinstance(value, str):
                raise SchemaError(f"text {self.name!r} takes a string, got {value!r}")


@dataclass
class Schema:
    """Immutable-after-build description of a rulebook's state space.

    Holds the declared variables (standard slot variables plus rulebook
    extras), the event alphabet, and the action name/id tables needed by
    expression evaluation and state binarization.
    """

    variables: dict[str, StateVariable] = field(default_factory=dict)
    aux_flags: tuple[str, ...] = ()
    internal_events: tuple[str, ...] = ()
    action_ids: dict[str, int] = field(default_factory=dict)

    @property
    def event_names(self) -> tuple[str, ...]:
        return EXTERNAL_EVENTS + self.internal_events

    def variable(self, name: str) -> StateVariable:
        return self.variables[name]

    def fresh_variables(self) -> dict[str, StateVariable]:
        """New variable instances at their default values, layout preserved."""
        return {
            v.name: StateVariable(v.name, v.kind, v.default_value(), v.members, v.bits)
            for v in self.variables.values()
        }


def build_schema(
    aux_flags: tuple[str, ...],
    internal_events: tuple[str, ...],
    action_ids: dict[str, int],
    extra_variables: tuple[StateVariable, ...] = (),
) -> Schema:
    """Assemble the full schema for one rulebook.

    Standard variables (slot texts, filled/requested flags) are created
    here; ``aux_flags`` come from the rulebook and are assigned the
    auxiliary bit range in declaration order.
    """
    if len(aux_flags) > MAX_AUX_FLAGS:
        raise SchemaError(
            f"rulebook declares {len(aux_flags)} auxiliary flags, layout holds {MAX_AUX_FLAGS}"
        )
    if len(set(aux_flags)) != len(aux_flags):
        raise SchemaError("duplicate auxiliary flag names")
    if len(action_ids) > LAST_ACTION_BITS:
        raise SchemaError(
            f"rulebook declares {len(action_ids)} actions, layout holds {LAST_ACTION_BITS}"
        )
    for name in internal_events:
        if name in EXTERNAL_EVENTS:
            raise SchemaError(f"internal event {name!r} shadows an external event")

    variables: dict[str, StateVariable] = {}

    def add(var: StateVariable) -> None:
        if var.name in variables:
            raise SchemaError(f"duplicate variable {var.name!r}")
        variables[var.name] = var

    for i, slot in enumerate(INFORMABLE_SLOTS):
        add(StateVariable(slot, "text"))
        add(StateVariable(f"{slot}_filled", "flag", bits=(SLOT_FILLED_BASE + i,)))
    for i, slot in enumerate(REQUESTABLE_SLOTS):
        add(StateVariable(slot, "text"))
        add(StateVariable(f"{slot}_requested", "flag", bits=(SLOT_REQUESTED_BASE + i,)))
    for i, name in enumerate(aux_flags):
        add(StateVariable(name, "flag", bits=(AUX_FLAG_BASE + i,)))
    for var in extra_variables:
        add(var)

    return Schema(
        variables=variables,
        aux_flags=tuple(aux_flags),
        internal_events=tuple(internal_events),
        action_ids=dict(action_ids),
    )
