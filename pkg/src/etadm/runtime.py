"""The event-trigger-action loop.

A turn opens with one external event. Each mini-turn consumes work:
under the rules policy, the next queued event is dequeued and the
highest-priority activated trigger fires (priority descending, then
rulebook declaration order); under the model policy, the learned
trigger predicts the next action from the context and state features
until it predicts STOP; the hybrid policy lets rules at or above
OVERRIDE_PRIORITY preempt the model, which otherwise decides.

The loop is total: at most MAX_MINI_TURNS actions fire per turn, and
hitting that budget sets `truncated` on the result instead of raising.
The queue is drained at turn end so the next turn starts clean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dsl
from .encoders import ContextEncoderConfig, encode_turn_context, get_encoder
from .errors import ModelMissing, SchemaError, TemplateSlotMissing
from .features import encode_state
from .network import ModelParams, predict
from .rulebook import MAX_MINI_TURNS, OVERRIDE_PRIORITY, Rulebook, TriggerRule
from .state import DialogueState, DomainDb, Event, SemanticFrame, apply_action, reset_for_turn

POLICIES = ("rules", "model", "hybrid")


@dataclass(frozen=True)
class MiniTurnTrace:
    """One fired (or terminal) mini-turn, as shown in the demo.

    `state_feature` is the 64-bit snapshot the decision was made on,
    taken before the chosen action applied. Exactly one of `activated`
    (rule path: every activated trigger id, winner first) and
    `probabilities` (model path) is present.
    """

    mini_turn_index: int
    event: str | None
    activated: tuple[str, ...] | None
    probabilities: tuple[float, ...] | None
    action_id: int
    state_feature: tuple[int, ...]
    response_fragment: str

    def to_dict(self) -> dict:
        return {
            "mini_turn_index": self.mini_turn_index,
            "event": self.event,
            "activated": list(self.activated) if self.activated is not None else None,
            "probabilities": list(self.probabilities)
            if self.probabilities is not None
            else None,
            "action_id": self.action_id,
            "state_feature": list(self.state_feature),
            "response_fragment": self.response_fragment,
        }


@dataclass(frozen=True)
class TurnResult:
    """What one turn produced: winner sequence, reply, trace, budget flag.

    `context_feature` is the turn's shared context vector, carried so
    the service can stream it without re-encoding a history that has
    already moved on.
    """

    sequence: tuple[int, ...]
    response: str
    trace: tuple[MiniTurnTrace, ...]
    truncated: bool = False
    context_feature: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "sequence": list(self.sequence),
            "response": self.response,
            "trace": [t.to_dict() for t in self.trace],
            "truncated": self.truncated,
            "context_feature": list(self.context_feature),
        }


@dataclass(frozen=True)
class RuleStep:
    """Outcome of dequeuing one event through the trigger table."""

    event: str
    activated: tuple[str, ...]
    winner: TriggerRule
    action_id: int


@dataclass
class DmSession:
    """One dialogue: immutable rulebook/db/params plus mutable state."""

    rulebook: Rulebook
    db: DomainDb
    policy: str = "rules"
    params: ModelParams | None = None
    state: DialogueState = field(init=False)
    history: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.policy not in POLICIES:
            raise SchemaError(f"unknown policy {self.policy!r}")
        if self.policy in ("model", "hybrid") and self.params is None:
            raise ModelMissing(f"policy {self.policy!r} needs model parameters")
        self.state = DialogueState(self.rulebook.schema)
        config = self.params.encoder if self.params is not None else ContextEncoderConfig()
        self._encoder = get_encoder(config)

    def encode_history(self) -> np.ndarray:
        return encode_turn_context(self._encoder, self.history)


def step_mini_turn_rules(
    state: DialogueState, rulebook: Rulebook, min_priority: int | None = None
) -> RuleStep | None:
    """Dequeue one event and pick the winning trigger, if any.

    Returns None when the queue is empty or no listening trigger's
    condition holds (the event is then consumed silently). With
    `min_priority`, triggers below it are invisible — the hybrid
    policy's override scan.
    """
    if not state.event_queue:
        return None
    event = state.event_queue.popleft()
    candidates: list[tuple[int, TriggerRule]] = []
    for index, trig in enumerate(rulebook.triggers):
        if trig.is_model:
            continue
        if min_priority is not None and trig.priority < min_priority:
            continue
        if event.name not in trig.listens:
            continue
        if not dsl.evaluate(trig.condition, state, event):
            continue
        candidates.append((index, trig))
    if not candidates:
        return None
    _, winner = min(candidates, key=lambda c: (-c[1].priority, c[0]))
    ordered = [winner.id] + [t.id for _, t in candidates if t is not winner]
    return RuleStep(
        event=event.name,
        activated=tuple(ordered),
        winner=winner,
        action_id=rulebook.action(winner.action).id,
    )


def step_mini_turn_model(state: DialogueState, context_feature: np.ndarray, params: ModelParams):
    """One model decision: (probabilities, chosen action id, state bits)."""
    st = encode_state(state)
    probs = predict(context_feature, st, params)
    return probs, int(np.argmax(probs)), st


def _state_bits(vec: np.ndarray) -> tuple[int, ...]:
    return tuple(int(x) for x in vec)


def run_turn(
    session: DmSession,
    external: Event,
    frame: SemanticFrame,
    utterance: str | None = None,
    policy: str | None = None,
) -> TurnResult:
    """Process one full turn and return its result.

    The utterance (when given) joins the context history before
    encoding, so the context feature covers everything up to and
    including the current user turn — it is computed once and shared by
    every mini-turn.
    """
    policy = policy or session.policy
    if policy not in POLICIES:
        raise SchemaError(f"unknown policy {policy!r}")
    if policy in ("model", "hybrid") and session.params is None:
        raise ModelMissing(f"policy {policy!r} needs model parameters")

    state = session.state
    rulebook = session.rulebook
    if utterance is not None:
        session.history.append(("usr", utterance))
    reset_for_turn(state, external, frame)
    ctx = session.encode_history()

    sequence: list[int] = []
    traces: list[MiniTurnTrace] = []
    fragments: list[str] = []
    truncated = False

    def fire(action_id: int) -> str:
        action = rulebook.action_by_id(action_id)
        try:
            return apply_action(state, action, session.db).response
        except TemplateSlotMissing:
            # a learned policy may pick an action whose template cannot
            # render yet; the action still applies, the reply is empty
            if policy == "rules":
                raise
            return ""

    if policy == "rules":
        while state.event_queue:
            if len(sequence) >= MAX_MINI_TURNS:
                truncated = True
                break
            step = step_mini_turn_rules(state, rulebook)
            if step is None:
                continue
            st = encode_state(state)
            fragment = fire(step.action_id)
            traces.append(
                MiniTurnTrace(
                    mini_turn_index=len(traces),
                    event=step.event,
                    activated=step.activated,
                    probabilities=None,
                    action_id=step.action_id,
                    state_feature=_state_bits(st),
                    response_fragment=fragment,
                )
            )
            sequence.append(step.action_id)
            if fragment:
                fragments.append(fragment)
            state.mini_turn_index = len(sequence)
    elif policy == "model":
        for _ in range(MAX_MINI_TURNS):
            probs, action_id, st = step_mini_turn_model(state, ctx, session.params)
            fragment = "" if action_id == rulebook.stop_id else fire(action_id)
            traces.append(
                MiniTurnTrace(
                    mini_turn_index=len(traces),
                    event=None,
                    activated=None,
                    probabilities=tuple(float(p) for p in probs),
                    action_id=action_id,
                    state_feature=_state_bits(st),
                    response_fragment=fragment,
                )
            )
            if action_id == rulebook.stop_id:
                break
            sequence.append(action_id)
            if fragment:
                fragments.append(fragment)
            state.mini_turn_index = len(sequence)
        else:
            truncated = True
    else:  # hybrid
        while True:
            if len(traces) >= MAX_MINI_TURNS:
                truncated = True
                break
            step = None
            while state.event_queue:
                step = step_mini_turn_rules(state, rulebook, min_priority=OVERRIDE_PRIORITY)
                if step is not None:
                    break
            if step is not None:
                st = encode_state(state)
                fragment = fire(step.action_id)
                traces.append(
                    MiniTurnTrace(
                        mini_turn_index=len(traces),
                        event=step.event,
                        activated=step.activated,
                        probabilities=None,
                        action_id=step.action_id,
                        state_feature=_state_bits(st),
                        response_fragment=fragment,
                    )
                )
                sequence.append(step.action_id)
                if fragment:
                    fragments.append(fragment)
                state.mini_turn_index = len(sequence)
                continue
            probs, action_id, st = step_mini_turn_model(state, ctx, session.params)
            fragment = "" if action_id == rulebook.stop_id else fire(action_id)
            traces.append(
                MiniTurnTrace(
                    mini_turn_index=len(traces),
                    event=None,
                    activated=None,
                    probabilities=tuple(float(p) for p in probs),
                    action_id=action_id,
                    state_feature=_state_bits(st),
                    response_fragment=fragment,
                )
            )
            if action_id == rulebook.stop_id:
                break
            sequence.append(action_id)
            if fragment:
                fragments.append(fragment)
            state.mini_turn_index = len(sequence)

    state.event_queue.clear()
    response = " ".join(fragments)
    if response:
        session.history.append(("sys", response))
    return TurnResult(
        sequence=tuple(sequence),
        response=response,
        trace=tuple(traces),
        truncated=truncated,
        context_feature=tuple(float(x) for x in ctx),
    )
