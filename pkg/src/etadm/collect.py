"""Data-collection mode: replay annotated dialogues into training records.

Per turn: encode the dialogue context once (history plus the current
user utterance), open the turn, then snapshot the state feature before
each labeled action applies — that snapshot paired with the label is
one record — and close with a terminal record labeled STOP. A turn
with k labels therefore yields k+1 records, all sharing one context
feature.
"""

from __future__ import annotations

from .corpus import MiniTurnRecord
from .encoders import encode_turn_context
from .errors import EtadmError, ReplayError
from .features import encode_state
from .rulebook import Rulebook
from .state import DialogueState, DomainDb, apply_action, event_for_intent, reset_for_turn


def collect_records(corpus, rulebook: Rulebook, db: DomainDb, encoder) -> list[MiniTurnRecord]:
    records: list[MiniTurnRecord] = []
    for dialogue in corpus:
        state = DialogueState(rulebook.schema)
        history: list[tuple[str, str]] = []
        for turn_index, turn in enumerate(dialogue.turns):
            history.append(("usr", turn.user_utterance))
            ctx = encode_turn_context(encoder, history, turn_key=f"{dialogue.id}:{turn_index}")
            reset_for_turn(state, event_for_intent(turn.frame.intent), turn.frame)
            for mini_index, label in enumerate(turn.action_labels):
                records.append(
                    MiniTurnRecord(
                        dialogue_id=dialogue.id,
                        turn_index=turn_index,
                        mini_turn_index=mini_index,
                        context_feature=ctx,
                        state_feature=encode_state(state),
                        gold_action=rulebook.action(label).id,
                    )
                )
                try:
                    apply_action(state, rulebook.action(label), db)
                except EtadmError as exc:
                    raise ReplayError(
                        f"dialogue {dialogue.id} turn {turn_index}: "
                        f"applying {label} failed: {exc}"
                    ) from exc
            records.append(
                MiniTurnRecord(
                    dialogue_id=dialogue.id,
                    turn_index=turn_index,
                    mini_turn_index=len(turn.action_labels),
                    context_feature=ctx,
                    state_feature=encode_state(state),
                    gold_action=rulebook.stop_id,
                )
            )
            # labeled actions emit events nobody consumes during replay
            state.event_queue.clear()
            if turn.system_response:
                history.append(("sys", turn.system_response))
    return records
