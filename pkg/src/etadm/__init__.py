"""Event-triggered dialogue manager with a trainable action predictor.

A dialogue turn is processed as a chain of mini-turns: each consumes one
event from the state's queue, picks an action (by trigger rules, by the
learned predictor, or a hybrid of the two) and applies it, which may
enqueue further events. The package covers the runtime loop, the trigger
condition language, feature encoding, a synthetic corpus generator, the
training pipeline and an HTTP/SSE service.
"""

from .collect import collect_records
from .corpus import (
    AnnotatedDialogue,
    DialogueTurn,
    MiniTurnRecord,
    load_corpus,
    load_records,
    save_corpus,
    save_records,
    split_records,
)
from .dsl import evaluate, format_expr, parse, typecheck
from .encoders import ContextEncoderConfig, HashedNgramEncoder, get_encoder
from .errors import EtadmError
from .features import encode_state
from .network import (
    ModelParams,
    init_params,
    load_model,
    loss_and_grads,
    predict,
    save_model,
)
from .rulebook import (
    MAX_MINI_TURNS,
    OVERRIDE_PRIORITY,
    Rulebook,
    bundled_db_path,
    bundled_rulebook,
    load_rulebook,
)
from .runtime import DmSession, MiniTurnTrace, TurnResult, run_turn
from .schema import STATE_FEATURE_DIM, Schema, build_schema
from .simulator import generate_synthetic_corpus
from .state import DialogueState, DomainDb, Event, SemanticFrame, load_db
from .training import TrainConfig, evaluate as evaluate_model, few_shot_curve, train

__version__ = "0.1.0"

__all__ = [
    "AnnotatedDialogue",
    "ContextEncoderConfig",
    "DialogueState",
    "DialogueTurn",
    "DmSession",
    "DomainDb",
    "EtadmError",
    "Event",
    "HashedNgramEncoder",
    "MAX_MINI_TURNS",
    "MiniTurnRecord",
    "MiniTurnTrace",
    "ModelParams",
    "OVERRIDE_PRIORITY",
    "Rulebook",
    "STATE_FEATURE_DIM",
    "Schema",
    "SemanticFrame",
    "TrainConfig",
    "TurnResult",
    "build_schema",
    "bundled_db_path",
    "bundled_rulebook",
    "collect_records",
    "encode_state",
    "evaluate",
    "evaluate_model",
    "few_shot_curve",
    "format_expr",
    "generate_synthetic_corpus",
    "get_encoder",
    "init_params",
    "load_corpus",
    "load_db",
    "load_model",
    "load_records",
    "load_rulebook",
    "loss_and_grads",
    "parse",
    "predict",
    "run_turn",
    "save_corpus",
    "save_model",
    "save_records",
    "split_records",
    "train",
    "typecheck",
]
