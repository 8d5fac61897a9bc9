"""Command-line front door.

Exit codes: 0 success, 1 usage error, 2 data or schema error,
3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import _kernels
from .corpus import load_corpus, load_records, save_corpus, save_records
from .encoders import ContextEncoderConfig, get_encoder
from .errors import (
    EmptySplit,
    EmptyTrainingSet,
    EtadmError,
    ExprTypeError,
    LabelOutOfRange,
    LexError,
    MissingVector,
    ParseError,
    SchemaError,
    UnknownActionLabel,
)
from .collect import collect_records
from .network import load_model, save_model
from .rulebook import bundled_db_path, bundled_rulebook, load_rulebook
from .runtime import DmSession, run_turn
from .simulator import generate_synthetic_corpus
from .state import event_for_intent, load_db
from .training import (
    FEWSHOT_FRACTIONS,
    evaluate,
    few_shot_curve,
    format_fewshot_table,
    load_train_config,
    train,
)

USAGE_EXIT = 1
DATA_EXIT = 2
RUNTIME_EXIT = 3

_DATA_ERRORS = (
    SchemaError,
    UnknownActionLabel,
    LexError,
    ParseError,
    ExprTypeError,
    EmptySplit,
    EmptyTrainingSet,
    MissingVector,
    LabelOutOfRange,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract here says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _encoder_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--encoder-dim", type=int, default=768)
    sub.add_argument("--encoder-seed", type=int, default=0)


def _encoder_from(args) -> ContextEncoderConfig:
    return ContextEncoderConfig(
        kind="hashed_ngram", dim=args.encoder_dim, seed=args.encoder_seed
    )


def _load_domain(args):
    rulebook = (
        load_rulebook(args.rulebook)
        if getattr(args, "rulebook", None)
        else bundled_rulebook()
    )
    db = load_db(args.db if getattr(args, "db", None) else bundled_db_path())
    return rulebook, db


def build_parser() -> _Parser:
    parser = _Parser(prog="etadm", description="hybrid rule/model dialogue manager")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--rulebook")
    p.add_argument("--db")
    p.add_argument("--model")
    p.add_argument("--static", default="frontend/dist")

    p = sub.add_parser("generate", help="write a synthetic annotated corpus")
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--out", required=True)
    p.add_argument("--rulebook")
    p.add_argument("--db")

    p = sub.add_parser("collect", help="replay a corpus into training records")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rulebook")
    p.add_argument("--db")
    _encoder_args(p)

    p = sub.add_parser("train", help="train the action predictor")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON file of TrainConfig overrides")
    p.add_argument("--rulebook")
    _encoder_args(p)

    p = sub.add_parser("eval", help="evaluate a model on records")
    p.add_argument("--records", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--rulebook")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("fewshot", help="accuracy as the training share grows")
    p.add_argument("--corpus", required=True)
    p.add_argument(
        "--fractions",
        default=",".join(str(f) for f in FEWSHOT_FRACTIONS),
        help="comma-separated ascending fractions in (0, 1]",
    )
    p.add_argument("--config", help="JSON file of TrainConfig overrides")
    p.add_argument("--rulebook")
    p.add_argument("--db")
    p.add_argument("--json", action="store_true")
    _encoder_args(p)

    p = sub.add_parser("replay", help="replay a corpus and check action sequences")
    p.add_argument("--corpus", required=True)
    p.add_argument("--policy", choices=("rules", "model", "hybrid"), default="rules")
    p.add_argument("--model")
    p.add_argument("--rulebook")
    p.add_argument("--db")

    return parser


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    static = args.static if Path(args.static).is_dir() else None
    app = create_app(
        rulebook_path=args.rulebook,
        db_path=args.db,
        model_path=args.model,
        static_dir=static,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_generate(args) -> int:
    rulebook, db = _load_domain(args)
    corpus = generate_synthetic_corpus(args.seed, args.count, rulebook, db)
    save_corpus(corpus, args.out)
    n_turns = sum(len(d.turns) for d in corpus)
    print(f"wrote {len(corpus)} dialogues ({n_turns} turns) to {args.out}")
    return 0


def _cmd_collect(args) -> int:
    rulebook, db = _load_domain(args)
    corpus = load_corpus(args.corpus, rulebook)
    encoder = get_encoder(_encoder_from(args))
    records = collect_records(corpus, rulebook, db, encoder)
    save_records(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_train(args) -> int:
    rulebook = load_rulebook(args.rulebook) if args.rulebook else bundled_rulebook()
    records = load_records(args.records)
    config = load_train_config(args.config)
    params, history = train(records, config, rulebook.n_actions, _encoder_from(args))
    save_model(params, args.out)
    print(f"trained on {len(records)} records for {len(history)} epochs")
    print(f"final epoch loss {history[-1]:.6f}; model written to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    rulebook = load_rulebook(args.rulebook) if args.rulebook else bundled_rulebook()
    records = load_records(args.records)
    params = load_model(args.model)
    report = evaluate(records, params, action_names=rulebook.action_names())
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        print(report.format_text())
    return 0


def _cmd_fewshot(args) -> int:
    rulebook, db = _load_domain(args)
    corpus = load_corpus(args.corpus, rulebook)
    try:
        fractions = tuple(float(f) for f in args.fractions.split(","))
    except ValueError:
        print(f"bad --fractions value {args.fractions!r}", file=sys.stderr)
        return USAGE_EXIT
    config = load_train_config(args.config)
    encoder_config = _encoder_from(args)
    rows = few_shot_curve(
        corpus, rulebook, db, get_encoder(encoder_config), encoder_config, config,
        fractions=fractions,
    )
    if args.json:
        print(json.dumps([{"fraction": f, "accuracy": a} for f, a in rows]))
    else:
        print(format_fewshot_table(rows))
    return 0


def _cmd_replay(args) -> int:
    rulebook, db = _load_domain(args)
    corpus = load_corpus(args.corpus, rulebook)
    params = load_model(args.model) if args.model else None
    matched = 0
    total = 0
    for dialogue in corpus:
        session = DmSession(rulebook, db, policy=args.policy, params=params)
        for turn in dialogue.turns:
            result = run_turn(
                session,
                event_for_intent(turn.frame.intent),
                turn.frame,
                utterance=turn.user_utterance,
            )
            produced = tuple(rulebook.action_by_id(i).name for i in result.sequence)
            total += 1
            if produced == turn.action_labels:
                matched += 1
    fraction = matched / total if total else 0.0
    print(f"turns: {total} matched: {matched} ({fraction:.4f})")
    if args.policy == "rules" and matched != total:
        return RUNTIME_EXIT
    return 0


_COMMANDS = {
    "serve": _cmd_serve,
    "generate": _cmd_generate,
    "collect": _cmd_collect,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "fewshot": _cmd_fewshot,
    "replay": _cmd_replay,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"etadm: {exc}", file=sys.stderr)
        return DATA_EXIT
    except _DATA_ERRORS as exc:
        print(f"etadm: {exc}", file=sys.stderr)
        return DATA_EXIT
    except EtadmError as exc:
        print(f"etadm: {exc}", file=sys.stderr)
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
