"""The trigger condition language.

A small, pure boolean expression language over dialogue state and the
event currently being processed. Grammar, loosest-binding first:

    expr    := or
    or      := and ("||" and)*
    and     := not ("&&" not)*
    not     := "!" not | cmp
    cmp     := primary (CMPOP primary)?        # non-associative
    primary := "true" | "false" | INT | STRING
             | IDENT | IDENT "(" args ")" | "(" expr ")"

``#`` starts a line comment. The pseudo-variable ``event`` may only
appear as ``event == Name`` / ``event != Name`` where ``Name`` is a bare
event identifier; the parser folds that comparison into an EventIs node.

Expressions cannot mutate anything: the evaluator is total on any tree
the type checker accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ExprTypeError, LexError, ParseError
from .schema import INFORMABLE_SLOTS, REQUESTABLE_SLOTS, Schema

CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
ORDERING_OPS = ("<", "<=", ">", ">=")


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class EventIs:
    name: str


@dataclass(frozen=True)
class FuncCall:
    name: str
    args: tuple


@dataclass(frozen=True)
class Not:
    operand: object


@dataclass(frozen=True)
class And:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Or:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Cmp:
    op: str
    lhs: object
    rhs: object


Expr = (BoolLit, IntLit, StrLit, VarRef, EventIs, FuncCall, Not, And, Or, Cmp)


# --- lexer -----------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
}

_TWO_CHAR = {
    "&&": "ANDAND",
    "||": "OROR",
    "==": "EQ",
    "!=": "NE",
    "<=": "LE",
    ">=": "GE",
}


# ascii only: str.isdigit/isalpha admit characters like "¹" that int()
# and the keyword tables then choke on
def _is_digit(ch: str) -> bool:
    return "0" <= ch <= "9"


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or "a" <= ch <= "z" or "A" <= ch <= "Z"


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or _is_digit(ch)


def tokenize(source: str) -> list[Token]:
    """Scan the source into tokens with byte-offset spans."""
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        two = source[i : i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token(_TWO_CHAR[two], two, i, i + 2))
            i += 2
            continue
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, i, i + 1))
            i += 1
            continue
        if ch == "!":
            tokens.append(Token("NOT", ch, i, i + 1))
            i += 1
            continue
        if ch == "<" or ch == ">":
            tokens.append(Token("LT" if ch == "<" else "GT", ch, i, i + 1))
            i += 1
            continue
        if _is_digit(ch):
            j = i
            while j < n and _is_digit(source[j]):
                j += 1
            tokens.append(Token("INT", source[i:j], i, j))
            i = j
            continue
        if _is_ident_start(ch):
            j = i
            while j < n and _is_ident_char(source[j]):
                j += 1
            tokens.append(Token("IDENT", source[i:j], i, j))
            i = j
            continue
        if ch == '"':
            j = i + 1
            chars: list[str] = []
            while j < n and source[j] != '"':
                if source[j] == "\\":
                    if j + 1 >= n or source[j + 1] not in ('"', "\\"):
                        raise LexError("bad escape in string literal", j)
                    chars.append(source[j + 1])
                    j += 2
                else:
                    chars.append(source[j])
                    j += 1
            if j >= n:
                raise LexError("unterminated string literal", i)
            tokens.append(Token("STRING", "".join(chars), i, j + 1))
            i = j + 1
            continue
        raise LexError(f"unrecognized character {ch!r}", i)
    tokens.append(Token("EOF", "", n, n))
    return tokens


# --- parser ----------------------------------------------------------------

_CMP_TOKENS = {"EQ": "==", "NE": "!=", "LT": "<", "LE": "<=", "GT": ">", "GE": ">="}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"unexpected {tok.kind} {tok.text!r}", tok.start, (kind,))
        return self.advance()

    def parse_expr(self):
        node = self.parse_and()
        while self.peek().kind == "OROR":
            self.advance()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self):
        node = self.parse_not()
        while self.peek().kind == "ANDAND":
            self.advance()
            node = And(node, self.parse_not())
        return node

    def parse_not(self):
        if self.peek().kind == "NOT":
            self.advance()
            return Not(self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self):
        lhs = self.parse_primary()
        tok = self.peek()
        if tok.kind not in _CMP_TOKENS:
            return lhs
        self.advance()
        op = _CMP_TOKENS[tok.kind]
        rhs = self.parse_primary()
        trailing = self.peek()
        if trailing.kind in _CMP_TOKENS:
            raise ParseError(
                "comparison is non-associative; parenthesize to chain", trailing.start
            )
        return self._fold_event(op, lhs, rhs, tok.start)

    def _fold_event(self, op: str, lhs, rhs, at: int):
        """Rewrite ``event ==/!= Name`` into an EventIs node."""
        lhs_is_event = isinstance(lhs, VarRef) and lhs.name == "event"
        rhs_is_event = isinstance(rhs, VarRef) and rhs.name == "event"
        if not (lhs_is_event or rhs_is_event):
            return Cmp(op, lhs, rhs)
        if lhs_is_event and rhs_is_event:
            raise ParseError("event cannot be compared with itself", at)
        other = rhs if lhs_is_event else lhs
        if op not in ("==", "!=") or not isinstance(other, VarRef):
            raise ParseError("event only supports ==/!= against an event name", at)
        node = EventIs(other.name)
        return Not(node) if op == "!=" else node

    def parse_primary(self):
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return IntLit(int(tok.text))
        if tok.kind == "STRING":
            self.advance()
            return StrLit(tok.text)
        if tok.kind == "LPAREN":
            self.advance()
            node = self.parse_expr()
            self.expect("RPAREN")
            return node
        if tok.kind == "IDENT":
            self.advance()
            if tok.text == "true":
                return BoolLit(True)
            if tok.text == "false":
                return BoolLit(False)
            if self.peek().kind == "LPAREN":
                self.advance()
                args: list = []
                if self.peek().kind != "RPAREN":
                    args.append(self.parse_expr())
                    while self.peek().kind == "COMMA":
                        self.advance()
                        args.append(self.parse_expr())
                self.expect("RPAREN")
                return FuncCall(tok.text, tuple(args))
            return VarRef(tok.text)
        raise ParseError(
            f"unexpected {tok.kind} {tok.text!r}",
            tok.start,
            ("IDENT", "INT", "STRING", "LPAREN", "NOT"),
        )


def parse(source: str):
    """Parse source text into an expression tree."""
    parser = _Parser(tokenize(source))
    node = parser.parse_expr()
    parser.expect("EOF")
    return node


# --- type checker ------------------------------------------------------------

# builtin name -> (argument spec, result type); "slot_i"/"slot_r"/"action"
# arguments must be bare identifiers of the right family
BUILTINS = {
    "filled": (("slot_i",), "bool"),
    "requested": (("slot_r",), "bool"),
    "turns": ((), "int"),
    "db_count": ((), "int"),
    "last_action": (("action",), "bool"),
}

_KIND_TYPES = {"flag": "bool", "counter": "int", "text": "str", "enum": "str"}


def typecheck(expr, schema: Schema) -> str:
    """Verify the tree against the schema; returns the root type.

    Raises ExprTypeError unless the root is boolean, every variable and
    event name resolves, and every operator is applied to matching
    scalar kinds.
    """
    root = _infer(expr, schema)
    if root != "bool":
        raise ExprTypeError(f"trigger condition must be boolean, found {root}")
    return root


def _infer(expr, schema: Schema) -> str:
    if isinstance(expr, BoolLit):
        return "bool"
    if isinstance(expr, IntLit):
        return "int"
    if isinstance(expr, StrLit):
        return "str"
    if isinstance(expr, VarRef):
        if expr.name == "event":
            raise ExprTypeError("event may only be compared to an event name")
        var = schema.variables.get(expr.name)
        if var is None:
            raise ExprTypeError(f"unknown state variable {expr.name!r}")
        return _KIND_TYPES[var.kind]
    if isinstance(expr, EventIs):
        if expr.name not in schema.event_names:
            raise ExprTypeError(f"unknown event name {expr.name!r}")
        return "bool"
    if isinstance(expr, FuncCall):
        spec = BUILTINS.get(expr.name)
        if spec is None:
            raise ExprTypeError(f"unknown function {expr.name!r}")
        arg_spec, result = spec
        if len(expr.args) != len(arg_spec):
            raise ExprTypeError(
                f"{expr.name}() takes {len(arg_spec)} argument(s), got {len(expr.args)}"
            )
        for arg, family in zip(expr.args, arg_spec):
            if not isinstance(arg, VarRef):
                raise ExprTypeError(f"{expr.name}() takes a bare identifier argument")
            if family == "slot_i" and arg.name not in INFORMABLE_SLOTS:
                raise ExprTypeError(f"{expr.name}({arg.name}): not an informable slot")
            if family == "slot_r" and arg.name not in REQUESTABLE_SLOTS:
                raise ExprTypeError(f"{expr.name}({arg.name}): not a requestable slot")
            if family == "action" and arg.name not in schema.action_ids:
                raise ExprTypeError(f"{expr.name}({arg.name}): unknown action name")
        return result
    if isinstance(expr, Not):
        if _infer(expr.operand, schema) != "bool":
            raise ExprTypeError("! takes a boolean operand")
        return "bool"
    if isinstance(expr, (And, Or)):
        for side in (expr.lhs, expr.rhs):
            if _infer(side, schema) != "bool":
                op = "&&" if isinstance(expr, And) else "||"
                raise ExprTypeError(f"{op} takes boolean operands")
        return "bool"
    if isinstance(expr, Cmp):
        lt = _infer(expr.lhs, schema)
        rt = _infer(expr.rhs, schema)
        if lt != rt:
            raise ExprTypeError(f"cannot compare {lt} with {rt}")
        if expr.op in ORDERING_OPS and lt != "int":
            raise ExprTypeError(f"{expr.op} compares integers only")
        return "bool"
    raise ExprTypeError(f"unknown expression node {type(expr).__name__}")


# --- evaluator ---------------------------------------------------------------


def evaluate(expr, state, event) -> bool:
    """Evaluate a typechecked condition against state and current event.

    Total on typechecked input: never raises for any reachable state.
    """
    return _eval(expr, state, event)


def _eval(expr, state, event):
    if isinstance(expr, (BoolLit, IntLit, StrLit)):
        return expr.value
    if isinstance(expr, VarRef):
        return state.get(expr.name)
    if isinstance(expr, EventIs):
        return event is not None and event.name == expr.name
    if isinstance(expr, FuncCall):
        if expr.name == "filled":
            return bool(state.get(f"{expr.args[0].name}_filled"))
        if expr.name == "requested":
            return bool(state.get(f"{expr.args[0].name}_requested"))
        if expr.name == "turns":
            return state.turn_index
        if expr.name == "db_count":
            return state.db_result_count if state.db_result_count is not None else 0
        if expr.name == "last_action":
            return state.last_action == state.schema.action_ids[expr.args[0].name]
        raise AssertionError(f"unreachable builtin {expr.name}")
    if isinstance(expr, Not):
        return not _eval(expr.operand, state, event)
    if isinstance(expr, And):
        return _eval(expr.lhs, state, event) and _eval(expr.rhs, state, event)
    if isinstance(expr, Or):
        return _eval(expr.lhs, state, event) or _eval(expr.rhs, state, event)
    if isinstance(expr, Cmp):
        lhs = _eval(expr.lhs, state, event)
        rhs = _eval(expr.rhs, state, event)
        if expr.op == "==":
            return lhs == rhs
        if expr.op == "!=":
            return lhs != rhs
        if expr.op == "<":
            return lhs < rhs
        if expr.op == "<=":
            return lhs <= rhs
        if expr.op == ">":
            return lhs > rhs
        return lhs >= rhs
    raise AssertionError(f"unreachable node {type(expr).__name__}")


# --- formatter ----------------------------------------------------------------


def format_expr(expr) -> str:
    """Canonical fully-parenthesized rendering; parse(format_expr(e)) == e."""
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, StrLit):
        escaped = expr.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, EventIs):
        return f"(event == {expr.name})"
    if isinstance(expr, FuncCall):
        return f"{expr.name}({', '.join(format_expr(a) for a in expr.args)})"
    if isinstance(expr, Not):
        return f"(!{format_expr(expr.operand)})"
    if isinstance(expr, And):
        return f"({format_expr(expr.lhs)} && {format_expr(expr.rhs)})"
    if isinstance(expr, Or):
        return f"({format_expr(expr.lhs)} || {format_expr(expr.rhs)})"
    if isinstance(expr, Cmp):
        return f"({format_expr(expr.lhs)} {expr.op} {format_expr(expr.rhs)})"
    raise AssertionError(f"unreachable node {type(expr).__name__}")
