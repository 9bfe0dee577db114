"""Expression language for stage annotations.

Expressions make the informal labels of a diagram executable: guards
(``when``), delays (``after``), actions (``do``) and trigger conditions.
Evaluation is pure; actions are interpreted by the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Optional, Union

from .errors import EvaluationError, IndexOutOfRange, TypeMismatch, UnboundName
from .things import Record, Symbol, Thing, render, same, type_name


class Expr:
    """Base class of expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Literal(Expr):
    value: Thing


@dataclass(frozen=True)
class It(Expr):
    pass


@dataclass(frozen=True)
class Now(Expr):
    pass


@dataclass(frozen=True)
class Name(Expr):
    ident: str


@dataclass(frozen=True)
class ListExpr(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class RecordExpr(Expr):
    fields: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class Index(Expr):
    target: Expr
    index: Expr


@dataclass(frozen=True)
class Len(Expr):
    operand: Expr


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "-" or "not"
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


# Actions (the ``do`` clause)


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr


@dataclass(frozen=True)
class Verdict:
    outcome: str  # "accepted" | "rejected"


@dataclass(frozen=True)
class Transform:
    value: Expr


Action = Union[Assign, Verdict, Transform]

VERDICTS = ("accepted", "rejected")
RESERVED = frozenset({"it", "now", "len", "true", "false", "and", "or", "not", "verdict"})
COMPARISONS = ("=", "!=", "<=", ">=", "<", ">")

_PRECEDENCE = {"or": 1, "and": 2, "not": 3, **{op: 4 for op in COMPARISONS},
               "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}


@dataclass
class Context:
    it: Optional[Thing] = None
    now: int = 0
    lookup: Callable[[str], Thing] | None = None

    @classmethod
    def of(cls, it: Thing | None = None, storages: Mapping[str, Thing] | None = None,
           now: int = 0) -> "Context":
        table = dict(storages or {})

        def lookup(name: str) -> Thing:
            try:
                return table[name]
            except KeyError:
                raise UnboundName(f"unbound name '{name}'") from None

        return cls(it=it, now=now, lookup=lookup)


def _int(value: Thing, what: str) -> int:
    if type_name(value) != "integer":
        raise TypeMismatch(f"{what} expects integer, got {type_name(value)} {render(value)}")
    return value


def _bool(value: Thing, what: str) -> bool:
    if type_name(value) != "boolean":
        raise TypeMismatch(f"{what} expects boolean, got {type_name(value)} {render(value)}")
    return value


def evaluate(expr: Expr, ctx: Context) -> Thing:
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, It):
        if ctx.it is None:
            raise UnboundName("'it' is not bound here")
        return ctx.it
    if isinstance(expr, Now):
        return ctx.now
    if isinstance(expr, Name):
        if ctx.lookup is None:
            raise UnboundName(f"unbound name '{expr.ident}'")
        return ctx.lookup(expr.ident)
    if isinstance(expr, ListExpr):
        return tuple(evaluate(e, ctx) for e in expr.items)
    if isinstance(expr, RecordExpr):
        return Record(tuple((k, evaluate(e, ctx)) for k, e in expr.fields))
    if isinstance(expr, Len):
        value = evaluate(expr.operand, ctx)
        if not isinstance(value, (tuple, str)):
            raise TypeMismatch(f"len expects list or text, got {type_name(value)}")
        return len(value)
    if isinstance(expr, Index):
        target = evaluate(expr.target, ctx)
        index = _int(evaluate(expr.index, ctx), "index")
        if not isinstance(target, (tuple, str)):
            raise TypeMismatch(f"cannot index {type_name(target)}")
        if not 0 <= index < len(target):
            raise IndexOutOfRange(f"index {index} out of range for length {len(target)}")
        return target[index]
    if isinstance(expr, Unary):
        value = evaluate(expr.operand, ctx)
        if expr.op == "not":
            return not _bool(value, "not")
        return -_int(value, "unary -")
    if isinstance(expr, Binary):
        return _binary(expr, ctx)
    raise TypeError(f"not an expression: {expr!r}")


def _binary(expr: Binary, ctx: Context) -> Thing:
    op = expr.op
    if op in ("and", "or"):
        left = _bool(evaluate(expr.left, ctx), op)
        if op == "and" and not left:
            return False
        if op == "or" and left:
            return True
        return _bool(evaluate(expr.right, ctx), op)
    left = evaluate(expr.left, ctx)
    right = evaluate(expr.right, ctx)
    if op == "=":
        return same(left, right)
    if op == "!=":
        return not same(left, right)
    if op == "+" and type_name(left) == type_name(right) and isinstance(left, (tuple, str)):
        return left + right
    a = _int(left, op)
    b = _int(right, op)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op in ("/", "%"):
        if b == 0:
            raise EvaluationError("division by zero")
        return a // b if op == "/" else a % b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise TypeError(f"unknown operator {op!r}")


def names(expr: Expr) -> Iterator[str]:
    """Storage names referenced by ``expr``, in source order."""
    if isinstance(expr, Name):
        yield expr.ident
    elif isinstance(expr, ListExpr):
        for item in expr.items:
            yield from names(item)
    elif isinstance(expr, RecordExpr):
        for _, item in expr.fields:
            yield from names(item)
    elif isinstance(expr, Index):
        yield from names(expr.target)
        yield from names(expr.index)
    elif isinstance(expr, (Len, Unary)):
        yield from names(expr.operand)
    elif isinstance(expr, Binary):
        yield from names(expr.left)
        yield from names(expr.right)


def action_names(action: Action) -> Iterator[str]:
    if isinstance(action, Assign):
        yield action.name
        yield from names(action.value)
    elif isinstance(action, Transform):
        yield from names(action.value)


def to_source(expr: Expr, parent: int = 0) -> str:
    """Render ``expr`` with the minimum parentheses needed to reparse it."""
    if isinstance(expr, Literal):
        text = render(expr.value)
        # a negative literal binds like unary minus
        return f"({text})" if text.startswith("-") and parent >= 5 else text
    if isinstance(expr, It):
        return "it"
    if isinstance(expr, Now):
        return "now"
    if isinstance(expr, Name):
        return expr.ident
    if isinstance(expr, ListExpr):
        return "[" + ", ".join(to_source(e) for e in expr.items) + "]"
    if isinstance(expr, RecordExpr):
        return "{" + ", ".join(f"{k}: {to_source(e)}" for k, e in expr.fields) + "}"
    if isinstance(expr, Len):
        return f"len({to_source(expr.operand)})"
    if isinstance(expr, Index):
        return f"{to_source(expr.target, 8)}[{to_source(expr.index)}]"
    if isinstance(expr, Unary):
        if expr.op == "not":
            text = f"not {to_source(expr.operand, 3)}"
            return f"({text})" if parent > 3 else text
        operand = to_source(expr.operand, 7)
        if isinstance(expr.operand, Literal) and operand[:1].isdigit():
            operand = f"({operand})"  # keep it apart from a negative literal
        text = f"-{operand}"
        return f"({text})" if parent > 7 else text
    if isinstance(expr, Binary):
        prec = _PRECEDENCE[expr.op]
        if expr.op in COMPARISONS:
            text = f"{to_source(expr.left, prec + 1)} {expr.op} {to_source(expr.right, prec + 1)}"
        else:
            # left-associative: the right operand needs a strictly higher level
            text = f"{to_source(expr.left, prec)} {expr.op} {to_source(expr.right, prec + 1)}"
        return f"({text})" if parent > prec else text
    raise TypeError(f"not an expression: {expr!r}")


def action_source(action: Action) -> str:
    if isinstance(action, Assign):
        return f"{action.name} := {to_source(action.value)}"
    if isinstance(action, Verdict):
        return f"verdict({action.outcome})"
    return to_source(action.value)


def symbol(name: str) -> Literal:
    return Literal(Symbol(name))
