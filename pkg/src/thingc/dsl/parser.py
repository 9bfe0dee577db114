"""Recursive-descent parser for `.tm` model documents.

Parsing runs in two phases.  The syntax phase builds plain declaration
records and stops at the first syntax error.  The resolution phase turns
them into a :class:`~thingc.model.StaticModel`, resolving dotted paths,
and collects every naming problem it finds before failing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .. import dynamics
from ..errors import ModelError, RegionError, EventError, ThingcError
from ..expr import (
    COMPARISONS,
    RESERVED,
    VERDICTS,
    Action,
    Assign,
    Binary,
    Context,
    Expr,
    Index,
    It,
    Len,
    ListExpr,
    Literal,
    Name,
    Now,
    RecordExpr,
    Transform,
    Unary,
    Verdict,
    evaluate,
)
from ..model import Annotation, StaticModel
from ..things import Record, Symbol, Thing
from .lexer import STAGE_KEYWORDS, Diagnostic, LexError, SourceSpan, Token, tokenize


class ParseFailed(ThingcError):
    """Parsing produced diagnostics instead of a document."""

    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        super().__init__("\n".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


class _SyntaxError(Exception):
    def __init__(self, diagnostic: Diagnostic) -> None:
        self.diagnostic = diagnostic


@dataclass
class ModelDocument:
    model: StaticModel
    events: list[dynamics.EventDef] = field(default_factory=list)
    behavior: Optional[dynamics.BehaviorGraph] = None
    inputs: dict[str, tuple[Thing, ...]] = field(default_factory=dict)

    def event(self, name: str) -> dynamics.EventDef:
        for event in self.events:
            if event.name == name:
                return event
        raise KeyError(name)


# declaration records produced by the syntax phase


@dataclass
class PathRef:
    parts: list[str]
    spans: list[SourceSpan]

    def __str__(self) -> str:
        return ".".join(self.parts)


@dataclass
class StageDecl:
    kind: str
    annotation: Annotation
    span: SourceSpan


@dataclass
class StorageDecl:
    name: str
    initial: Optional[Thing]
    span: SourceSpan


@dataclass
class MachineDecl:
    name: str
    span: SourceSpan
    body: list = field(default_factory=list)


@dataclass
class EdgeDecl:
    keyword: str  # "flow" | "trigger"
    source: PathRef
    target: PathRef
    condition: Optional[Expr]
    scope: Optional[MachineDecl]
    span: SourceSpan


@dataclass
class EventDecl:
    name: str
    label: Optional[str]
    paths: list[PathRef]
    duration: Optional[Expr]
    span: SourceSpan


@dataclass
class BehaviorDecl:
    edges: list[tuple[str, str, SourceSpan]]
    repeats: list[tuple[str, SourceSpan]]
    span: SourceSpan


@dataclass
class InputDecl:
    path: PathRef
    values: tuple[Thing, ...]
    span: SourceSpan


Item = Union[MachineDecl, StageDecl, StorageDecl, EdgeDecl]


class Parser:
    def __init__(self, tokens: list[Token], file: str) -> None:
        self.tokens = tokens
        self.pos = 0
        self.file = file
        last = tokens[-1].span if tokens else SourceSpan(file, 1, 1, 0)
        self.eof = Token("eof", "", SourceSpan(file, last.line, last.column + last.length, 0))
        self.edges: list[EdgeDecl] = []

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else self.eof

    def peek(self, offset: int = 1) -> Token:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else self.eof

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        return self.tok.kind == kind and (text is None or self.tok.text == text)

    def advance(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def error(self, expected: str, rule: str) -> _SyntaxError:
        found = self.tok.text or "end of input"
        return _SyntaxError(Diagnostic("error", self.tok.span, f"expected {expected}, found '{found}'", rule))

    def expect(self, kind: str, rule: str, what: Optional[str] = None) -> Token:
        if self.tok.kind != kind:
            raise self.error(what or _describe(kind), rule)
        return self.advance()

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, text):
            return self.advance()
        return None

    # document structure

    def document(self) -> tuple[str, list[Item], list[EventDecl], Optional[BehaviorDecl], list[InputDecl]]:
        if self.accept("kw-model"):
            name = self.expect("ident", "document", "model name").text
            self.expect("lbrace", "document")
            items = self.items(None, closing="rbrace")
            self.expect("rbrace", "document")
        else:
            name = Path(self.file).stem if self.file not in ("", "<input>") else "main"
            items = self.items(None, closing=None)
        events = []
        while self.at("kw-event"):
            events.append(self.event_decl())
        behavior = self.behavior_decl() if self.at("kw-behavior") else None
        inputs = []
        while self.at("kw-input"):
            inputs.append(self.input_decl())
        if self.tok.kind != "eof":
            if self.at("kw-behavior"):
                raise self.error("input declaration (only one behavior block is allowed)", "document")
            raise self.error("event, behavior or input declaration", "document")
        return name, items, events, behavior, inputs

    def items(self, scope: Optional[MachineDecl], closing: Optional[str]) -> list[Item]:
        items: list[Item] = []
        while True:
            tok = self.tok
            if tok.kind == "kw-machine":
                items.append(self.machine_decl())
            elif tok.kind == "kw-storage":
                items.append(self.storage_decl())
            elif tok.kind in ("kw-flow", "kw-trigger"):
                items.append(self.edge_decl(scope))
            elif tok.kind.startswith("kw-") and tok.text in STAGE_KEYWORDS:
                if scope is None:
                    raise _SyntaxError(Diagnostic("error", tok.span,
                                                  f"stage '{tok.text}' must be declared inside a machine",
                                                  "stagedecl"))
                items.append(self.stage_decl())
            elif closing is not None and tok.kind == closing:
                return items
            elif closing is None and tok.kind in ("eof", "kw-event", "kw-behavior", "kw-input"):
                return items
            else:
                raise self.error("machine, stage, storage, flow or trigger declaration", "item")

    def machine_decl(self) -> MachineDecl:
        self.expect("kw-machine", "machinedecl")
        name = self.expect("ident", "machinedecl", "machine name")
        decl = MachineDecl(name.text, name.span)
        self.expect("lbrace", "machinedecl")
        decl.body = self.items(decl, closing="rbrace")
        self.expect("rbrace", "machinedecl")
        return decl

    def stage_decl(self) -> StageDecl:
        tok = self.advance()
        annotation = self.annotation()
        self.expect("semi", "stagedecl")
        return StageDecl(tok.text, annotation, tok.span)

    def annotation(self) -> Annotation:
        guard = delay = None
        actions: tuple[Action, ...] = ()
        emit = None
        if self.accept("kw-when"):
            guard = self.expr()
        if self.accept("kw-after"):
            delay = self.expr()
        if self.accept("kw-do"):
            actions = self.actions()
        if self.accept("kw-emit"):
            emit = self.literal_list()
        return Annotation(guard, delay, actions, emit)

    def actions(self) -> tuple[Action, ...]:
        found = [self.action()]
        while self.accept("comma"):
            found.append(self.action())
        return tuple(found)

    def action(self) -> Action:
        if self.at("ident", "verdict") and self.peek().kind == "lparen":
            self.advance()
            self.advance()
            outcome = self.expect("ident", "action", "accepted or rejected")
            if outcome.text not in VERDICTS:
                raise _SyntaxError(Diagnostic("error", outcome.span,
                                              f"verdict must be accepted or rejected, not '{outcome.text}'",
                                              "action"))
            self.expect("rparen", "action")
            return Verdict(outcome.text)
        if self.at("ident") and self.peek().kind == "assign":
            target = self.advance()
            if target.text in RESERVED:
                raise _SyntaxError(Diagnostic("error", target.span,
                                              f"cannot assign to reserved name '{target.text}'", "action"))
            self.advance()
            return Assign(target.text, self.expr())
        return Transform(self.expr())

    def storage_decl(self) -> StorageDecl:
        self.expect("kw-storage", "storagedecl")
        name = self.expect("ident", "storagedecl", "storage name")
        if name.text in RESERVED:
            raise _SyntaxError(Diagnostic("error", name.span, f"'{name.text}' is reserved", "storagedecl"))
        initial = None
        if self.accept("eq"):
            initial = self.literal()
        self.expect("semi", "storagedecl")
        return StorageDecl(name.text, initial, name.span)

    def edge_decl(self, scope: Optional[MachineDecl]) -> EdgeDecl:
        keyword = self.advance()
        source = self.path()
        self.expect("arrow", f"{keyword.text}decl", "'->'")
        target = self.path()
        condition = None
        if keyword.text == "trigger" and self.accept("kw-when"):
            condition = self.expr()
        self.expect("semi", f"{keyword.text}decl")
        decl = EdgeDecl(keyword.text, source, target, condition, scope, keyword.span)
        self.edges.append(decl)
        return decl

    def path(self) -> PathRef:
        parts, spans = [], []
        while True:
            tok = self.tok
            if tok.kind == "ident" or (tok.kind.startswith("kw-") and tok.text in STAGE_KEYWORDS):
                self.advance()
                parts.append(tok.text)
                spans.append(tok.span)
            else:
                raise self.error("path component", "path")
            if tok.text in STAGE_KEYWORDS or not self.accept("dot"):
                return PathRef(parts, spans)

    def event_decl(self) -> EventDecl:
        self.expect("kw-event", "eventdecl")
        name = self.expect("ident", "eventdecl", "event name")
        label = None
        if self.at("string"):
            label = self.advance().text
        self.expect("kw-over", "eventdecl", "'over'")
        self.expect("lbrace", "eventdecl")
        paths = [self.path()]
        while self.accept("comma"):
            paths.append(self.path())
        self.expect("rbrace", "eventdecl")
        duration = None
        if self.accept("kw-duration"):
            duration = self.expr()
        self.expect("semi", "eventdecl")
        return EventDecl(name.text, label, paths, duration, name.span)

    def behavior_decl(self) -> BehaviorDecl:
        start = self.expect("kw-behavior", "behaviordecl")
        self.expect("lbrace", "behaviordecl")
        edges, repeats = [], []
        while not self.at("rbrace"):
            if self.accept("kw-repeat"):
                name = self.expect("ident", "behaviordecl", "event name")
                repeats.append((name.text, name.span))
            else:
                a = self.expect("ident", "behaviordecl", "event name or 'repeat'")
                self.expect("arrow", "behaviordecl", "'->'")
                b = self.expect("ident", "behaviordecl", "event name")
                edges.append((a.text, b.text, a.span))
            self.expect("semi", "behaviordecl")
        self.expect("rbrace", "behaviordecl")
        return BehaviorDecl(edges, repeats, start.span)

    def input_decl(self) -> InputDecl:
        start = self.expect("kw-input", "inputdecl")
        path = self.path()
        self.expect("eq", "inputdecl", "'='")
        values = self.literal_list()
        self.expect("semi", "inputdecl")
        return InputDecl(path, values, start.span)

    # literals

    def literal_list(self) -> tuple[Thing, ...]:
        self.expect("lbracket", "literal", "'['")
        values = []
        if not self.at("rbracket"):
            values.append(self.literal())
            while self.accept("comma"):
                values.append(self.literal())
        self.expect("rbracket", "literal", "',' or ']'")
        return tuple(values)

    def literal(self) -> Thing:
        tok = self.tok
        if tok.kind == "int":
            return int(self.advance().text)
        if tok.kind == "minus" and self.peek().kind == "int":
            self.advance()
            return -int(self.advance().text)
        if tok.kind == "string":
            return self.advance().text
        if tok.kind == "symbol":
            return Symbol(self.advance().text)
        if tok.kind == "ident" and tok.text in ("true", "false"):
            return self.advance().text == "true"
        if tok.kind == "lbracket":
            return self.literal_list()
        if tok.kind == "lbrace":
            self.advance()
            fields = []
            if not self.at("rbrace"):
                fields.append(self.record_field(self.literal))
                while self.accept("comma"):
                    fields.append(self.record_field(self.literal))
            self.expect("rbrace", "literal", "',' or '}'")
            return Record(tuple(fields))
        raise self.error("literal", "literal")

    def record_field(self, parse_value):
        key = self.expect("ident", "record", "field name")
        self.expect("colon", "record", "':'")
        return key.text, parse_value()

    # expressions, lowest precedence first

    def expr(self) -> Expr:
        left = self.and_expr()
        while self.accept("ident", "or"):
            left = Binary("or", left, self.and_expr())
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self.accept("ident", "and"):
            left = Binary("and", left, self.not_expr())
        return left

    def not_expr(self) -> Expr:
        if self.accept("ident", "not"):
            return Unary("not", self.not_expr())
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.additive()
        if self.tok.text in COMPARISONS and self.tok.kind in ("eq", "ne", "lt", "le", "gt", "ge"):
            op = self.advance().text
            left = Binary(op, left, self.additive())
            if self.tok.text in COMPARISONS and self.tok.kind in ("eq", "ne", "lt", "le", "gt", "ge"):
                raise _SyntaxError(Diagnostic("error", self.tok.span,
                                              "comparisons do not chain; add parentheses", "expr"))
        return left

    def additive(self) -> Expr:
        left = self.multiplicative()
        while self.tok.kind in ("plus", "minus"):
            op = self.advance().text
            left = Binary(op, left, self.multiplicative())
        return left

    def multiplicative(self) -> Expr:
        left = self.unary()
        while self.tok.kind in ("star", "slash", "percent"):
            op = self.advance().text
            left = Binary(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.accept("minus"):
            # a bare integer after '-' is a negative literal
            if self.at("int") and self.peek().kind != "lbracket":
                return Literal(-int(self.advance().text))
            return Unary("-", self.unary())
        return self.postfix()

    def postfix(self) -> Expr:
        node = self.primary()
        while self.accept("lbracket"):
            index = self.expr()
            self.expect("rbracket", "expr", "']'")
            node = Index(node, index)
        return node

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            return Literal(int(self.advance().text))
        if tok.kind == "string":
            return Literal(self.advance().text)
        if tok.kind == "symbol":
            return Literal(Symbol(self.advance().text))
        if tok.kind == "lparen":
            self.advance()
            inner = self.expr()
            self.expect("rparen", "expr", "')'")
            return inner
        if tok.kind == "lbracket":
            self.advance()
            items = []
            if not self.at("rbracket"):
                items.append(self.expr())
                while self.accept("comma"):
                    items.append(self.expr())
            self.expect("rbracket", "expr", "',' or ']'")
            return ListExpr(tuple(items))
        if tok.kind == "lbrace":
            self.advance()
            fields = []
            if not self.at("rbrace"):
                fields.append(self.record_field(self.expr))
                while self.accept("comma"):
                    fields.append(self.record_field(self.expr))
            self.expect("rbrace", "expr", "',' or '}'")
            return RecordExpr(tuple(fields))
        if tok.kind == "ident":
            word = tok.text
            if word in ("true", "false"):
                self.advance()
                return Literal(word == "true")
            if word == "it":
                self.advance()
                return It()
            if word == "now":
                self.advance()
                return Now()
            if word == "len":
                self.advance()
                self.expect("lparen", "expr", "'(' after len")
                inner = self.expr()
                self.expect("rparen", "expr", "')'")
                return Len(inner)
            if word in RESERVED:
                raise self.error("expression", "expr")
            self.advance()
            return Name(word)
        raise self.error("expression", "expr")


def _describe(kind: str) -> str:
    if kind.startswith("kw-"):
        return f"'{kind[3:]}'"
    return {"ident": "identifier", "int": "integer", "semi": "';'", "lbrace": "'{'", "rbrace": "'}'",
            "lparen": "'('", "rparen": "')'", "arrow": "'->'", "eq": "'='"}.get(kind, kind)


class _Resolver:
    """Turns declaration records into a model, collecting diagnostics."""

    def __init__(self, name: str, file: str) -> None:
        self.model = StaticModel(name)
        self.file = file
        self.diagnostics: list[Diagnostic] = []
        self.scopes: dict[int, str] = {}

    def report(self, span: SourceSpan, message: str, rule: str) -> None:
        self.diagnostics.append(Diagnostic("error", span, message, rule))

    def declare(self, items: list[Item], parent: Optional[str]) -> None:
        for item in items:
            try:
                if isinstance(item, MachineDecl):
                    mid = self.model.add_machine(item.name, parent)
                    self.scopes[id(item)] = mid
                    self.declare(item.body, mid)
                elif isinstance(item, StageDecl):
                    self.model.add_stage(parent, item.kind, item.annotation)
                elif isinstance(item, StorageDecl):
                    if parent is None:
                        self.report(item.span, f"storage '{item.name}' must be declared inside a machine",
                                    "storagedecl")
                        continue
                    self.model.add_storage(parent, item.name, item.initial)
            except ModelError as exc:
                span = item.span
                rule = type(exc).__name__
                if rule == "DuplicateName":
                    rule = "DuplicateDeclaration"
                elif rule == "DuplicateStorageName":
                    rule = "DuplicateDeclaration"
                self.report(span, str(exc), rule)

    def lookup(self, ref: PathRef, scope: Optional[str], *, storage_ok: bool = True) -> Optional[str]:
        found = self.model.resolve(ref.parts, scope)
        if found is None:
            self.report_unresolved(ref, scope)
            return None
        if not storage_ok and found in self.model.storages:
            self.report(ref.spans[-1], f"'{ref}' is a storage; a stage is required here", "UnresolvedName")
            return None
        return found

    def report_unresolved(self, ref: PathRef, scope: Optional[str]) -> None:
        prefix = ref.parts[:-1]
        for n in range(len(prefix), 0, -1):
            if self.model.find_machine(prefix[:n], scope) is not None:
                bad = n
                break
        else:
            bad = 0
        if bad < len(prefix):
            what = f"machine '{ref.parts[bad]}'"
        else:
            last = ref.parts[-1]
            what = f"stage '{last}'" if last in STAGE_KEYWORDS else f"storage '{last}'"
            bad = len(ref.parts) - 1
        self.report(ref.spans[bad], f"unresolved name \"{ref.parts[bad]}\": no {what} in path '{ref}'",
                    "UnresolvedName")

    def edges(self, decls: list[EdgeDecl]) -> None:
        for decl in decls:
            scope = self.scopes.get(id(decl.scope)) if decl.scope else None
            if decl.scope is not None and scope is None:
                continue  # enclosing machine failed to declare
            is_trigger = decl.keyword == "trigger"
            source = self.lookup(decl.source, scope, storage_ok=not is_trigger)
            target = self.lookup(decl.target, scope, storage_ok=not is_trigger)
            if source is None or target is None:
                continue
            if is_trigger:
                self.model.add_trigger(source, target, decl.condition, strict=False)
            else:
                self.model.add_flow(source, target, strict=False)

    def events(self, decls: list[EventDecl]) -> list[dynamics.EventDef]:
        found = []
        seen: set[str] = set()
        for decl in decls:
            if decl.name in seen:
                self.report(decl.span, f"event '{decl.name}' declared twice", "DuplicateDeclaration")
                continue
            seen.add(decl.name)
            ids = [self.lookup(p, None) for p in decl.paths]
            if any(i is None for i in ids):
                continue
            duration = 0
            if decl.duration is not None:
                try:
                    duration = evaluate(decl.duration, Context())
                except ThingcError as exc:
                    self.report(decl.span, f"duration of '{decl.name}' must be constant: {exc}", "eventdecl")
                    continue
            try:
                region = dynamics.define_region(self.model, ids)
                found.append(dynamics.define_event(decl.name, region, duration, decl.label))
            except (RegionError, EventError, ModelError) as exc:
                self.report(decl.span, f"event '{decl.name}': {exc}", type(exc).__name__)
        return found

    def behavior(self, decl: BehaviorDecl, events: list[dynamics.EventDef]) -> Optional[dynamics.BehaviorGraph]:
        known = {e.name for e in events}
        ok = True
        for a, b, span in decl.edges:
            for end in (a, b):
                if end not in known:
                    self.report(span, f"behavior names unknown event '{end}'", "UnresolvedName")
                    ok = False
        for name, span in decl.repeats:
            if name not in known:
                self.report(span, f"repeat names unknown event '{name}'", "UnresolvedName")
                ok = False
        if not ok:
            return None
        try:
            return dynamics.build_behavior(events, [(a, b) for a, b, _ in decl.edges],
                                           [n for n, _ in decl.repeats])
        except EventError as exc:
            self.report(decl.span, str(exc), type(exc).__name__)
            return None

    def inputs(self, decls: list[InputDecl]) -> dict[str, tuple[Thing, ...]]:
        values: dict[str, tuple[Thing, ...]] = {}
        for decl in decls:
            stage = self.lookup(decl.path, None, storage_ok=False)
            if stage is None:
                continue
            name = self.model.input_name(stage)
            try:
                self.model.bind_input(name, stage)
            except ModelError as exc:
                self.report(decl.span, str(exc), "inputdecl")
                continue
            values[name] = decl.values
        return values


def parse(source: str, file: str = "<input>") -> ModelDocument:
    """Parse `.tm` text; raises :class:`ParseFailed` with diagnostics."""
    try:
        tokens = tokenize(source, file)
    except LexError as exc:
        raise ParseFailed([exc.diagnostic]) from None
    parser = Parser(tokens, file)
    try:
        name, items, events, behavior, inputs = parser.document()
    except _SyntaxError as exc:
        raise ParseFailed([exc.diagnostic]) from None
    resolver = _Resolver(name, file)
    resolver.declare(items, None)
    resolver.edges(parser.edges)
    event_defs = resolver.events(events)
    graph = resolver.behavior(behavior, event_defs) if behavior else None
    values = resolver.inputs(inputs)
    if resolver.diagnostics:
        raise ParseFailed(resolver.diagnostics)
    return ModelDocument(resolver.model, event_defs, graph, values)


def parse_file(path: str | Path) -> ModelDocument:
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), str(path))
