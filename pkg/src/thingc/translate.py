"""Translation of finite-state-machine specifications into TM models.

FSM files use the lexical conventions of `.tm` files::

    fsm thermostat {
      input temperature;
      output heatOn, heatOff;
      state cooling initial;
      state heating;
      transition cooling -> heating when it <= 18 emit heatOn;
      transition heating -> cooling when it >= 22 emit heatOff;
    }

A state may carry ``duration N``; a specification whose states all have
durations is translated with the timed encoding instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .dsl.lexer import LexError, tokenize
from .dsl.parser import ModelDocument, ParseFailed, Parser, _SyntaxError, parse
from .errors import InvalidSpec
from .expr import Binary, Expr, Name, Unary, to_source


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    guard: Optional[Expr] = None
    outputs: tuple[str, ...] = ()


@dataclass
class FsmSpec:
    name: str
    states: list[str]
    initial: str
    inputs: list[tuple[str, Optional[str]]] = field(default_factory=list)  # (name, type)
    outputs: list[str] = field(default_factory=list)
    transitions: list[Transition] = field(default_factory=list)
    durations: dict[str, int] = field(default_factory=dict)

    @property
    def timed(self) -> bool:
        return bool(self.durations)

    def check(self) -> None:
        """Raise :class:`InvalidSpec` unless the specification is well formed."""
        if not self.states:
            raise InvalidSpec("an FSM needs at least one state")
        names = [*self.states, *(n for n, _ in self.inputs), *self.outputs]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise InvalidSpec(f"duplicate name(s): {', '.join(dupes)}")
        if self.initial not in self.states:
            raise InvalidSpec(f"initial state '{self.initial}' is not a declared state")
        for t in self.transitions:
            for end in (t.source, t.target):
                if end not in self.states:
                    raise InvalidSpec(f"transition {t.source} -> {t.target} names unknown state '{end}'")
            for out in t.outputs:
                if out not in self.outputs:
                    raise InvalidSpec(f"transition {t.source} -> {t.target} emits undeclared output '{out}'")
            if t.source == t.target and t.outputs:
                raise InvalidSpec(f"self-transition on '{t.source}' cannot emit outputs")
        for state, d in self.durations.items():
            if state not in self.states:
                raise InvalidSpec(f"duration given for unknown state '{state}'")
            if d < 0:
                raise InvalidSpec(f"state '{state}' has negative duration {d}")
        if self.timed:
            missing = [s for s in self.states if s not in self.durations]
            if missing:
                raise InvalidSpec(f"timed specification lacks durations for: {', '.join(missing)}")
            if self.outputs or self.inputs:
                raise InvalidSpec("timed specifications take no inputs or outputs")
        else:
            for state in self.states:
                emitted = {t.outputs for t in self.incoming(state)}
                if len(emitted) > 1:
                    raise InvalidSpec(f"transitions into '{state}' emit different outputs")

    def incoming(self, state: str) -> list[Transition]:
        return [t for t in self.transitions if t.target == state and t.source != state]


# parsing

class _FsmParser(Parser):
    def word(self, text: str) -> bool:
        return self.accept("ident", text) is not None

    def spec(self) -> FsmSpec:
        if not self.word("fsm"):
            raise self.error("'fsm'", "fsm")
        name = self.expect("ident", "fsm", "FSM name").text
        self.expect("lbrace", "fsm")
        states: list[str] = []
        initial: list[str] = []
        inputs: list[tuple[str, Optional[str]]] = []
        outputs: list[str] = []
        transitions: list[Transition] = []
        durations: dict[str, int] = {}
        while not self.at("rbrace"):
            if self.accept("kw-input"):
                ident = self.expect("ident", "inputdecl", "input name").text
                kind = self.expect("ident", "inputdecl", "type name").text if self.accept("colon") else None
                inputs.append((ident, kind))
            elif self.word("output"):
                outputs.append(self.expect("ident", "outputdecl", "output name").text)
                while self.accept("comma"):
                    outputs.append(self.expect("ident", "outputdecl", "output name").text)
            elif self.word("state"):
                state = self.expect("ident", "statedecl", "state name").text
                states.append(state)
                if self.word("initial"):
                    initial.append(state)
                if self.accept("kw-duration"):
                    durations[state] = self.integer("statedecl")
            elif self.word("transition"):
                source = self.expect("ident", "transitiondecl", "state name").text
                self.expect("arrow", "transitiondecl", "'->'")
                target = self.expect("ident", "transitiondecl", "state name").text
                guard = self.expr() if self.accept("kw-when") else None
                emitted: list[str] = []
                if self.accept("kw-emit"):
                    emitted.append(self.expect("ident", "transitiondecl", "output name").text)
                    while self.accept("comma"):
                        emitted.append(self.expect("ident", "transitiondecl", "output name").text)
                transitions.append(Transition(source, target, guard, tuple(emitted)))
            else:
                raise self.error("input, output, state or transition", "fsm")
            self.expect("semi", "fsm")
        self.expect("rbrace", "fsm")
        if self.tok.kind != "eof":
            raise self.error("end of input", "fsm")
        if len(initial) != 1:
            raise InvalidSpec(f"exactly one state must be marked initial, found {len(initial)}")
        return FsmSpec(name, states, initial[0], inputs, outputs, transitions, durations)

    def integer(self, rule: str) -> int:
        negative = self.accept("minus") is not None
        value = int(self.expect("int", rule, "integer").text)
        return -value if negative else value


def parse_fsm(source: str, file: str = "<input>") -> FsmSpec:
    """Parse FSM text; raises :class:`ParseFailed` or :class:`InvalidSpec`."""
    try:
        parser = _FsmParser(tokenize(source, file), file)
        spec = parser.spec()
    except LexError as exc:
        raise ParseFailed([exc.diagnostic]) from None
    except _SyntaxError as exc:
        raise ParseFailed([exc.diagnostic]) from None
    spec.check()
    return spec


def parse_fsm_file(path: str | Path) -> FsmSpec:
    path = Path(path)
    return parse_fsm(path.read_text(encoding="utf-8"), str(path))


# translation

def _any(exprs: list[Expr]) -> Expr:
    result = exprs[0]
    for e in exprs[1:]:
        result = Binary("or", result, e)
    return result


def _untimed(spec: FsmSpec) -> list[str]:
    lines = [f"model {spec.name} {{"]
    for name, _ in spec.inputs:
        lines += [f"  machine {name} {{", "    create;", "    process;",
                  "    flow create -> process;", "  }"]
    for state in spec.states:
        latch = f"{state}_on"
        initial = "true" if state == spec.initial else "false"
        entries = []
        for t in spec.incoming(state):
            came_from = Name(f"{t.source}_on")
            entries.append(came_from if t.guard is None else Binary("and", t.guard, came_from))
        stage = "    process"
        if entries:
            guard = Binary("and", Unary("not", Name(latch)), _any(entries))
            stage += f" when {to_source(guard)}"
            resets = [f"{other}_on := false" for other in spec.states if other != state]
            stage += " do " + ", ".join([f"{latch} := true", *resets])
        lines += [f"  machine {state} {{", f"    storage {latch} = {initial};", stage + ";",
                  f"    flow {latch} -> process;", "  }"]
    for out in spec.outputs:
        lines += [f"  machine {out} {{", f"    create emit [#{out}];", "    release;", "    transfer;",
                  "    flow create -> release;", "    flow release -> transfer;", "  }"]
    for name, _ in spec.inputs:
        for state in spec.states:
            guards = [t.guard for t in spec.incoming(state)]
            if not guards:
                continue
            cond = "" if any(g is None for g in guards) else f" when {to_source(_any(guards))}"
            lines.append(f"  trigger {name}.process -> {state}.process{cond};")
    for state in spec.states:
        for out in _emitted(spec, state):
            lines.append(f"  trigger {state}.process -> {out}.create;")
    lines.append("}")

    events, edges = [], []
    number = 1
    for name, _ in spec.inputs:
        events.append((f"E{number}", f"A {name} value is created and processed",
                       [f"{name}.create", f"{name}.process"], None))
        number += 1
    state_event = {}
    for state in spec.states:
        state_event[state] = f"E{number}"
        events.append((f"E{number}", f"The machine enters {state}",
                       [f"{state}.process", f"{state}.{state}_on"], None))
        number += 1
    for out in spec.outputs:
        events.append((f"E{number}", f"The {out} signal is emitted",
                       [f"{out}.create", f"{out}.release", f"{out}.transfer"], None))
        for state in spec.states:
            if out in _emitted(spec, state):
                edges.append((state_event[state], f"E{number}"))
        number += 1
    input_events = [e[0] for e in events[:len(spec.inputs)]]
    edges = [(i, state_event[s]) for i in input_events for s in spec.states if spec.incoming(s)] + edges
    return lines + _dynamics(events, edges, repeat_all=True)


def _emitted(spec: FsmSpec, state: str) -> list[str]:
    incoming = spec.incoming(state)
    return [o for o in spec.outputs if incoming and o in incoming[0].outputs]


def _timed(spec: FsmSpec) -> list[str]:
    lines = [f"model {spec.name} {{", f"  machine {spec.name} {{", "    storage start_time = 0;"]
    for state in spec.states:
        d = spec.durations[state]
        lines += [f"    machine {state} {{", "      create do now;",
                  f"      process when now - start_time = {d} after {d};", "    }"]
    for state in spec.states:
        lines += [f"    flow {state}.create -> start_time;", f"    flow {state}.create -> {state}.process;",
                  f"    flow start_time -> {state}.process;"]
    for t in spec.transitions:
        cond = f" when {to_source(t.guard)}" if t.guard is not None else ""
        lines.append(f"    trigger {t.source}.process -> {t.target}.create{cond};")
    lines += ["  }", "}"]

    events, names = [], {}
    for k, state in enumerate(spec.states):
        shown, calc = f"E{2 * k + 1}_{state}", f"E{2 * k + 2}_calc"
        names[state] = (shown, calc)
        events.append((shown, f"State {state} begins and its start time is stored",
                       [f"{spec.name}.{state}.create", f"{spec.name}.start_time"], spec.durations[state]))
        events.append((calc, f"The time of the {state} state is calculated",
                       [f"{spec.name}.{state}.process"], None))
    edges = [names[s] for s in spec.states]
    # precedence follows transitions from the initial state, without closing cycles
    seen, frontier = {spec.initial}, [spec.initial]
    while frontier:
        state = frontier.pop(0)
        for t in spec.transitions:
            if t.source == state and t.target not in seen:
                seen.add(t.target)
                frontier.append(t.target)
                edges.append((names[state][1], names[t.target][0]))
    edges.sort(key=lambda e: [n for pair in names.values() for n in pair].index(e[0]))
    lines += _dynamics(events, edges, repeat_all=True)
    lines.append(f"input {spec.name}.{spec.initial}.create = [#{spec.initial}];")
    return lines


def _dynamics(events, edges, *, repeat_all: bool) -> list[str]:
    lines = [""]
    for name, label, paths, duration in events:
        tail = f" duration {duration}" if duration is not None else ""
        lines.append(f'event {name} "{label}" over {{{", ".join(paths)}}}{tail};')
    if events:
        lines.append("behavior {")
        lines += [f"  {a} -> {b};" for a, b in edges]
        if repeat_all:
            lines += [f"  repeat {name};" for name, *_ in events]
        lines.append("}")
    return lines


def fsm_to_source(spec: FsmSpec) -> str:
    """The generated model as `.tm` text."""
    spec.check()
    lines = _timed(spec) if spec.timed else _untimed(spec)
    return "\n".join(lines) + "\n"


def fsm_to_tm(spec: FsmSpec) -> ModelDocument:
    """Translate ``spec`` into a parsed model document."""
    return parse(fsm_to_source(spec), f"{spec.name}.tm")
