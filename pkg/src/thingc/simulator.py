"""Deterministic discrete-event execution of annotated static models.

Scheduling rules:

* Input things enter their bound stages at clock 0, binding by binding,
  each in list order.
* Work is kept in one agenda ordered by ``(time, seq)``, where ``seq`` is
  the order in which work was scheduled.  Equal-time work therefore runs
  breadth-first.
* A stage with an ``after`` delay holds the thing until ``now + delay``;
  its guard and actions run when the delay has elapsed.
* A failing guard drops the thing without recording an instance.
* After a stage fires, its outgoing flows are followed in insertion
  order (flows into a storage overwrite it immediately), then its
  triggers are checked in insertion order.
* A transfer stage plays an inbound role for things arriving from other
  machines or from inputs, and an outbound role for things arriving from
  its own release stage.  Outbound things are recorded as outputs.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .dynamics import BehaviorGraph, EventDef
from .errors import EvaluationError, ForeignRegion, LimitExceeded, TypeMismatch, UnboundName
from .expr import Assign, Context, Expr, Transform, Verdict, evaluate
from .legality import StageKind
from .model import Stage, StaticModel
from .things import Thing, render, type_name


@dataclass(frozen=True)
class SimulationLimits:
    max_instances: int = 10_000
    max_clock: int = 1_000_000

    def __post_init__(self) -> None:
        if self.max_instances <= 0 or self.max_clock <= 0:
            raise ValueError("simulation limits must be positive")


@dataclass(frozen=True)
class GenericEventInstance:
    seq: int
    stage: str
    path: str
    kind: StageKind
    role: Optional[str]
    thing: Optional[Thing]
    start: int
    end: int
    tag: int = field(default=0, compare=False)  # identity of the thing, kept across transforms
    cause: int = field(default=0, compare=False)  # tag of the thing that activated a create


@dataclass
class Trace:
    instances: list[GenericEventInstance]
    final_storages: dict[str, Thing]
    outputs: dict[str, list[Thing]]
    verdict: Optional[str] = None
    model: Optional[StaticModel] = field(default=None, compare=False, repr=False)

    def output_sequence(self) -> list[tuple[str, Thing]]:
        """Every outbound transfer in firing order as ``(stage path, thing)``."""
        return [(i.path, i.thing) for i in self.instances
                if i.kind is StageKind.TRANSFER and i.role == "out"]

    def at(self, path: str) -> list[GenericEventInstance]:
        return [i for i in self.instances if i.path == path]


@dataclass(frozen=True)
class _Token:
    tag: int
    value: Thing
    cause: int = 0


@dataclass(order=True)
class _Work:
    time: int
    order: int
    stage: str = field(compare=False)
    token: _Token = field(compare=False)
    role: Optional[str] = field(compare=False)
    origin: str = field(compare=False)  # "input" | "flow" | "trigger"
    start: int = field(compare=False)
    seq: Optional[int] = field(compare=False, default=None)
    delayed: bool = field(compare=False, default=False)


class _Run:
    def __init__(self, model: StaticModel, limits: SimulationLimits, horizon: Optional[int]) -> None:
        self.model = model
        self.limits = limits
        self.horizon = horizon
        self.agenda: list[_Work] = []
        self.order = itertools.count()
        self.seqs = itertools.count(1)
        self.tags = itertools.count(1)
        self.instances: list[GenericEventInstance] = []
        self.storages: dict[str, Thing] = {
            cid: cell.initial for cid, cell in model.storages.items() if cell.initial is not None}
        self.outputs: dict[str, list[Thing]] = {}
        self.verdict: Optional[str] = None
        self.flows_from = {sid: model.outgoing_flows(sid) for sid in model.stages}
        self.triggers_from = {sid: model.outgoing_triggers(sid) for sid in model.stages}
        self._names: dict[tuple[str, str], str] = {}

    # evaluation

    def context(self, machine: str, it: Optional[Thing], now: int) -> Context:
        def lookup(name: str) -> Thing:
            key = (machine, name)
            if key not in self._names:
                cid = self.model.resolve_storage(name, machine)
                if cid is None:
                    raise UnboundName(f"no storage named '{name}'")
                self._names[key] = cid
            cid = self._names[key]
            if cid not in self.storages:
                raise UnboundName(f"storage '{self.model.path(cid)}' holds no value yet")
            return self.storages[cid]

        return Context(it=it, now=now, lookup=lookup)

    def eval(self, expr: Expr, stage: Stage, it: Optional[Thing], now: int) -> Thing:
        try:
            return evaluate(expr, self.context(stage.owner, it, now))
        except EvaluationError as exc:
            if exc.stage is None:
                exc.stage = self.model.path(stage.id)
            raise

    def test(self, expr: Optional[Expr], stage: Stage, it: Optional[Thing], now: int, what: str) -> bool:
        if expr is None:
            return True
        value = self.eval(expr, stage, it, now)
        if type_name(value) != "boolean":
            raise TypeMismatch(f"{what} must be boolean, got {type_name(value)} {render(value)}",
                               self.model.path(stage.id))
        return value

    # scheduling

    def schedule(self, time: int, stage: str, token: _Token, role: Optional[str], origin: str) -> None:
        heapq.heappush(self.agenda, _Work(time, next(self.order), stage, token, role, origin, time))

    def run(self, inputs: Sequence[tuple[str, Sequence[Thing]]]) -> Trace:
        for stage, values in inputs:
            role = "in" if self.model.stages[stage].kind is StageKind.TRANSFER else None
            for value in values:
                self.schedule(0, stage, _Token(next(self.tags), value), role, "input")
        while self.agenda:
            work = self.agenda[0]
            if self.horizon is not None and work.time > self.horizon:
                break
            if work.time > self.limits.max_clock:
                raise LimitExceeded("maxClock", self.trace())
            heapq.heappop(self.agenda)
            if work.delayed:
                self.fire(work)
            else:
                self.arrive(work)
        return self.trace()

    def arrive(self, work: _Work) -> None:
        stage = self.model.stages[work.stage]
        delay_expr = stage.annotation.delay
        if delay_expr is not None:
            delay = self.eval(delay_expr, stage, work.token.value, work.time)
            if type_name(delay) != "integer" or delay < 0:
                raise TypeMismatch(f"delay must be a non-negative integer, got {render(delay)}",
                                   self.model.path(stage.id))
            if delay > 0:
                work.seq = next(self.seqs)
                work.delayed = True
                work.time += delay
                work.order = next(self.order)
                heapq.heappush(self.agenda, work)
                return
        self.fire(work)

    def fire(self, work: _Work) -> None:
        stage = self.model.stages[work.stage]
        ann = stage.annotation
        now = work.time
        if not self.test(ann.guard, stage, work.token.value, now, "guard"):
            return
        if stage.kind is StageKind.CREATE:
            created = ann.emit if ann.emit is not None else (work.token.value,)
            for i, value in enumerate(created):
                seq = work.seq if (i == 0 and work.seq is not None) else next(self.seqs)
                self.complete(stage, _Token(next(self.tags), value, work.token.tag), work.role, work.start, now, seq)
        else:
            seq = work.seq if work.seq is not None else next(self.seqs)
            self.complete(stage, work.token, work.role, work.start, now, seq)

    def complete(self, stage: Stage, token: _Token, role: Optional[str], start: int, now: int,
                 seq: int) -> None:
        if len(self.instances) == self.limits.max_instances:
            raise LimitExceeded("maxInstances", self.trace())
        value = token.value
        for action in stage.annotation.actions:
            if isinstance(action, Transform):
                value = self.eval(action.value, stage, value, now)
            elif isinstance(action, Assign):
                cid = self.model.resolve_storage(action.name, stage.owner)
                if cid is None:
                    raise UnboundName(f"no storage named '{action.name}'", self.model.path(stage.id))
                self.storages[cid] = self.eval(action.value, stage, value, now)
            elif isinstance(action, Verdict) and self.verdict is None:
                self.verdict = action.outcome
        cause = token.cause or token.tag
        token = _Token(token.tag, value)
        path = self.model.path(stage.id)
        self.instances.append(GenericEventInstance(seq, stage.id, path, stage.kind, role, value, start, now, token.tag, cause))

        is_transfer = stage.kind is StageKind.TRANSFER
        if is_transfer and role == "out":
            self.outputs.setdefault(path, []).append(value)
        for flow in self.flows_from[stage.id]:
            if flow.target in self.model.storages:
                self.storages[flow.target] = value
                continue
            target = self.model.stages[flow.target]
            intra = target.owner == stage.owner
            if is_transfer and intra != (role == "in"):
                continue  # inbound things go inside, outbound things leave
            if target.kind is StageKind.TRANSFER:
                self.schedule(now, target.id, token, "out" if intra else "in", "flow")
            else:
                self.schedule(now, target.id, token, None, "flow")
        for trig in self.triggers_from[stage.id]:
            if self.test(trig.condition, stage, value, now, "trigger condition"):
                self.schedule(now, trig.target, token, None, "trigger")

    def trace(self) -> Trace:
        ordered = sorted(self.instances, key=lambda i: (i.start, i.seq))
        renumbered = [GenericEventInstance(n, i.stage, i.path, i.kind, i.role, i.thing, i.start, i.end, i.tag, i.cause)
                      for n, i in enumerate(ordered, 1)]
        finals = {self.model.path(cid): self.storages[cid] for cid in self.model.storages if cid in self.storages}
        outputs = {k: list(v) for k, v in self.outputs.items()}
        return Trace(renumbered, finals, outputs, self.verdict, self.model)


def input_stage(model: StaticModel, name: str) -> str:
    """Stage targeted by an input name, a stage path, or a machine path."""
    if name in model.inputs:
        return model.inputs[name]
    parts = name.split(".")
    stage = model.resolve(parts)
    if stage is None:
        machine = model.find_machine(parts)
        if machine is not None:
            stage = model.stage_of(machine, StageKind.TRANSFER) or model.stage_of(machine, StageKind.CREATE)
    if stage is None or stage not in model.stages:
        raise UnboundName(f"input '{name}' does not name a bound input or a stage")
    if model.stages[stage].kind not in (StageKind.TRANSFER, StageKind.CREATE):
        raise EvaluationError(f"input '{name}' must target a transfer or create stage")
    return stage


def resolve_inputs(model: StaticModel, *layers: Mapping[str, Sequence[Thing]]) -> list[tuple[str, Sequence[Thing]]]:
    """Map input names to stages; later layers replace earlier ones per stage.

    Stages bound by ``input`` declarations come first, in declaration
    order, followed by any other stages in the order they were named.
    """
    merged: dict[str, Sequence[Thing]] = {}
    for layer in layers:
        for name, values in layer.items():
            merged[input_stage(model, name)] = tuple(values)
    order = list(dict.fromkeys(model.inputs.values()))
    order += [s for s in merged if s not in order]
    return [(s, merged[s]) for s in order if s in merged]


def execute(model: StaticModel, inputs: Mapping[str, Sequence[Thing]] | None = None,
            limits: SimulationLimits | None = None, *, horizon: Optional[int] = None) -> Trace:
    """Run ``model`` on ``inputs``.

    ``inputs`` maps input names (see :attr:`StaticModel.inputs`) or stage
    paths to lists of things.  With ``horizon`` set, work scheduled after
    that time is left pending and the run ends normally.  Raises
    :class:`LimitExceeded` (carrying the partial trace) when a limit is hit.
    """
    run = _Run(model, limits or SimulationLimits(), horizon)
    return run.run(resolve_inputs(model, inputs or {}))


def run_inputs(model: StaticModel, bound: Sequence[tuple[str, Sequence[Thing]]],
               limits: SimulationLimits | None = None, *, horizon: Optional[int] = None) -> Trace:
    return _Run(model, limits or SimulationLimits(), horizon).run(bound)


def execute_document(doc, overrides: Mapping[str, Sequence[Thing]] | None = None,
                     limits: SimulationLimits | None = None, *, horizon: Optional[int] = None) -> Trace:
    """Run a parsed document with its declared inputs; ``overrides`` win by name."""
    bound = resolve_inputs(doc.model, doc.inputs, overrides or {})
    return run_inputs(doc.model, bound, limits, horizon=horizon)


# attribution, conformance and state queries


@dataclass(frozen=True)
class Occurrence:
    event: str
    start: int
    seq: int


@dataclass
class AttributedTrace:
    trace: Trace
    events: list[EventDef]
    labels: list[tuple[str, ...]]
    occurrences: list[Occurrence]

    @property
    def unattributed(self) -> int:
        return sum(1 for lab in self.labels if not lab)

    @property
    def shared(self) -> int:
        return sum(1 for lab in self.labels if len(lab) > 1)

    def event(self, name: str) -> EventDef:
        return next(e for e in self.events if e.name == name)

    def label_text(self, index: int) -> str:
        return ",".join(self.labels[index]) or "unattributed"


def _belongs(model: StaticModel, event: EventDef, inst: GenericEventInstance) -> bool:
    region = event.region
    if inst.stage not in region.stages:
        return False
    if inst.kind is not StageKind.TRANSFER or inst.role is None:
        return True
    # a transfer counts for a region only on the side the region covers
    neighbour_kind = StageKind.RECEIVE if inst.role == "in" else StageKind.RELEASE
    neighbour = model.stage_of(model.stages[inst.stage].owner, neighbour_kind)
    return neighbour is None or neighbour in region.stages or region.is_generic()


def attribute(trace: Trace, events: Sequence[EventDef]) -> AttributedTrace:
    """Label each instance with every event whose region contains it.

    An occurrence of an event follows one thing (and the things it
    creates) through the region.  It closes when that thing revisits a
    stage in the same transfer role, which starts the next occurrence.
    """
    model = trace.model
    for event in events:
        if model is not None and event.region.model is not model:
            raise ForeignRegion(f"event '{event.name}' is defined over a different model")
    labels: list[tuple[str, ...]] = []
    occurrences: list[Occurrence] = []
    # per event: open occurrences as (tags followed, (stage, role) pairs seen)
    open_: dict[str, list[tuple[set[int], set[tuple[str, Optional[str]]]]]] = {}
    for inst in trace.instances:
        names = tuple(e.name for e in events if _belongs(model, e, inst))
        labels.append(names)
        key = (inst.stage, inst.role)
        for name in names:
            pending = open_.setdefault(name, [])
            match = next((o for o in pending if inst.tag in o[0] or inst.cause in o[0]), None)
            if match is not None and key not in match[1]:
                match[0].add(inst.tag)
                match[1].add(key)
                continue
            if match is not None:
                pending.remove(match)
            pending.append(({inst.tag}, {key}))
            occurrences.append(Occurrence(name, inst.start, inst.seq))
    return AttributedTrace(trace, list(events), labels, occurrences)


@dataclass
class ConformanceReport:
    ok: bool
    sequence: list[str]
    offending: Optional[tuple[str, str]] = None
    message: str = ""

    def render(self) -> str:
        if self.ok:
            return f"conformance: ok ({len(self.sequence)} activations)\n"
        a, b = self.offending
        return f"conformance: FAILED at ({a}, {b}): {self.message}\n"


def conformance(attributed: AttributedTrace, behavior: BehaviorGraph) -> ConformanceReport:
    """Check that event activations respect the behavior's precedence.

    Each activation needs every predecessor of its event to have been
    activated earlier; only repeat-marked events may activate twice.
    The first failure is reported as ``(event, missing predecessor)``,
    or ``(event, event)`` for an unmarked repetition.
    """
    sequence = [o.event for o in attributed.occurrences if o.event in behavior.events]
    seen: set[str] = set()
    for name in sequence:
        if name in seen and name not in behavior.repeats:
            return ConformanceReport(False, sequence, (name, name),
                                     f"event {name} occurs again but is not marked repeat")
        missing = [p for p in behavior.predecessors(name) if p not in seen]
        if missing:
            return ConformanceReport(False, sequence, (name, missing[0]),
                                     f"event {name} occurred before its predecessor {missing[0]}")
        seen.add(name)
    return ConformanceReport(True, sequence)


def query_state(attributed: AttributedTrace, t: int) -> set[str]:
    """Events whose occurrence interval ``[start, start + duration)`` covers ``t``."""
    if t < 0:
        raise ValueError("time must be non-negative")
    durations = {e.name: e.duration for e in attributed.events}
    return {o.event for o in attributed.occurrences if o.start <= t < o.start + durations[o.event]}


def canonical_trace(trace: Trace) -> tuple:
    """Trace with stage ids renamed by order of first appearance."""
    names: dict[str, int] = {}
    rows = []
    for inst in trace.instances:
        index = names.setdefault(inst.stage, len(names))
        rows.append((inst.seq, index, str(inst.kind), inst.role,
                     None if inst.thing is None else render(inst.thing), inst.start, inst.end))
    return tuple(rows), trace.verdict
