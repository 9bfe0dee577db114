"""Static models: machines, stages, flows, triggers and storages."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union

from . import legality
from .errors import (
    DuplicateName,
    DuplicateStageKind,
    DuplicateStorageName,
    EmitOnNonCreate,
    EmptyName,
    IllegalFlow,
    IllegalTriggerTarget,
    InvalidAnnotation,
    ModelError,
    UnknownElement,
)
from .expr import Action, Expr, Literal, Transform, action_source, to_source
from .legality import STORAGE, StageKind
from .things import Thing, is_thing, render

_uids = itertools.count(1)


@dataclass(frozen=True)
class Annotation:
    guard: Optional[Expr] = None
    delay: Optional[Expr] = None
    actions: tuple[Action, ...] = ()
    emit: Optional[tuple[Thing, ...]] = None

    @property
    def transform(self) -> Optional[Expr]:
        for action in self.actions:
            if isinstance(action, Transform):
                return action.value
        return None

    def is_empty(self) -> bool:
        return self == Annotation()

    def source(self) -> str:
        parts = []
        if self.guard is not None:
            parts.append(f"when {to_source(self.guard)}")
        if self.delay is not None:
            parts.append(f"after {to_source(self.delay)}")
        if self.actions:
            parts.append("do " + ", ".join(action_source(a) for a in self.actions))
        if self.emit is not None:
            parts.append("emit [" + ", ".join(render(v) for v in self.emit) + "]")
        return " ".join(parts)


@dataclass
class Machine:
    id: str
    name: str
    parent: Optional[str]
    stages: dict[StageKind, str] = field(default_factory=dict)
    storages: list[str] = field(default_factory=list)
    children: list[str] = field(default_factory=list)


@dataclass
class Stage:
    id: str
    owner: str
    kind: StageKind
    annotation: Annotation = field(default_factory=Annotation)


@dataclass(frozen=True)
class Flow:
    id: str
    source: str
    target: str


@dataclass(frozen=True)
class Trigger:
    id: str
    source: str
    target: str
    condition: Optional[Expr] = None


@dataclass
class Storage:
    id: str
    owner: str
    name: str
    initial: Optional[Thing] = None


Edge = Union[Flow, Trigger]


class StaticModel:
    """The atemporal diagram of a system.

    Elements are addressed by generated ids (``m1``, ``s3``, ``f2``, ...);
    every collection iterates in insertion order.
    """

    def __init__(self, name: str) -> None:
        if not name:
            raise EmptyName("model name must be non-empty")
        self.name = name
        self.uid = next(_uids)
        self.machines: dict[str, Machine] = {}
        self.stages: dict[str, Stage] = {}
        self.flows: dict[str, Flow] = {}
        self.triggers: dict[str, Trigger] = {}
        self.storages: dict[str, Storage] = {}
        self.inputs: dict[str, str] = {}
        self.frozen = False
        self._counters = {p: itertools.count(1) for p in ("m", "s", "f", "t", "st")}

    def __repr__(self) -> str:
        return (f"StaticModel({self.name!r}, machines={len(self.machines)}, "
                f"stages={len(self.stages)}, flows={len(self.flows)}, triggers={len(self.triggers)})")

    # construction

    def _new_id(self, prefix: str) -> str:
        return f"{prefix}{next(self._counters[prefix])}"

    def _check_mutable(self) -> None:
        if self.frozen:
            raise ModelError(f"model '{self.name}' is frozen")

    def freeze(self) -> "StaticModel":
        self.frozen = True
        return self

    def top_level(self) -> list[str]:
        return [m.id for m in self.machines.values() if m.parent is None]

    def add_machine(self, name: str, parent: Optional[str] = None) -> str:
        self._check_mutable()
        if not name:
            raise EmptyName("machine name must be non-empty")
        if parent is not None and parent not in self.machines:
            raise UnknownElement(f"unknown parent machine '{parent}'")
        siblings = self.machines[parent].children if parent else self.top_level()
        if any(self.machines[s].name == name for s in siblings):
            where = self.machine_path(parent) if parent else "top level"
            raise DuplicateName(f"machine '{name}' already declared at {where}")
        mid = self._new_id("m")
        self.machines[mid] = Machine(mid, name, parent)
        if parent:
            self.machines[parent].children.append(mid)
        return mid

    def add_stage(self, machine: str, kind: StageKind | str,
                  annotation: Optional[Annotation] = None) -> str:
        self._check_mutable()
        kind = StageKind(kind)
        owner = self.machine(machine)
        if kind in owner.stages:
            raise DuplicateStageKind(f"machine '{self.machine_path(machine)}' already has a {kind} stage")
        annotation = annotation or Annotation()
        check_annotation(kind, annotation)
        sid = self._new_id("s")
        self.stages[sid] = Stage(sid, machine, kind, annotation)
        owner.stages[kind] = sid
        return sid

    def add_storage(self, machine: str, name: str, initial: Optional[Thing] = None) -> str:
        self._check_mutable()
        owner = self.machine(machine)
        if not name:
            raise EmptyName("storage name must be non-empty")
        if any(self.storages[s].name == name for s in owner.storages):
            raise DuplicateStorageName(f"storage '{name}' already declared in '{self.machine_path(machine)}'")
        if initial is not None and not is_thing(initial):
            raise ModelError(f"initial value {initial!r} is not a thing")
        cid = self._new_id("st")
        self.storages[cid] = Storage(cid, machine, name, initial)
        owner.storages.append(cid)
        return cid

    def add_flow(self, source: str, target: str, *, strict: bool = True) -> str:
        """Connect two stages (or a stage and a storage) with a flow.

        With ``strict=False`` an illegal pair is recorded anyway so that
        :func:`thingc.validator.validate_structure` can report it.
        """
        self._check_mutable()
        for end in (source, target):
            if end not in self.stages and end not in self.storages:
                raise UnknownElement(f"unknown flow endpoint '{end}'")
        if source in self.storages and target in self.storages:
            if strict:
                raise IllegalFlow("storage -> storage is not a flow", "IllegalStorageFlow")
        elif strict:
            problem = self.flow_problem(source, target)
            if problem:
                rule, message = problem
                raise IllegalFlow(f"{rule}: {self.path(source)} -> {self.path(target)}: {message}", rule)
        fid = self._new_id("f")
        self.flows[fid] = Flow(fid, source, target)
        return fid

    def add_trigger(self, source: str, target: str, condition: Optional[Expr] = None,
                    *, strict: bool = True) -> str:
        self._check_mutable()
        for end in (source, target):
            if end not in self.stages:
                raise UnknownElement(f"unknown trigger endpoint '{end}'")
        if strict and self.stages[target].kind not in legality.TRIGGER_TARGETS:
            raise IllegalTriggerTarget(
                f"trigger target {self.path(target)} is a {self.stages[target].kind} stage; "
                "only create and process stages can be triggered")
        tid = self._new_id("t")
        self.triggers[tid] = Trigger(tid, source, target, condition)
        return tid

    def bind_input(self, name: str, stage: str) -> None:
        self._check_mutable()
        if stage not in self.stages:
            raise UnknownElement(f"unknown input stage '{stage}'")
        if self.stages[stage].kind not in (StageKind.TRANSFER, StageKind.CREATE):
            raise ModelError(f"input '{name}' must target a transfer or create stage, "
                             f"not {self.path(stage)}")
        if name in self.inputs:
            raise DuplicateName(f"input '{name}' already bound")
        self.inputs[name] = stage

    # queries

    def machine(self, mid: str) -> Machine:
        try:
            return self.machines[mid]
        except KeyError:
            raise UnknownElement(f"unknown machine '{mid}'") from None

    def kind_of(self, element: str) -> str:
        if element in self.stages:
            return self.stages[element].kind
        if element in self.storages:
            return STORAGE
        raise UnknownElement(f"'{element}' is neither a stage nor a storage")

    def owner_of(self, element: str) -> str:
        if element in self.stages:
            return self.stages[element].owner
        return self.storages[element].owner

    def ancestors(self, mid: str) -> Iterator[str]:
        """``mid`` followed by its ancestors, innermost first."""
        seen = set()
        current: Optional[str] = mid
        while current is not None and current not in seen:
            seen.add(current)
            yield current
            current = self.machines[current].parent

    def same_machine(self, source: str, target: str) -> bool:
        if source in self.storages:
            return self.storages[source].owner in self.ancestors(self.stages[target].owner)
        if target in self.storages:
            return self.storages[target].owner in self.ancestors(self.stages[source].owner)
        return self.stages[source].owner == self.stages[target].owner

    def flow_problem(self, source: str, target: str) -> Optional[tuple[str, str]]:
        """``None`` if the flow is legal, else ``(rule, message)``."""
        if source in self.storages and target in self.storages:
            return "IllegalStorageFlow", "storage -> storage is not a flow"
        src, dst = self.kind_of(source), self.kind_of(target)
        same = self.same_machine(source, target)
        if legality.is_legal(src, dst, same):
            return None
        return legality.explain(src, dst, same)

    def machine_path(self, mid: str) -> str:
        return ".".join(reversed([self.machines[m].name for m in self.ancestors(mid)]))

    def path(self, element: str) -> str:
        if element in self.machines:
            return self.machine_path(element)
        if element in self.stages:
            stage = self.stages[element]
            return f"{self.machine_path(stage.owner)}.{stage.kind}"
        if element in self.storages:
            cell = self.storages[element]
            return f"{self.machine_path(cell.owner)}.{cell.name}"
        if element in self.flows:
            flow = self.flows[element]
            return f"{self.path(flow.source)} -> {self.path(flow.target)}"
        if element in self.triggers:
            trig = self.triggers[element]
            return f"{self.path(trig.source)} => {self.path(trig.target)}"
        raise UnknownElement(f"unknown element '{element}'")

    def stage_of(self, machine: str, kind: StageKind | str) -> Optional[str]:
        return self.machine(machine).stages.get(StageKind(kind))

    def edges(self) -> Iterator[Edge]:
        yield from self.flows.values()
        yield from self.triggers.values()

    def outgoing_flows(self, element: str) -> list[Flow]:
        return [f for f in self.flows.values() if f.source == element]

    def outgoing_triggers(self, stage: str) -> list[Trigger]:
        return [t for t in self.triggers.values() if t.source == stage]

    def contains(self, element: str) -> bool:
        return any(element in table for table in
                   (self.machines, self.stages, self.flows, self.triggers, self.storages))

    def find_machine(self, parts: Sequence[str], scope: Optional[str] = None) -> Optional[str]:
        """Resolve a dotted machine path, searching outward from ``scope``."""
        for base in self._scopes(scope):
            found = self._walk(base, parts)
            if found is not None:
                return found
        return None

    def resolve(self, parts: Sequence[str], scope: Optional[str] = None) -> Optional[str]:
        """Resolve a dotted path ending in a stage keyword or storage name.

        Lookup starts in ``scope`` and widens to each enclosing machine and
        finally the top level; the first scope where the path resolves wins.
        """
        *prefix, last = parts
        for base in self._scopes(scope):
            owner = self._walk(base, prefix) if prefix else base
            if owner is None:
                continue
            hit = self._leaf(owner, last)
            if hit is not None:
                return hit
        return None

    def _scopes(self, scope: Optional[str]) -> list[Optional[str]]:
        return [*(self.ancestors(scope) if scope else ()), None]

    def _walk(self, base: Optional[str], parts: Sequence[str]) -> Optional[str]:
        current = base
        for name in parts:
            pool = self.machines[current].children if current else self.top_level()
            current = next((m for m in pool if self.machines[m].name == name), None)
            if current is None:
                return None
        return current

    def _leaf(self, owner: Optional[str], last: str) -> Optional[str]:
        if owner is None:
            return None
        machine = self.machines[owner]
        if last in StageKind._value2member_map_:
            return machine.stages.get(StageKind(last))
        return next((s for s in machine.storages if self.storages[s].name == last), None)

    def resolve_storage(self, name: str, machine: Optional[str]) -> Optional[str]:
        """Storage an expression name refers to, as seen from ``machine``.

        The nearest enclosing machine that owns a storage of that name wins;
        failing that, a storage whose name is unique across the model.
        """
        if machine is not None:
            for mid in self.ancestors(machine):
                for cid in self.machines[mid].storages:
                    if self.storages[cid].name == name:
                        return cid
        matches = [c.id for c in self.storages.values() if c.name == name]
        return matches[0] if len(matches) == 1 else None

    def input_name(self, stage: str) -> str:
        return self.machine_path(self.stages[stage].owner)


def check_annotation(kind: StageKind, annotation: Annotation) -> None:
    if annotation.emit is not None:
        if kind is not StageKind.CREATE:
            raise EmitOnNonCreate(f"emit is only allowed on create stages, not {kind}")
        if not all(is_thing(v) for v in annotation.emit):
            raise InvalidAnnotation("emit list must contain literal things")
    if sum(isinstance(a, Transform) for a in annotation.actions) > 1:
        raise InvalidAnnotation("at most one transforming action per stage")
    if isinstance(annotation.delay, Literal):
        value = annotation.delay.value
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise InvalidAnnotation(f"delay must be a non-negative integer, got {render(value)}")


def new_model(name: str) -> StaticModel:
    return StaticModel(name)


def structure(model: StaticModel) -> tuple:
    """Id-free, order-preserving description of a model.

    Two models with equal structures are the same diagram built in the
    same order.
    """
    p = model.path
    machines = tuple(p(m) for m in model.machines)
    stages = tuple((p(s.id), s.annotation.source()) for s in model.stages.values())
    storages = tuple((p(c.id), None if c.initial is None else render(c.initial))
                     for c in model.storages.values())
    flows = tuple((p(f.source), p(f.target)) for f in model.flows.values())
    triggers = tuple((p(t.source), p(t.target), None if t.condition is None else to_source(t.condition))
                     for t in model.triggers.values())
    inputs = tuple((name, p(stage)) for name, stage in model.inputs.items())
    return (model.name, machines, stages, storages, flows, triggers, inputs)


def canonical_form(model: StaticModel) -> tuple:
    """Like :func:`structure` but insensitive to construction order."""
    name, machines, stages, storages, flows, triggers, inputs = structure(model)

    return (name, tuple(sorted(machines)), tuple(sorted(stages, key=repr)),
            tuple(sorted(storages, key=repr)), tuple(sorted(flows)),
            tuple(sorted(triggers, key=repr)), tuple(sorted(inputs)))


def elements(model: StaticModel) -> Iterable[str]:
    yield from model.machines
    yield from model.stages
    yield from model.storages
    yield from model.flows
    yield from model.triggers
