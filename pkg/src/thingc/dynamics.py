"""Regions, events and the behavior graph built on top of a static model."""

from __future__ import annotations

import graphlib
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import (
    CyclicBehavior,
    DisconnectedComposite,
    DisconnectedRegion,
    EmptyRegion,
    EventError,
    ForeignRegion,
    NegativeDuration,
    NonzeroGenericDuration,
    UnknownElement,
    UnknownEvent,
)
from .model import StaticModel


@dataclass(frozen=True)
class Region:
    """A weakly connected piece of a static model.

    ``elements`` keeps the stages and storages in the order they were
    named; ``flows`` and ``triggers`` are the edges the region induces.
    """

    elements: tuple[str, ...]
    stages: frozenset[str]
    storages: frozenset[str]
    flows: frozenset[str]
    triggers: frozenset[str]
    model: StaticModel = field(compare=False, repr=False, hash=False)

    @property
    def nodes(self) -> frozenset[str]:
        return self.stages | self.storages

    def is_generic(self) -> bool:
        return len(self.stages) == 1 and not self.storages

    def __contains__(self, element: str) -> bool:
        return element in self.nodes or element in self.flows or element in self.triggers

    def paths(self) -> list[str]:
        return [self.model.path(e) for e in self.elements]


@dataclass(frozen=True)
class EventDef:
    name: str
    region: Region
    duration: int = 0
    label: Optional[str] = None

    @property
    def generic(self) -> bool:
        return self.region.is_generic()


@dataclass(frozen=True)
class BehaviorGraph:
    events: dict[str, EventDef]
    edges: tuple[tuple[str, str], ...]
    repeats: tuple[str, ...]

    def predecessors(self, name: str) -> list[str]:
        return [a for a, b in self.edges if b == name]

    def successors(self, name: str) -> list[str]:
        return [b for a, b in self.edges if a == name]

    def topological_order(self) -> list[str]:
        sorter = graphlib.TopologicalSorter({n: set() for n in self.events})
        for a, b in self.edges:
            sorter.add(b, a)
        return list(sorter.static_order())


def _components(model: StaticModel, nodes: set[str]) -> list[frozenset[str]]:
    neighbours: dict[str, set[str]] = {n: set() for n in nodes}
    for edge in model.edges():
        if edge.source in nodes and edge.target in nodes:
            neighbours[edge.source].add(edge.target)
            neighbours[edge.target].add(edge.source)
    seen: set[str] = set()
    parts = []
    for start in sorted(nodes, key=_id_key):
        if start in seen:
            continue
        part = {start}
        queue = deque([start])
        while queue:
            for nxt in neighbours[queue.popleft()]:
                if nxt not in part:
                    part.add(nxt)
                    queue.append(nxt)
        seen |= part
        parts.append(frozenset(part))
    return parts


def _id_key(element: str) -> tuple[str, int]:
    head = element.rstrip("0123456789")
    return head, int(element[len(head):] or 0)


def define_region(model: StaticModel, elements: Iterable[str], *,
                  error: type[DisconnectedRegion] = DisconnectedRegion) -> Region:
    """Build a region from stage, storage, flow and trigger ids.

    Flows and triggers contribute their endpoints; the region then holds
    every model edge whose endpoints both lie inside it.
    """
    ordered: list[str] = []

    def note(element: str) -> None:
        if element not in ordered:
            ordered.append(element)

    for element in elements:
        if element in model.stages or element in model.storages:
            note(element)
        elif element in model.flows:
            note(model.flows[element].source)
            note(model.flows[element].target)
        elif element in model.triggers:
            note(model.triggers[element].source)
            note(model.triggers[element].target)
        elif element in model.machines:
            raise UnknownElement(f"machine '{model.path(element)}' cannot be part of a region; name its stages")
        else:
            raise UnknownElement(f"unknown region element '{element}'")
    if not ordered:
        raise EmptyRegion("a region needs at least one stage or storage")
    nodes = set(ordered)
    parts = _components(model, nodes)
    if len(parts) > 1:
        listing = "; ".join("{" + ", ".join(sorted(model.path(e) for e in p)) + "}" for p in parts)
        raise error(f"region is not connected: {listing}", parts)
    return Region(
        elements=tuple(ordered),
        stages=frozenset(e for e in ordered if e in model.stages),
        storages=frozenset(e for e in ordered if e in model.storages),
        flows=frozenset(f.id for f in model.flows.values() if f.source in nodes and f.target in nodes),
        triggers=frozenset(t.id for t in model.triggers.values() if t.source in nodes and t.target in nodes),
        model=model,
    )


def define_event(name: str, region: Region, duration: int = 0, label: Optional[str] = None) -> EventDef:
    if not name:
        raise EventError("event name must be non-empty")
    if isinstance(duration, bool) or not isinstance(duration, int):
        raise EventError(f"duration must be an integer, got {duration!r}")
    if duration < 0:
        raise NegativeDuration(f"event '{name}' has negative duration {duration}")
    if region.is_generic() and duration != 0:
        raise NonzeroGenericDuration(
            f"event '{name}' covers a single stage, so it is instantaneous; got duration {duration}")
    return EventDef(name, region, duration, label)


def compose(events: Sequence[EventDef], name: str) -> EventDef:
    """Join events into one whose region is the union of theirs.

    The composite lasts as long as its longest constituent.
    """
    if len(events) < 2:
        raise EventError("a composite event needs at least two constituents")
    model = events[0].region.model
    if any(e.region.model is not model for e in events):
        raise ForeignRegion("composite constituents come from different models")
    merged = [el for e in events for el in e.region.elements]
    region = define_region(model, merged, error=DisconnectedComposite)
    return EventDef(name, region, max(e.duration for e in events))


def build_behavior(events: Sequence[EventDef], edges: Iterable[tuple[str, str]] = (),
                   repeats: Iterable[str] = ()) -> BehaviorGraph:
    table: dict[str, EventDef] = {}
    for event in events:
        if event.name in table:
            raise EventError(f"event '{event.name}' declared twice")
        table[event.name] = event
    repeat_list: list[str] = []
    for name in repeats:
        if name not in table:
            raise UnknownEvent(f"repeat names unknown event '{name}'")
        if name not in repeat_list:
            repeat_list.append(name)
    kept: list[tuple[str, str]] = []
    for a, b in edges:
        for end in (a, b):
            if end not in table:
                raise UnknownEvent(f"behavior edge {a} -> {b} names unknown event '{end}'")
        if a == b:
            if a not in repeat_list:
                raise CyclicBehavior(f"self-loop on '{a}' without a repeat declaration", [a, a])
            continue
        if (a, b) not in kept:
            kept.append((a, b))
    graph = BehaviorGraph(table, tuple(kept), tuple(repeat_list))
    try:
        graph.topological_order()
    except graphlib.CycleError as exc:
        cycle = list(exc.args[1])
        raise CyclicBehavior("behavior edges form a cycle: " + " -> ".join(cycle), cycle) from None
    return graph
