"""Structural checks on static models and the finiteness check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

import networkx as nx

from .expr import action_names, names
from .legality import LEGAL_FLOWS, STORAGE, TRIGGER_TARGETS, StageKind, is_legal
from .model import StaticModel

CYCLE_CAP = 1000


@dataclass(frozen=True)
class Violation:
    element: str
    rule: str
    message: str
    path: str

    def __str__(self) -> str:
        return f"{self.rule} at {self.path}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def render(self) -> str:
        return "".join(f"{v}\n" for v in self.violations)

    def rules(self) -> list[str]:
        return [v.rule for v in self.violations]


@dataclass
class FinitenessReport:
    cycles: list[list[str]]
    repeat_marked: frozenset[str]
    truncated: bool = False
    _acyclic: Optional[bool] = None

    @property
    def acyclic(self) -> bool:
        return self._acyclic if self._acyclic is not None else not self.cycles

    def render(self, model: StaticModel) -> str:
        lines = [f"acyclic: {'true' if self.acyclic else 'false'}"]
        for cycle in self.cycles:
            lines.append("cycle: " + " ; ".join(model.path(e) for e in cycle))
        if self.truncated:
            lines.append(f"(cycle listing capped at {CYCLE_CAP})")
        return "\n".join(lines) + "\n"


def validate_structure(model: StaticModel) -> ValidationReport:
    """Check every structural rule; problems are returned, never raised."""
    report = ValidationReport()

    def add(element: str, rule: str, message: str) -> None:
        try:
            where = model.path(element)
        except Exception:
            where = element
        report.violations.append(Violation(element, rule, message, where))

    for mid, machine in model.machines.items():
        if machine.parent is not None and machine.parent not in model.machines:
            add(mid, "DanglingReference", f"parent '{machine.parent}' does not exist")
            continue
        chain = []
        current = mid
        while current is not None:
            if current in chain:
                add(mid, "CyclicHierarchy", "machine is its own ancestor")
                break
            chain.append(current)
            current = model.machines[current].parent if current in model.machines else None
    for mid, machine in model.machines.items():
        kinds = [model.stages[s].kind for s in machine.stages.values() if s in model.stages]
        for kind in StageKind:
            if kinds.count(kind) > 1:
                add(mid, "DuplicateStageKind", f"more than one {kind} stage")

    for stage in model.stages.values():
        if stage.owner not in model.machines:
            add(stage.id, "DanglingReference", f"owner '{stage.owner}' does not exist")
            continue
        ann = stage.annotation
        if ann.emit is not None and stage.kind is not StageKind.CREATE:
            add(stage.id, "EmitOnNonCreate", "emit is only allowed on create stages")
        exprs = [e for e in (ann.guard, ann.delay) if e is not None]
        used = [n for e in exprs for n in names(e)]
        used += [n for a in ann.actions for n in action_names(a)]
        for name in dict.fromkeys(used):
            if model.resolve_storage(name, stage.owner) is None:
                add(stage.id, "UnboundName", f"no storage named '{name}' is visible here")

    for flow in model.flows.values():
        ends = [e for e in (flow.source, flow.target) if e not in model.stages and e not in model.storages]
        if ends:
            add(flow.id, "DanglingReference", f"endpoint '{ends[0]}' does not exist")
            continue
        problem = model.flow_problem(flow.source, flow.target)
        if problem:
            add(flow.id, problem[0], problem[1])

    for trig in model.triggers.values():
        ends = [e for e in (trig.source, trig.target) if e not in model.stages]
        if ends:
            add(trig.id, "DanglingReference", f"endpoint '{ends[0]}' is not a stage")
            continue
        target = model.stages[trig.target]
        if target.kind not in TRIGGER_TARGETS:
            add(trig.id, "IllegalTriggerTarget",
                f"{target.kind} stages cannot be triggered; only create and process")
        if trig.condition is not None:
            for name in dict.fromkeys(names(trig.condition)):
                if model.resolve_storage(name, model.stages[trig.source].owner) is None:
                    add(trig.id, "UnboundName", f"no storage named '{name}' is visible here")

    for name, stage in model.inputs.items():
        if stage not in model.stages:
            add(stage, "DanglingReference", f"input '{name}' targets a missing stage")
        elif model.stages[stage].kind not in (StageKind.TRANSFER, StageKind.CREATE):
            add(stage, "IllegalInputTarget", f"input '{name}' must enter at a transfer or create stage")
    return report


def flow_graph(model: StaticModel, exclude: Iterable[str] = ()) -> nx.MultiDiGraph:
    """Directed graph of thing movement and activation.

    A transfer stage is split into an inbound node (fed by other machines,
    feeding its own receive) and an outbound node (fed by its own release,
    feeding other machines), since one transfer stage plays both roles.
    Edges leaving a storage are reads and do not move things, so they are
    left out.  Edge keys are flow/trigger ids.
    """
    skip = set(exclude)
    graph = nx.MultiDiGraph()
    for sid, stage in model.stages.items():
        if stage.kind is StageKind.TRANSFER:
            graph.add_node((sid, "in"))
            graph.add_node((sid, "out"))
        else:
            graph.add_node((sid, None))

    def node(stage: str, role: str) -> tuple[str, Optional[str]]:
        return (stage, role) if model.stages[stage].kind is StageKind.TRANSFER else (stage, None)

    for flow in model.flows.values():
        if flow.id in skip or flow.source in model.storages:
            continue
        if flow.target in model.storages:
            graph.add_edge(node(flow.source, "in"), ("storage", flow.target), key=flow.id)
            continue
        intra = model.stages[flow.source].owner == model.stages[flow.target].owner
        if intra:
            graph.add_edge(node(flow.source, "in"), node(flow.target, "out"), key=flow.id)
        else:
            graph.add_edge(node(flow.source, "out"), node(flow.target, "in"), key=flow.id)
    for trig in model.triggers.values():
        if trig.id in skip:
            continue
        sources = ([(trig.source, "in"), (trig.source, "out")]
                   if model.stages[trig.source].kind is StageKind.TRANSFER else [(trig.source, None)])
        for src in sources:
            graph.add_edge(src, node(trig.target, "in"), key=trig.id)
    return graph


def check_finiteness(model: StaticModel, repeat_marked: Iterable[str] = ()) -> FinitenessReport:
    """Look for cycles over flows and triggers, ignoring repeat-marked edges."""
    marked = frozenset(repeat_marked)
    graph = flow_graph(model, marked)
    acyclic = nx.is_directed_acyclic_graph(graph)
    cycles: list[list[str]] = []
    truncated = False
    if not acyclic:
        simple = nx.DiGraph(graph)
        seen: set[tuple[str, ...]] = set()
        for node_cycle in itertools.islice(nx.simple_cycles(simple), CYCLE_CAP + 1):
            hops = zip(node_cycle, node_cycle[1:] + node_cycle[:1])
            edge_ids = [min(graph.get_edge_data(a, b), key=_edge_order) for a, b in hops]
            # rotate so the listing starts at the smallest id, for stable output
            start = edge_ids.index(min(edge_ids, key=_edge_order))
            edge_ids = edge_ids[start:] + edge_ids[:start]
            if tuple(edge_ids) in seen:
                continue
            if len(cycles) == CYCLE_CAP:
                truncated = True
                break
            seen.add(tuple(edge_ids))
            cycles.append(edge_ids)
        cycles.sort(key=lambda c: [_edge_order(e) for e in c])
    return FinitenessReport(cycles, marked, truncated, acyclic)


def _edge_order(edge_id: str) -> tuple[str, int]:
    head = edge_id.rstrip("0123456789")
    return head, int(edge_id[len(head):])


def repeat_marked_edges(model: StaticModel, events, repeats: Iterable[str]) -> frozenset[str]:
    """Edges internal to the region of any repeat-marked event."""
    wanted = set(repeats)
    marked: set[str] = set()
    for event in events:
        if event.name in wanted:
            marked |= event.region.flows | event.region.triggers
    return frozenset(marked)


__all__ = [
    "LEGAL_FLOWS", "STORAGE", "FinitenessReport", "ValidationReport", "Violation",
    "check_finiteness", "flow_graph", "is_legal", "repeat_marked_edges", "validate_structure",
]
