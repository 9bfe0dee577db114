"""DOT renderings of models, event overlays and behavior graphs, and trace
serialization as JSON lines or TSV.

Node ids in DOT output are the model's element ids, so repeated exports of
the same document are byte-identical.
"""

from __future__ import annotations

import json
from typing import Optional, Sequence

from .dynamics import BehaviorGraph, EventDef
from .errors import ForeignRegion, UnknownFormat
from .expr import to_source
from .model import StaticModel
from .simulator import AttributedTrace, Trace
from .things import render

TRACE_FORMATS = ("jsonl", "tsv")
TSV_HEADER = ("seq", "stage", "kind", "role", "start", "end", "thing", "events")


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _static_body(model: StaticModel) -> list[str]:
    lines: list[str] = []

    def machine(mid: str, depth: int) -> None:
        pad = "  " * depth
        m = model.machines[mid]
        lines.append(f"{pad}subgraph {_q('cluster_' + mid)} {{")
        lines.append(f"{pad}  label={_q(m.name)};")
        for sid in m.stages.values():
            lines.append(f"{pad}  {_q(sid)} [label={_q(str(model.stages[sid].kind))}, shape=box];")
        for cid in m.storages:
            lines.append(f"{pad}  {_q(cid)} [label={_q(model.storages[cid].name)}, shape=cylinder];")
        for child in m.children:
            machine(child, depth + 1)
        lines.append(f"{pad}}}")

    for mid in model.top_level():
        machine(mid, 1)
    for flow in model.flows.values():
        lines.append(f"  {_q(flow.source)} -> {_q(flow.target)} [id={_q(flow.id)}];")
    for trig in model.triggers.values():
        attrs = f"id={_q(trig.id)}, style=dashed"
        if trig.condition is not None:
            attrs += f", label={_q('when ' + to_source(trig.condition))}"
        lines.append(f"  {_q(trig.source)} -> {_q(trig.target)} [{attrs}];")
    return lines


def _document(name: str, body: list[str]) -> str:
    return "\n".join([f"digraph {_q(name)} {{", *body, "}"]) + "\n"


def export_dot_static(model: StaticModel) -> str:
    """Machines as nested clusters, flows solid, triggers dashed, storages as cylinders."""
    return _document(model.name, _static_body(model))


def export_dot_events(model: StaticModel, events: Sequence[EventDef]) -> str:
    """The static rendering plus one dotted boundary per event region."""
    body = _static_body(model)
    for event in events:
        if event.region.model is not model:
            raise ForeignRegion(f"event '{event.name}' is defined over a different model")
        label = event.name if event.duration == 0 else f"{event.name} [{event.duration}]"
        body.append(f"  subgraph {_q('cluster_event_' + event.name)} {{")
        body.append(f"    label={_q(label)};")
        body.append("    style=dotted;")
        body.extend(f"    {_q(node)};" for node in event.region.elements)
        body.append("  }")
    return _document(model.name, body)


def export_dot_behavior(behavior: BehaviorGraph, name: str = "behavior") -> str:
    """One node per event, an edge per precedence and a self-loop per repeat."""
    body = []
    for event in behavior.events.values():
        label = event.name if event.duration == 0 else f"{event.name} [{event.duration}]"
        body.append(f"  {_q(event.name)} [label={_q(label)}];")
    body.extend(f"  {_q(a)} -> {_q(b)};" for a, b in behavior.edges)
    body.extend(f"  {_q(r)} -> {_q(r)} [style=dashed];" for r in behavior.repeats)
    return _document(name, body)


def _thing(value) -> Optional[str]:
    return None if value is None else render(value)


def _summary(trace: Trace) -> dict:
    return {
        "outputs": {k: [render(v) for v in vs] for k, vs in trace.outputs.items()},
        "storages": {k: render(v) for k, v in trace.final_storages.items()},
        "verdict": trace.verdict,
    }


def export_trace(trace: Trace, fmt: str = "jsonl", attributed: Optional[AttributedTrace] = None) -> str:
    """Serialize ``trace``: one record per instance, then a summary record.

    With ``attributed`` given, each instance also lists its events.
    """
    if fmt not in TRACE_FORMATS:
        raise UnknownFormat(f"unknown trace format '{fmt}' (expected one of {', '.join(TRACE_FORMATS)})")
    labels = attributed.labels if attributed is not None else None
    rows = []
    for n, inst in enumerate(trace.instances):
        record = {"type": "instance", "seq": inst.seq, "stage": inst.path, "kind": str(inst.kind),
                  "role": inst.role, "start": inst.start, "end": inst.end, "thing": _thing(inst.thing)}
        if labels is not None:
            record["events"] = list(labels[n])
        rows.append(record)
    summary = _summary(trace)
    if fmt == "jsonl":
        lines = [json.dumps(r, ensure_ascii=False) for r in rows]
        lines.append(json.dumps({"type": "summary", **summary}, ensure_ascii=False))
        return "\n".join(lines) + "\n"
    lines = ["\t".join(TSV_HEADER)]
    for r in rows:
        events = ",".join(r["events"]) if "events" in r else ""
        fields = [r["seq"], r["stage"], r["kind"], r["role"] or "-", r["start"], r["end"],
                  r["thing"] if r["thing"] is not None else "-", events or "-"]
        lines.append("\t".join(str(f).replace("\t", "\\t") for f in fields))
    lines.append("\t".join([
        "summary",
        "outputs=" + json.dumps(summary["outputs"], ensure_ascii=False),
        "storages=" + json.dumps(summary["storages"], ensure_ascii=False),
        "verdict=" + (trace.verdict or "-"),
    ]))
    return "\n".join(lines) + "\n"


def read_jsonl(text: str) -> tuple[list[dict], dict]:
    """Parse exported JSON lines back into instance records and the summary."""
    records = [json.loads(line) for line in text.splitlines() if line.strip()]
    instances = [r for r in records if r["type"] == "instance"]
    summaries = [r for r in records if r["type"] == "summary"]
    if len(summaries) != 1 or records[-1]["type"] != "summary":
        raise ValueError("trace must end with exactly one summary record")
    return instances, summaries[0]
