"""Canonical `.tm` text for a model document."""

from __future__ import annotations

import json

from ..expr import to_source
from ..things import render


def print_model(doc) -> str:
    model = doc.model
    lines: list[str] = []
    body: list[str] = []

    def machine(mid: str, depth: int) -> None:
        m = model.machines[mid]
        pad = "  " * depth
        body.append(f"{pad}machine {m.name} {{")
        for sid in m.stages.values():
            stage = model.stages[sid]
            text = stage.annotation.source()
            body.append(f"{pad}  {stage.kind}{' ' + text if text else ''};")
        for cid in m.storages:
            cell = model.storages[cid]
            init = "" if cell.initial is None else f" = {render(cell.initial)}"
            body.append(f"{pad}  storage {cell.name}{init};")
        for child in m.children:
            machine(child, depth + 1)
        body.append(f"{pad}}}")

    for mid in model.top_level():
        machine(mid, 1)
    for flow in model.flows.values():
        body.append(f"  flow {model.path(flow.source)} -> {model.path(flow.target)};")
    for trig in model.triggers.values():
        cond = "" if trig.condition is None else f" when {to_source(trig.condition)}"
        body.append(f"  trigger {model.path(trig.source)} -> {model.path(trig.target)}{cond};")

    if body:
        lines.append(f"model {model.name} {{")
        lines.extend(body)
        lines.append("}")
    else:
        lines.append(f"model {model.name} {{ }}")

    for event in doc.events:
        label = "" if event.label is None else " " + json.dumps(event.label, ensure_ascii=False)
        paths = ", ".join(event.region.paths())
        duration = f" duration {event.duration}" if event.duration else ""
        lines.append(f"event {event.name}{label} over {{{paths}}}{duration};")
    if doc.behavior is not None:
        lines.append("behavior {")
        lines.extend(f"  {a} -> {b};" for a, b in doc.behavior.edges)
        lines.extend(f"  repeat {name};" for name in doc.behavior.repeats)
        lines.append("}")
    for name, stage in model.inputs.items():
        values = ", ".join(render(v) for v in doc.inputs.get(name, ()))
        lines.append(f"input {model.path(stage)} = [{values}];")
    return "\n".join(lines) + "\n"
