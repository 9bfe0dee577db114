"""Shared test helpers: document signatures and a random document generator."""

from __future__ import annotations

import random

from thingc.dsl import ModelDocument
from thingc.dynamics import build_behavior, define_event, define_region
from thingc.expr import Binary, Index, It, Len, ListExpr, Literal, Name, Now, Unary, Assign, Transform, Verdict
from thingc.legality import StageKind
from thingc.model import Annotation, StaticModel, canonical_form
from thingc.things import Record, Symbol, render

RESERVED = {"it", "now", "true", "false", "and", "or", "not", "len", "verdict", "model", "machine",
            "storage", "flow", "trigger", "when", "after", "emit", "input", "event", "over",
            "duration", "behavior", "repeat", "do", "create", "process", "release", "transfer",
            "receive", "accepted", "rejected"}


def doc_signature(doc: ModelDocument) -> tuple:
    """Everything a document says, free of ids and declaration order."""
    model = doc.model
    events = tuple(sorted(
        (e.name, e.label, e.duration, tuple(sorted(model.path(x) for x in e.region.nodes)))
        for e in doc.events))
    behavior = None
    if doc.behavior is not None:
        behavior = (tuple(sorted(doc.behavior.edges)), tuple(sorted(doc.behavior.repeats)))
    inputs = tuple(sorted((k, tuple(render(v) for v in vs)) for k, vs in doc.inputs.items()))
    return canonical_form(model), events, behavior, inputs


# random documents

def _name(rng: random.Random, taken: set[str]) -> str:
    while True:
        name = rng.choice(["m", "Box", "node", "Unit", "x", "Tank", "Cell"]) + str(rng.randrange(100))
        if name not in taken and name not in RESERVED:
            taken.add(name)
            return name


def random_thing(rng: random.Random, depth: int = 0):
    pick = rng.randrange(7 if depth < 2 else 4)
    if pick == 0:
        return rng.randint(-50, 50)
    if pick == 1:
        return rng.choice([True, False])
    if pick == 2:
        return Symbol(rng.choice(["a", "Odd", "red", "go_1"]))
    if pick == 3:
        return rng.choice(["", "text", 'q"uote', "tab\tand\\slash"])
    if pick in (4, 5):
        return tuple(random_thing(rng, depth + 1) for _ in range(rng.randrange(3)))
    keys = rng.sample(["a", "b", "c"], rng.randrange(1, 3))
    return Record(tuple((k, random_thing(rng, depth + 1)) for k in keys))


def random_expr(rng: random.Random, storages: list[str], depth: int = 0):
    if depth > 2 or rng.random() < 0.3:
        leaves = [lambda: Literal(rng.randint(-9, 9)), lambda: It(), lambda: Now(),
                  lambda: Literal(Symbol("s")), lambda: Literal(rng.choice([True, False])),
                  lambda: Literal("t")]
        if storages:
            leaves.append(lambda: Name(rng.choice(storages)))
        return rng.choice(leaves)()
    pick = rng.randrange(6)
    sub = lambda: random_expr(rng, storages, depth + 1)  # noqa: E731
    if pick == 0:
        return Unary(rng.choice(["-", "not"]), sub())
    if pick == 1:
        return Len(sub())
    if pick == 2:
        return Index(sub(), sub())
    if pick == 3:
        return ListExpr(tuple(sub() for _ in range(rng.randrange(3))))
    op = rng.choice(["+", "-", "*", "/", "%", "=", "!=", "<", "<=", ">", ">=", "and", "or"])
    return Binary(op, sub(), sub())


def random_document(seed: int) -> ModelDocument:
    rng = random.Random(seed)
    model = StaticModel(f"doc{seed}")
    taken: set[str] = set()
    machines: list[str] = []
    for _ in range(rng.randint(1, 5)):
        parent = rng.choice([None, *machines]) if machines else None
        machines.append(model.add_machine(_name(rng, taken), parent))
    storage_names: list[str] = []
    for mid in machines:
        for _ in range(rng.randrange(2)):
            name = _name(rng, taken)
            initial = random_thing(rng) if rng.random() < 0.6 else None
            model.add_storage(mid, name, initial)
            storage_names.append(name)
    for mid in machines:
        for kind in StageKind:
            if rng.random() < 0.6:
                ann = Annotation()
                if rng.random() < 0.5:
                    actions = []
                    if rng.random() < 0.5:
                        actions.append(Transform(random_expr(rng, storage_names)))
                    if storage_names and rng.random() < 0.5:
                        actions.append(Assign(rng.choice(storage_names), random_expr(rng, storage_names)))
                    if rng.random() < 0.2:
                        actions.append(Verdict(rng.choice(["accepted", "rejected"])))
                    ann = Annotation(
                        guard=random_expr(rng, storage_names) if rng.random() < 0.5 else None,
                        delay=Literal(rng.randrange(5)) if rng.random() < 0.3 else None,
                        actions=tuple(actions),
                        emit=(tuple(random_thing(rng) for _ in range(rng.randrange(1, 3)))
                              if kind is StageKind.CREATE and rng.random() < 0.4 else None),
                    )
                model.add_stage(mid, kind, ann)
    nodes = list(model.stages) + list(model.storages)
    pairs = [(a, b) for a in model.stages for b in nodes if a != b and model.flow_problem(a, b) is None]
    pairs += [(c, s) for c in model.storages for s in model.stages if model.flow_problem(c, s) is None]
    for a, b in rng.sample(pairs, min(len(pairs), rng.randrange(8))):
        model.add_flow(a, b)
    targets = [s for s in model.stages if model.stages[s].kind in (StageKind.CREATE, StageKind.PROCESS)]
    for _ in range(rng.randrange(4) if targets else 0):
        cond = random_expr(rng, storage_names) if rng.random() < 0.5 else None
        model.add_trigger(rng.choice(list(model.stages)), rng.choice(targets), cond)
    inputs = {}
    entries = [s for s in model.stages if model.stages[s].kind in (StageKind.CREATE, StageKind.TRANSFER)]
    for stage in rng.sample(entries, min(len(entries), rng.randrange(3))):
        name = model.input_name(stage)
        if name in model.inputs:
            continue
        model.bind_input(name, stage)
        inputs[name] = tuple(random_thing(rng) for _ in range(rng.randrange(4)))
    events = []
    candidates = [(s,) for s in model.stages] + [
        (e.source, e.target) for e in model.edges() if e.source != e.target]
    for i, elements in enumerate(rng.sample(candidates, min(len(candidates), rng.randrange(4)))):
        region = define_region(model, elements)
        duration = 0 if region.is_generic() else rng.randrange(20)
        label = rng.choice([None, "an event", 'quoted "label"'])
        events.append(define_event(f"E{i + 1}", region, duration, label))
    behavior = None
    if events and rng.random() < 0.7:
        names = [e.name for e in events]
        edges = [(a, b) for i, a in enumerate(names) for b in names[i + 1:] if rng.random() < 0.5]
        repeats = [n for n in names if rng.random() < 0.3]
        behavior = build_behavior(events, edges, repeats)
    return ModelDocument(model, events, behavior, inputs)
