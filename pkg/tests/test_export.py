import json

import pydot
import pytest

from thingc.corpus import corpus_manifest
from thingc.dsl import parse
from thingc.dynamics import build_behavior
from thingc.errors import ForeignRegion, UnknownFormat
from thingc.export import (
    TSV_HEADER,
    export_dot_behavior,
    export_dot_events,
    export_dot_static,
    export_trace,
    read_jsonl,
)
from thingc.simulator import attribute, execute_document

NAMES = [e.name for e in corpus_manifest()]


def dot_graph(text):
    graphs = pydot.graph_from_dot_data(text)
    assert graphs and len(graphs) == 1
    return graphs[0]


def all_edges(graph):
    edges = list(graph.get_edges())
    for sub in graph.get_subgraphs():
        edges += all_edges(sub)
    return edges


def run(entry):
    doc = entry.load()
    trace = execute_document(doc, horizon=entry.horizon)
    return doc, trace, attribute(trace, doc.events)


@pytest.mark.parametrize("entry", corpus_manifest(), ids=NAMES)
class TestGolden:
    def test_static(self, entry, golden):
        golden(f"{entry.name}.static.dot", export_dot_static(entry.load().model))

    def test_events(self, entry, golden):
        doc = entry.load()
        golden(f"{entry.name}.events.dot", export_dot_events(doc.model, doc.events))

    def test_behavior(self, entry, golden):
        doc = entry.load()
        golden(f"{entry.name}.behavior.dot", export_dot_behavior(doc.behavior, f"{doc.model.name}_behavior"))

    def test_trace_jsonl(self, entry, golden):
        _, trace, attributed = run(entry)
        golden(f"{entry.name}.trace.jsonl", export_trace(trace, "jsonl", attributed))

    def test_trace_tsv(self, entry, golden):
        _, trace, attributed = run(entry)
        golden(f"{entry.name}.trace.tsv", export_trace(trace, "tsv", attributed))

    def test_byte_identical(self, entry):
        first, second = run(entry), run(entry)
        assert export_trace(first[1], "jsonl", first[2]) == export_trace(second[1], "jsonl", second[2])
        a, b = entry.load(), entry.load()
        assert export_dot_events(a.model, a.events) == export_dot_events(b.model, b.events)

    def test_pydot_accepts(self, entry):
        doc = entry.load()
        dot_graph(export_dot_static(doc.model))
        dot_graph(export_dot_events(doc.model, doc.events))
        dot_graph(export_dot_behavior(doc.behavior))

    def test_edges_once(self, entry):
        model = entry.load().model
        ids = [e.get("id").strip('"') for e in all_edges(dot_graph(export_dot_static(model)))]
        assert sorted(ids) == sorted(list(model.flows) + list(model.triggers))


class TestStatic:
    def test_empty_model(self):
        text = export_dot_static(parse("model empty {}").model)
        assert text == 'digraph "empty" {\n}\n'

    def test_no_events_matches_static(self, load):
        model = load("restaurant").model
        assert export_dot_events(model, []) == export_dot_static(model)

    def test_thermostat_dashed(self, load):
        edges = all_edges(dot_graph(export_dot_static(load("thermostat").model)))
        assert sum(1 for e in edges if e.get("style") == "dashed") == 4

    def test_nested_clusters(self, load):
        text = export_dot_static(load("restaurant").model)
        customer = text.index('label="Customer"')
        assert text.index('label="Order"', customer) > customer
        assert "shape=cylinder" in text

    def test_trigger_condition_label(self, load):
        assert 'label="when it % 2 = 1"' in export_dot_static(load("odd_even").model)

    def test_foreign_event(self, load):
        with pytest.raises(ForeignRegion):
            export_dot_events(load("odd_even").model, load("thermostat").events)

    def test_event_clusters_dotted(self, load):
        doc = load("traffic_light")
        text = export_dot_events(doc.model, doc.events)
        assert text.count("style=dotted;") == 6
        assert 'label="E1_red [50]"' in text


class TestBehaviorDot:
    def test_restaurant(self, load):
        graph = dot_graph(export_dot_behavior(load("restaurant").behavior))
        assert len(graph.get_nodes()) == 6 and len(graph.get_edges()) == 5

    def test_integers(self, load):
        graph = dot_graph(export_dot_behavior(load("example1_ten_integers").behavior))
        edges = graph.get_edges()
        assert len(graph.get_nodes()) == 2
        assert sum(1 for e in edges if e.get_source() != e.get_destination()) == 1
        assert sum(1 for e in edges if e.get_source() == e.get_destination()) == 2

    def test_named(self, load):
        doc = load("odd_even")
        assert export_dot_behavior(build_behavior(doc.events), "g").startswith('digraph "g" {')


class TestTrace:
    def test_empty_is_summary_only(self, load):
        trace = execute_document(load("example1_ten_integers"), {"User": []})
        lines = export_trace(trace).splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0]) == {"type": "summary", "outputs": {}, "storages": {}, "verdict": None}

    def test_jsonl_round_trip(self, load):
        doc = load("example1_ten_integers")
        trace = execute_document(doc)
        instances, summary = read_jsonl(export_trace(trace))
        assert len(instances) == len(trace.instances)
        assert [r["seq"] for r in instances] == [i.seq for i in trace.instances]
        assert summary["outputs"]["Algorithm.transfer"] == [str(n) for n in range(1, 11)]
        assert set(instances[0]) == {"type", "seq", "stage", "kind", "role", "start", "end", "thing"}

    def test_events_field(self, load):
        doc = load("restaurant")
        trace = execute_document(doc)
        instances, _ = read_jsonl(export_trace(trace, "jsonl", attribute(trace, doc.events)))
        assert all(r["events"] for r in instances)

    def test_tsv(self, load):
        trace = execute_document(load("odd_even"))
        lines = export_trace(trace, "tsv").splitlines()
        assert lines[0] == "\t".join(TSV_HEADER)
        assert len(lines) == len(trace.instances) + 2
        assert lines[-1] == 'summary\toutputs={"Odd.transfer": ["#Odd"]}\tstorages={}\tverdict=-'
        assert all(len(line.split("\t")) == len(TSV_HEADER) for line in lines[1:-1])

    def test_unknown_format(self, load):
        with pytest.raises(UnknownFormat):
            export_trace(execute_document(load("odd_even")), "xml")

    def test_read_requires_summary(self):
        with pytest.raises(ValueError):
            read_jsonl('{"type": "instance", "seq": 1}\n')
