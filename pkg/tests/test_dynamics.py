import pytest

from thingc.dsl import parse
from thingc.dynamics import build_behavior, compose, define_event, define_region
from thingc.errors import (
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


def ids(model, *paths):
    return [model.resolve(p.split(".")) for p in paths]


E1_PATHS = ("Customer.Order.create", "Customer.Order.release", "Customer.Order.transfer",
            "System.Order.transfer", "System.Order.receive", "System.Order.process")


class TestRegions:
    def test_e1_region(self, load):
        model = load("restaurant").model
        region = define_region(model, ids(model, *E1_PATHS))
        assert len(region.stages) == 6
        assert len(region.flows) == 5
        assert region.paths() == list(E1_PATHS)

    def test_generic_region(self, load):
        model = load("restaurant").model
        region = define_region(model, ids(model, "Customer.Order.create"))
        assert region.is_generic()

    def test_disconnected(self, load):
        model = load("restaurant").model
        with pytest.raises(DisconnectedRegion) as info:
            define_region(model, ids(model, "Kitchen.Order.receive", "Manager.Report.receive"))
        assert len(info.value.components) == 2

    def test_empty(self, load):
        with pytest.raises(EmptyRegion):
            define_region(load("restaurant").model, [])

    def test_unknown_element(self, load):
        with pytest.raises(UnknownElement):
            define_region(load("restaurant").model, ["s999"])

    def test_regions_are_subgraphs(self, manifest):
        for entry in manifest:
            doc = entry.load()
            for event in doc.events:
                assert event.region.stages <= set(doc.model.stages)
                assert event.region.storages <= set(doc.model.storages)
                assert event.region.flows <= set(doc.model.flows)
                assert event.region.triggers <= set(doc.model.triggers)


class TestEvents:
    def test_define(self, load):
        model = load("restaurant").model
        event = define_event("E1", define_region(model, ids(model, *E1_PATHS)), 0)
        assert event.name == "E1" and event.duration == 0

    def test_timed(self, load):
        doc = load("traffic_light")
        event = define_event("E1_red", doc.event("E1_red").region, 50)
        assert event.duration == 50

    def test_generic_must_be_instant(self, load):
        model = load("restaurant").model
        with pytest.raises(NonzeroGenericDuration):
            define_event("g", define_region(model, ids(model, "Customer.Order.create")), 5)

    def test_negative_duration(self, load):
        doc = load("traffic_light")
        with pytest.raises(NegativeDuration):
            define_event("x", doc.event("E1_red").region, -1)


class TestCompose:
    def test_overlapping_acceptor_events(self, load):
        doc = load("acceptor_01star0")
        e2, e4 = doc.event("E2"), doc.event("E4")
        both = compose([e2, e4], "E2+E4")
        assert both.region.nodes == e2.region.nodes | e4.region.nodes
        assert both.duration == max(e2.duration, e4.duration)

    def test_red_light_composite(self, load):
        doc = load("traffic_light")
        both = compose([doc.event("E1_red"), doc.event("E2_calc")], "red")
        assert both.duration == 50
        assert doc.event("E2_calc").region.stages <= both.region.stages

    def test_needs_two(self, load):
        doc = load("traffic_light")
        with pytest.raises(EventError):
            compose([doc.event("E1_red")], "solo")

    def test_disconnected(self, load):
        doc = load("odd_even")
        with pytest.raises(DisconnectedComposite):
            compose([doc.event("E2"), doc.event("E3")], "both")

    def test_foreign(self, load):
        with pytest.raises(ForeignRegion):
            compose([load("odd_even").event("E1"), load("thermostat").event("E1")], "mixed")

    def test_union_passes_connectivity(self, load):
        doc = load("restaurant")
        combined = compose([doc.event("E1"), doc.event("E3")], "E13")
        again = define_region(doc.model, combined.region.elements)
        assert again.nodes == combined.region.nodes


class TestBehavior:
    def test_restaurant(self, load):
        doc = load("restaurant")
        graph = build_behavior(doc.events, [("E1", "E2"), ("E1", "E3"), ("E3", "E4"), ("E4", "E5"), ("E5", "E6")])
        order = graph.topological_order()
        assert order.index("E1") < order.index("E3") < order.index("E4") < order.index("E6")

    def test_cycle(self, load):
        doc = load("example1_ten_integers")
        with pytest.raises(CyclicBehavior) as info:
            build_behavior(doc.events, [("E1", "E2"), ("E2", "E1")])
        assert set(info.value.cycle) == {"E1", "E2"}

    def test_repeats(self, load):
        doc = load("example1_ten_integers")
        graph = build_behavior(doc.events, [("E1", "E2")], ["E1", "E2"])
        assert graph.topological_order() == ["E1", "E2"]

    def test_self_loop_needs_repeat(self, load):
        doc = load("example1_ten_integers")
        with pytest.raises(CyclicBehavior):
            build_behavior(doc.events, [("E1", "E1")])
        build_behavior(doc.events, [("E1", "E1")], ["E1"])

    def test_unknown_event(self, load):
        with pytest.raises(UnknownEvent):
            build_behavior(load("example1_ten_integers").events, [("E1", "E9")])

    def test_dsl_cycle_is_diagnosed(self):
        source = """
            machine A { create; release; flow create -> release; }
            event E1 over {A.create}; event E2 over {A.release};
            behavior { E1 -> E2; E2 -> E1; }
        """
        from thingc.dsl import ParseFailed
        with pytest.raises(ParseFailed) as info:
            parse(source)
        assert info.value.diagnostics[0].rule == "CyclicBehavior"
