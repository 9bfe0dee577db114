import random

import pytest

from thingc.errors import (
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
from thingc.expr import Binary, It, Literal
from thingc.legality import StageKind
from thingc.model import Annotation, StaticModel, canonical_form, new_model, structure

from legality_oracle import cases


class TestNewModel:
    def test_empty(self):
        m = new_model("restaurant")
        assert m.name == "restaurant"
        assert len(m.machines) == 0 and len(m.flows) == 0

    def test_empty_name(self):
        with pytest.raises(EmptyName):
            new_model("")

    def test_named(self):
        assert new_model("thermostat").name == "thermostat"


class TestMachines:
    def test_nesting(self):
        m = new_model("restaurant")
        customer = m.add_machine("Customer")
        assert customer == "m1" and len(m.machines) == 1
        order = m.add_machine("Order", customer)
        assert m.machines[customer].children == [order]
        assert m.path(order) == "Customer.Order"

    def test_duplicate_sibling(self):
        m = new_model("r")
        m.add_machine("Customer")
        with pytest.raises(DuplicateName):
            m.add_machine("Customer")

    def test_same_name_under_different_parents(self):
        m = new_model("r")
        m.add_machine("Order", m.add_machine("A"))
        m.add_machine("Order", m.add_machine("B"))

    def test_unknown_parent(self):
        with pytest.raises(UnknownElement):
            new_model("r").add_machine("X", "m99")


class TestStages:
    def test_add_and_duplicate(self):
        m = new_model("r")
        order = m.add_machine("Order")
        m.add_stage(order, StageKind.CREATE)
        assert len(m.machines[order].stages) == 1
        with pytest.raises(DuplicateStageKind):
            m.add_stage(order, "create")

    def test_guarded_process(self):
        m = new_model("thermostat")
        ctl = m.add_machine("controller")
        guard = Binary("<=", It(), Literal(18))
        sid = m.add_stage(ctl, StageKind.PROCESS, Annotation(guard=guard))
        assert m.stages[sid].annotation.guard == guard

    def test_emit_only_on_create(self):
        m = new_model("r")
        mid = m.add_machine("M")
        with pytest.raises(EmitOnNonCreate):
            m.add_stage(mid, StageKind.PROCESS, Annotation(emit=(1,)))

    def test_negative_literal_delay(self):
        m = new_model("r")
        with pytest.raises(InvalidAnnotation):
            m.add_stage(m.add_machine("M"), StageKind.PROCESS, Annotation(delay=Literal(-1)))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            new_model("r").add_stage("m1", "accept")

    def test_exactly_five_kinds(self):
        assert [str(k) for k in StageKind] == ["create", "process", "release", "transfer", "receive"]


class TestEdges:
    @pytest.fixture
    def order_model(self):
        m = new_model("r")
        c = m.add_machine("Customer")
        s = m.add_machine("System")
        ids = {
            "c.release": m.add_stage(c, "release"),
            "c.transfer": m.add_stage(c, "transfer"),
            "s.transfer": m.add_stage(s, "transfer"),
            "s.receive": m.add_stage(s, "receive"),
            "s.process": m.add_stage(s, "process"),
            "s.create": m.add_stage(s, "create"),
        }
        return m, ids

    def test_legal_flows(self, order_model):
        m, ids = order_model
        m.add_flow(ids["c.release"], ids["c.transfer"])
        m.add_flow(ids["c.transfer"], ids["s.transfer"])
        assert len(m.flows) == 2

    def test_receive_to_create_illegal(self, order_model):
        m, ids = order_model
        with pytest.raises(IllegalFlow) as info:
            m.add_flow(ids["s.receive"], ids["s.create"])
        assert info.value.rule == "IllegalFlow"

    def test_triggers(self, order_model):
        m, ids = order_model
        m.add_trigger(ids["s.process"], ids["s.create"])
        m.add_trigger(ids["s.process"], ids["s.create"], Binary("<=", It(), Literal(18)))
        with pytest.raises(IllegalTriggerTarget):
            m.add_trigger(ids["s.process"], ids["c.release"])

    def test_unknown_endpoint(self, order_model):
        m, ids = order_model
        with pytest.raises(UnknownElement):
            m.add_flow(ids["s.process"], "s999")

    @pytest.mark.parametrize("case", list(cases()), ids=lambda c: c[0])
    def test_strict_add_flow_matches_oracle(self, case):
        _, build, legal = case
        m, a, b = build()
        if legal:
            m.add_flow(a, b)
        else:
            with pytest.raises(IllegalFlow):
                m.add_flow(a, b)


class TestStorage:
    def test_add(self):
        m = new_model("r")
        system = m.add_machine("System")
        m.add_storage(system, "sold")
        cid = m.add_storage(system, "start_time", 0)
        assert m.storages[cid].initial == 0
        with pytest.raises(DuplicateStorageName):
            m.add_storage(system, "sold")

    def test_initial_must_be_thing(self):
        m = new_model("r")
        with pytest.raises(ModelError):
            m.add_storage(m.add_machine("M"), "x", 1.5)


class TestInvariants:
    def test_frozen_model_rejects_changes(self):
        m = new_model("r")
        m.add_machine("A")
        m.freeze()
        with pytest.raises(ModelError):
            m.add_machine("B")

    def test_insertion_order_is_kept(self):
        m = new_model("r")
        names = ["Zeta", "Alpha", "Mid"]
        for n in names:
            m.add_machine(n)
        assert [m.machines[x].name for x in m.machines] == names

    def test_bool_and_int_initials_differ(self):
        def build(initial):
            m = new_model("r")
            m.add_storage(m.add_machine("M"), "x", initial)
            return canonical_form(m)
        assert build(True) != build(1)

    @pytest.mark.parametrize("seed", range(20))
    def test_construction_order_insensitive(self, seed):
        rng = random.Random(seed)
        machines = ["A", "B", "C"]
        stage_plan = [(mach, kind) for mach in machines for kind in ("create", "release", "transfer")]
        flow_plan = [(("A", "create"), ("A", "release")), (("A", "release"), ("A", "transfer")),
                     (("A", "transfer"), ("B", "transfer")), (("B", "transfer"), ("C", "transfer"))]

        def build(order_machines, order_stages, order_flows):
            m = new_model("x")
            mids = {n: m.add_machine(n) for n in order_machines}
            sids = {(n, k): m.add_stage(mids[n], k) for n, k in order_stages}
            for a, b in order_flows:
                m.add_flow(sids[a], sids[b])
            return m

        base = build(machines, stage_plan, flow_plan)
        shuffled = build(rng.sample(machines, 3), rng.sample(stage_plan, len(stage_plan)),
                         rng.sample(flow_plan, len(flow_plan)))
        assert canonical_form(base) == canonical_form(shuffled)
        assert structure(base)[0] == structure(shuffled)[0]
