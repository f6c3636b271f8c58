import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comlang.comrt import (ComponentClass, NotSupported, Runtime, compute_vtable_layout,
                           flattened_arity, render_leak_report)
from comlang.errors import InstantiationFailure, OverRelease, ReclaimedInstance, SessionMismatch, TypeMismatch
from comlang.interop import agent_sig_env
from comlang.sema import ComponentSig, InterfaceSig
from comlang.sema.types import INT, UNIT, ArrowT, TupleT

X = InterfaceSig("X_SIG", (), (("fooX", ArrowT(UNIT, UNIT)),))
Y = InterfaceSig("Y_SIG", (), (("fooY", ArrowT(UNIT, UNIT)),))
Z = InterfaceSig("Z_SIG", (), (("fooZ", ArrowT(UNIT, UNIT)),))
X_ALIAS = InterfaceSig("X_ALIAS", (), (("fooX", ArrowT(UNIT, UNIT)),))
FOO = ComponentSig("FOO_SIG", (("X", "X_SIG"), ("Y", "Y_SIG")))
SIGS = {"X_SIG": X, "Y_SIG": Y}


def factory(inst, args):
    return {name: (SIGS[name], {"member": lambda _u, n=name: n}) for _, name in FOO.interfaces}


FOO_CLASS = ComponentClass("FooComp", FOO, "internal", factory)


def fresh(rt=None):
    rt = rt or Runtime()
    return rt, rt.create_instance(FOO_CLASS)


def test_instances_are_generative():
    rt = Runtime()
    a, b = rt.create_instance(FOO_CLASS), rt.create_instance(FOO_CLASS)
    assert a.token != b.token
    assert not rt.same_instance(a.ifc_table["X_SIG"], b.ifc_table["X_SIG"])


def test_all_interfaces_built_eagerly():
    rt, foo = fresh()
    assert set(foo.ifc_table) == {"X_SIG", "Y_SIG"}
    assert [(e.kind, e.sig) for e in rt.events] == [("addref", "X_SIG"), ("addref", "Y_SIG")]


def test_failing_body_is_an_instantiation_failure():
    def boom(inst, args):
        raise TypeMismatch("guard failed")
    with pytest.raises(InstantiationFailure):
        Runtime().create_instance(ComponentClass("Bad", FOO, "internal", boom))


def test_query_other_interface_shares_owner():
    rt, foo = fresh()
    y = rt.query_interface(foo.ifc_table["X_SIG"], Y)
    assert y.owner == foo.token
    assert rt.same_instance(foo.ifc_table["X_SIG"], y)
    assert foo.counts("Y_SIG") == (2, 0)


def test_query_same_interface_is_reflexive():
    rt, foo = fresh()
    x = foo.ifc_table["X_SIG"]
    again = rt.query_interface(x, X)
    assert again.owner == x.owner and again.dispatch is x.dispatch


def test_query_unsupported_interface():
    rt, foo = fresh()
    with pytest.raises(NotSupported):
        rt.query_interface(foo, Z)
    assert rt.probe(foo, Z) is None
    assert foo.counts("X_SIG") == (1, 0)


def test_query_matches_structurally_on_internal_instances():
    rt, foo = fresh()
    assert rt.query_interface(foo, X_ALIAS) is foo.ifc_table["X_SIG"]


def test_same_instance_is_reflexive():
    _, foo = fresh()
    x = foo.ifc_table["X_SIG"]
    assert Runtime.same_instance(x, x)


def test_ledger_arithmetic():
    rt, foo = fresh()
    x = foo.ifc_table["X_SIG"]
    rt.addref(x)
    rt.release(x)
    assert foo.counts("X_SIG") == (2, 1)
    rt.release(x)
    assert foo.counts("X_SIG") == (2, 2)
    assert not foo.reclaimed


def test_release_everything_reclaims():
    rt, foo = fresh()
    for h in list(foo.ifc_table.values()):
        rt.release(h)
    assert foo.reclaimed
    with pytest.raises(ReclaimedInstance):
        rt.query_interface(foo, X)
    with pytest.raises(OverRelease):
        rt.release(foo.ifc_table["X_SIG"])


def test_over_release_of_live_interface():
    rt, foo = fresh()
    x = foo.ifc_table["X_SIG"]
    rt.release(x)
    with pytest.raises(OverRelease):
        rt.release(x)


def test_leak_report_names_unbalanced_pair():
    rt, foo = fresh()
    rt.release(foo.ifc_table["X_SIG"])  # Y_SIG's release is skipped on purpose
    report = rt.leak_report()
    assert [(e.token, e.sig) for e in report] == [(foo.token, "Y_SIG")]
    assert render_leak_report(report) == f"LEAK instance={foo.token} ifc=Y_SIG addrefs=1 releases=0\n"


def test_leak_report_sorted_by_token_then_sig():
    rt = Runtime()
    rt.create_instance(FOO_CLASS)
    rt.create_instance(FOO_CLASS)
    lines = render_leak_report(rt.leak_report()).splitlines()
    assert [l.split()[1:3] for l in lines] == [
        ["instance=1", "ifc=X_SIG"], ["instance=1", "ifc=Y_SIG"],
        ["instance=2", "ifc=X_SIG"], ["instance=2", "ifc=Y_SIG"]]


def test_empty_runtime_reports_nothing():
    assert Runtime().leak_report() == []


def test_handles_do_not_cross_sessions():
    _, foo = fresh()
    with pytest.raises(SessionMismatch):
        Runtime().addref(foo.ifc_table["X_SIG"])


# -- randomized kernel laws -----------------------------------------------------

ops = st.lists(st.tuples(st.sampled_from(["create", "qi", "addref", "release"]),
                         st.integers(0, 20), st.sampled_from(["X_SIG", "Y_SIG", "Z_SIG"])),
               max_size=60)


@settings(max_examples=200)
@given(ops)
def test_kernel_laws_under_random_operations(script):
    rt = Runtime()
    held = []  # interface handles we own a count on
    created = []
    for op, pick, sig in script:
        if op == "create" or not held:
            inst = rt.create_instance(FOO_CLASS)
            created.append(inst.token)
            held.extend(inst.ifc_table.values())
            continue
        h = held[pick % len(held)]
        if op == "qi":
            target = {"X_SIG": X, "Y_SIG": Y, "Z_SIG": Z}[sig]
            if sig in h.instance.cls.sig.sig_names():
                got = rt.query_interface(h, target)
                assert rt.same_instance(got, h)  # identity
                again = rt.query_interface(h, target)
                assert again.owner == got.owner and again.dispatch is got.dispatch  # stability
                held.extend([got, again])
            else:
                with pytest.raises(NotSupported):
                    rt.query_interface(h, target)
        elif op == "addref":
            rt.addref(h)
            held.append(h)
        else:
            rt.release(held.pop(pick % len(held)))
        for tok in created:
            inst = rt.instances[tok]
            for a, r in inst.ledger.values():
                assert 0 <= r <= a
    # completeness: every live instance answers every interface it declares
    for inst in rt.live_instances():
        for s in (X, Y):
            rt.release(rt.query_interface(inst, s))
    assert len(set(created)) == len(created)
    stamps = [e.timestamp for e in rt.events]
    assert stamps == sorted(set(stamps))
    for h in held:
        rt.release(h)
    assert rt.leak_report() == []


@given(st.integers(1, 50))
def test_fresh_identity(n):
    rt = Runtime()
    tokens = {rt.create_instance(FOO_CLASS).token for _ in range(n)}
    assert len(tokens) == n


# -- vtables ----------------------------------------------------------------------

def test_vtable_for_foo_demo_interface():
    layout = compute_vtable_layout(X)
    assert [(s.index, s.name, s.arity) for s in layout.slots] == [
        (0, "QueryInterface", 0), (1, "AddRef", 0), (2, "Release", 0), (3, "fooX", 0)]


def test_vtable_for_agent_character():
    sig = agent_sig_env().interface("I_AGENT_CHARACTER")
    layout = compute_vtable_layout(sig)
    assert layout.slot_of("setPosition") == 3
    assert layout.methods[0].arity == 2
    assert [s.name for s in layout.methods] == [n for n, _ in sig.values]
    assert [s.index for s in layout.slots] == list(range(len(layout.slots)))


def test_vtable_for_empty_interface():
    layout = compute_vtable_layout(InterfaceSig("EMPTY", (), ()))
    assert [s.name for s in layout.slots] == ["QueryInterface", "AddRef", "Release"]


@pytest.mark.parametrize("t, arity", [
    (ArrowT(UNIT, UNIT), 0),
    (ArrowT(INT, UNIT), 1),
    (ArrowT(TupleT((INT, INT, INT)), INT), 3),
    (INT, 0),
])
def test_flattened_arity(t, arity):
    assert flattened_arity(t) == arity


@given(st.permutations(["a", "b", "c", "d"]))
def test_vtable_is_pure_and_follows_declaration_order(names):
    sig = InterfaceSig("P", (), tuple((n, ArrowT(INT, INT)) for n in names))
    first = compute_vtable_layout(sig)
    assert first == compute_vtable_layout(InterfaceSig("P", (), tuple(sig.values)))
    assert [s.name for s in first.methods] == list(names)
