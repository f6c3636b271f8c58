import pytest

from audit import AuditingRuntime, ledger_violations, qi_violations
from comlang.errors import RuntimeFault
from comlang.eval import show_value
from conftest import FOO_SIGS, run_source
from progen import corpus

FOO = FOO_SIGS + "val Foo = FooComp ()\n"


def output(src):
    r = run_source(src)
    assert r.leaks == []
    return r.trace.text()


def test_foo_demo_prints_foox():
    assert output(FOO + "val _ = Foo.X.fooX ()") == "fooX"


def test_empty_program():
    r = run_source("")
    assert r.trace.text() == "" and r.leaks == [] and r.runtime.events == []


def test_print_order_is_evaluation_order():
    assert output(FOO + "val _ = (Foo.Y.fooY (); Foo.X.fooX (); print \"!\")") == "fooYfooX!"


@pytest.mark.parametrize("expr, shown", [
    ("1 + 2 * 3", "7"),
    ("7 div 2", "3"),
    ("~7 mod 3", "2"),
    ("2 - 5", "~3"),
    ("1.5 + 2.0", "3.5"),
    ("\"ab\" ^ \"c\"", '"abc"'),
    ("(1, true)", "(1, true)"),
    ("[1, 2] @ [3]", "[1, 2, 3]"),
    ("0 :: [1]", "[0, 1]"),
    ("{b = 1, a = 2}", "{a = 2, b = 1}"),
    ("let val x = 4 in x * x end", "16"),
    ("(fn (a, b) => a - b) (10, 4)", "6"),
    ("if 1 < 2 andalso not false then \"y\" else \"n\"", '"y"'),
    ("length [1, 2, 3]", "3"),
    ("size \"hello\"", "5"),
])
def test_core_expressions(expr, shown):
    r = run_source(f"val it = {expr}")
    assert show_value(r.env.lookup("it")) == shown


def test_curried_multi_clause_functions():
    r = run_source("""
fun fact 0 = 1
  | fact n = n * fact (n - 1)
fun add a b = a + b
val it = (fact 6, add 2 3)
""")
    assert r.env.lookup("it") == (720, 5)


def test_deep_recursion():
    r = run_source("fun count 0 = 0 | count n = 1 + count (n - 1)\nval it = count 10000")
    assert r.env.lookup("it") == 10000


def test_runaway_recursion_is_a_fault():
    with pytest.raises(RuntimeFault, match="stack exhausted"):
        run_source("fun forever n = 1 + forever n\nval it = forever 0")


@pytest.mark.parametrize("src", [
    "val it = hd []",
    "val it = 1 div 0",
])
def test_primitive_misuse_is_a_fault(src):
    with pytest.raises(RuntimeFault):
        run_source(src)


def test_sleep_is_a_trace_marker():
    assert output('val _ = (print "a"; sleep 5; print "b")') == "a\nSLEEP 5\nb"


def test_dot_access_shares_owner():
    r = run_source(FOO + "val it = instanceOf Foo.X = instanceOf Foo.Y")
    assert r.env.lookup("it") is True


def test_two_instances_have_distinct_identity():
    r = run_source(FOO + "val Foo2 = FooComp ()\nval it = instanceOf Foo.X = instanceOf Foo2.X")
    assert r.env.lookup("it") is False


def test_instance_of_reaches_the_whole_instance():
    src = FOO + "val I = instanceOf Foo.Y\nval _ = ifc_case I of X_SIG => I.X_SIG.fooX () else => ()"
    assert output(src) == "fooX"


ARMS = FOO_SIGS + """
interface_sig Z_SIG = {
  val fooZ : unit -> unit
}
val Foo = FooComp ()
val it = ifc_case Foo of {arms} else => "else"
"""


@pytest.mark.parametrize("arms, fired", [
    ('Y_SIG => "Y" | X_SIG => "X"', "Y"),
    ('X_SIG => "X" | Y_SIG => "Y"', "X"),
    ('Z_SIG => "Z" | Y_SIG => "Y"', "Y"),
    ('Z_SIG => "Z"', "else"),
])
def test_ifc_case_first_match_wins(arms, fired):
    r = run_source(ARMS.replace("{arms}", arms))
    assert r.env.lookup("it") == fired
    assert r.leaks == []


def test_only_one_branch_runs():
    src = FOO + 'val _ = ifc_case Foo of X_SIG => print "a" | Y_SIG => print "b" else => print "c"'
    assert output(src) == "a"


def test_component_parameters_keep_their_instance_alive():
    src = FOO_SIGS + """
component_sig BAR_SIG = { interface X : X_SIG }
component BarComp (val X : ||X_SIG||) : BAR_SIG = {
  interface X = { fun fooX () = (print "bar:"; X.fooX ()) }
}
val Bar = let val Foo = FooComp () in BarComp (val X = Foo.X) end
val _ = Bar.X.fooX ()
"""
    assert output(src) == "bar:fooX"


def test_escaping_interface_stays_usable():
    src = FOO_SIGS + "val X = let val F = FooComp () in F.X end\nval _ = X.fooX ()"
    assert output(src) == "fooX"


def test_handles_in_containers_are_balanced():
    src = FOO + """
val xs = [Foo.X, Foo.X]
val r = {one = Foo.Y, many = xs}
val _ = (hd xs).fooX ()
val _ = r.one.fooY ()
"""
    assert output(src) == "fooXfooY"


def test_instance_dies_when_last_reference_goes():
    src = FOO_SIGS + "fun tmp () = let val F = FooComp () in F.X.fooX () end\nval _ = tmp ()\nval _ = tmp ()"
    r = run_source(src)
    assert r.leaks == []
    assert all(i.reclaimed for i in r.runtime.instances.values())
    assert len(r.runtime.instances) == 2


def test_failing_component_body_is_instantiation_failure():
    src = FOO_SIGS.replace('fun fooX () = print "fooX"', 'val boom = hd []\n    fun fooX () = ()') + \
        "val Foo = FooComp ()"
    with pytest.raises(RuntimeFault):
        run_source(src)


# -- the generated corpus ------------------------------------------------------

CORPUS = corpus(150, base=1000)


@pytest.mark.parametrize("prog", CORPUS, ids=lambda p: f"seed{p.seed}")
def test_generated_program(prog):
    rt = AuditingRuntime()
    r = run_source(prog.source, runtime=rt)
    assert r.trace.text().splitlines() == prog.expected
    assert r.leaks == []
    assert len(rt.created) == prog.instantiations
    assert qi_violations(rt) == []
    assert ledger_violations(rt) == []


def test_runs_are_deterministic():
    prog = CORPUS[0]
    a, b = run_source(prog.source), run_source(prog.source)
    assert a.trace.text() == b.trace.text()
    assert [e.render() for e in a.runtime.events] == [e.render() for e in b.runtime.events]
