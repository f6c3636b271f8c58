"""Random well-typed programs that create, pass, store, return and probe handles.

Every program prints tagged lines whose expected values the generator
computes independently, so a run can be checked for both its output and
its reference-count balance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

PRELUDE = """
interface_sig X_SIG = {
  val fooX : unit -> unit
  val get : unit -> int
}
interface_sig Y_SIG = {
  val fooY : unit -> unit
}
interface_sig Z_SIG = {
  val fooZ : int -> int
}
component_sig FOO_SIG = {
  interface X : X_SIG
  interface Y : Y_SIG
}
component_sig ZED_SIG = {
  interface X : X_SIG
  interface Z : Z_SIG
}
component_sig BAR_SIG = {
  interface X : X_SIG
}
component FooComp () : FOO_SIG = {
  interface X = {
    fun fooX () = ()
    fun get () = 1
  }
  interface Y = {
    fun fooY () = ()
  }
}
component ZedComp () : ZED_SIG = {
  interface X = {
    fun fooX () = ()
    fun get () = 2
  }
  interface Z = {
    fun fooZ n = n * 3
  }
}
component BarComp (val X : ||X_SIG||) : BAR_SIG = {
  interface X = {
    fun fooX () = X.fooX ()
    fun get () = X.get () + 10
  }
}
fun useX (x : ||X_SIG||) = x.get ()
fun pick (b, x : ||X_SIG||, y : ||X_SIG||) = if b then x else y
fun sumX (xs : ||X_SIG|| list) = if null xs then 0 else (hd xs).get () + sumX (tl xs)
fun say (tag, s) = print (tag ^ ":" ^ s ^ "\\n")
"""

SUPPORTS = {"foo": {"X_SIG", "Y_SIG"}, "zed": {"X_SIG", "Z_SIG"}, "bar": {"X_SIG"}}
COMPONENT = {"foo": "FooComp", "zed": "ZedComp"}


@dataclass
class Obj:
    kind: str
    value: int  # what X.get () returns


@dataclass
class GeneratedProgram:
    seed: int
    source: str
    instantiations: int
    expected: list[str] = field(default_factory=list)


def show_int(n: int) -> str:
    return str(n) if n >= 0 else f"~{-n}"


class _Gen:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.seed = seed
        self.lines: list[str] = []
        self.expected: list[str] = []
        self.insts: dict[str, Obj] = {}  # instance-typed names
        self.ifcs: dict[str, Obj] = {}  # ||X_SIG||-typed names
        self.dyn: dict[str, Obj] = {}  # instanceOf results
        self.n = 0
        self.created = 0

    def name(self, prefix: str) -> str:
        self.n += 1
        return f"{prefix}{self.n}"

    def emit(self, line: str, expect: str | None = None) -> None:
        self.lines.append(line)
        if expect is not None:
            self.expected.append(expect)

    # an ||X_SIG|| expression with the object behind it
    def x_expr(self) -> tuple[str, Obj]:
        r = self.rng
        options = [(f"{n}.X", o) for n, o in self.insts.items()] + list(self.ifcs.items())
        return r.choice(options)

    # -- handle statements ---------------------------------------------------

    def create(self) -> None:
        r = self.rng
        kind = r.choice(["foo", "zed"])
        obj = Obj(kind, 1 if kind == "foo" else 2)
        name = self.name("I")
        self.created += 1
        style = r.randrange(3)
        if style == 0:
            self.emit(f"val {name} = {COMPONENT[kind]} ()")
            self.insts[name] = obj
        elif style == 1:
            self.emit(f"val {name} = let val T = {COMPONENT[kind]} () in T end")
            self.insts[name] = obj
        else:
            # only an interface escapes the scope that made the instance
            self.emit(f"val {name} = let val T = {COMPONENT[kind]} () in T.X end")
            self.ifcs[name] = obj

    def bar(self) -> None:
        expr, inner = self.x_expr()
        name = self.name("B")
        self.created += 1
        self.emit(f"val {name} = BarComp (val X = {expr})")
        self.insts[name] = Obj("bar", inner.value + 10)

    def closure(self) -> None:
        kind = self.rng.choice(["foo", "zed"])
        name = self.name("f")
        self.created += 1
        self.emit(f"val {name} = let val T = {COMPONENT[kind]} () in fn () => T.X.get () end")
        value = 1 if kind == "foo" else 2
        self.emit(f'val _ = say ("get", int_to_string ({name} ()))', f"get:{value}")

    def call(self) -> None:
        expr, obj = self.x_expr()
        self.emit(f'val _ = say ("get", int_to_string (useX {expr}))', f"get:{obj.value}")

    def store_list(self) -> None:
        items = [self.x_expr() for _ in range(self.rng.randint(1, 3))]
        name = self.name("L")
        self.emit(f"val {name} = [{', '.join(e for e, _ in items)}]")
        self.emit(f'val _ = say ("sum", int_to_string (sumX {name}))', f"sum:{sum(o.value for _, o in items)}")

    def store_record(self) -> None:
        (ea, oa), (eb, ob) = self.x_expr(), self.x_expr()
        name = self.name("R")
        self.emit(f"val {name} = {{a = {ea}, b = {eb}}}")
        label, obj = self.rng.choice([("a", oa), ("b", ob)])
        self.emit(f'val _ = say ("get", int_to_string ({name}.{label}.get ()))', f"get:{obj.value}")

    def pick(self) -> None:
        (ea, oa), (eb, ob) = self.x_expr(), self.x_expr()
        flag = self.rng.choice([True, False])
        name = self.name("P")
        self.emit(f"val {name} = pick ({'true' if flag else 'false'}, {ea}, {eb})")
        self.ifcs[name] = oa if flag else ob

    def identity(self) -> None:
        (ea, oa), (eb, ob) = self.x_expr(), self.x_expr()
        self.emit(f'val _ = say ("same", bool_to_string (instanceOf {ea} = instanceOf {eb}))',
                  f"same:{'true' if oa is ob else 'false'}")

    def probe(self) -> None:
        expr, obj = self.x_expr()
        arms = self.rng.sample(["X_SIG", "Y_SIG", "Z_SIG"], self.rng.randint(1, 3))
        text = " | ".join(f'{s} => "{s[0]}"' for s in arms)
        hit = next((s[0] for s in arms if s in SUPPORTS[obj.kind]), "none")
        self.emit(f'val _ = say ("arm", ifc_case instanceOf {expr} of {text} else => "none")', f"arm:{hit}")

    def probe_escape(self) -> None:
        expr, obj = self.x_expr()
        other, other_obj = self.x_expr()
        j = self.name("J")
        self.emit(f"val {j} = instanceOf {expr}")
        self.dyn[j] = obj
        name = self.name("E")
        if self.rng.random() < 0.5:
            self.emit(f"val {name} = ifc_case {j} of X_SIG => {j}.X_SIG else => {other}")
            self.ifcs[name] = obj
        else:
            self.emit(f"val {name} = ifc_case {j} of Z_SIG => {other} else => {other}")
            self.ifcs[name] = other_obj

    def loop(self) -> None:
        expr, obj = self.x_expr()
        n = self.rng.randint(0, 6)
        name = self.name("loop")
        self.emit(f"fun {name} k = if k = 0 then 0 else useX {expr} + {name} (k - 1)")
        self.emit(f'val _ = say ("loop", int_to_string ({name} {n}))', f"loop:{n * obj.value}")

    # -- scalar core -------------------------------------------------------------

    def int_expr(self, depth: int) -> tuple[str, int]:
        r = self.rng
        if depth == 0 or r.random() < 0.3:
            n = r.randint(0, 20)
            return str(n), n
        kind = r.randrange(8)
        a, va = self.int_expr(depth - 1)
        b, vb = self.int_expr(depth - 1)
        if kind == 0:
            return f"({a} + {b})", va + vb
        if kind == 1:
            return f"({a} - {b})", va - vb
        if kind == 2:
            return f"({a} * {b})", va * vb
        if kind == 3:
            c, vc = self.int_expr(depth - 1)
            return f"(if {a} < {b} then {c} else {a})", vc if va < vb else va
        if kind == 4:
            v = self.name("v")
            return f"(let val {v} = {a} in {v} + {b} end)", va + vb
        if kind == 5:
            v = self.name("v")
            return f"((fn {v} => {v} * 2) {a})", va * 2
        if kind == 6:
            return f"(length [{a}, {b}] + hd [{b}])", 2 + vb
        s = "x" * (va % 5)
        return f'(size ("{s}" ^ "ab") + {b})', len(s) + 2 + vb

    def scalar(self) -> None:
        text, value = self.int_expr(3)
        self.emit(f'val _ = say ("int", int_to_string {text})', f"int:{show_int(value)}")

    def program(self) -> GeneratedProgram:
        r = self.rng
        target = r.randint(1, 10)
        self.create()
        creating = [self.create, self.create, self.bar, self.closure]
        using = [self.call, self.store_list, self.store_record, self.pick, self.identity,
                 self.probe, self.probe_escape, self.loop, self.scalar]
        while self.created < target:
            r.choice(creating)()
            for _ in range(r.randint(0, 2)):
                r.choice(using)()
        for _ in range(r.randint(1, 4)):
            r.choice(using)()
        source = PRELUDE + "\n".join(self.lines) + "\n"
        return GeneratedProgram(self.seed, source, self.created, self.expected)


def generate(seed: int) -> GeneratedProgram:
    return _Gen(seed).program()


def corpus(n: int = 100, base: int = 0) -> list[GeneratedProgram]:
    return [generate(base + i) for i in range(n)]
