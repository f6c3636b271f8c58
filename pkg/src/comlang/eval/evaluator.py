"""Tree-walking evaluator driving the component kernel.

Reference counting is invisible in the surface language, so the evaluator
owns it.  Every operation that yields a fresh interface or instance value
(dot access to an interface, instantiation, ``instanceOf``, ``ifc_case``
probes, storing into a container) records the value in the current
:class:`Scope`.  When a scope ends, values reachable from its result move
to the enclosing scope and the rest are released.  Values built while an
instance is being constructed belong to that instance until it is
reclaimed, and anything a method hands back to its caller is re-counted on
the caller's side.
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass
from typing import Any, Callable, Optional

from ..comrt.kernel import ComponentClass, InstanceHandle, LeakEntry, Runtime
from ..errors import ComlangError, NegotiationFault, RuntimeFault
from ..sema.typecheck import TypedProgram
from ..syntax import ast as A
from .values import (UNIT, Builtin, Closure, Frame, IfcV, InstV, MethodV, RecordV, frame_clock,
                     is_ref, show_value)

RECURSION_LIMIT = 200000
# enough C stack for RECURSION_LIMIT interpreter frames
STACK_BYTES = 512 * 1024 * 1024


def on_big_stack(fn: Callable[[], Any]) -> Any:
    """Call ``fn`` on a thread with a stack large enough for deep recursion."""
    result: list = []
    error: list = []

    def target():
        try:
            result.append(fn())
        except BaseException as e:  # re-raised on the calling thread
            error.append(e)

    old = threading.stack_size(STACK_BYTES)
    try:
        worker = threading.Thread(target=target, name="comlang-eval")
        worker.start()
    finally:
        threading.stack_size(old)
    worker.join()
    if error:
        raise error[0]
    return result[0]


class Trace:
    """Observable output in evaluation order.  ``echo`` mirrors it to a stream."""

    def __init__(self, echo=None):
        self.parts: list[str] = []
        self.echo = echo

    def write(self, text: str) -> None:
        if not text:
            return
        self.parts.append(text)
        if self.echo is not None:
            self.echo.write(text)
            self.echo.flush()

    def marker(self, line: str) -> None:
        """A scripted effect line, always starting at the beginning of a line."""
        if self.parts and not self.parts[-1].endswith("\n"):
            self.write("\n")
        self.write(line + "\n")

    def text(self) -> str:
        return "".join(self.parts)


class Scope:
    __slots__ = ("parent", "start", "acquired")

    def __init__(self, parent: "Scope | None", start: int):
        self.parent = parent
        self.start = start
        self.acquired: list = []


class Hooks:
    """How a program reaches the outside world: imports and exports."""

    def resolve_import(self, decl: A.ImportDecl, ev: "Evaluator") -> ComponentClass:
        from ..errors import UnknownClsid
        raise UnknownClsid(f"no registry available to resolve clsid {decl.clsid}", decl.span)

    def export(self, decl: A.ExportDecl, ev: "Evaluator") -> None:
        pass

    def close(self) -> list[LeakEntry]:
        return []


class Evaluator:
    def __init__(self, typed: TypedProgram, runtime: Runtime | None = None, trace: Trace | None = None,
                 hooks: Hooks | None = None, run_exports: bool = True):
        self.tp = typed
        self.rt = runtime or Runtime()
        self.trace = trace if trace is not None else Trace()
        self.hooks = hooks or Hooks()
        self.run_exports = run_exports
        self.classes: dict[str, ComponentClass] = {}
        self.root = Scope(None, frame_clock())
        self.scope = self.root
        self.globals = Frame(None, self._builtins())
        self.env = self.globals
        self.finished = False

    # -- ownership ----------------------------------------------------------

    def acquire(self, v):
        self.scope.acquired.append(v)
        return v

    def dup(self, v):
        if isinstance(v, IfcV):
            self.rt.addref(v.handle)
            return self.acquire(IfcV(v.handle))
        if isinstance(v, InstV):
            for h in v.held:
                self.rt.addref(h)
            return self.acquire(InstV(v.instance, v.held, dict(v.labels)))
        return v

    def release_value(self, v) -> None:
        if isinstance(v, IfcV):
            self.rt.release(v.handle)
        elif isinstance(v, InstV):
            for h in v.held:
                self.rt.release(h)

    def enter(self) -> Scope:
        self.scope = Scope(self.scope, frame_clock())
        return self.scope

    def leave_scope(self, scope: Scope, result) -> None:
        """Hand what ``result`` can reach to the parent scope; release the rest."""
        self.scope = scope.parent
        if not scope.acquired:
            return
        reach = reachable_refs(result, scope.start) if result is not None else set()
        dropped = []
        for v in scope.acquired:
            if id(v) in reach:
                self.scope.acquired.append(v)
            else:
                dropped.append(v)
        for v in reversed(dropped):
            self.release_value(v)

    def abandon_scope(self, scope: Scope) -> None:
        self.scope = scope.parent
        for v in reversed(scope.acquired):
            try:
                self.release_value(v)
            except ComlangError:
                pass
        scope.acquired.clear()

    def store(self, v):
        """Containers hold their own count on every handle put into them."""
        return self.dup(v) if is_ref(v) else v

    def export_value(self, v, via: IfcV):
        """A value leaving an instance: the caller gets counts of its own and
        functions stay attached to the interface they came from."""
        if is_ref(v):
            owned = self._owned_ids()
            return v if id(v) in owned else self.dup(v)
        if isinstance(v, Closure):
            return MethodV(via, v)
        if isinstance(v, MethodV):
            return MethodV(self.export_value(v.ifc, via), v.fn)
        if isinstance(v, tuple):
            return tuple(self.export_value(i, via) for i in v)
        if isinstance(v, list):
            return [self.export_value(i, via) for i in v]
        if isinstance(v, RecordV):
            return RecordV(tuple((l, self.export_value(x, via)) for l, x in v.fields))
        return v

    def _owned_ids(self) -> set[int]:
        return {id(v) for v in self.scope.acquired}

    # -- builtins -----------------------------------------------------------

    def _builtins(self) -> dict[str, Any]:
        def fault(msg):
            raise RuntimeFault(msg)

        def num2(name, op):
            def f(arg):
                a, b = arg
                if type(a) is not type(b) or type(a) not in (int, float):
                    fault(f"dynamic tag mismatch in {name}: {show_value(a)}, {show_value(b)}")
                return op(a, b)
            return f

        def int2(name, op):
            def f(arg):
                a, b = arg
                if type(a) is not int or type(b) is not int:
                    fault(f"dynamic tag mismatch in {name}")
                if b == 0:
                    fault("division by zero")
                return op(a, b)
            return f

        def rdiv(arg):
            a, b = arg
            if type(a) is not float or type(b) is not float:
                fault("dynamic tag mismatch in /")
            if b == 0.0:
                fault("division by zero")
            return a / b

        def cmp(name, op):
            def f(arg):
                a, b = arg
                if type(a) is not type(b) or type(a) not in (int, float, str):
                    fault(f"dynamic tag mismatch in {name}")
                return op(a, b)
            return f

        def concat(arg):
            a, b = arg
            if type(a) is not str or type(b) is not str:
                fault("dynamic tag mismatch in ^")
            return a + b

        def cons(arg):
            h, t = arg
            if type(t) is not list:
                fault("dynamic tag mismatch in ::")
            return [self.store(h)] + [self.store(x) for x in t]

        def append(arg):
            a, b = arg
            if type(a) is not list or type(b) is not list:
                fault("dynamic tag mismatch in @")
            return [self.store(x) for x in a + b]

        def neg(a):
            if type(a) not in (int, float):
                fault("dynamic tag mismatch in ~")
            return -a

        def prnt(s):
            if type(s) is not str:
                fault("dynamic tag mismatch in print")
            self.trace.write(s)
            return UNIT

        def sleep(n):
            if type(n) is not int:
                fault("dynamic tag mismatch in sleep")
            self.trace.marker(f"SLEEP {n}")
            return UNIT

        def typed1(name, ty, fn):
            def f(a):
                if type(a) is not ty:
                    fault(f"dynamic tag mismatch in {name}")
                return fn(a)
            return f

        def lst(name, fn):
            def f(a):
                if type(a) is not list:
                    fault(f"dynamic tag mismatch in {name}")
                return fn(a)
            return f

        def hd(a):
            if not a:
                fault("hd of empty list")
            return a[0]

        def tl(a):
            if not a:
                fault("tl of empty list")
            return [self.store(x) for x in a[1:]]

        table = {
            "+": num2("+", lambda a, b: a + b),
            "-": num2("-", lambda a, b: a - b),
            "*": num2("*", lambda a, b: a * b),
            "/": rdiv,
            "div": int2("div", lambda a, b: a // b),
            "mod": int2("mod", lambda a, b: a % b),
            "^": concat,
            "::": cons,
            "@": append,
            "=": lambda arg: values_equal(*arg),
            "<>": lambda arg: not values_equal(*arg),
            "<": cmp("<", lambda a, b: a < b),
            ">": cmp(">", lambda a, b: a > b),
            "<=": cmp("<=", lambda a, b: a <= b),
            ">=": cmp(">=", lambda a, b: a >= b),
            "~": neg,
            "print": prnt,
            "sleep": sleep,
            "not": typed1("not", bool, lambda b: not b),
            "int_to_string": typed1("int_to_string", int, show_value),
            "real_to_string": typed1("real_to_string", float, show_value),
            "bool_to_string": typed1("bool_to_string", bool, show_value),
            "real": typed1("real", int, float),
            "trunc": typed1("trunc", float, int),
            "size": typed1("size", str, len),
            "hd": lst("hd", hd),
            "tl": lst("tl", tl),
            "null": lst("null", lambda a: not a),
            "length": lst("length", len),
        }
        return {name: Builtin(name, fn) for name, fn in table.items()}

    # -- expressions ------------------------------------------------------------

    def eval(self, e, env: Frame):
        try:
            return self._eval(e, env)
        except RuntimeFault as f:
            if f.span is None and getattr(e, "span", None) is not None:
                f.span = e.span
            raise

    def _eval(self, e, env: Frame):
        if isinstance(e, A.Lit):
            return UNIT if e.kind == "unit" else e.value
        if isinstance(e, A.Var):
            return env.lookup(e.name)
        if isinstance(e, A.App):
            fn = self.eval(e.fn, env)
            arg = self.eval(e.arg, env)
            return self.apply(fn, arg)
        if isinstance(e, A.DotAccess):
            return self._dot(e, env)
        if isinstance(e, A.Tuple):
            return tuple(self.store(self.eval(i, env)) for i in e.items)
        if isinstance(e, A.Record):
            return RecordV.of((l, self.store(self.eval(v, env))) for l, v in e.fields)
        if isinstance(e, A.ListExpr):
            return [self.store(self.eval(i, env)) for i in e.items]
        if isinstance(e, A.Fn):
            return Closure((A.Clause((e.param,), e.body),), env)
        if isinstance(e, A.Let):
            scope = self.enter()
            try:
                inner = env
                for d in e.decls:
                    inner = self.decl(d, inner)
                result = self.eval(e.body, inner)
            except BaseException:
                self.abandon_scope(scope)
                raise
            self.leave_scope(scope, result)
            return result
        if isinstance(e, A.If):
            c = self.eval(e.cond, env)
            if type(c) is not bool:
                raise RuntimeFault("dynamic tag mismatch in if condition", e.span)
            return self.eval(e.then if c else e.else_, env)
        if isinstance(e, A.Seq):
            v = UNIT
            for item in e.items:
                v = self.eval(item, env)
            return v
        if isinstance(e, A.Annot):
            return self.eval(e.expr, env)
        if isinstance(e, A.Instantiate):
            args = {n: self.eval(a, env) for n, a in e.args}
            return self.instantiate(e.component, args)
        if isinstance(e, A.IfcCase):
            return self._ifc_case(e, env)
        if isinstance(e, A.InstanceOf):
            v = self.eval(e.expr, env)
            if not isinstance(v, IfcV):
                raise RuntimeFault("dynamic tag mismatch in instanceOf", e.span)
            return self.instance_of(v)
        raise TypeError(f"not an expression: {e!r}")

    def _dot(self, e: A.DotAccess, env: Frame):
        v = self.eval(e.expr, env)
        for kind, label, _sig in self.tp.info[id(e)]:
            if kind == "ifc":
                if not isinstance(v, InstV):
                    raise RuntimeFault(f"dynamic tag mismatch selecting interface {label}", e.span)
                v = self.interface_of(v, label)
            elif kind == "member":
                if not isinstance(v, IfcV):
                    raise RuntimeFault(f"dynamic tag mismatch selecting member {label}", e.span)
                v = self.export_value(v.handle.dispatch[label], v)
            else:
                if not isinstance(v, RecordV):
                    raise RuntimeFault(f"dynamic tag mismatch selecting field {label}", e.span)
                v = v.get(label)
        return v

    def interface_of(self, inst: InstV, label: str) -> IfcV:
        h = inst.labels[label]
        h = self.rt.query_interface(h, h.sig)
        return self.acquire(IfcV(h))

    def instance_of(self, v: IfcV) -> InstV:
        inst = v.handle.instance
        held = tuple(inst.ifc_table.values())
        for h in held:
            self.rt.addref(h)
        labels = _labels_of(inst)
        return self.acquire(InstV(inst, held, labels))

    def _ifc_case(self, e: A.IfcCase, env: Frame):
        v = self.eval(e.scrutinee, env)
        if not isinstance(v, InstV):
            raise RuntimeFault("dynamic tag mismatch in ifc_case scrutinee", e.span)
        for sig, (sname, arm) in zip(self.tp.info[id(e)], e.arms):
            h = self.rt.probe(v.instance, sig)
            if h is None:
                continue
            scope = self.enter()
            try:
                view = self.acquire(InstV(v.instance, (h,), {sname: h}))
                inner = env
                if isinstance(e.scrutinee, A.Var):
                    inner = Frame(env, {e.scrutinee.name: view})
                result = self.eval(arm, inner)
            except BaseException:
                self.abandon_scope(scope)
                raise
            self.leave_scope(scope, result)
            return result
        return self.eval(e.else_, env)

    def apply(self, fn, arg):
        if isinstance(fn, Builtin):
            return fn.fn(arg)
        if isinstance(fn, MethodV):
            result = self.apply(fn.fn, arg)
            return self.export_value(result, fn.ifc)
        if isinstance(fn, Closure):
            args = fn.applied + (arg,)
            if len(args) < fn.arity:
                return Closure(fn.clauses, fn.env, fn.name, fn.arity, args)
            scope = self.enter()
            try:
                result = self._call(fn, args)
            except BaseException:
                self.abandon_scope(scope)
                raise
            self.leave_scope(scope, result)
            return result
        if callable(fn):
            # native functions from stubs and proxies; fresh handles in the
            # result are counted by the current scope
            result = fn(arg)
            for r in _refs_in(result):
                self.acquire(r)
            return result
        raise RuntimeFault(f"dynamic tag mismatch: cannot apply {show_value(fn)}")

    def _call(self, fn: Closure, args: tuple):
        for clause in fn.clauses:
            binds: dict[str, Any] = {}
            if all(match(p, a, binds) for p, a in zip(clause.params, args)):
                return self.eval(clause.body, Frame(fn.env, binds))
        raise RuntimeFault(f"no clause of {fn.name} matches its arguments")

    # -- components -------------------------------------------------------------

    def instantiate(self, name: str, args: dict[str, Any]) -> InstV:
        cls = self.classes[name]
        inst = self.rt.create_instance(cls, args)
        held = tuple(inst.ifc_table.values())
        value = InstV(inst, held, {})
        if cls.kind == "imported":
            missing = []
            for label, sig_name in cls.sig.interfaces:
                if sig_name in inst.ifc_table:
                    value.labels[label] = inst.ifc_table[sig_name]
                else:
                    missing.append(sig_name)
            if missing:
                for h in held:
                    self.rt.release(h)
                raise NegotiationFault(
                    f"{name} does not provide interface(s) {', '.join(missing)} required by {cls.sig.name}",
                    missing)
        else:
            value.labels = _labels_of(inst)
        return self.acquire(value)

    def _component_class(self, d: A.ComponentDecl, env: Frame) -> ComponentClass:
        info = self.tp.components[d.name]

        def factory(inst: InstanceHandle, args):
            saved = self.scope
            scope = Scope(None, frame_clock())
            self.scope = scope
            try:
                frame = Frame(env)
                for pname, _ in info.params:
                    frame.vars[pname] = self.dup(args[pname])
                for local in d.locals:
                    frame = self.decl(local, frame)
                tables = {}
                for impl in d.impls:
                    sig = info.impl_sigs[impl.label]
                    f = frame
                    for inner in impl.decls:
                        f = self.decl(inner, f)
                    tables[sig.name] = (sig, {name: f.lookup(name) for name, _ in sig.values})
            except BaseException:
                self.abandon_scope(scope)
                self.scope = saved
                raise
            self.scope = saved
            inst.env = frame
            inst.data["owned"] = scope.acquired
            return tables

        return ComponentClass(d.name, info.sig, "internal", factory, on_reclaim=self._on_reclaim)

    def _on_reclaim(self, inst: InstanceHandle) -> None:
        owned = inst.data.pop("owned", [])
        for v in reversed(owned):
            self.release_value(v)

    # -- declarations -----------------------------------------------------------

    def decl(self, d, env: Frame) -> Frame:
        if isinstance(d, A.ValDecl):
            v = self.eval(d.expr, env)
            binds: dict[str, Any] = {}
            if not match(d.pat, v, binds):
                raise RuntimeFault("value does not match the declared pattern", d.span)
            return Frame(env, binds)
        if isinstance(d, A.FunDecl):
            frame = Frame(env)
            frame.vars[d.name] = Closure(d.clauses, frame, d.name, len(d.clauses[0].params))
            return frame
        if isinstance(d, A.ComponentDecl):
            self.classes[d.name] = self._component_class(d, env)
            return env
        if isinstance(d, A.ImportDecl):
            self.classes[d.name] = self.hooks.resolve_import(d, self)
            return env
        if isinstance(d, A.ExportDecl):
            if self.run_exports:
                self.hooks.export(d, self)
            return env
        return env

    def run(self) -> Frame:
        """Evaluate every declaration in order; the top-level scope stays open."""
        return on_big_stack(self._run)

    def _run(self) -> Frame:
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, RECURSION_LIMIT))
        try:
            env = self.env
            for d in self.tp.program.decls:
                env = self.decl(d, env)
                self.env = env
            return env
        except RecursionError as e:
            raise RuntimeFault("evaluation stack exhausted") from e
        finally:
            sys.setrecursionlimit(old)

    def finish(self) -> list[LeakEntry]:
        """Release the top-level scope, close foreign sessions, and audit."""
        if self.finished:
            return self.rt.leak_report()
        self.finished = True
        self.scope = self.root
        self.leave_scope(self.root, None)
        self.env = self.globals
        foreign = self.hooks.close()
        return self.rt.leak_report() + foreign


@dataclass
class RunResult:
    env: Frame
    trace: Trace
    leaks: list[LeakEntry]
    runtime: Runtime


def run_program(typed: TypedProgram, runtime: Runtime | None = None, hooks: Hooks | None = None,
                trace: Trace | None = None) -> RunResult:
    """Evaluate a typechecked program and release everything it held.

    A fault still releases what the evaluator owns before propagating.
    """
    ev = Evaluator(typed, runtime, trace, hooks)
    try:
        env = ev.run()
    except BaseException:
        try:
            ev.finish()
        except ComlangError:
            pass
        raise
    leaks = ev.finish()
    return RunResult(env, ev.trace, leaks, ev.rt)


# -- helpers ------------------------------------------------------------------

def _labels_of(inst: InstanceHandle) -> dict:
    out = {}
    for label, sig_name in inst.cls.sig.interfaces:
        if sig_name in inst.ifc_table:
            out[label] = inst.ifc_table[sig_name]
    return out


def values_equal(a, b) -> bool:
    if isinstance(a, IfcV) and isinstance(b, IfcV):
        return a.handle.owner == b.handle.owner
    if isinstance(a, InstV) and isinstance(b, InstV):
        return a.instance.token == b.instance.token
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, RecordV) and isinstance(b, RecordV):
        return (len(a.fields) == len(b.fields)
                and all(la == lb and values_equal(x, y) for (la, x), (lb, y) in zip(a.fields, b.fields)))
    if type(a) is not type(b):
        raise RuntimeFault(f"dynamic tag mismatch in equality: {show_value(a)} vs {show_value(b)}")
    if isinstance(a, (Closure, Builtin, MethodV)):
        raise RuntimeFault("dynamic tag mismatch: functions have no equality")
    return a == b


def match(p, v, binds: dict) -> bool:
    if isinstance(p, A.PWild):
        return True
    if isinstance(p, A.PVar):
        binds[p.name] = v
        return True
    if isinstance(p, A.PLit):
        if p.kind == "unit":
            return v is UNIT
        want = {"int": int, "real": float, "bool": bool, "string": str}[p.kind]
        return type(v) is want and v == p.value
    if isinstance(p, A.PTuple):
        return (isinstance(v, tuple) and len(v) == len(p.items)
                and all(match(q, x, binds) for q, x in zip(p.items, v)))
    if isinstance(p, A.PList):
        return (isinstance(v, list) and len(v) == len(p.items)
                and all(match(q, x, binds) for q, x in zip(p.items, v)))
    if isinstance(p, A.PCons):
        return isinstance(v, list) and bool(v) and match(p.head, v[0], binds) and match(p.tail, v[1:], binds)
    if isinstance(p, A.PAnnot):
        return match(p.pat, v, binds)
    raise TypeError(f"not a pattern: {p!r}")


def _refs_in(v):
    if is_ref(v):
        yield v
    elif isinstance(v, (tuple, list)):
        for i in v:
            yield from _refs_in(i)
    elif isinstance(v, RecordV):
        for _, x in v.fields:
            yield from _refs_in(x)


def reachable_refs(v, start: int) -> set[int]:
    """Ids of handle values reachable from ``v``, looking into closure frames
    created at or after ``start`` (older frames belong to enclosing scopes)."""
    out: set[int] = set()
    seen_frames: set[int] = set()
    stack = [v]
    while stack:
        x = stack.pop()
        if isinstance(x, (IfcV, InstV)):
            out.add(id(x))
        elif isinstance(x, (tuple, list)):
            stack.extend(x)
        elif isinstance(x, RecordV):
            stack.extend(val for _, val in x.fields)
        elif isinstance(x, MethodV):
            stack.append(x.ifc)
            stack.append(x.fn)
        elif isinstance(x, Closure):
            stack.extend(x.applied)
            f = x.env
            while f is not None and f.created_at >= start and id(f) not in seen_frames:
                seen_frames.add(id(f))
                stack.extend(f.vars.values())
                f = f.parent
    return out
