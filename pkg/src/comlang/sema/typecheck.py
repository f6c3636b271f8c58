"""Monomorphic typechecking with opaque interfaces.

Core typing is first-order unification without let-polymorphism; only the
builtin primitives get fresh type variables at each use.  Interface and
instance arguments are coerced by signature matching at application and
instantiation sites.

Abstract type members are path dependent: ``Foo.P.zero`` and
``Foo.P.succ`` share their ``N`` because both are reached through the same
binding of ``Foo``, while values reached through any other path (or through
no named path at all) get unrelated stamps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from ..errors import (NoSuchInterface, NoSuchMember, NotExportable, MissingIID, SourceSpan,
                      StaticError, TypeMismatch, UnboundComponent, UnboundSignature,
                      UnboundVariable)
from ..syntax import ast as A
from .idl import check_exportable
from .sigs import (ComponentSig, InterfaceSig, SigEnv, UnboundType, elaborate_sigs,
                   match_component, match_interface, resolve_ty)
from .types import (BOOL, INST, INT, REAL, STRING, UNIT, AbstractT, ArrowT, CompT, DataT, IfcT,
                    InstT, ListT, RecordT, SemType, TupleT, TVar, map_type, show)

PathKey = tuple


@dataclass
class Binding:
    type: Optional[SemType]
    key: Optional[PathKey] = None
    scheme: Optional[Callable[[], SemType]] = None


class Scope:
    def __init__(self, parent: "Scope | None" = None):
        self.parent = parent
        self.values: dict[str, Binding] = {}
        self.types: dict[str, SemType] = {}

    def lookup(self, name: str) -> Optional[Binding]:
        s = self
        while s is not None:
            if name in s.values:
                return s.values[name]
            s = s.parent
        return None

    def type_names(self) -> dict[str, SemType]:
        chain = []
        s = self
        while s is not None:
            chain.append(s.types)
            s = s.parent
        out: dict[str, SemType] = {}
        for d in reversed(chain):
            out.update(d)
        return out


@dataclass
class ComponentInfo:
    name: str
    kind: str  # "internal" | "imported"
    sig: ComponentSig
    params: list[tuple[str, SemType]]
    decl: Union[A.ComponentDecl, A.ImportDecl]
    impl_sigs: dict[str, InterfaceSig] = field(default_factory=dict)


@dataclass
class TypedProgram:
    program: A.SurfaceProgram
    env: SigEnv
    types: dict[int, SemType]
    info: dict[int, object]
    components: dict[str, ComponentInfo]
    exports: list[A.ExportDecl]

    def type_of(self, node) -> SemType:
        return self.types[id(node)]


class Checker:
    def __init__(self, program: A.SurfaceProgram, env: SigEnv):
        self.program = program
        self.env = env
        self.subst: dict[int, SemType] = {}
        self._tv = itertools.count()
        self._keys = itertools.count(1)
        self.types: dict[int, SemType] = {}
        self.keys: dict[int, PathKey] = {}
        self.info: dict[int, object] = {}
        self.components: dict[str, ComponentInfo] = {}
        self.exports: list[A.ExportDecl] = []
        self.pending: list[tuple[SemType, str, Optional[SourceSpan]]] = []
        self.path_stamps: dict[tuple, AbstractT] = {}
        self.globals = Scope()
        self._install_builtins()

    # -- type variables and unification -----------------------------------

    def fresh(self) -> TVar:
        return TVar(next(self._tv))

    def fresh_key(self) -> PathKey:
        return (next(self._keys),)

    def prune(self, t: SemType) -> SemType:
        while isinstance(t, TVar) and t.id in self.subst:
            t = self.subst[t.id]
        return t

    def zonk(self, t: SemType) -> SemType:
        def fn(x):
            if isinstance(x, TVar):
                p = self.prune(x)
                return p if isinstance(p, TVar) else self.zonk(p)
            return None
        return map_type(t, fn)

    def _occurs(self, v: TVar, t: SemType) -> bool:
        t = self.prune(t)
        if t == v:
            return True
        if isinstance(t, TupleT):
            return any(self._occurs(v, i) for i in t.items)
        if isinstance(t, RecordT):
            return any(self._occurs(v, ft) for _, ft in t.fields)
        if isinstance(t, ListT):
            return self._occurs(v, t.elem)
        if isinstance(t, ArrowT):
            return self._occurs(v, t.arg) or self._occurs(v, t.res)
        return False

    def mismatch(self, found: SemType, expected: SemType, span, what: str = "type mismatch"):
        raise TypeMismatch(f"{what}: expected {show(self.zonk(expected))}, found {show(self.zonk(found))}", span)

    def unify(self, found: SemType, expected: SemType, span, what: str = "type mismatch") -> None:
        a, b = self.prune(found), self.prune(expected)
        if a == b:
            return
        if isinstance(a, TVar) or isinstance(b, TVar):
            v, t = (a, b) if isinstance(a, TVar) else (b, a)
            if self._occurs(v, t):
                raise TypeMismatch(f"{what}: circular type", span)
            self.subst[v.id] = t
            return
        try:
            if isinstance(a, TupleT) and isinstance(b, TupleT) and len(a.items) == len(b.items):
                for x, y in zip(a.items, b.items):
                    self.unify(x, y, span, what)
                return
            if (isinstance(a, RecordT) and isinstance(b, RecordT)
                    and [l for l, _ in a.fields] == [l for l, _ in b.fields]):
                for (_, x), (_, y) in zip(a.fields, b.fields):
                    self.unify(x, y, span, what)
                return
            if isinstance(a, ListT) and isinstance(b, ListT):
                self.unify(a.elem, b.elem, span, what)
                return
            if isinstance(a, ArrowT) and isinstance(b, ArrowT):
                self.unify(a.arg, b.arg, span, what)
                self.unify(a.res, b.res, span, what)
                return
        except TypeMismatch:
            self.mismatch(found, expected, span, what)
        self.mismatch(found, expected, span, what)

    def subsume(self, found: SemType, expected: SemType, span, what: str = "type mismatch") -> None:
        """Like unify, but an interface or instance may stand for a thinner one."""
        a, b = self.prune(found), self.prune(expected)
        if isinstance(a, IfcT) and isinstance(b, IfcT) and a.sig != b.sig:
            rep = match_interface(self.env.interface(a.sig), self.env.interface(b.sig))
            if not rep.ok:
                raise TypeMismatch(f"{what}: {show(a)} does not match {show(b)} ({'; '.join(rep.describe())})", span)
            return
        if isinstance(a, CompT) and isinstance(b, CompT) and a.sig != b.sig:
            rep = match_component(self.env.component(a.sig), self.env.component(b.sig), self.env)
            if not rep.ok:
                raise TypeMismatch(f"{what}: {show(a)} does not match {show(b)} ({'; '.join(rep.describe())})", span)
            return
        if isinstance(a, TupleT) and isinstance(b, TupleT) and len(a.items) == len(b.items):
            for x, y in zip(a.items, b.items):
                self.subsume(x, y, span, what)
            return
        self.unify(a, b, span, what)

    # -- constraints on overloaded primitives -------------------------------

    def constrain(self, t: SemType, kind: str, span) -> None:
        self.pending.append((t, kind, span))

    def flush(self) -> None:
        pending, self.pending = self.pending, []
        for t, kind, span in pending:
            t = self.prune(t)
            if isinstance(t, TVar):
                if kind in ("num", "ord"):
                    self.subst[t.id] = INT
                continue
            t = self.zonk(t)
            if kind == "num" and t not in (INT, REAL):
                raise TypeMismatch(f"arithmetic needs int or real, found {show(t)}", span)
            if kind == "ord" and t not in (INT, REAL, STRING):
                raise TypeMismatch(f"comparison needs int, real or string, found {show(t)}", span)
            if kind == "eq":
                bad = self._non_equality(t)
                if bad is not None:
                    raise TypeMismatch(f"equality is not defined on {show(bad)}", span)

    def _non_equality(self, t: SemType) -> Optional[SemType]:
        t = self.prune(t)
        if isinstance(t, (ArrowT, AbstractT)):
            return t
        if isinstance(t, TupleT):
            for i in t.items:
                r = self._non_equality(i)
                if r is not None:
                    return r
        if isinstance(t, RecordT):
            for _, ft in t.fields:
                r = self._non_equality(ft)
                if r is not None:
                    return r
        if isinstance(t, ListT):
            return self._non_equality(t.elem)
        return None

    # -- builtins -------------------------------------------------------------

    def _install_builtins(self) -> None:
        def poly(make):
            return Binding(None, None, make)

        def binop(kind=None, result=None, fixed=None):
            def make(span=None):
                a = fixed if fixed is not None else self.fresh()
                if kind:
                    self.constrain(a, kind, span)
                return ArrowT(TupleT((a, a)), result if result is not None else a)
            return make

        def mono(t):
            return lambda span=None: t

        def list_fn(f):
            def make(span=None):
                a = self.fresh()
                return f(a)
            return make

        def neg(span=None):
            a = self.fresh()
            self.constrain(a, "num", span)
            return ArrowT(a, a)

        table = {
            "+": binop("num"), "-": binop("num"), "*": binop("num"),
            "/": binop(fixed=REAL), "div": binop(fixed=INT), "mod": binop(fixed=INT),
            "^": binop(fixed=STRING),
            "=": binop("eq", BOOL), "<>": binop("eq", BOOL),
            "<": binop("ord", BOOL), ">": binop("ord", BOOL),
            "<=": binop("ord", BOOL), ">=": binop("ord", BOOL),
            "::": list_fn(lambda a: ArrowT(TupleT((a, ListT(a))), ListT(a))),
            "@": list_fn(lambda a: ArrowT(TupleT((ListT(a), ListT(a))), ListT(a))),
            "~": neg,
            "print": mono(ArrowT(STRING, UNIT)),
            "sleep": mono(ArrowT(INT, UNIT)),
            "not": mono(ArrowT(BOOL, BOOL)),
            "int_to_string": mono(ArrowT(INT, STRING)),
            "real_to_string": mono(ArrowT(REAL, STRING)),
            "bool_to_string": mono(ArrowT(BOOL, STRING)),
            "real": mono(ArrowT(INT, REAL)),
            "trunc": mono(ArrowT(REAL, INT)),
            "size": mono(ArrowT(STRING, INT)),
            "hd": list_fn(lambda a: ArrowT(ListT(a), a)),
            "tl": list_fn(lambda a: ArrowT(ListT(a), ListT(a))),
            "null": list_fn(lambda a: ArrowT(ListT(a), BOOL)),
            "length": list_fn(lambda a: ArrowT(ListT(a), INT)),
        }
        for name, make in table.items():
            self.globals.values[name] = poly(make)

    # -- type expressions -----------------------------------------------------

    def resolve(self, ty, scope: Scope) -> SemType:
        return resolve_ty(ty, self.env, scope.type_names(), lambda p: self._type_path(p, scope))

    def _type_path(self, ty: A.TyPath, scope: Scope) -> SemType:
        root, *labels, tname = ty.path
        b = scope.lookup(root)
        if b is None or b.type is None:
            raise UnboundVariable(f"unbound variable {root} in type path", ty.span)
        t, key = self.prune(b.type), b.key
        for label in labels:
            if isinstance(t, CompT):
                lm = self.env.component(t.sig).label_map()
                if label not in lm:
                    raise NoSuchInterface(f"{show(t)} has no interface {label}", ty.span)
                t = IfcT(lm[label])
                key = key + (label,) if key else None
            else:
                raise TypeMismatch(f"type path {'.'.join(ty.path)} does not go through an instance", ty.span)
        if not isinstance(t, IfcT):
            raise TypeMismatch(f"type path {'.'.join(ty.path)} must end in an interface", ty.span)
        sig = self.env.interface(t.sig)
        if tname not in sig.types:
            raise NoSuchMember(f"{sig.name} has no type member {tname}", ty.span)
        manifest = sig.manifest_map()
        if tname in manifest:
            return manifest[tname]
        if key is None:
            raise TypeMismatch(f"type path {'.'.join(ty.path)} needs a named value", ty.span)
        return self._path_abstract(key, sig.name, tname)

    def _path_abstract(self, key: PathKey, sig_name: str, tname: str) -> AbstractT:
        k = (key, sig_name, tname)
        if k not in self.path_stamps:
            self.path_stamps[k] = AbstractT(sig_name, tname, self.env.fresh_stamp())
        return self.path_stamps[k]

    def open_member(self, sig: InterfaceSig, mtype: SemType, key: Optional[PathKey]) -> SemType:
        """The type of a member seen from outside: abstract types become path stamps."""
        real = {}
        for tname in sig.abstract_types():
            if key is not None:
                real[(sig.name, tname, sig.stamp)] = self._path_abstract(key, sig.name, tname)
            else:
                real[(sig.name, tname, sig.stamp)] = AbstractT(sig.name, tname, self.env.fresh_stamp())

        def fn(x):
            if isinstance(x, AbstractT):
                return real.get((x.owner, x.name, x.stamp))
            return None
        return map_type(mtype, fn)

    # -- patterns ---------------------------------------------------------------

    def bind(self, p, t: SemType, scope: Scope, key: Optional[PathKey] = None) -> None:
        if isinstance(p, A.PWild):
            return
        if isinstance(p, A.PVar):
            scope.values[p.name] = Binding(t, key or self.fresh_key())
            self.types[id(p)] = t
            return
        if isinstance(p, A.PLit):
            self.unify(t, _lit_type(p.kind), p.span, "literal pattern")
            return
        if isinstance(p, A.PTuple):
            items = tuple(self.fresh() for _ in p.items)
            self.unify(t, TupleT(items), p.span, "tuple pattern")
            for sub, it in zip(p.items, items):
                self.bind(sub, it, scope)
            return
        if isinstance(p, A.PList):
            a = self.fresh()
            self.unify(t, ListT(a), p.span, "list pattern")
            for sub in p.items:
                self.bind(sub, a, scope)
            return
        if isinstance(p, A.PCons):
            a = self.fresh()
            self.unify(t, ListT(a), p.span, "list pattern")
            self.bind(p.head, a, scope)
            self.bind(p.tail, ListT(a), scope)
            return
        if isinstance(p, A.PAnnot):
            ann = self.resolve(p.ty, scope)
            self.subsume(t, ann, p.span, "annotated pattern")
            self.bind(p.pat, ann, scope, key)
            return
        raise TypeError(f"not a pattern: {p!r}")

    # -- expressions ------------------------------------------------------------

    def infer(self, e, scope: Scope) -> SemType:
        t = self._infer(e, scope)
        self.types[id(e)] = t
        return t

    def _infer(self, e, scope: Scope) -> SemType:
        if isinstance(e, A.Lit):
            return _lit_type(e.kind)
        if isinstance(e, A.Var):
            b = scope.lookup(e.name)
            if b is None:
                raise UnboundVariable(f"unbound variable {e.name}", e.span)
            if b.scheme is not None:
                return b.scheme(e.span)
            if b.key is not None:
                self.keys[id(e)] = b.key
            return b.type
        if isinstance(e, A.Tuple):
            return TupleT(tuple(self.infer(i, scope) for i in e.items))
        if isinstance(e, A.Record):
            labels = [l for l, _ in e.fields]
            if len(set(labels)) != len(labels):
                raise TypeMismatch("duplicate record label", e.span)
            return RecordT.of((l, self.infer(v, scope)) for l, v in e.fields)
        if isinstance(e, A.ListExpr):
            a = self.fresh()
            for item in e.items:
                self.subsume(self.infer(item, scope), a, item.span, "list element")
            return ListT(a)
        if isinstance(e, A.Fn):
            a = self.fresh()
            inner = Scope(scope)
            self.bind(e.param, a, inner)
            return ArrowT(a, self.infer(e.body, inner))
        if isinstance(e, A.App):
            return self._app(e, scope)
        if isinstance(e, A.Let):
            inner = Scope(scope)
            for d in e.decls:
                self.core_decl(d, inner)
            return self.infer(e.body, inner)
        if isinstance(e, A.If):
            self.unify(self.infer(e.cond, scope), BOOL, e.cond.span, "if condition")
            t = self.infer(e.then, scope)
            self.unify(self.infer(e.else_, scope), t, e.else_.span, "if branches")
            return t
        if isinstance(e, A.Seq):
            t = UNIT
            for item in e.items:
                t = self.infer(item, scope)
            return t
        if isinstance(e, A.Annot):
            ann = self.resolve(e.ty, scope)
            self.subsume(self.infer(e.expr, scope), ann, e.span, "annotation")
            return ann
        if isinstance(e, A.DotAccess):
            return self._dot(e, scope)
        if isinstance(e, A.Instantiate):
            return self._instantiate(e, scope)
        if isinstance(e, A.IfcCase):
            return self._ifc_case(e, scope)
        if isinstance(e, A.InstanceOf):
            t = self.prune(self.infer(e.expr, scope))
            if not isinstance(t, IfcT):
                raise TypeMismatch(f"instanceOf needs an interface, found {show(self.zonk(t))}", e.span)
            return INST
        raise TypeError(f"not an expression: {e!r}")

    def _app(self, e: A.App, scope: Scope) -> SemType:
        ft = self.prune(self.infer(e.fn, scope))
        at = self.infer(e.arg, scope)
        if isinstance(ft, ArrowT):
            self.subsume(at, ft.arg, e.arg.span or e.span, "argument")
            return ft.res
        if isinstance(ft, TVar):
            r = self.fresh()
            self.unify(ft, ArrowT(at, r), e.span, "application")
            return r
        raise TypeMismatch(f"cannot apply a value of type {show(self.zonk(ft))}", e.span)

    def _dot(self, e: A.DotAccess, scope: Scope) -> SemType:
        t = self.infer(e.expr, scope)
        key = self.keys.get(id(e.expr))
        steps = []
        for label in e.path:
            t = self.prune(t)
            if isinstance(t, CompT):
                lm = self.env.component(t.sig).label_map()
                if label not in lm:
                    raise NoSuchInterface(f"{show(t)} has no interface {label}", e.span)
                sig = self.env.interface(lm[label])
                steps.append(("ifc", label, sig))
                t = IfcT(sig.name)
                key = key + (label,) if key is not None else None
            elif isinstance(t, IfcT):
                sig = self.env.interface(t.sig)
                vm = sig.value_map()
                if label not in vm:
                    raise NoSuchMember(f"{show(t)} has no member {label}", e.span)
                steps.append(("member", label, sig))
                t = self.open_member(sig, vm[label], key)
                key = None
            elif isinstance(t, RecordT):
                fm = t.field_map()
                if label not in fm:
                    raise NoSuchMember(f"record {show(self.zonk(t))} has no field {label}", e.span)
                steps.append(("field", label, None))
                t = fm[label]
                key = None
            elif isinstance(t, InstT):
                raise NoSuchInterface(
                    f"a dynamic instance has no static interfaces; use ifc_case to select {label}", e.span)
            elif isinstance(t, TVar):
                raise TypeMismatch(f"cannot resolve .{label} on a value of unknown type; add an annotation", e.span)
            else:
                raise TypeMismatch(f"cannot select .{label} from {show(self.zonk(t))}", e.span)
        if key is not None:
            self.keys[id(e)] = key
        self.info[id(e)] = tuple(steps)
        return t

    def _instantiate(self, e: A.Instantiate, scope: Scope) -> SemType:
        info = self.components.get(e.component)
        if info is None:
            raise UnboundComponent(f"unbound component {e.component}", e.span)
        params = dict(info.params)
        given = set()
        for name, arg in e.args:
            if name not in params:
                raise TypeMismatch(f"{e.component} has no parameter {name}", arg.span or e.span)
            if name in given:
                raise TypeMismatch(f"parameter {name} given twice", arg.span or e.span)
            given.add(name)
            self.subsume(self.infer(arg, scope), params[name], arg.span or e.span, f"parameter {name}")
        missing = [n for n, _ in info.params if n not in given]
        if missing:
            raise TypeMismatch(f"{e.component} is missing parameter(s) {', '.join(missing)}", e.span)
        self.info[id(e)] = info
        return CompT(info.sig.name)

    def _ifc_case(self, e: A.IfcCase, scope: Scope) -> SemType:
        st = self.prune(self.infer(e.scrutinee, scope))
        if not isinstance(st, (CompT, InstT)):
            raise TypeMismatch(f"ifc_case needs a component instance, found {show(self.zonk(st))}",
                               e.scrutinee.span or e.span)
        result = self.fresh()
        sigs = []
        for sname, arm in e.arms:
            if sname not in self.env.interfaces:
                raise UnboundSignature(f"unbound interface signature {sname}", arm.span or e.span)
            sigs.append(self.env.interface(sname))
            inner = Scope(scope)
            if isinstance(e.scrutinee, A.Var):
                inner.values[e.scrutinee.name] = Binding(CompT(self.env.single(sname).name), self.fresh_key())
            self.unify(self.infer(arm, inner), result, arm.span or e.span, "ifc_case arms")
        self.unify(self.infer(e.else_, scope), result, e.else_.span or e.span, "ifc_case else branch")
        self.info[id(e)] = tuple(sigs)
        return result

    # -- declarations -----------------------------------------------------------

    def core_decl(self, d, scope: Scope, expected: dict[str, SemType] | None = None) -> None:
        expected = expected or {}
        if isinstance(d, A.ValDecl):
            t = self.infer(d.expr, scope)
            if isinstance(d.pat, A.PVar) and d.pat.name in expected:
                self.subsume(t, expected[d.pat.name], d.span, f"member {d.pat.name}")
            self.bind(d.pat, t, scope, self.keys.get(id(d.expr)) if isinstance(d.pat, (A.PVar, A.PAnnot)) else None)
        elif isinstance(d, A.FunDecl):
            self._fun(d, scope, expected.get(d.name))
        elif isinstance(d, A.TypeDecl):
            scope.types[d.name] = self.resolve(d.ty, scope)
        else:
            raise StaticError(f"{type(d).__name__} is only allowed at top level", getattr(d, "span", None))

    def _fun(self, d: A.FunDecl, scope: Scope, expected: Optional[SemType]) -> None:
        arity = len(d.clauses[0].params)
        params = [self.fresh() for _ in range(arity)]
        res = self.fresh()
        ft: SemType = res
        for p in reversed(params):
            ft = ArrowT(p, ft)
        if expected is not None:
            self.unify(ft, expected, d.span, f"member {d.name}")
        scope.values[d.name] = Binding(ft, self.fresh_key())
        for clause in d.clauses:
            inner = Scope(scope)
            for p, pt in zip(clause.params, params):
                self.bind(p, pt, inner)
            self.subsume(self.infer(clause.body, inner), res, clause.body.span or clause.span, f"result of {d.name}")

    def _component(self, d: A.ComponentDecl) -> None:
        if d.name in self.components:
            raise StaticError(f"component {d.name} is already declared", d.span)
        if d.sig not in self.env.components:
            raise UnboundSignature(f"unbound component signature {d.sig}", d.span)
        csig = self.env.component(d.sig)
        params = []
        for p in d.params:
            pt = self.resolve(p.ty, self.globals)
            if not isinstance(pt, (IfcT, CompT)):
                raise TypeMismatch(f"component parameter {p.name} must be interface or instance typed", p.span)
            params.append((p.name, pt))
        if len({n for n, _ in params}) != len(params):
            raise TypeMismatch(f"duplicate parameter in {d.name}", d.span)
        labels = csig.label_map()
        info = ComponentInfo(d.name, "internal", csig, params, d,
                             {label: self.env.interface(s) for label, s in csig.interfaces})
        self.components[d.name] = info

        body = Scope(self.globals)
        for name, pt in params:
            body.values[name] = Binding(pt, self.fresh_key())
        for local in d.locals:
            self.core_decl(local, body)
        seen = set()
        for impl in d.impls:
            if impl.label not in labels:
                raise NoSuchInterface(f"{d.sig} declares no interface {impl.label}", impl.span)
            if impl.label in seen:
                raise NoSuchInterface(f"interface {impl.label} implemented twice", impl.span)
            seen.add(impl.label)
            self._impl(impl, self.env.interface(labels[impl.label]), body)
        missing = [l for l in labels if l not in seen]
        if missing:
            raise NoSuchInterface(f"{d.name} does not implement interface(s) {', '.join(missing)}", d.span)

    def _impl(self, impl: A.InterfaceImpl, sig: InterfaceSig, outer: Scope) -> None:
        scope = Scope(outer)
        manifest = sig.manifest_map()
        scope.types.update(manifest)
        values = sig.value_map()

        def realization():
            names = scope.types
            real = {}
            for tname in sig.abstract_types():
                if tname not in names:
                    return None
                real[(sig.name, tname, sig.stamp)] = names[tname]
            return real

        def realize(t, real):
            return map_type(t, lambda x: real.get((x.owner, x.name, x.stamp)) if isinstance(x, AbstractT) else None)

        for d in impl.decls:
            real = realization()
            expected = {}
            if real is not None and isinstance(d, (A.FunDecl, A.ValDecl)):
                expected = {n: realize(t, real) for n, t in values.items()}
            self.core_decl(d, scope, expected)
            if isinstance(d, A.TypeDecl) and d.name in manifest:
                self.unify(scope.types[d.name], manifest[d.name], d.span, f"type {d.name}")
        real = realization()
        if real is None:
            missing = [t for t in sig.abstract_types() if t not in scope.types]
            raise NoSuchMember(f"interface {impl.label} does not define type {missing[0]} of {sig.name}", impl.span)
        for vname, vtype in sig.values:
            b = scope.values.get(vname)
            if b is None:
                raise NoSuchMember(f"interface {impl.label} does not define {vname} of {sig.name}", impl.span)
            self.subsume(b.type, realize(vtype, real), impl.span, f"member {vname} of {sig.name}")

    def _import(self, d: A.ImportDecl) -> None:
        if d.name in self.components:
            raise StaticError(f"component {d.name} is already declared", d.span)
        if d.sig not in self.env.components:
            raise UnboundSignature(f"unbound component signature {d.sig}", d.span)
        csig = self.env.component(d.sig)
        for label, s in csig.interfaces:
            if self.env.interface(s).iid is None:
                raise MissingIID(f"imported interface {label} : {s} must specify an IID", d.span)
        self.components[d.name] = ComponentInfo(
            d.name, "imported", csig, [], d,
            {label: self.env.interface(s) for label, s in csig.interfaces})

    def _export(self, d: A.ExportDecl) -> None:
        info = self.components.get(d.component)
        if info is None:
            raise UnboundComponent(f"unbound component {d.component}", d.span)
        if info.kind != "internal":
            raise NotExportable(f"{d.component} is imported and cannot be re-exported", d.span)
        if d.sig not in self.env.components:
            raise UnboundSignature(f"unbound component signature {d.sig}", d.span)
        target = self.env.component(d.sig)
        rep = match_component(info.sig, target, self.env)
        if not rep.ok:
            raise NotExportable(f"{d.component} does not match {d.sig}: {'; '.join(rep.describe())}",
                                d.span, rep.describe())
        ok, violations = check_exportable(d.component, info.params, target, self.env)
        if not ok:
            raise NotExportable(f"{d.component} : {d.sig} is not exportable: {'; '.join(violations)}",
                                d.span, violations)
        self.exports.append(d)

    def run(self) -> TypedProgram:
        for d in self.program.decls:
            if isinstance(d, (A.InterfaceSigDecl, A.ComponentSigDecl)):
                continue
            if isinstance(d, A.ComponentDecl):
                self._component(d)
            elif isinstance(d, A.ImportDecl):
                self._import(d)
            elif isinstance(d, A.ExportDecl):
                self._export(d)
            else:
                self.core_decl(d, self.globals)
            self.flush()

        def close(t):
            t = self.zonk(t)
            return map_type(t, lambda x: UNIT if isinstance(x, TVar) else None)
        types = {k: close(t) for k, t in self.types.items()}
        return TypedProgram(self.program, self.env, types, self.info, self.components, self.exports)


def _lit_type(kind: str) -> SemType:
    return {"int": INT, "real": REAL, "bool": BOOL, "string": STRING, "unit": UNIT}[kind]


def typecheck(program: A.SurfaceProgram, env: SigEnv) -> TypedProgram:
    return Checker(program, env).run()


def check_program(program: A.SurfaceProgram) -> TypedProgram:
    """Elaborate signatures and typecheck; raise the first error found."""
    env, errors = elaborate_sigs(program)
    if errors:
        raise errors[0]
    return typecheck(program, env)
