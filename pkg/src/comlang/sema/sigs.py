"""Signature elaboration and opaque signature matching."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..errors import (DuplicateInterface, DuplicateSignature, StaticError, TypeMismatch,
                      UnboundSignature)
from ..syntax import ast as A
from .types import (BASE_TYPES, AbstractT, ArrowT, CompT, IfcT, ListT, RecordT, SemType,
                    TupleT, show, substitute_abstract)


class UnboundType(StaticError):
    pass


@dataclass(frozen=True)
class InterfaceSig:
    name: str
    types: tuple[str, ...]
    values: tuple[tuple[str, SemType], ...]
    iid: Optional[str] = None
    stamp: int = 0
    manifest: tuple[tuple[str, SemType], ...] = ()

    def value_map(self) -> dict[str, SemType]:
        return dict(self.values)

    def manifest_map(self) -> dict[str, SemType]:
        return dict(self.manifest)

    def abstract_types(self) -> list[str]:
        m = self.manifest_map()
        return [t for t in self.types if t not in m]

    def own_abstract(self, name: str) -> AbstractT:
        return AbstractT(self.name, name, self.stamp)


@dataclass(frozen=True)
class ComponentSig:
    name: str
    interfaces: tuple[tuple[str, str], ...]  # (label, interface sig name)

    def label_map(self) -> dict[str, str]:
        return dict(self.interfaces)

    def sig_names(self) -> list[str]:
        return [s for _, s in self.interfaces]


@dataclass
class SigEnv:
    interfaces: dict[str, InterfaceSig] = field(default_factory=dict)
    components: dict[str, ComponentSig] = field(default_factory=dict)
    _stamps: itertools.count = field(default_factory=lambda: itertools.count(1), repr=False)

    def fresh_stamp(self) -> int:
        return next(self._stamps)

    def interface(self, name: str) -> InterfaceSig:
        return self.interfaces[name]

    def component(self, name: str) -> ComponentSig:
        if name not in self.components and name.startswith("{") and name.endswith("}"):
            return self.single(name[1:-1])
        return self.components[name]

    def single(self, ifc_name: str) -> ComponentSig:
        """The anonymous component signature exposing exactly one interface,
        labelled by the interface signature's own name."""
        name = "{" + ifc_name + "}"
        if name not in self.components:
            self.components[name] = ComponentSig(name, ((ifc_name, ifc_name),))
        return self.components[name]

    def __len__(self) -> int:
        return len(self.interfaces) + len([c for c in self.components if not c.startswith("{")])


@dataclass(frozen=True)
class MatchReport:
    failures: tuple[tuple[str, str], ...] = ()  # (member path, missing|type-mismatch|kind-mismatch)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> list[str]:
        return [f"{path}: {reason}" for path, reason in self.failures]


# -- type expressions ---------------------------------------------------------

def resolve_ty(ty, env: SigEnv, type_names: dict[str, SemType], path_resolver=None) -> SemType:
    if isinstance(ty, A.TyName):
        if ty.name in type_names:
            return type_names[ty.name]
        if ty.name in BASE_TYPES:
            return BASE_TYPES[ty.name]
        raise UnboundType(f"unbound type {ty.name}", ty.span)
    if isinstance(ty, A.TyIfc):
        if ty.sig not in env.interfaces:
            raise UnboundSignature(f"unbound interface signature {ty.sig}", ty.span)
        return IfcT(ty.sig)
    if isinstance(ty, A.TyComp):
        if ty.sig not in env.components:
            raise UnboundSignature(f"unbound component signature {ty.sig}", ty.span)
        return CompT(ty.sig)
    if isinstance(ty, A.TyTuple):
        return TupleT(tuple(resolve_ty(i, env, type_names, path_resolver) for i in ty.items))
    if isinstance(ty, A.TyArrow):
        return ArrowT(resolve_ty(ty.arg, env, type_names, path_resolver),
                      resolve_ty(ty.res, env, type_names, path_resolver))
    if isinstance(ty, A.TyList):
        return ListT(resolve_ty(ty.elem, env, type_names, path_resolver))
    if isinstance(ty, A.TyRecord):
        labels = [l for l, _ in ty.fields]
        if len(set(labels)) != len(labels):
            raise TypeMismatch("duplicate record label in type", ty.span)
        return RecordT.of((l, resolve_ty(ft, env, type_names, path_resolver)) for l, ft in ty.fields)
    if isinstance(ty, A.TyPath):
        if path_resolver is None:
            raise UnboundType(f"type path {'.'.join(ty.path)} is not allowed here", ty.span)
        return path_resolver(ty)
    raise TypeError(f"not a type expression: {ty!r}")


# -- elaboration ------------------------------------------------------------

def elaborate_interface(d: A.InterfaceSigDecl, env: SigEnv) -> InterfaceSig:
    stamp = env.fresh_stamp()
    seen = set()
    for m in d.members:
        if m.name in seen:
            raise DuplicateSignature(f"member {m.name} declared twice in {d.name}", m.span)
        seen.add(m.name)
    type_names: dict[str, SemType] = {}
    types, manifest = [], []
    for m in d.members:
        if isinstance(m, A.TypeSpec):
            types.append(m.name)
            if m.ty is None:
                type_names[m.name] = AbstractT(d.name, m.name, stamp)
            else:
                real = resolve_ty(m.ty, env, type_names)
                type_names[m.name] = real
                manifest.append((m.name, real))
    # value specs may mention any type member of the signature
    for m in d.members:
        if isinstance(m, A.TypeSpec) and m.name not in type_names:
            type_names[m.name] = AbstractT(d.name, m.name, stamp)
    values = tuple((m.name, resolve_ty(m.ty, env, type_names))
                   for m in d.members if isinstance(m, A.ValSpec))
    return InterfaceSig(d.name, tuple(types), values, d.iid, stamp, tuple(manifest))


def elaborate_component_sig(d: A.ComponentSigDecl, env: SigEnv) -> ComponentSig:
    labels, sigs = set(), set()
    for label, sig in d.interfaces:
        if sig not in env.interfaces:
            raise UnboundSignature(f"unbound interface signature {sig}", d.span)
        if label in labels:
            raise DuplicateInterface(f"interface label {label} appears twice in {d.name}", d.span)
        if sig in sigs:
            raise DuplicateInterface(
                f"{d.name} provides {sig} twice; an instance offers one interface per signature", d.span)
        labels.add(label)
        sigs.add(sig)
    return ComponentSig(d.name, tuple(d.interfaces))


def elaborate_sigs(program: A.SurfaceProgram, env: SigEnv | None = None) -> tuple[SigEnv, list[StaticError]]:
    """Elaborate every signature declaration in order.  Forward references are errors."""
    env = env if env is not None else SigEnv()
    errors: list[StaticError] = []
    for d in program.decls:
        try:
            if isinstance(d, A.InterfaceSigDecl):
                if d.name in env.interfaces or d.name in env.components:
                    raise DuplicateSignature(f"signature {d.name} is already declared", d.span)
                env.interfaces[d.name] = elaborate_interface(d, env)
            elif isinstance(d, A.ComponentSigDecl):
                if d.name in env.interfaces or d.name in env.components:
                    raise DuplicateSignature(f"signature {d.name} is already declared", d.span)
                env.components[d.name] = elaborate_component_sig(d, env)
        except StaticError as e:
            errors.append(e)
    return env, errors


# -- matching ---------------------------------------------------------------

SigEquiv = Callable[[str, str, str], bool]  # (kind "ifc"|"comp", candidate name, target name)


def type_eq(a: SemType, b: SemType, equiv: SigEquiv | None = None) -> bool:
    if equiv is None:
        return a == b
    if isinstance(a, IfcT) and isinstance(b, IfcT):
        return equiv("ifc", a.sig, b.sig)
    if isinstance(a, CompT) and isinstance(b, CompT):
        return equiv("comp", a.sig, b.sig)
    if isinstance(a, TupleT) and isinstance(b, TupleT):
        return len(a.items) == len(b.items) and all(type_eq(x, y, equiv) for x, y in zip(a.items, b.items))
    if isinstance(a, RecordT) and isinstance(b, RecordT):
        return ([l for l, _ in a.fields] == [l for l, _ in b.fields]
                and all(type_eq(x, y, equiv) for (_, x), (_, y) in zip(a.fields, b.fields)))
    if isinstance(a, ListT) and isinstance(b, ListT):
        return type_eq(a.elem, b.elem, equiv)
    if isinstance(a, ArrowT) and isinstance(b, ArrowT):
        return type_eq(a.arg, b.arg, equiv) and type_eq(a.res, b.res, equiv)
    return a == b


def match_interface(candidate: InterfaceSig, target: InterfaceSig,
                    equiv: SigEquiv | None = None) -> MatchReport:
    """Opaque width matching of an interface signature against a target.

    Every type member of the target must exist in the candidate and every
    target value must exist with an equal type once the target's abstract
    types are realised by the candidate's.  Extra candidate members are
    thinned away.
    """
    failures: list[tuple[str, str]] = []
    cand_values = candidate.value_map()
    cand_manifest = candidate.manifest_map()
    realization: dict[tuple[str, str, int], SemType] = {}
    for tname in target.types:
        if tname not in candidate.types:
            failures.append((tname, "kind-mismatch" if tname in cand_values else "missing"))
            continue
        cand_real = cand_manifest.get(tname, candidate.own_abstract(tname))
        realization[(target.name, tname, target.stamp)] = cand_real
    target_manifest = target.manifest_map()
    for tname, tdef in target_manifest.items():
        if tname in candidate.types:
            cand_real = cand_manifest.get(tname, candidate.own_abstract(tname))
            if not type_eq(cand_real, substitute_abstract(tdef, realization), equiv):
                failures.append((tname, "type-mismatch"))
    for vname, vtype in target.values:
        if vname not in cand_values:
            failures.append((vname, "kind-mismatch" if vname in candidate.types else "missing"))
            continue
        want = substitute_abstract(vtype, realization)
        if not type_eq(cand_values[vname], want, equiv):
            failures.append((vname, "type-mismatch"))
    return MatchReport(tuple(failures))


def match_component(candidate: ComponentSig, target: ComponentSig, env: SigEnv,
                    target_env: SigEnv | None = None, equiv: SigEquiv | None = None) -> MatchReport:
    target_env = target_env or env
    failures: list[tuple[str, str]] = []
    cand_labels = candidate.label_map()
    for label, sig in target.interfaces:
        if label not in cand_labels:
            failures.append((label, "missing"))
            continue
        rep = match_interface(env.interface(cand_labels[label]), target_env.interface(sig), equiv)
        failures.extend((f"{label}.{path}", reason) for path, reason in rep.failures)
    return MatchReport(tuple(failures))


def describe_sig(sig: InterfaceSig) -> str:
    parts = [f"type {t}" for t in sig.types] + [f"val {n} : {show(t)}" for n, t in sig.values]
    return f"{sig.name} {{ {'; '.join(parts)} }}"
