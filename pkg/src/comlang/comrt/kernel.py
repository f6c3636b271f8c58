"""The simulated component kernel.

A :class:`Runtime` is one session.  It creates instances, hands out one
:class:`InterfaceHandle` per (instance, interface), keeps an addref/release
ledger per pair, reclaims an instance once every ledger balances, and logs
each count change as a :class:`RefcountEvent`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

from ..errors import (ComlangError, InstantiationFailure, OverRelease, ReclaimedInstance,
                      RuntimeFault, SessionMismatch)
from ..sema.sigs import ComponentSig, InterfaceSig, match_interface
from .vtable import VtableLayout, compute_vtable_layout

_sessions = itertools.count(1)


class NotSupported(Exception):
    """QueryInterface found no matching interface.  A negotiation outcome, not a fault."""

    def __init__(self, sig_name: str):
        super().__init__(f"interface {sig_name} not supported")
        self.sig_name = sig_name


@dataclass(frozen=True, order=True)
class IdentityToken:
    value: int
    session: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class RefcountEvent:
    kind: str  # "addref" | "release"
    owner: IdentityToken
    sig: str
    timestamp: int

    def render(self) -> str:
        return f"RC {self.kind} instance={self.owner} ifc={self.sig} t={self.timestamp}"


# A factory builds the dispatch tables of a fresh instance: it returns a
# mapping from interface sig name to (InterfaceSig, {member: value}).
Factory = Callable[["InstanceHandle", Any], dict[str, tuple[InterfaceSig, dict[str, Any]]]]


@dataclass
class ComponentClass:
    name: str
    sig: ComponentSig
    kind: str  # "internal" | "imported"
    factory: Factory
    query_hook: Optional[Callable[["InstanceHandle", InterfaceSig], Optional[dict[str, Any]]]] = None
    on_reclaim: Optional[Callable[["InstanceHandle"], None]] = None


class InterfaceHandle:
    __slots__ = ("instance", "sig", "dispatch", "_layout")

    def __init__(self, instance: "InstanceHandle", sig: InterfaceSig, dispatch: dict[str, Any]):
        self.instance = instance
        self.sig = sig
        self.dispatch = dispatch
        self._layout: Optional[VtableLayout] = None

    @property
    def owner(self) -> IdentityToken:
        return self.instance.token

    @property
    def sig_name(self) -> str:
        return self.sig.name

    @property
    def layout(self) -> VtableLayout:
        if self._layout is None:
            self._layout = compute_vtable_layout(self.sig)
        return self._layout

    def __repr__(self) -> str:
        return f"<InterfaceHandle {self.sig.name} of #{self.owner}>"


class InstanceHandle:
    def __init__(self, token: IdentityToken, cls: ComponentClass, session: int):
        self.token = token
        self.cls = cls
        self.session = session
        self.ifc_table: dict[str, InterfaceHandle] = {}
        self.ledger: dict[str, list[int]] = {}
        self.env: Any = None
        self.data: dict[str, Any] = {}
        self.reclaimed = False

    @property
    def identity(self) -> IdentityToken:
        return self.token

    def handle_for_label(self, label: str) -> InterfaceHandle:
        return self.ifc_table[self.cls.sig.label_map()[label]]

    def counts(self, sig_name: str) -> tuple[int, int]:
        a, r = self.ledger[sig_name]
        return a, r

    def __repr__(self) -> str:
        return f"<InstanceHandle #{self.token} {self.cls.name}>"


@dataclass(frozen=True)
class LeakEntry:
    token: IdentityToken
    sig: str
    addrefs: int
    releases: int

    def render(self) -> str:
        return f"LEAK instance={self.token} ifc={self.sig} addrefs={self.addrefs} releases={self.releases}"


Subject = Union[InstanceHandle, InterfaceHandle]


class Runtime:
    def __init__(self):
        self.session = next(_sessions)
        self._tokens = itertools.count(1)
        self._clock = itertools.count(1)
        self.instances: dict[IdentityToken, InstanceHandle] = {}
        self.events: list[RefcountEvent] = []
        self.listeners: list[Callable[[RefcountEvent], None]] = []
        self.created: list[IdentityToken] = []

    # -- bookkeeping ------------------------------------------------------

    def _log(self, kind: str, inst: InstanceHandle, sig: str) -> None:
        ev = RefcountEvent(kind, inst.token, sig, next(self._clock))
        self.events.append(ev)
        for fn in self.listeners:
            fn(ev)

    def _own(self, inst: InstanceHandle) -> None:
        if inst.session != self.session:
            raise SessionMismatch(f"instance #{inst.token} belongs to session {inst.session}, not {self.session}")

    def _install(self, inst: InstanceHandle, sig: InterfaceSig, dispatch: dict[str, Any]) -> InterfaceHandle:
        h = InterfaceHandle(inst, sig, dispatch)
        inst.ifc_table[sig.name] = h
        inst.ledger[sig.name] = [1, 0]
        self._log("addref", inst, sig.name)
        return h

    # -- operations ---------------------------------------------------------

    def create_instance(self, cls: ComponentClass, args: Any = None) -> InstanceHandle:
        token = IdentityToken(next(self._tokens), self.session)
        inst = InstanceHandle(token, cls, self.session)
        try:
            tables = cls.factory(inst, args)
        except InstantiationFailure:
            raise
        except ComlangError as e:
            raise InstantiationFailure(f"instantiating {cls.name} failed: {e.message}", e.span) from e
        except RecursionError as e:
            raise InstantiationFailure(f"instantiating {cls.name} failed: recursion too deep") from e
        self.instances[token] = inst
        self.created.append(token)
        for sig_name, (sig, dispatch) in tables.items():
            self._install(inst, sig, dispatch)
        if not inst.ifc_table:
            # nothing to count: the instance is born balanced
            self._reclaim(inst)
        return inst

    def _find(self, inst: InstanceHandle, sig: InterfaceSig) -> Optional[InterfaceHandle]:
        table = inst.ifc_table
        if inst.cls.kind == "imported":
            if sig.iid is None:
                return None
            for h in table.values():
                if h.sig.iid == sig.iid:
                    return h
            if inst.cls.query_hook is not None:
                dispatch = inst.cls.query_hook(inst, sig)
                if dispatch is not None:
                    h = InterfaceHandle(inst, sig, dispatch)
                    table[sig.name] = h
                    inst.ledger[sig.name] = [0, 0]
                    return h
            return None
        if sig.name in table and table[sig.name].sig == sig:
            return table[sig.name]
        for h in table.values():
            if match_interface(h.sig, sig).ok:
                return h
        return None

    def query_interface(self, subject: Subject, sig: InterfaceSig) -> InterfaceHandle:
        inst = subject if isinstance(subject, InstanceHandle) else subject.instance
        self._own(inst)
        if inst.reclaimed:
            raise ReclaimedInstance(f"QueryInterface on reclaimed instance #{inst.token}")
        h = self._find(inst, sig)
        if h is None:
            raise NotSupported(sig.name)
        self.addref(h)
        return h

    def probe(self, subject: Subject, sig: InterfaceSig) -> Optional[InterfaceHandle]:
        try:
            return self.query_interface(subject, sig)
        except NotSupported:
            return None

    def addref(self, h: InterfaceHandle) -> None:
        inst = h.instance
        self._own(inst)
        if inst.reclaimed:
            raise ReclaimedInstance(f"AddRef on reclaimed instance #{inst.token}")
        inst.ledger[h.sig.name][0] += 1
        self._log("addref", inst, h.sig.name)

    def release(self, h: InterfaceHandle) -> None:
        inst = h.instance
        self._own(inst)
        entry = inst.ledger[h.sig.name]
        if inst.reclaimed or entry[1] >= entry[0]:
            raise OverRelease(f"release of {h.sig.name} on instance #{inst.token} exceeds its addrefs")
        entry[1] += 1
        self._log("release", inst, h.sig.name)
        if all(a == r for a, r in inst.ledger.values()):
            self._reclaim(inst)

    def _reclaim(self, inst: InstanceHandle) -> None:
        inst.reclaimed = True
        inst.env = None
        if inst.cls.on_reclaim is not None:
            inst.cls.on_reclaim(inst)

    @staticmethod
    def same_instance(a: Subject, b: Subject) -> bool:
        ta = a.token if isinstance(a, InstanceHandle) else a.owner
        tb = b.token if isinstance(b, InstanceHandle) else b.owner
        return ta == tb

    def leak_report(self) -> list[LeakEntry]:
        out = []
        for token in sorted(self.instances):
            inst = self.instances[token]
            for sig in sorted(inst.ledger):
                a, r = inst.ledger[sig]
                if a != r:
                    out.append(LeakEntry(token, sig, a, r))
        return out

    def live_instances(self) -> list[InstanceHandle]:
        return [i for i in self.instances.values() if not i.reclaimed]


def render_leak_report(entries: list[LeakEntry]) -> str:
    return "".join(e.render() + "\n" for e in entries)


__all__ = ["ComponentClass", "IdentityToken", "InstanceHandle", "InterfaceHandle", "LeakEntry",
           "NotSupported", "RefcountEvent", "Runtime", "RuntimeFault", "render_leak_report"]
