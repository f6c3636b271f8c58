"""Import and export of components through the registry.

A source-backed import loads the exporting program into a session of its
own (separate kernel, separate evaluator, shared trace).  The importing
side sees proxy instances whose methods marshal arguments in, run the
exporter's method, and marshal results out.  Interface and instance
results come back as proxies too; one proxy per exporter instance keeps
identity comparisons meaningful on the importing side.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from ..comrt.kernel import ComponentClass, InstanceHandle, LeakEntry, Runtime
from ..errors import (ComlangError, InstantiationFailure, ManifestError, MarshalViolation,
                      NegotiationFault, NotExportable, SignatureMismatch, UnboundComponent,
                      UnboundSignature, UnknownClsid)
from ..eval.evaluator import Evaluator, Hooks, Trace
from ..eval.values import IfcV, InstV
from ..sema.idl import check_exportable, idl_expressible_interface
from ..sema.sigs import ComponentSig, InterfaceSig, SigEnv, match_component, match_interface
from ..sema.typecheck import TypedProgram, check_program
from ..sema.types import ArrowT, IfcT, SemType
from ..syntax import ast as A
from ..syntax import parse_source
from ..syntax.lexer import normalize_guid
from .marshal import decode, encode
from .registry import (BUILTIN_STUB, SOURCE_BACKED, InterfaceEntry, RegistryEntry,
                       RegistryManifest, load_manifest, update_manifest)
from .stubs import STUBS


def load_typed(path) -> TypedProgram:
    path = Path(path)
    source = path.read_text(encoding="utf-8")
    return check_program(parse_source(source, str(path)))


# -- export -------------------------------------------------------------------

def export_entry(tp: TypedProgram, program_path, component: str, sig: str, clsid: str) -> RegistryEntry:
    """The registry entry exporting ``component : sig``, after every check."""
    info = tp.components.get(component)
    if info is None:
        raise UnboundComponent(f"no component named {component}")
    if info.kind != "internal":
        raise NotExportable(f"{component} is imported and cannot be re-exported", violations=["imported"])
    if sig not in tp.env.components:
        raise UnboundSignature(f"no component signature named {sig}")
    target = tp.env.component(sig)
    rep = match_component(info.sig, target, tp.env)
    if not rep.ok:
        raise NotExportable(f"{component} does not match {sig}", violations=rep.describe())
    ok, violations = check_exportable(component, info.params, target, tp.env)
    if not ok:
        raise NotExportable(f"{component} : {sig} is not exportable: {'; '.join(violations)}",
                            violations=violations)
    ifcs = tuple(InterfaceEntry(s, tp.env.interface(s).iid) for _, s in target.interfaces)
    return RegistryEntry(normalize_guid(clsid), SOURCE_BACKED, ifcs,
                         source=str(Path(program_path).resolve()), component=component, sig=sig)


def export_component(program_path, component: str, sig: str, clsid: str, registry_path,
                     force: bool = False, typed: TypedProgram | None = None) -> RegistryManifest:
    tp = typed if typed is not None else load_typed(program_path)
    entry = export_entry(tp, program_path, component, sig, clsid)
    return update_manifest(registry_path, lambda m: m.with_entry(entry, force))


# -- cross-environment signature comparison -----------------------------------

def _equiv(server_env: SigEnv, client_env: SigEnv):
    def eq(kind: str, a: str, b: str) -> bool:
        if kind == "ifc":
            sa, sb = server_env.interfaces.get(a), client_env.interfaces.get(b)
            if sa is not None and sb is not None and sa.iid and sb.iid:
                return sa.iid == sb.iid
        return a == b
    return eq


def check_against_server(client_sig: ComponentSig, client_env: SigEnv, entry: RegistryEntry,
                         server_env: SigEnv) -> None:
    """Member types of every interface the server offers must agree with the
    client's expectation.  Interfaces the server lacks are left to
    negotiation at instantiation."""
    by_iid = entry.iid_table()
    for label, s in client_sig.interfaces:
        want = client_env.interface(s)
        if want.iid not in by_iid:
            continue
        have = server_env.interface(by_iid[want.iid])
        rep = match_interface(have, want, _equiv(server_env, client_env))
        if not rep.ok:
            raise SignatureMismatch(
                f"interface {label} : {s} disagrees with the server's {have.name} "
                f"({'; '.join(rep.describe())})")


# -- the exporter side -------------------------------------------------------

class SourceServer:
    """An exporting program loaded into a session of its own."""

    def __init__(self, entry: RegistryEntry, trace: Trace, registry_path, loading: frozenset,
                 listeners=()):
        self.entry = entry
        try:
            self.tp = load_typed(entry.source)
        except OSError as e:
            raise ManifestError(f"cannot read exported source {entry.source}: {e.strerror}") from e
        except ComlangError as e:
            raise InstantiationFailure(f"exported source does not check: {e.render()}") from e
        if entry.component not in self.tp.components or entry.sig not in self.tp.env.components:
            raise ManifestError(f"{entry.source} no longer defines {entry.component} : {entry.sig}")
        self.env = self.tp.env
        self.rt = Runtime()
        self.rt.listeners.extend(listeners)
        self.hooks = RegistryHooks(registry_path, None, loading=loading | {entry.source},
                                   listeners=listeners)
        self.ev = Evaluator(self.tp, self.rt, trace, self.hooks, run_exports=False)
        self.ev.run()

    def instantiate(self) -> InstV:
        v = self.ev.instantiate(self.entry.component, {})
        return self.detach(v)

    def detach(self, v):
        """Take a value out of the exporter's top-level scope: the proxy owns it."""
        acquired = self.ev.scope.acquired
        for i, x in enumerate(acquired):
            if x is v:
                del acquired[i]
                break
        return v

    def dup_instance(self, inst: InstanceHandle) -> InstV:
        held = tuple(inst.ifc_table.values())
        for h in held:
            self.rt.addref(h)
        return InstV(inst, held, {})

    def release(self, v) -> None:
        self.ev.release_value(v)

    def call(self, handle, member: str, arg, member_type: SemType, to_client):
        """Run one member in the exporter's session and encode its result."""
        ev = self.ev
        scope = ev.enter()
        try:
            via = ev.acquire(IfcV(self.rt.query_interface(handle, handle.sig)))
            value = ev.export_value(handle.dispatch[member], via)
            if isinstance(member_type, ArrowT):
                wire = encode(ev.apply(value, arg), member_type.res, to_client)
            else:
                wire = encode(value, member_type, to_client)
        except BaseException:
            ev.abandon_scope(scope)
            raise
        ev.leave_scope(scope, None)
        return wire

    def close(self) -> list[LeakEntry]:
        return self.ev.finish()


class Bridge:
    """Proxies in the client session for instances living in one server session.

    While a result is being encoded, every exporter instance it mentions is
    counted once more on the server side; decoding hands that count to the
    proxy it creates, or drops it if a live proxy already exists.
    """

    def __init__(self, client: Evaluator, server: SourceServer):
        self.client = client
        self.server = server
        self.proxies: dict[int, InstanceHandle] = {}
        self._outgoing: dict[int, InstV] = {}

    def _handle_for(self, remote: InstanceHandle, sig: InterfaceSig):
        if sig.iid is None:
            return None
        # an instance of the exported class shows only what the export declared
        if remote.cls.name == self.server.entry.component and sig.iid not in self.server.entry.iid_table():
            return None
        for h in remote.ifc_table.values():
            if h.sig.iid == sig.iid:
                return h
        return None

    def _dispatch(self, remote: InstanceHandle, sig: InterfaceSig) -> Optional[dict]:
        rh = self._handle_for(remote, sig)
        if rh is None:
            return None
        server_members = rh.sig.value_map()
        out = {}
        for name, t in sig.values:
            if name not in server_members:
                continue
            if isinstance(t, ArrowT):
                out[name] = self._method(rh, name, t)
            else:
                out[name] = self._remote(rh, name, None, t)
        return out

    def _method(self, rh, name: str, t: ArrowT):
        def native(arg):
            remote_arg = decode(encode(arg, t.arg, None), t.arg, None)
            return self._remote(rh, name, remote_arg, t)
        return native

    def _remote(self, rh, name: str, arg, t: SemType):
        res_t = t.res if isinstance(t, ArrowT) else t
        outer, self._outgoing = self._outgoing, {}
        try:
            wire = self.server.call(rh, name, arg, t, self._to_client)
            return decode(wire, res_t, self._from_wire)
        finally:
            for keep in self._outgoing.values():
                self.server.release(keep)
            self._outgoing = outer

    def _to_client(self, v, t: SemType):
        if isinstance(v, IfcV):
            inst = v.handle.instance
        elif isinstance(v, InstV):
            inst = v.instance
        else:
            raise MarshalViolation("expected an interface or instance at the boundary")
        cookie = inst.token.value
        if cookie not in self._outgoing:
            self._outgoing[cookie] = self.server.dup_instance(inst)
        return cookie

    def _live_proxy(self, cookie: int) -> Optional[InstanceHandle]:
        proxy = self.proxies.get(cookie)
        return proxy if proxy is not None and not proxy.reclaimed else None

    def _from_wire(self, cookie: int, t: SemType):
        rt = self.client.rt
        env = self.client.tp.env
        proxy = self._live_proxy(cookie)
        fresh = proxy is None
        if fresh:
            keep = self._outgoing.pop(cookie)
            csig = env.single(t.sig) if isinstance(t, IfcT) else env.component(t.sig)
            proxy = self._new_proxy(keep, csig)
        if isinstance(t, IfcT):
            sig = env.interface(t.sig)
            h = proxy.ifc_table.get(sig.name) if fresh else rt.probe(proxy, sig)
            if h is None:
                raise NegotiationFault(f"returned instance does not provide {sig.name}", [sig.name])
            return IfcV(h)
        csig = env.component(t.sig)
        handles, missing = [], []
        for label, s in csig.interfaces:
            h = proxy.ifc_table.get(s) if fresh else rt.probe(proxy, env.interface(s))
            if h is None:
                missing.append(s)
            else:
                handles.append((label, h))
        if missing:
            for _, h in handles:
                rt.release(h)
            raise NegotiationFault(f"returned instance does not provide {', '.join(missing)}", missing)
        return InstV(proxy, tuple(h for _, h in handles), dict(handles))

    def _proxy_class(self, name: str, csig: ComponentSig, make_remote) -> ComponentClass:
        env = self.client.tp.env

        def factory(inst, _args):
            remote = make_remote()
            inst.data["remote"] = remote
            tables = {}
            try:
                for _, s in csig.interfaces:
                    sig = env.interface(s)
                    d = self._dispatch(remote.instance, sig)
                    if d is not None:
                        tables[sig.name] = (sig, d)
            except BaseException:
                self.server.release(inst.data.pop("remote"))
                raise
            self.proxies[remote.instance.token.value] = inst
            return tables

        def hook(inst, sig):
            return self._dispatch(inst.data["remote"].instance, sig)

        def reclaim(inst):
            remote = inst.data.pop("remote")
            if self.proxies.get(remote.instance.token.value) is inst:
                del self.proxies[remote.instance.token.value]
            self.server.release(remote)

        return ComponentClass(name, csig, "imported", factory, hook, reclaim)

    def _new_proxy(self, keep: InstV, csig: ComponentSig) -> InstanceHandle:
        cls = self._proxy_class(f"proxy:{self.server.entry.component}", csig, lambda: keep)
        return self.client.rt.create_instance(cls, None)

    def server_class(self, name: str, csig: ComponentSig) -> ComponentClass:
        return self._proxy_class(name, csig, self.server.instantiate)


# -- the importing side -------------------------------------------------------

class RegistryHooks(Hooks):
    """Resolves imports against a registry file and performs exports."""

    def __init__(self, registry_path, program_path=None, force: bool = False,
                 loading: frozenset = frozenset(), listeners=()):
        self.registry_path = Path(registry_path)
        self.program_path = program_path
        self.force = force
        self.loading = loading
        self.listeners = tuple(listeners)
        self.servers: dict[str, SourceServer] = {}

    def resolve_import(self, decl: A.ImportDecl, ev: Evaluator) -> ComponentClass:
        manifest = load_manifest(self.registry_path)
        entry = manifest.find(decl.clsid)
        if entry is None:
            raise UnknownClsid(f"clsid {decl.clsid} is not registered", decl.span)
        env = ev.tp.env
        csig = env.component(decl.sig)
        for _, s in csig.interfaces:
            ok, violations = idl_expressible_interface(env.interface(s), env)
            if not ok:
                raise MarshalViolation(f"{s} cannot cross the component boundary: {'; '.join(violations)}",
                                       decl.span)
        if entry.kind == BUILTIN_STUB:
            if entry.stub not in STUBS:
                raise ManifestError(f"unknown stub {entry.stub!r} for clsid {entry.clsid}", decl.span)
            stub_cls, stub_env = STUBS[entry.stub]
            check_against_server(csig, env, entry, stub_env())
            return stub_cls(ev, csig).server_class(decl.name)
        server = self._server(entry, ev.trace, decl)
        check_against_server(csig, env, entry, server.env)
        return Bridge(ev, server).server_class(decl.name, csig)

    def _server(self, entry: RegistryEntry, trace: Trace, decl) -> SourceServer:
        if entry.source in self.loading:
            raise InstantiationFailure(f"import cycle through {entry.source}", decl.span)
        if entry.source not in self.servers:
            self.servers[entry.source] = SourceServer(entry, trace, self.registry_path, self.loading,
                                                      self.listeners)
        server = self.servers[entry.source]
        if server.entry != entry:
            # same source exported under another clsid
            server = SourceServer(entry, trace, self.registry_path, self.loading, self.listeners)
            self.servers[f"{entry.source}#{entry.clsid}"] = server
        return server

    def export(self, decl: A.ExportDecl, ev: Evaluator) -> None:
        if self.program_path is None:
            raise ManifestError("export needs the program's source path", decl.span)
        entry = export_entry(ev.tp, self.program_path, decl.component, decl.sig, decl.clsid)
        update_manifest(self.registry_path, lambda m: m.with_entry(entry, self.force))

    def close(self) -> list[LeakEntry]:
        leaks = []
        for server in self.servers.values():
            leaks += server.close()
        return leaks
