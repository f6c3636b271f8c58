"""Built-in stub components.

The only stub is a scripted stand-in for the Microsoft Agent server.  Its
signatures are ordinary ``.cml`` source, elaborated once; its behaviour is
deterministic so traces are reproducible: character and request ids both
count up from 1 and every visible action appends one ``AGENT ...`` line.
"""

from __future__ import annotations

import functools
from typing import Any, Callable

from ..comrt.kernel import ComponentClass, InstanceHandle
from ..errors import NegotiationFault, RuntimeFault, UnknownCharacterId
from ..eval.values import UNIT, InstV, show_value
from ..sema.sigs import ComponentSig, InterfaceSig, SigEnv
from ..sema.types import ArrowT, CompT
from .registry import AGENT_CHARACTER_IID, AGENT_IID

AGENT_SOURCE = f"""
interface_sig I_AGENT_CHARACTER = {{
  val setPosition : int * int -> unit
  val getPosition : unit -> (int * int)
  val play : string -> int
  val stop : int -> unit
  val show : bool -> int
  val speak : string * string -> int
}} with_iid {AGENT_CHARACTER_IID}

component_sig AGENT_CHARACTER = {{
  interface IAgentCharacter : I_AGENT_CHARACTER
}}

interface_sig I_AGENT_NOTIFY_SINK = {{
  val notify : int -> unit
}} with_iid 00D18159-8466-11D0-AC63-00C04FD97575

component_sig AGENT_NOTIFY_SINK = {{
  interface IAgentNotifySink : I_AGENT_NOTIFY_SINK
}}

interface_sig I_AGENT = {{
  type sinkID
  val load : string -> (int, int)
  val unload : int -> unit
  val register : |AGENT_NOTIFY_SINK| -> sinkID
  val unregister : sinkID -> unit
  val getCharacter : int -> |AGENT_CHARACTER|
}} with_iid {AGENT_IID}

component_sig AGENT_SERVER = {{
  interface IAgent : I_AGENT
}}
"""


@functools.lru_cache(maxsize=None)
def agent_sig_env() -> SigEnv:
    from ..sema.sigs import elaborate_sigs
    from ..syntax import parse_source
    env, errors = elaborate_sigs(parse_source(AGENT_SOURCE, "<agent-stub>"))
    assert not errors, errors
    return env


def _quote(s: str) -> str:
    return show_value(s)


class AgentStub:
    """Builds the server class for one importing evaluator.

    ``env`` is the importer's signature environment: the stub answers for
    every interface there whose IID it implements, using the importer's
    own signature objects so dot access and ``ifc_case`` line up.
    """

    def __init__(self, ev, server_sig: ComponentSig):
        self.ev = ev
        self.env: SigEnv = ev.tp.env
        self.server_sig = server_sig
        self.char_class = ComponentClass("AgentCharacter", self._character_sig(), "imported",
                                         self._character_factory, self._character_hook)

    # -- signatures ---------------------------------------------------------

    def _character_sig(self) -> ComponentSig:
        for _, s in self.server_sig.interfaces:
            sig = self.env.interface(s)
            if sig.iid == AGENT_IID:
                t = sig.value_map().get("getCharacter")
                if isinstance(t, ArrowT) and isinstance(t.res, CompT):
                    return self.env.component(t.res.sig)
        return agent_sig_env().component("AGENT_CHARACTER")

    # -- server -------------------------------------------------------------

    def server_class(self, name: str) -> ComponentClass:
        return ComponentClass(name, self.server_sig, "imported", self._server_factory,
                              self._server_hook, self._server_reclaim)

    def _server_factory(self, inst: InstanceHandle, args) -> dict:
        inst.data.update(next_char=1, next_req=1, next_sink=1, chars={}, sinks={})
        tables = {}
        for _, s in self.server_sig.interfaces:
            sig = self.env.interface(s)
            d = self._server_hook(inst, sig)
            if d is not None:
                tables[sig.name] = (sig, d)
        return tables

    def _server_hook(self, inst: InstanceHandle, sig: InterfaceSig):
        if sig.iid != AGENT_IID:
            return None
        methods = {
            "load": lambda name: self._load(inst, name),
            "unload": lambda cid: self._unload(inst, cid),
            "register": lambda sink: self._register(inst, sink),
            "unregister": lambda sid: self._unregister(inst, sid),
            "getCharacter": lambda cid: self._get_character(inst, cid),
        }
        return {n: methods[n] for n in sig.value_map() if n in methods}

    def _request(self, server: InstanceHandle) -> int:
        r = server.data["next_req"]
        server.data["next_req"] = r + 1
        return r

    def _load(self, server: InstanceHandle, name: str):
        cid = server.data["next_char"]
        server.data["next_char"] = cid + 1
        self.ev.trace.marker(f"AGENT load {_quote(name)}")
        char = self.ev.rt.create_instance(self.char_class, {"id": cid, "server": server})
        char.data["held"] = list(char.ifc_table.values())
        server.data["chars"][cid] = char
        return (cid, self._request(server))

    def _lookup(self, server: InstanceHandle, cid: int) -> InstanceHandle:
        char = server.data["chars"].get(cid)
        if char is None:
            raise UnknownCharacterId(f"no character with id {cid} is loaded")
        return char

    def _unload(self, server: InstanceHandle, cid: int):
        char = self._lookup(server, cid)
        self.ev.trace.marker(f"AGENT unload {cid}")
        del server.data["chars"][cid]
        self._drop(char)
        return UNIT

    def _drop(self, char: InstanceHandle) -> None:
        # the stub's own count on every interface constructed at load
        for h in list(char.data["held"]):
            self.ev.rt.release(h)

    def _get_character(self, server: InstanceHandle, cid: int):
        char = self._lookup(server, cid)
        missing = [s for _, s in self.char_class.sig.interfaces if s not in char.ifc_table]
        if missing:
            raise NegotiationFault(f"the agent character does not provide {', '.join(missing)}", missing)
        held = tuple(char.data["held"])
        for h in held:
            self.ev.rt.addref(h)
        labels = {label: char.ifc_table[s] for label, s in self.char_class.sig.interfaces}
        return InstV(char, held, labels)

    def _register(self, server: InstanceHandle, sink):
        if not isinstance(sink, InstV):
            raise RuntimeFault("register expects a sink instance")
        for h in sink.held:
            self.ev.rt.addref(h)
        sid = server.data["next_sink"]
        server.data["next_sink"] = sid + 1
        server.data["sinks"][sid] = sink
        self.ev.trace.marker(f"AGENT register {sid}")
        return sid

    def _unregister(self, server: InstanceHandle, sid):
        sink = server.data["sinks"].pop(sid, None)
        if sink is None:
            raise RuntimeFault(f"no sink registered under {show_value(sid)}")
        self.ev.trace.marker(f"AGENT unregister {sid}")
        for h in sink.held:
            self.ev.rt.release(h)
        return UNIT

    def _server_reclaim(self, server: InstanceHandle) -> None:
        for cid in sorted(server.data.get("chars", {})):
            self._drop(server.data["chars"][cid])
        server.data["chars"] = {}
        for sid in sorted(server.data.get("sinks", {})):
            for h in server.data["sinks"][sid].held:
                self.ev.rt.release(h)
        server.data["sinks"] = {}

    # -- characters -----------------------------------------------------------

    def _character_factory(self, inst: InstanceHandle, args) -> dict:
        inst.data.update(id=args["id"], server=args["server"], pos=(0, 0))
        tables = {}
        for _, s in self.char_class.sig.interfaces:
            sig = self.env.interface(s)
            d = self._character_hook(inst, sig)
            if d is not None:
                tables[sig.name] = (sig, d)
        return tables

    def _character_hook(self, inst: InstanceHandle, sig: InterfaceSig):
        if sig.iid != AGENT_CHARACTER_IID:
            return None
        cid = inst.data["id"]
        server = inst.data["server"]
        mark = self.ev.trace.marker

        def set_position(xy):
            inst.data["pos"] = xy
            mark(f"AGENT setPosition {cid} {show_value(xy[0])} {show_value(xy[1])}")
            return UNIT

        def play(anim):
            mark(f"AGENT play {cid} {_quote(anim)}")
            return self._request(server)

        def stop(req):
            mark(f"AGENT stop {cid} {req}")
            return UNIT

        def show(_fast):
            mark(f"AGENT show {cid}")
            return self._request(server)

        def speak(args):
            text, _url = args
            mark(f"AGENT speak {_quote(text)}")
            return self._request(server)

        methods: dict[str, Callable[[Any], Any]] = {
            "setPosition": set_position,
            "getPosition": lambda _u: inst.data["pos"],
            "play": play,
            "stop": stop,
            "show": show,
            "speak": speak,
        }
        return {n: methods[n] for n in sig.value_map() if n in methods}


STUBS = {"agent": (AgentStub, agent_sig_env)}
