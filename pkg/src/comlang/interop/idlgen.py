"""IDL text for exported signatures."""

from __future__ import annotations

from typing import Union

from ..errors import NotExpressible
from ..sema.idl import idl_expressible_interface
from ..sema.sigs import ComponentSig, InterfaceSig, SigEnv
from ..sema.types import (BOOL, INT, REAL, STRING, UNIT, AbstractT, ArrowT, CompT, IfcT, ListT,
                          RecordT, SemType, TupleT)

_BASE = {INT: "long", REAL: "double", BOOL: "boolean", STRING: "BSTR"}


def idl_type(t: SemType) -> str:
    if t in _BASE:
        return _BASE[t]
    if isinstance(t, (IfcT, CompT)):
        return f"{t.sig}*"
    if isinstance(t, ListT):
        return f"SAFEARRAY({idl_type(t.elem)})"
    if isinstance(t, RecordT):
        return "struct { " + " ".join(f"{idl_type(ft)} {l};" for l, ft in t.fields) + " }"
    if isinstance(t, AbstractT):
        # abstract members travel as opaque cookies
        return "long"
    raise NotExpressible(f"type has no IDL form: {t!r}")


def _method(name: str, t: SemType) -> str:
    if not isinstance(t, ArrowT):
        return f"{idl_type(t)} {name}();"
    params = []
    if isinstance(t.arg, TupleT):
        params += [f"[in] {idl_type(x)} a{i}" for i, x in enumerate(t.arg.items)]
    elif t.arg != UNIT:
        params.append(f"[in] {idl_type(t.arg)} a0")
    if t.res == UNIT:
        ret = "void"
    elif isinstance(t.res, TupleT):
        ret = "void"
        params += [f"[out] {idl_type(x)}* r{i}" for i, x in enumerate(t.res.items)]
    else:
        ret = idl_type(t.res)
    return f"{ret} {name}({', '.join(params)});"


def emit_interface(sig: InterfaceSig, env: SigEnv | None = None) -> str:
    ok, violations = idl_expressible_interface(sig, env)
    if sig.iid is None:
        violations = [f"{sig.name} has no IID"] + violations
    if violations:
        raise NotExpressible(f"{sig.name} cannot be written in IDL: {'; '.join(violations)}", violations)
    lines = [f"[uuid({sig.iid})]", f"interface {sig.name} {{"]
    lines += [f"  {_method(n, t)}" for n, t in sig.values]
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_idl(sig: Union[ComponentSig, InterfaceSig], env: SigEnv) -> str:
    """One ``interface`` block per interface, in declaration order."""
    if isinstance(sig, InterfaceSig):
        return emit_interface(sig, env)
    blocks = [emit_interface(env.interface(s), env) for _, s in sig.interfaces]
    return "\n".join(blocks)
