"""IDL-expressibility: which types and signatures may cross the export boundary."""

from __future__ import annotations

from typing import Sequence

from .sigs import ComponentSig, InterfaceSig, SigEnv
from .types import (BOOL, INT, REAL, STRING, UNIT, AbstractT, ArrowT, CompT, DataT, IfcT,
                    ListT, RecordT, SemType, TupleT, show)

# int/bool/real are listed for types and int/bool/string for values; both
# positions accept the union.
SCALARS = (INT, BOOL, REAL, STRING)


Opaque = frozenset  # of AbstractT the enclosing interface declares itself


def idl_expressible_type(t: SemType, env: SigEnv | None = None,
                         opaque: Opaque = frozenset()) -> tuple[bool, list[str]]:
    violations: list[str] = []
    _type_ok(t, set(), violations, show(t), opaque)
    return not violations, violations


def _type_ok(t: SemType, visited: set[str], out: list[str], where: str, opaque: Opaque) -> bool:
    if t in SCALARS:
        return True
    if isinstance(t, (CompT, IfcT)):
        return True
    if isinstance(t, AbstractT) and t in opaque:
        # an interface's own abstract type travels as an opaque cookie
        return True
    if isinstance(t, RecordT):
        ok = True
        for label, ft in t.fields:
            ok = _type_ok(ft, visited, out, f"{where}.{label}", opaque) and ok
        return ok
    if isinstance(t, ListT):
        return _type_ok(t.elem, visited, out, f"{where} list element", opaque)
    if isinstance(t, DataT):
        if t.name in visited:
            return True
        visited.add(t.name)
        ok = True
        for con, arg in t.alts:
            if arg is not None:
                ok = _type_ok(arg, visited, out, f"{t.name}.{con}", opaque) and ok
        return ok
    out.append(f"{where}: type {show(t)} is not IDL-expressible")
    return False


def _position_ok(t: SemType, out: list[str], where: str, opaque: Opaque) -> bool:
    """Argument or result of an exported function: unit, expressible, or a
    tuple of expressible types."""
    if t == UNIT:
        return True
    if isinstance(t, TupleT):
        ok = True
        for i, item in enumerate(t.items):
            ok = _type_ok(item, set(), out, f"{where} component {i}", opaque) and ok
        return ok
    return _type_ok(t, set(), out, where, opaque)


def idl_expressible_value(t: SemType, name: str = "value",
                          opaque: Opaque = frozenset()) -> tuple[bool, list[str]]:
    out: list[str] = []
    if t in SCALARS:
        return True, out
    if isinstance(t, ArrowT):
        a = _position_ok(t.arg, out, f"{name} argument", opaque)
        r = _position_ok(t.res, out, f"{name} result", opaque)
        return a and r, out
    out.append(f"{name}: value of type {show(t)} is neither a scalar nor an expressible function")
    return False, out


def idl_expressible_interface(sig: InterfaceSig, env: SigEnv | None = None) -> tuple[bool, list[str]]:
    out: list[str] = []
    own = frozenset(sig.own_abstract(n) for n in sig.abstract_types())
    for tname, tdef in sig.manifest:
        _type_ok(tdef, set(), out, f"{sig.name}.{tname}", own)
    for vname, vtype in sig.values:
        _, v = idl_expressible_value(vtype, f"{sig.name}.{vname}", own)
        out.extend(v)
    return not out, out


def check_exportable(name: str, params: Sequence, ascribed: ComponentSig,
                     env: SigEnv) -> tuple[bool, list[str]]:
    out: list[str] = []
    if params:
        out.append(f"{name} is not a nullary component")
    for label, sig_name in ascribed.interfaces:
        sig = env.interface(sig_name)
        if sig.iid is None:
            out.append(f"interface {label} : {sig_name} has no IID")
        _, v = idl_expressible_interface(sig, env)
        out.extend(v)
    return not out, out
