"""Marshaling across the export boundary.

Values are encoded to a JSON-compatible wire form driven by the receiving
side's static type and decoded on the other side, so nothing but plain
data crosses.  Interface and instance values are replaced by reference
cookies through caller-supplied callbacks; functions never cross.
"""

from __future__ import annotations

from typing import Any, Callable, Optional

from ..errors import MarshalViolation
from ..eval.values import UNIT, Builtin, Closure, IfcV, InstV, MethodV, RecordV
from ..sema.types import (BOOL, INT, REAL, STRING, UNIT as UNIT_T, AbstractT, ArrowT, CompT,
                          IfcT, ListT, RecordT, SemType, TupleT, show)

RefOut = Callable[[Any, SemType], Any]
RefIn = Callable[[Any, SemType], Any]

_SCALARS = {INT: int, REAL: float, BOOL: bool, STRING: str}


def encode(v, t: SemType, refs: Optional[RefOut] = None):
    if t in _SCALARS:
        if type(v) is not _SCALARS[t]:
            raise MarshalViolation(f"expected a {show(t)} value at the boundary")
        return v
    if t == UNIT_T:
        return None
    if isinstance(t, TupleT):
        if not isinstance(v, tuple) or len(v) != len(t.items):
            raise MarshalViolation(f"expected a {show(t)} value at the boundary")
        return [encode(x, it, refs) for x, it in zip(v, t.items)]
    if isinstance(t, ListT):
        if not isinstance(v, list):
            raise MarshalViolation(f"expected a {show(t)} value at the boundary")
        return [encode(x, t.elem, refs) for x in v]
    if isinstance(t, RecordT):
        if not isinstance(v, RecordV):
            raise MarshalViolation(f"expected a {show(t)} value at the boundary")
        return {l: encode(v.get(l), ft, refs) for l, ft in t.fields}
    if isinstance(t, (IfcT, CompT)):
        if refs is None:
            raise MarshalViolation(f"{show(t)} values cannot cross in this direction")
        return {"ref": refs(v, t)}
    if isinstance(t, AbstractT):
        return {"opaque": encode_untyped(v)}
    if isinstance(t, ArrowT):
        raise MarshalViolation("functions cannot cross the component boundary")
    raise MarshalViolation(f"type {show(t)} is not marshalable")


def decode(w, t: SemType, refs: Optional[RefIn] = None):
    if t in _SCALARS:
        if type(w) is not _SCALARS[t]:
            raise MarshalViolation(f"malformed {show(t)} on the wire")
        return w
    if t == UNIT_T:
        return UNIT
    if isinstance(t, TupleT):
        return tuple(decode(x, it, refs) for x, it in zip(w, t.items))
    if isinstance(t, ListT):
        return [decode(x, t.elem, refs) for x in w]
    if isinstance(t, RecordT):
        return RecordV(tuple((l, decode(w[l], ft, refs)) for l, ft in t.fields))
    if isinstance(t, (IfcT, CompT)):
        if refs is None:
            raise MarshalViolation(f"{show(t)} values cannot cross in this direction")
        return refs(w["ref"], t)
    if isinstance(t, AbstractT):
        return decode_untyped(w["opaque"])
    raise MarshalViolation(f"type {show(t)} is not marshalable")


def encode_untyped(v):
    """Representation of an abstract type's value: plain data only."""
    if v is UNIT:
        return {"u": None}
    if type(v) in (int, float, bool, str):
        return {type(v).__name__: v}
    if isinstance(v, tuple):
        return {"tuple": [encode_untyped(x) for x in v]}
    if isinstance(v, list):
        return {"list": [encode_untyped(x) for x in v]}
    if isinstance(v, RecordV):
        return {"record": [[l, encode_untyped(x)] for l, x in v.fields]}
    if isinstance(v, (IfcV, InstV)):
        raise MarshalViolation("an abstract type represented by a handle cannot cross the boundary")
    if isinstance(v, (Closure, Builtin, MethodV)) or callable(v):
        raise MarshalViolation("an abstract type represented by a function cannot cross the boundary")
    raise MarshalViolation(f"value {v!r} cannot cross the boundary")


def decode_untyped(w):
    (tag, x), = w.items()
    if tag == "u":
        return UNIT
    if tag in ("int", "float", "bool", "str"):
        return x
    if tag == "tuple":
        return tuple(decode_untyped(i) for i in x)
    if tag == "list":
        return [decode_untyped(i) for i in x]
    if tag == "record":
        return RecordV(tuple((l, decode_untyped(i)) for l, i in x))
    raise MarshalViolation(f"unknown wire tag {tag!r}")


def marshal(v, t: SemType, refs_out: Optional[RefOut] = None, refs_in: Optional[RefIn] = None):
    """Carry ``v`` across the boundary: encode on one side, decode on the other."""
    return decode(encode(v, t, refs_out), t, refs_in)


__all__ = ["encode", "decode", "marshal", "encode_untyped", "decode_untyped"]
