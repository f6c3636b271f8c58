"""Semantic types.

``||S||`` (an interface of signature S) is :class:`IfcT`, ``|S|`` (an
instance of component signature S) is :class:`CompT`.  :class:`InstT` is the
dynamic instance type produced by ``instanceOf``; it carries no static
signature and can only be scrutinised by ``ifc_case`` or compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class IntT:
    pass


@dataclass(frozen=True)
class RealT:
    pass


@dataclass(frozen=True)
class BoolT:
    pass


@dataclass(frozen=True)
class StringT:
    pass


@dataclass(frozen=True)
class UnitT:
    pass


@dataclass(frozen=True)
class TupleT:
    items: tuple["SemType", ...]


@dataclass(frozen=True)
class RecordT:
    fields: tuple[tuple[str, "SemType"], ...]  # sorted by label

    @staticmethod
    def of(fields) -> "RecordT":
        return RecordT(tuple(sorted(dict(fields).items())))

    def field_map(self) -> dict[str, "SemType"]:
        return dict(self.fields)


@dataclass(frozen=True)
class ListT:
    elem: "SemType"


@dataclass(frozen=True)
class ArrowT:
    arg: "SemType"
    res: "SemType"


@dataclass(frozen=True)
class DataT:
    """Nominal algebraic datatype.  ``alts`` may refer back to this type,
    so it is excluded from equality and hashing."""
    name: str
    alts: list = field(default_factory=list, compare=False, hash=False, repr=False)


@dataclass(frozen=True)
class AbstractT:
    owner: str
    name: str
    stamp: int


@dataclass(frozen=True)
class IfcT:
    sig: str


@dataclass(frozen=True)
class CompT:
    sig: str


@dataclass(frozen=True)
class InstT:
    pass


@dataclass(frozen=True)
class TVar:
    id: int


SemType = Union[IntT, RealT, BoolT, StringT, UnitT, TupleT, RecordT, ListT, ArrowT,
                DataT, AbstractT, IfcT, CompT, InstT, TVar]

INT, REAL, BOOL, STRING, UNIT, INST = IntT(), RealT(), BoolT(), StringT(), UnitT(), InstT()

BASE_TYPES = {"int": INT, "real": REAL, "bool": BOOL, "string": STRING, "unit": UNIT}


def show(t: SemType) -> str:
    return _show(t, 0)


def _show(t, level: int) -> str:
    if isinstance(t, ArrowT):
        s = f"{_show(t.arg, 1)} -> {_show(t.res, 0)}"
        return f"({s})" if level > 0 else s
    if isinstance(t, TupleT):
        s = " * ".join(_show(i, 2) for i in t.items)
        return f"({s})" if level > 1 else s
    if isinstance(t, ListT):
        return f"{_show(t.elem, 2)} list"
    if isinstance(t, RecordT):
        return "{" + ", ".join(f"{l} : {_show(ft, 0)}" for l, ft in t.fields) + "}"
    if isinstance(t, IfcT):
        return f"||{t.sig}||"
    if isinstance(t, CompT):
        return f"|{t.sig}|"
    if isinstance(t, AbstractT):
        return f"{t.owner}.{t.name}"
    if isinstance(t, DataT):
        return t.name
    if isinstance(t, TVar):
        return f"'t{t.id}"
    if isinstance(t, InstT):
        return "inst"
    for name, base in BASE_TYPES.items():
        if t == base:
            return name
    return repr(t)


def map_type(t: SemType, fn) -> SemType:
    """Rebuild ``t`` bottom-up, letting ``fn`` replace any leaf or node first.

    ``fn`` returns a replacement or ``None`` to keep descending.
    """
    r = fn(t)
    if r is not None:
        return r
    if isinstance(t, TupleT):
        return TupleT(tuple(map_type(i, fn) for i in t.items))
    if isinstance(t, RecordT):
        return RecordT(tuple((l, map_type(ft, fn)) for l, ft in t.fields))
    if isinstance(t, ListT):
        return ListT(map_type(t.elem, fn))
    if isinstance(t, ArrowT):
        return ArrowT(map_type(t.arg, fn), map_type(t.res, fn))
    return t


def walk(t: SemType):
    yield t
    if isinstance(t, TupleT):
        for i in t.items:
            yield from walk(i)
    elif isinstance(t, RecordT):
        for _, ft in t.fields:
            yield from walk(ft)
    elif isinstance(t, ListT):
        yield from walk(t.elem)
    elif isinstance(t, ArrowT):
        yield from walk(t.arg)
        yield from walk(t.res)


def substitute_abstract(t: SemType, realization: dict[tuple[str, str, int], SemType]) -> SemType:
    def fn(x):
        if isinstance(x, AbstractT):
            return realization.get((x.owner, x.name, x.stamp), x)
        return None
    return map_type(t, fn)
