"""Vtable layout descriptors for interface signatures."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from ..sema.sigs import InterfaceSig
from ..sema.types import UNIT, ArrowT, SemType, TupleT

RESERVED = ("QueryInterface", "AddRef", "Release")


@dataclass(frozen=True)
class Slot:
    index: int
    name: str
    arity: int


@dataclass(frozen=True)
class VtableLayout:
    sig_name: str
    iid: Optional[str]
    slots: tuple[Slot, ...]

    @property
    def reserved(self) -> tuple[Slot, ...]:
        return self.slots[:len(RESERVED)]

    @property
    def methods(self) -> tuple[Slot, ...]:
        return self.slots[len(RESERVED):]

    def slot_of(self, name: str) -> int:
        for s in self.slots:
            if s.name == name:
                return s.index
        raise KeyError(name)


def flattened_arity(t: SemType) -> int:
    if not isinstance(t, ArrowT):
        return 0
    if t.arg == UNIT:
        return 0
    if isinstance(t.arg, TupleT):
        return len(t.arg.items)
    return 1


@lru_cache(maxsize=None)
def compute_vtable_layout(sig: InterfaceSig) -> VtableLayout:
    slots = [Slot(i, name, 0) for i, name in enumerate(RESERVED)]
    for i, (name, t) in enumerate(sig.values, start=len(RESERVED)):
        slots.append(Slot(i, name, flattened_arity(t)))
    return VtableLayout(sig.name, sig.iid, tuple(slots))
