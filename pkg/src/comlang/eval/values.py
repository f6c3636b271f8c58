"""Runtime values.

Scalars are plain Python ``int``/``float``/``bool``/``str``; tuples are Python
tuples and lists are Python lists.  Every :class:`IfcV` and :class:`InstV`
object stands for exactly one reference count on the kernel side, so a
value's Python identity is what the scope discipline tracks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..comrt.kernel import InstanceHandle, InterfaceHandle
from ..syntax import ast as A


class _Unit:
    __slots__ = ()

    def __repr__(self) -> str:
        return "()"


UNIT = _Unit()


class _Clock:
    def __init__(self):
        self.now = 0

    def tick(self) -> int:
        self.now += 1
        return self.now


_frames = _Clock()


class Frame:
    """One binding contour.  ``created_at`` orders frames by creation time."""

    __slots__ = ("vars", "parent", "created_at")

    def __init__(self, parent: "Frame | None" = None, vars: dict | None = None):
        self.vars: dict[str, Any] = vars if vars is not None else {}
        self.parent = parent
        self.created_at = _frames.tick()

    def lookup(self, name: str):
        f = self
        while f is not None:
            if name in f.vars:
                return f.vars[name]
            f = f.parent
        raise KeyError(name)


def frame_clock() -> int:
    """The creation stamp the next frame will receive."""
    return _frames.now + 1


@dataclass(frozen=True)
class RecordV:
    fields: tuple[tuple[str, Any], ...]  # sorted by label

    @staticmethod
    def of(pairs) -> "RecordV":
        return RecordV(tuple(sorted(pairs, key=lambda p: p[0])))

    def get(self, label: str):
        for l, v in self.fields:
            if l == label:
                return v
        raise KeyError(label)


@dataclass(eq=False)
class Closure:
    """A function value; multi-clause, curried ``fun`` declarations collect
    ``arity`` arguments before matching."""
    clauses: tuple[A.Clause, ...]
    env: Frame
    name: str = "fn"
    arity: int = 1
    applied: tuple = ()


@dataclass(eq=False)
class Builtin:
    name: str
    fn: Callable[[Any], Any]


@dataclass(eq=False)
class IfcV:
    handle: InterfaceHandle

    def __repr__(self) -> str:
        return f"<ifc {self.handle.sig.name} #{self.handle.owner}>"


@dataclass(eq=False)
class InstV:
    """A reference to an instance.  ``held`` are the interface handles this
    one value keeps counted; ``labels`` maps the statically visible labels."""
    instance: InstanceHandle
    held: tuple[InterfaceHandle, ...]
    labels: dict[str, InterfaceHandle] = field(default_factory=dict)

    def __repr__(self) -> str:
        return f"<inst #{self.instance.token}>"


@dataclass(eq=False)
class MethodV:
    """A function reached through an interface: calling it is a method call
    whose result leaves the instance, and ``ifc`` keeps the instance alive."""
    ifc: IfcV
    fn: Any


def is_ref(v) -> bool:
    return isinstance(v, (IfcV, InstV))


def show_value(v) -> str:
    if v is UNIT:
        return "()"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v) if v >= 0 else f"~{-v}"
    if isinstance(v, float):
        s = repr(v)
        return s if v >= 0 else "~" + s[1:]
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, tuple):
        return "(" + ", ".join(show_value(i) for i in v) + ")"
    if isinstance(v, list):
        return "[" + ", ".join(show_value(i) for i in v) + "]"
    if isinstance(v, RecordV):
        return "{" + ", ".join(f"{l} = {show_value(x)}" for l, x in v.fields) + "}"
    if isinstance(v, (Closure, Builtin, MethodV)):
        return "fn"
    return repr(v)
