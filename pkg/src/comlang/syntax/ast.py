"""Abstract syntax of the surface language.

Nodes are frozen dataclasses.  Spans never take part in equality so that
trees coming from different texts (e.g. a reparse of pretty-printed output)
compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import SourceSpan


def _span():
    return field(default=None, compare=False, repr=False)


# -- type expressions -------------------------------------------------------

@dataclass(frozen=True)
class TyName:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TyPath:
    """A type member reached through a value path, e.g. ``Foo.P.N``."""
    path: tuple[str, ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TyIfc:
    sig: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TyComp:
    sig: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TyTuple:
    items: tuple["Ty", ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TyArrow:
    arg: "Ty"
    res: "Ty"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TyList:
    elem: "Ty"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TyRecord:
    fields: tuple[tuple[str, "Ty"], ...]
    span: Optional[SourceSpan] = _span()


Ty = Union[TyName, TyPath, TyIfc, TyComp, TyTuple, TyArrow, TyList, TyRecord]


# -- patterns ---------------------------------------------------------------

@dataclass(frozen=True)
class PWild:
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PVar:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PLit:
    kind: str  # int | real | bool | string | unit
    value: object
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PTuple:
    items: tuple["Pat", ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PList:
    items: tuple["Pat", ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PCons:
    head: "Pat"
    tail: "Pat"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PAnnot:
    pat: "Pat"
    ty: Ty
    span: Optional[SourceSpan] = _span()


Pat = Union[PWild, PVar, PLit, PTuple, PList, PCons, PAnnot]


# -- expressions ------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    kind: str  # int | real | bool | string | unit
    value: object
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Tuple:
    items: tuple["Expr", ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Record:
    fields: tuple[tuple[str, "Expr"], ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ListExpr:
    items: tuple["Expr", ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Fn:
    param: Pat
    body: "Expr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class App:
    fn: "Expr"
    arg: "Expr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Let:
    decls: tuple["Decl", ...]
    body: "Expr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    else_: "Expr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Seq:
    items: tuple["Expr", ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Annot:
    expr: "Expr"
    ty: Ty
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class DotAccess:
    expr: "Expr"
    path: tuple[str, ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Instantiate:
    component: str
    args: tuple[tuple[str, "Expr"], ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class IfcCase:
    scrutinee: "Expr"
    arms: tuple[tuple[str, "Expr"], ...]
    else_: "Expr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class InstanceOf:
    expr: "Expr"
    span: Optional[SourceSpan] = _span()


Expr = Union[Lit, Var, Tuple, Record, ListExpr, Fn, App, Let, If, Seq, Annot,
             DotAccess, Instantiate, IfcCase, InstanceOf]

# Infix operators are ordinary variables applied to a pair.
INFIX_PRECEDENCE = {
    "*": 7, "/": 7, "div": 7, "mod": 7,
    "+": 6, "-": 6, "^": 6,
    "::": 5, "@": 5,
    "=": 4, "<>": 4, "<": 4, ">": 4, "<=": 4, ">=": 4,
}
RIGHT_ASSOC = {"::", "@"}


# -- declarations -----------------------------------------------------------

@dataclass(frozen=True)
class ValSpec:
    name: str
    ty: Ty
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TypeSpec:
    """``type t`` (abstract) or ``type t = ty`` (manifest) inside a signature."""
    name: str
    ty: Optional[Ty] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class InterfaceSigDecl:
    name: str
    members: tuple[Union[ValSpec, TypeSpec], ...]
    iid: Optional[str] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ComponentSigDecl:
    name: str
    interfaces: tuple[tuple[str, str], ...]  # (label, interface sig name)
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Param:
    name: str
    ty: Ty
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class InterfaceImpl:
    label: str
    decls: tuple["Decl", ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ComponentDecl:
    name: str
    params: tuple[Param, ...]
    sig: str
    impls: tuple[InterfaceImpl, ...]
    locals: tuple["Decl", ...] = ()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ImportDecl:
    name: str
    sig: str
    clsid: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ExportDecl:
    component: str
    sig: str
    clsid: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ValDecl:
    pat: Pat
    expr: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Clause:
    params: tuple[Pat, ...]
    body: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class FunDecl:
    name: str
    clauses: tuple[Clause, ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TypeDecl:
    name: str
    ty: Ty
    span: Optional[SourceSpan] = _span()


Decl = Union[InterfaceSigDecl, ComponentSigDecl, ComponentDecl, ImportDecl,
             ExportDecl, ValDecl, FunDecl, TypeDecl]


@dataclass(frozen=True)
class SurfaceProgram:
    decls: tuple[Decl, ...] = ()
    file: str = field(default="<input>", compare=False)
