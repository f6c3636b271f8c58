"""Pretty printer.  Output reparses to a structurally equal tree."""

from __future__ import annotations

from . import ast as A
from .lexer import escape_string

# expression precedence levels
TOP = 0
APP = 10
ATOM = 11

_INDENT = "  "


def _lit(kind: str, value) -> str:
    if kind == "int":
        return str(value) if value >= 0 else f"~{-value}"
    if kind == "real":
        text = repr(float(value))
        return text if value >= 0 else "~" + text[1:]
    if kind == "bool":
        return "true" if value else "false"
    if kind == "string":
        return escape_string(value)
    return "()"


class Printer:
    def __init__(self, components: frozenset[str] = frozenset()):
        self.components = components

    # -- types ------------------------------------------------------------

    def ty(self, t, level: int = 0) -> str:
        # levels: 0 any, 1 no arrow, 2 no tuple/arrow
        if isinstance(t, A.TyArrow):
            s = f"{self.ty(t.arg, 1)} -> {self.ty(t.res, 0)}"
            return s if level == 0 else f"({s})"
        if isinstance(t, A.TyTuple):
            s = " * ".join(self.ty(i, 2) for i in t.items)
            return s if level <= 1 else f"({s})"
        if isinstance(t, A.TyList):
            return f"{self.ty(t.elem, 2)} list"
        if isinstance(t, A.TyName):
            return t.name
        if isinstance(t, A.TyPath):
            return ".".join(t.path)
        if isinstance(t, A.TyIfc):
            return f"||{t.sig}||"
        if isinstance(t, A.TyComp):
            return f"|{t.sig}|"
        if isinstance(t, A.TyRecord):
            return "{" + ", ".join(f"{l} : {self.ty(ft)}" for l, ft in t.fields) + "}"
        raise TypeError(f"not a type: {t!r}")

    # -- patterns -----------------------------------------------------------

    def pat(self, p, atomic: bool = False) -> str:
        if isinstance(p, A.PAnnot):
            s = f"{self.pat(p.pat)} : {self.ty(p.ty)}"
            return f"({s})" if atomic else s
        if isinstance(p, A.PCons):
            s = f"{self.pat(p.head, True)} :: {self._cons_tail(p.tail)}"
            return f"({s})" if atomic else s
        if isinstance(p, A.PWild):
            return "_"
        if isinstance(p, A.PVar):
            return p.name
        if isinstance(p, A.PLit):
            return _lit(p.kind, p.value)
        if isinstance(p, A.PTuple):
            return "(" + ", ".join(self.pat(i) for i in p.items) + ")"
        if isinstance(p, A.PList):
            return "[" + ", ".join(self.pat(i) for i in p.items) + "]"
        raise TypeError(f"not a pattern: {p!r}")

    def _cons_tail(self, p) -> str:
        if isinstance(p, A.PAnnot):
            return f"({self.pat(p)})"
        return self.pat(p)

    # -- expressions --------------------------------------------------------

    def expr(self, e, level: int = TOP) -> str:
        s, own = self._expr(e)
        return s if own >= level else f"({s})"

    def _expr(self, e) -> tuple[str, int]:
        if isinstance(e, A.Lit):
            if e.kind in ("int", "real") and e.value < 0:
                return f"({_lit(e.kind, e.value)})", ATOM
            return _lit(e.kind, e.value), ATOM
        if isinstance(e, A.Var):
            return e.name, ATOM
        if isinstance(e, A.Tuple):
            return "(" + ", ".join(self.expr(i) for i in e.items) + ")", ATOM
        if isinstance(e, A.Record):
            return "{" + ", ".join(f"{l} = {self.expr(v)}" for l, v in e.fields) + "}", ATOM
        if isinstance(e, A.ListExpr):
            return "[" + ", ".join(self.expr(i) for i in e.items) + "]", ATOM
        if isinstance(e, A.Seq):
            return "(" + "; ".join(self.expr(i) for i in e.items) + ")", ATOM
        if isinstance(e, A.Annot):
            return f"({self.expr(e.expr)} : {self.ty(e.ty)})", ATOM
        if isinstance(e, A.Let):
            decls = " ".join(self.decl_inline(d) for d in e.decls)
            body = e.body.items if isinstance(e.body, A.Seq) else (e.body,)
            inner = "; ".join(self.expr(b) for b in body)
            head = f"let {decls} in" if decls else "let in"
            return f"{head} {inner} end", ATOM
        if isinstance(e, A.DotAccess):
            base = self.expr(e.expr, ATOM)
            if isinstance(e.expr, A.DotAccess):
                base = f"({base})"
            return base + "".join("." + l for l in e.path), ATOM
        if isinstance(e, A.Instantiate):
            args = " ".join(f"val {n} = {self.expr(v)}" for n, v in e.args)
            return f"{e.component} ({args})", ATOM
        if isinstance(e, A.InstanceOf):
            return f"instanceOf {self.expr(e.expr, ATOM)}", APP
        if isinstance(e, A.App):
            return self._app(e)
        if isinstance(e, A.If):
            return f"if {self.expr(e.cond)} then {self.expr(e.then)} else {self.expr(e.else_)}", TOP
        if isinstance(e, A.Fn):
            return f"fn {self.pat(e.param)} => {self.expr(e.body)}", TOP
        if isinstance(e, A.IfcCase):
            arms = " | ".join(f"{s} => {self.expr(a)}" for s, a in e.arms)
            return f"ifc_case {self.expr(e.scrutinee)} of {arms} else => {self.expr(e.else_)}", TOP
        raise TypeError(f"not an expression: {e!r}")

    def _app(self, e: A.App) -> tuple[str, int]:
        fn = e.fn
        if isinstance(fn, A.Var):
            op = fn.name
            if op in A.INFIX_PRECEDENCE and isinstance(e.arg, A.Tuple) and len(e.arg.items) == 2:
                p = A.INFIX_PRECEDENCE[op]
                left, right = e.arg.items
                if op in A.RIGHT_ASSOC:
                    ls, rs = self.expr(left, p + 1), self.expr(right, p)
                else:
                    ls, rs = self.expr(left, p), self.expr(right, p + 1)
                return f"{ls} {op} {rs}", p
            if op == "~":
                return f"(~{self.expr(e.arg, ATOM)})", ATOM
            if op in self.components:
                return f"({op}) {self.expr(e.arg, ATOM)}", APP
        return f"{self.expr(fn, APP)} {self.expr(e.arg, ATOM)}", APP

    # -- declarations -------------------------------------------------------

    def decl_inline(self, d) -> str:
        if isinstance(d, A.ValDecl):
            return f"val {self.pat(d.pat)} = {self.expr(d.expr)}"
        if isinstance(d, A.FunDecl):
            return "fun " + " | ".join(self._clause(d.name, c) for c in d.clauses)
        if isinstance(d, A.TypeDecl):
            return f"type {d.name} = {self.ty(d.ty)}"
        raise TypeError(f"not a core declaration: {d!r}")

    def _clause(self, name: str, c: A.Clause) -> str:
        params = " ".join(self.pat(p, True) for p in c.params)
        return f"{name} {params} = {self.expr(c.body)}"

    def core_decl(self, d, indent: str) -> list[str]:
        if isinstance(d, A.FunDecl):
            lines = [f"{indent}fun {self._clause(d.name, d.clauses[0])}"]
            lines += [f"{indent}  | {self._clause(d.name, c)}" for c in d.clauses[1:]]
            return lines
        return [indent + self.decl_inline(d)]

    def decl(self, d) -> list[str]:
        if isinstance(d, A.InterfaceSigDecl):
            lines = [f"interface_sig {d.name} = {{"]
            for m in d.members:
                if isinstance(m, A.ValSpec):
                    lines.append(f"{_INDENT}val {m.name} : {self.ty(m.ty)}")
                elif m.ty is None:
                    lines.append(f"{_INDENT}type {m.name}")
                else:
                    lines.append(f"{_INDENT}type {m.name} = {self.ty(m.ty)}")
            lines.append("}" + (f" with_iid {d.iid}" if d.iid else ""))
            return lines
        if isinstance(d, A.ComponentSigDecl):
            return ([f"component_sig {d.name} = {{"]
                    + [f"{_INDENT}interface {l} : {s}" for l, s in d.interfaces]
                    + ["}"])
        if isinstance(d, A.ComponentDecl):
            params = ", ".join(f"val {p.name} : {self.ty(p.ty)}" for p in d.params)
            lines = [f"component {d.name} ({params}) : {d.sig} = {{"]
            for loc in d.locals:
                lines += self.core_decl(loc, _INDENT)
            for impl in d.impls:
                lines.append(f"{_INDENT}interface {impl.label} = {{")
                for inner in impl.decls:
                    lines += self.core_decl(inner, _INDENT * 2)
                lines.append(f"{_INDENT}}}")
            lines.append("}")
            return lines
        if isinstance(d, A.ImportDecl):
            return [f"import {d.name} : {d.sig} = clsid {d.clsid}"]
        if isinstance(d, A.ExportDecl):
            return [f"export {d.component} : {d.sig} with_clsid {d.clsid}"]
        return self.core_decl(d, "")


def component_names(program: A.SurfaceProgram) -> frozenset[str]:
    return frozenset(d.name for d in program.decls if isinstance(d, (A.ComponentDecl, A.ImportDecl)))


def pretty_print(program: A.SurfaceProgram) -> str:
    if not program.decls:
        return ""
    p = Printer(component_names(program))
    blocks = ["\n".join(p.decl(d)) for d in program.decls]
    return "\n\n".join(blocks) + "\n"


def print_expr(e, components: frozenset[str] = frozenset()) -> str:
    return Printer(components).expr(e)


def print_type(t) -> str:
    return Printer().ty(t)
