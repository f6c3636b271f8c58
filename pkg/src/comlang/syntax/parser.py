"""Recursive-descent parser for ``.cml`` sources.

Layout rule: a token in column 1 never continues a function application, so
top-level expression statements can follow a declaration without ``;``.
"""

from __future__ import annotations

from typing import Optional

from ..errors import ParseError, SourceSpan
from . import ast as A
from .lexer import Token, TokenKind, normalize_guid, tokenize, unescape_string

K = TokenKind

_DECL_STARTERS = {"val", "fun", "type"}
_MODULE_STARTERS = {"interface_sig", "component_sig", "component", "import", "export"}
_ATOM_PUNCT = {"(", "[", "{"}
_ATOM_KEYWORDS = {"let", "true", "false"}


class Parser:
    def __init__(self, tokens: list[Token], file: str = "<input>"):
        self.toks = tokens
        self.pos = 0
        self.file = tokens[0].span.file if tokens else file
        self.components: set[str] = set()

    # -- token helpers ------------------------------------------------------

    def peek(self, offset: int = 0) -> Optional[Token]:
        i = self.pos + offset
        return self.toks[i] if i < len(self.toks) else None

    def at(self, text: str, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.kind in (K.KEYWORD, K.PUNCT) and t.text == text

    def at_kind(self, kind: TokenKind, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.kind is kind

    def here(self) -> SourceSpan:
        t = self.peek()
        if t is not None:
            return t.span
        if self.toks:
            last = self.toks[-1].span
            return SourceSpan(last.file, last.line, last.column + max(last.length - 1, 0), 0)
        return SourceSpan(self.file, 1, 1, 0)

    def fail(self, *expected: str):
        t = self.peek()
        found = repr(t.text) if t else "end of input"
        exp = ", ".join(sorted(expected))
        raise ParseError(f"expected {exp}, found {found}", self.here(), frozenset(expected))

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            self.fail("more input")
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        if not self.at_kind(K.IDENT):
            self.fail(what)
        return self.next()

    def expect_guid(self) -> str:
        if not self.at_kind(K.GUID):
            self.fail("GUID literal")
        return normalize_guid(self.next().text)

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    # -- program and declarations ---------------------------------------------

    def program(self) -> A.SurfaceProgram:
        decls = []
        while self.peek() is not None:
            if self.accept(";"):
                continue
            decls.append(self.top_decl())
        return A.SurfaceProgram(tuple(decls), self.file)

    def top_decl(self):
        t = self.peek()
        if t.kind is K.KEYWORD:
            if t.text == "interface_sig":
                return self.interface_sig()
            if t.text == "component_sig":
                return self.component_sig()
            if t.text == "component":
                return self.component()
            if t.text == "import":
                return self.import_decl()
            if t.text == "export":
                return self.export_decl()
            if t.text in _DECL_STARTERS:
                return self.core_decl()
        # top-level expression statement, bound to ``it`` as in SML
        e = self.expr()
        return A.ValDecl(A.PVar("it", t.span), e, t.span)

    def core_decl(self):
        t = self.peek()
        if self.at("val"):
            self.next()
            p = self.pat()
            self.expect("=")
            return A.ValDecl(p, self.expr(), t.span)
        if self.at("fun"):
            return self.fun_decl()
        if self.at("type"):
            self.next()
            name = self.expect_ident("type name").text
            self.expect("=")
            return A.TypeDecl(name, self.ty(), t.span)
        self.fail("'val'", "'fun'", "'type'")

    def core_decls(self, *terminators: str) -> tuple:
        decls = []
        while not any(self.at(x) for x in terminators):
            if self.accept(";"):
                continue
            decls.append(self.core_decl())
        return tuple(decls)

    def fun_decl(self):
        start = self.expect("fun")
        name = self.expect_ident("function name").text
        clauses = [self.clause(start.span)]
        while self.at("|") and self.at_kind(K.IDENT, 1) and self.peek(1).text == name:
            self.next()
            self.next()
            clauses.append(self.clause(self.here()))
        arities = {len(c.params) for c in clauses}
        if len(arities) != 1:
            raise ParseError(f"clauses of {name} have different numbers of arguments", start.span)
        return A.FunDecl(name, tuple(clauses), start.span)

    def clause(self, span: SourceSpan) -> A.Clause:
        params = []
        while not (self.at("=") or self.at(":")):
            params.append(self.atpat())
        if not params:
            self.fail("pattern")
        ret = None
        if self.accept(":"):
            ret = self.ty()
        self.expect("=")
        body = self.expr()
        if ret is not None:
            body = A.Annot(body, ret, span)
        return A.Clause(tuple(params), body, span)

    def interface_sig(self):
        start = self.expect("interface_sig")
        name = self.expect_ident("signature name").text
        self.expect("=")
        self.expect("{")
        members = []
        while not self.at("}"):
            t = self.peek()
            if self.accept("val"):
                mname = self.expect_ident("member name").text
                self.expect(":")
                members.append(A.ValSpec(mname, self.ty(), t.span))
            elif self.accept("type"):
                tname = self.expect_ident("type name").text
                ty = self.ty() if self.accept("=") else None
                members.append(A.TypeSpec(tname, ty, t.span))
            else:
                self.fail("'val'", "'type'", "'}'")
        self.expect("}")
        iid = None
        if self.accept("with_iid"):
            iid = self.expect_guid()
        return A.InterfaceSigDecl(name, tuple(members), iid, start.span)

    def component_sig(self):
        start = self.expect("component_sig")
        name = self.expect_ident("signature name").text
        self.expect("=")
        self.expect("{")
        items = []
        while not self.at("}"):
            self.expect("interface")
            label = self.expect_ident("interface label").text
            self.expect(":")
            items.append((label, self.expect_ident("interface signature name").text))
        self.expect("}")
        return A.ComponentSigDecl(name, tuple(items), start.span)

    def component(self):
        start = self.expect("component")
        name = self.expect_ident("component name").text
        self.expect("(")
        params = []
        while not self.at(")"):
            t = self.expect("val")
            pname = self.expect_ident("parameter name").text
            self.expect(":")
            params.append(A.Param(pname, self.ty(), t.span))
            self.accept(",")
        self.expect(")")
        self.expect(":")
        sig = self.expect_ident("component signature name").text
        self.expect("=")
        self.expect("{")
        # registered before the body so instance expressions can mention it
        self.components.add(name)
        impls, locals_ = [], []
        while not self.at("}"):
            if self.accept(";"):
                continue
            if self.at("interface"):
                t = self.next()
                label = self.expect_ident("interface label").text
                self.expect("=")
                self.expect("{")
                decls = self.core_decls("}")
                self.expect("}")
                impls.append(A.InterfaceImpl(label, decls, t.span))
            elif self.peek() is not None and self.peek().text in _DECL_STARTERS:
                locals_.append(self.core_decl())
            else:
                self.fail("'interface'", "'val'", "'fun'", "'type'", "'}'")
        self.expect("}")
        return A.ComponentDecl(name, tuple(params), sig, tuple(impls), tuple(locals_), start.span)

    def import_decl(self):
        start = self.expect("import")
        name = self.expect_ident("component name").text
        if self.accept("("):
            self.expect(")")
        self.expect(":")
        sig = self.expect_ident("component signature name").text
        self.expect("=")
        self.expect("clsid")
        clsid = self.expect_guid()
        self.components.add(name)
        return A.ImportDecl(name, sig, clsid, start.span)

    def export_decl(self):
        start = self.expect("export")
        name = self.expect_ident("component name").text
        self.expect(":")
        sig = self.expect_ident("component signature name").text
        self.expect("with_clsid")
        clsid = self.expect_guid()
        return A.ExportDecl(name, sig, clsid, start.span)

    # -- types ------------------------------------------------------------

    def ty(self):
        t = self.tuple_ty()
        if self.at("->"):
            span = self.next().span
            return A.TyArrow(t, self.ty(), span)
        return t

    def tuple_ty(self):
        first = self.post_ty()
        if not self.at("*"):
            return first
        items = [first]
        while self.accept("*"):
            items.append(self.post_ty())
        return A.TyTuple(tuple(items), first.span)

    def post_ty(self):
        t = self.atom_ty()
        while self.at_kind(K.IDENT) and self.peek().text == "list":
            self.next()
            t = A.TyList(t, t.span)
        return t

    def _close_bars(self, n: int) -> None:
        if n == 2 and self.accept("||"):
            return
        for _ in range(n):
            self.expect("|")

    def atom_ty(self):
        t = self.peek()
        if self.accept("||"):
            name = self.expect_ident("interface signature name").text
            self._close_bars(2)
            return A.TyIfc(name, t.span)
        if self.accept("|"):
            if self.accept("|"):
                name = self.expect_ident("interface signature name").text
                self._close_bars(2)
                return A.TyIfc(name, t.span)
            name = self.expect_ident("component signature name").text
            self.expect("|")
            return A.TyComp(name, t.span)
        if self.accept("("):
            first = self.ty()
            if self.accept(","):
                items = [first, self.ty()]
                while self.accept(","):
                    items.append(self.ty())
                self.expect(")")
                return A.TyTuple(tuple(items), t.span)
            self.expect(")")
            return first
        if self.accept("{"):
            fields = []
            while not self.at("}"):
                label = self.expect_ident("field label").text
                self.expect(":")
                fields.append((label, self.ty()))
                if not self.accept(","):
                    break
            self.expect("}")
            return A.TyRecord(tuple(fields), t.span)
        if self.at_kind(K.IDENT):
            path = [self.next().text]
            while self.at(".") and self.at_kind(K.IDENT, 1):
                self.next()
                path.append(self.next().text)
            if len(path) == 1:
                return A.TyName(path[0], t.span)
            return A.TyPath(tuple(path), t.span)
        self.fail("type")

    # -- patterns -----------------------------------------------------------

    def pat(self):
        p = self.cons_pat()
        if self.at(":"):
            span = self.next().span
            return A.PAnnot(p, self.ty(), span)
        return p

    def cons_pat(self):
        head = self.atpat()
        if self.at("::"):
            span = self.next().span
            return A.PCons(head, self.cons_pat(), span)
        return head

    def atpat(self):
        t = self.peek()
        if t is None:
            self.fail("pattern")
        if self.accept("_"):
            return A.PWild(t.span)
        if t.kind is K.IDENT:
            self.next()
            return A.PVar(t.text, t.span)
        if t.kind in (K.INT, K.REAL, K.STRING) or self.at("true") or self.at("false"):
            lit = self.literal()
            return A.PLit(lit.kind, lit.value, t.span)
        if self.accept("("):
            if self.accept(")"):
                return A.PLit("unit", None, t.span)
            first = self.pat()
            if self.accept(","):
                items = [first, self.pat()]
                while self.accept(","):
                    items.append(self.pat())
                self.expect(")")
                return A.PTuple(tuple(items), t.span)
            self.expect(")")
            return first
        if self.accept("["):
            items = []
            while not self.at("]"):
                items.append(self.pat())
                if not self.accept(","):
                    break
            self.expect("]")
            return A.PList(tuple(items), t.span)
        self.fail("pattern")

    # -- expressions --------------------------------------------------------

    def literal(self) -> A.Lit:
        t = self.next()
        if t.kind is K.INT:
            return A.Lit("int", int(t.text), t.span)
        if t.kind is K.REAL:
            return A.Lit("real", float(t.text.replace("~", "-")), t.span)
        if t.kind is K.STRING:
            return A.Lit("string", unescape_string(t.text[1:-1]), t.span)
        if t.text in ("true", "false"):
            return A.Lit("bool", t.text == "true", t.span)
        self.pos -= 1
        self.fail("literal")

    def expr(self):
        t = self.peek()
        if t is None:
            self.fail("expression")
        if self.at("if"):
            self.next()
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            return A.If(c, a, self.expr(), t.span)
        if self.at("fn"):
            self.next()
            p = self.pat()
            self.expect("=>")
            return A.Fn(p, self.expr(), t.span)
        if self.at("ifc_case"):
            self.next()
            scrut = self.expr()
            self.expect("of")
            arms = []
            while True:
                sig = self.expect_ident("interface signature name").text
                self.expect("=>")
                arms.append((sig, self.expr()))
                if not self.accept("|"):
                    break
            self.expect("else")
            self.expect("=>")
            return A.IfcCase(scrut, tuple(arms), self.expr(), t.span)
        return self.orelse()

    def orelse(self):
        left = self.andalso()
        while self.at("orelse"):
            span = self.next().span
            right = self.andalso()
            left = A.If(left, A.Lit("bool", True, span), right, span)
        return left

    def andalso(self):
        left = self.infix(0)
        while self.at("andalso"):
            span = self.next().span
            right = self.infix(0)
            left = A.If(left, right, A.Lit("bool", False, span), span)
        return left

    def _infix_op(self) -> Optional[str]:
        t = self.peek()
        if t is None or t.kind not in (K.PUNCT, K.KEYWORD):
            return None
        return t.text if t.text in A.INFIX_PRECEDENCE else None

    def infix(self, min_prec: int):
        left = self.app()
        while True:
            op = self._infix_op()
            if op is None or A.INFIX_PRECEDENCE[op] < min_prec:
                return left
            prec = A.INFIX_PRECEDENCE[op]
            span = self.next().span
            right = self.infix(prec if op in A.RIGHT_ASSOC else prec + 1)
            left = A.App(A.Var(op, span), A.Tuple((left, right), span), span)

    def _starts_atom(self) -> bool:
        t = self.peek()
        if t is None or t.span.column == 1:
            return False
        if t.kind in (K.IDENT, K.INT, K.REAL, K.STRING):
            return True
        if t.kind is K.KEYWORD:
            return t.text in _ATOM_KEYWORDS or t.text == "instanceOf"
        return t.text in _ATOM_PUNCT or t.text == "~"

    def app(self):
        fn = self.prefix()
        while self._starts_atom():
            arg = self.prefix()
            fn = A.App(fn, arg, fn.span)
        return fn

    def prefix(self):
        t = self.peek()
        if self.at("~"):
            self.next()
            return A.App(A.Var("~", t.span), self.prefix(), t.span)
        if self.at("instanceOf"):
            self.next()
            return A.InstanceOf(self.prefix(), t.span)
        return self.postfix()

    def postfix(self):
        e = self.atom()
        path = []
        while self.at(".") and self.at_kind(K.IDENT, 1):
            self.next()
            path.append(self.next().text)
        if path:
            return A.DotAccess(e, tuple(path), e.span)
        return e

    def atom(self):
        t = self.peek()
        if t is None:
            self.fail("expression")
        if t.kind in (K.INT, K.REAL, K.STRING) or self.at("true") or self.at("false"):
            return self.literal()
        if t.kind is K.IDENT:
            self.next()
            if self.at("("):
                if self.at("val", 1) or (t.text in self.components and self.at(")", 1)):
                    return self.instantiate(t)
            return A.Var(t.text, t.span)
        if self.accept("("):
            if self.accept(")"):
                return A.Lit("unit", None, t.span)
            first = self.expr()
            if self.accept(":"):
                ty = self.ty()
                self.expect(")")
                return A.Annot(first, ty, t.span)
            if self.at(","):
                items = [first]
                while self.accept(","):
                    items.append(self.expr())
                self.expect(")")
                return A.Tuple(tuple(items), t.span)
            if self.at(";"):
                items = [first]
                while self.accept(";"):
                    items.append(self.expr())
                self.expect(")")
                return A.Seq(tuple(items), t.span)
            self.expect(")")
            return first
        if self.accept("["):
            items = []
            while not self.at("]"):
                items.append(self.expr())
                if not self.accept(","):
                    break
            self.expect("]")
            return A.ListExpr(tuple(items), t.span)
        if self.accept("{"):
            fields = []
            while not self.at("}"):
                label = self.expect_ident("field label").text
                self.expect("=")
                fields.append((label, self.expr()))
                if not self.accept(","):
                    break
            self.expect("}")
            return A.Record(tuple(fields), t.span)
        if self.accept("let"):
            decls = self.core_decls("in")
            self.expect("in")
            items = [self.expr()]
            while self.accept(";"):
                items.append(self.expr())
            self.expect("end")
            body = items[0] if len(items) == 1 else A.Seq(tuple(items), items[0].span)
            return A.Let(decls, body, t.span)
        self.fail("expression")

    def instantiate(self, name_tok: Token) -> A.Instantiate:
        self.expect("(")
        args = []
        while not self.at(")"):
            self.expect("val")
            label = self.expect_ident("parameter name").text
            self.expect("=")
            args.append((label, self.expr()))
            self.accept(",")
        self.expect(")")
        return A.Instantiate(name_tok.text, tuple(args), name_tok.span)


def parse_program(tokens: list[Token], file: str = "<input>") -> A.SurfaceProgram:
    return Parser(tokens, file).program()


def parse_source(source: str, file: str = "<input>") -> A.SurfaceProgram:
    return parse_program(tokenize(source, file), file)


def parse_expr(source: str, file: str = "<input>"):
    p = Parser(tokenize(source, file), file)
    e = p.expr()
    if p.peek() is not None:
        p.fail("end of input")
    return e
