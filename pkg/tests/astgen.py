"""Hypothesis strategies producing well-formed surface syntax trees."""

from __future__ import annotations

from hypothesis import strategies as st

from comlang.syntax import ast as A
from comlang.syntax.lexer import KEYWORDS

GUIDS = st.sampled_from([
    "00000000-0000-0000-0000-000000000000",
    "6F1C2D3E-0001-4A5B-8C7D-000000000001",
    "A7B93C92-7B81-11D0-AC5F-00C04FD97575",
])
COMPONENTS = ("FooComp", "BarComp")
SIG_NAMES = st.sampled_from(["X_SIG", "Y_SIG", "FOO_SIG", "PEANO"])

lower = st.from_regex(r"[a-z][a-zA-Z0-9_]{0,5}", fullmatch=True).filter(lambda s: s not in KEYWORDS)
upper = st.from_regex(r"[A-Z][A-Za-z0-9_]{0,5}", fullmatch=True).filter(lambda s: s not in COMPONENTS)
labels = st.sampled_from(["a", "b", "name", "x"])

base_ty = st.one_of(
    st.sampled_from(["int", "real", "bool", "string", "unit"]).map(A.TyName),
    SIG_NAMES.map(A.TyIfc),
    SIG_NAMES.map(A.TyComp),
)


def _ty_step(inner):
    return st.one_of(
        st.tuples(inner, inner).map(lambda p: A.TyTuple(p)),
        st.tuples(inner, inner).map(lambda p: A.TyArrow(*p)),
        inner.map(A.TyList),
        st.dictionaries(labels, inner, min_size=1, max_size=2).map(
            lambda d: A.TyRecord(tuple(sorted(d.items())))),
    )


types = st.recursive(base_ty, _ty_step, max_leaves=5)

literals = st.one_of(
    st.integers(0, 10**6).map(lambda n: A.Lit("int", n)),
    st.integers(0, 400).map(lambda n: A.Lit("real", n / 4)),
    st.booleans().map(lambda b: A.Lit("bool", b)),
    st.text(st.characters(min_codepoint=32, max_codepoint=126), max_size=8).map(
        lambda s: A.Lit("string", s)),
    st.just(A.Lit("unit", None)),
)

simple_pats = st.one_of(lower.map(A.PVar), st.just(A.PWild()))
pats = st.one_of(
    simple_pats,
    st.lists(simple_pats, min_size=2, max_size=3).map(lambda ps: A.PTuple(tuple(ps))),
    st.tuples(lower.map(A.PVar), types).map(lambda p: A.PAnnot(*p)),
)

atoms = st.one_of(literals, lower.map(A.Var))


def _expr_step(inner):
    infix = st.sampled_from(["+", "-", "*", "^", "=", "<", "::", "@"])
    return st.one_of(
        st.lists(inner, min_size=2, max_size=3).map(lambda xs: A.Tuple(tuple(xs))),
        st.dictionaries(labels, inner, min_size=1, max_size=2).map(
            lambda d: A.Record(tuple(sorted(d.items())))),
        st.lists(inner, max_size=3).map(lambda xs: A.ListExpr(tuple(xs))),
        st.tuples(pats, inner).map(lambda p: A.Fn(*p)),
        st.tuples(lower.map(A.Var), inner).map(lambda p: A.App(*p)),
        st.tuples(infix, inner, inner).map(lambda p: A.App(A.Var(p[0]), A.Tuple((p[1], p[2])))),
        st.tuples(inner, inner, inner).map(lambda p: A.If(*p)),
        st.lists(inner, min_size=2, max_size=3).map(lambda xs: A.Seq(tuple(xs))),
        st.tuples(inner, types).map(lambda p: A.Annot(*p)),
        st.tuples(upper.map(A.Var), st.lists(upper, min_size=1, max_size=2)).map(
            lambda p: A.DotAccess(p[0], tuple(p[1]))),
        st.tuples(st.sampled_from(COMPONENTS), st.lists(st.tuples(upper, inner), max_size=2)).map(
            lambda p: A.Instantiate(p[0], tuple(p[1]))),
        st.tuples(lower.map(A.Var), st.lists(st.tuples(SIG_NAMES, inner), min_size=1, max_size=2),
                  inner).map(lambda p: A.IfcCase(p[0], tuple(p[1]), p[2])),
        upper.map(lambda n: A.InstanceOf(A.Var(n))),
        st.tuples(st.lists(st.tuples(pats, inner).map(lambda p: A.ValDecl(*p)), min_size=1, max_size=2),
                  inner).map(lambda p: A.Let(tuple(p[0]), p[1])),
    )


exprs = st.recursive(atoms, _expr_step, max_leaves=8)

clauses = st.tuples(st.lists(simple_pats, min_size=1, max_size=2), exprs).map(
    lambda p: A.Clause(tuple(p[0]), p[1]))
fun_decls = st.tuples(lower, st.lists(clauses, min_size=1, max_size=2)).map(
    lambda p: A.FunDecl(p[0], tuple(c for c in p[1] if len(c.params) == len(p[1][0].params))))
val_decls = st.tuples(pats, exprs).map(lambda p: A.ValDecl(*p))
core_decls = st.one_of(val_decls, fun_decls)

members = st.one_of(
    st.tuples(lower, types).map(lambda p: A.ValSpec(*p)),
    lower.map(A.TypeSpec),
    st.tuples(lower, types).map(lambda p: A.TypeSpec(*p)),
)


def _distinct(items, key):
    seen, out = set(), []
    for i in items:
        if key(i) not in seen:
            seen.add(key(i))
            out.append(i)
    return tuple(out)


interface_sigs = st.tuples(upper, st.lists(members, max_size=3), st.one_of(st.none(), GUIDS)).map(
    lambda p: A.InterfaceSigDecl(p[0], _distinct(p[1], lambda m: m.name), p[2]))
component_sigs = st.tuples(upper, st.lists(st.tuples(upper, SIG_NAMES), min_size=1, max_size=2)).map(
    lambda p: A.ComponentSigDecl(p[0], _distinct(p[1], lambda i: i[0])))
impls = st.tuples(upper, st.lists(core_decls, min_size=1, max_size=2)).map(
    lambda p: A.InterfaceImpl(p[0], tuple(p[1])))
components = st.tuples(
    st.sampled_from(COMPONENTS),
    st.lists(st.tuples(upper, types).map(lambda p: A.Param(*p)), max_size=2),
    SIG_NAMES,
    st.lists(impls, min_size=1, max_size=2),
    st.lists(core_decls, max_size=1),
).map(lambda p: A.ComponentDecl(p[0], _distinct(p[1], lambda x: x.name), p[2],
                                _distinct(p[3], lambda i: i.label), tuple(p[4])))
imports = st.tuples(st.sampled_from(COMPONENTS), SIG_NAMES, GUIDS).map(lambda p: A.ImportDecl(*p))
exports = st.tuples(st.sampled_from(COMPONENTS), SIG_NAMES, GUIDS).map(lambda p: A.ExportDecl(*p))

top_decls = st.one_of(interface_sigs, component_sigs, components, imports, exports, core_decls)
# instantiation syntax is only recognised for declared components
PRELUDE = tuple(A.ImportDecl(c, "FOO_SIG", "00000000-0000-0000-0000-000000000000") for c in COMPONENTS)
programs = st.lists(top_decls, max_size=5).map(lambda ds: A.SurfaceProgram(PRELUDE + tuple(ds)))
