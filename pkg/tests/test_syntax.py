import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from astgen import programs
from comlang.errors import LexError, ParseError
from comlang.syntax import TokenKind, parse_source, pretty_print, tokenize
from comlang.syntax import ast as A
from conftest import FOO_SIGS, SAMPLES


def kinds(src):
    return [(t.kind, t.text) for t in tokenize(src)]


def test_empty_source_has_no_tokens():
    assert tokenize("") == []


def test_with_iid_is_keyword_then_guid():
    assert kinds("with_iid 00000000-0000-0000-0000-000000000000") == [
        (TokenKind.KEYWORD, "with_iid"),
        (TokenKind.GUID, "00000000-0000-0000-0000-000000000000"),
    ]


def test_instantiation_tokens():
    assert kinds("val Foo = FooComp ()") == [
        (TokenKind.KEYWORD, "val"), (TokenKind.IDENT, "Foo"), (TokenKind.PUNCT, "="),
        (TokenKind.IDENT, "FooComp"), (TokenKind.PUNCT, "("), (TokenKind.PUNCT, ")"),
    ]


@pytest.mark.parametrize("word", [
    "interface_sig", "component_sig", "component", "interface", "import", "export", "with_iid",
    "with_clsid", "clsid", "ifc_case", "of", "else", "instanceOf", "val", "fun", "let", "in",
    "end", "if", "then", "type",
])
def test_keywords(word):
    assert kinds(word) == [(TokenKind.KEYWORD, word)]


def test_nested_comments_are_skipped():
    assert kinds("val (* a (* b *) c *) x") == [(TokenKind.KEYWORD, "val"), (TokenKind.IDENT, "x")]


def test_token_spans_are_one_based():
    toks = tokenize("val\n  x")
    assert (toks[0].span.line, toks[0].span.column) == (1, 1)
    assert (toks[1].span.line, toks[1].span.column) == (2, 3)


def test_guid_is_normalised_to_upper_case():
    prog = parse_source("import C () : S = clsid a7b93c92-7b81-11d0-ac5f-00c04fd97575")
    assert prog.decls[0].clsid == "A7B93C92-7B81-11D0-AC5F-00C04FD97575"


@pytest.mark.parametrize("src", [
    "val x = #",
    'val s = "unterminated',
    "with_iid 1234-5678",
    "val x = (* never closed",
])
def test_lex_errors(src):
    with pytest.raises(LexError) as info:
        tokenize(src)
    span = info.value.span
    assert span.line >= 1 and span.column >= 1


@pytest.mark.parametrize("src", [
    "val = 3",
    "interface_sig S = { val f : }",
    "component C : S = {}",
    "val x = ifc_case y of S => 1",
    "component_sig T = { interface L : { val f : int } }",
])
def test_parse_errors_carry_spans_inside_the_input(src):
    with pytest.raises(ParseError) as info:
        parse_source(src)
    span = info.value.span
    lines = src.split("\n")
    assert 1 <= span.line <= len(lines)
    assert 1 <= span.column <= len(lines[span.line - 1]) + 1


def test_component_requires_parameter_list():
    with pytest.raises(ParseError):
        parse_source("component FooComp : FOO_SIG = { interface X = { val a = 1 } }")


def test_foo_demo_shape():
    prog = parse_source(FOO_SIGS)
    kinds_ = [type(d).__name__ for d in prog.decls]
    assert kinds_ == ["InterfaceSigDecl", "InterfaceSigDecl", "ComponentSigDecl", "ComponentDecl"]
    comp = prog.decls[3]
    assert (comp.name, comp.params, comp.sig) == ("FooComp", (), "FOO_SIG")
    assert [i.label for i in comp.impls] == ["X", "Y"]


def test_agent_interface_shape():
    prog = parse_source((SAMPLES / "agent_demo.cml").read_text())
    agent = next(d for d in prog.decls if isinstance(d, A.InterfaceSigDecl) and d.name == "I_AGENT")
    vals = [m.name for m in agent.members if isinstance(m, A.ValSpec)]
    assert vals == ["load", "unload", "register", "unregister", "getCharacter"]
    assert agent.iid == "A7B93C91-7B81-11D0-AC5F-00C04FD97575"


def test_pair_type_spellings_agree():
    a = parse_source("interface_sig S = { val f : string -> (int, int) }")
    b = parse_source("interface_sig S = { val f : string -> int * int }")
    assert a == b


def test_ifc_case_arms_and_else():
    prog = parse_source("val r = ifc_case x of FOO => 1 | BAR => 2 else => 3")
    e = prog.decls[0].expr
    assert isinstance(e, A.IfcCase)
    assert [s for s, _ in e.arms] == ["FOO", "BAR"]
    assert e.else_ == A.Lit("int", 3)


def test_instantiation_with_arguments():
    prog = parse_source(FOO_SIGS + "val Bar = FooComp (val X = Foo.X val Y = Foo.Y)")
    e = prog.decls[-1].expr
    assert isinstance(e, A.Instantiate)
    assert [n for n, _ in e.args] == ["X", "Y"]


def test_empty_program_prints_empty():
    assert pretty_print(parse_source("")) == ""


@pytest.mark.parametrize("path", ["foo_demo.cml", "agent_demo.cml", "roundtrip/foo_server.cml",
                                  "roundtrip/foo_client.cml"])
def test_samples_round_trip(path):
    prog = parse_source((SAMPLES / path).read_text())
    assert parse_source(pretty_print(prog)) == prog


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(programs)
def test_generated_programs_round_trip(prog):
    assert parse_source(pretty_print(prog)) == prog


@given(st.from_regex(r"[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}",
                     fullmatch=True))
def test_guid_case_insensitive(guid):
    lower = parse_source(f"export C : S with_clsid {guid.lower()}")
    upper = parse_source(f"export C : S with_clsid {guid.upper()}")
    assert lower == upper
    assert lower.decls[0].clsid == guid.upper()


@settings(max_examples=300)
@given(st.lists(st.sampled_from(list("val x=(){}|:;,.*->\"#1a_ \n") + ["ifc_case ", " of ", " else "]),
                max_size=30).map("".join))
def test_any_failure_is_located_inside_the_input(src):
    try:
        parse_source(src)
    except (LexError, ParseError) as e:
        lines = src.split("\n")
        assert 1 <= e.span.line <= len(lines)
        assert 1 <= e.span.column <= len(lines[e.span.line - 1]) + 1
