from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from ..errors import LexError, SourceSpan


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    GUID = "guid-literal"
    INT = "int-literal"
    REAL = "real-literal"
    STRING = "string-literal"
    PUNCT = "punctuation"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan

    def is_(self, kind: TokenKind, text: str | None = None) -> bool:
        return self.kind is kind and (text is None or self.text == text)


KEYWORDS = frozenset({
    "interface_sig", "component_sig", "component", "interface", "import", "export",
    "with_iid", "with_clsid", "clsid", "ifc_case", "of", "else", "instanceOf",
    "val", "fun", "let", "in", "end", "if", "then", "type",
    # core-language additions
    "fn", "andalso", "orelse", "div", "mod", "true", "false",
})

# keywords after which the next lexeme must be a GUID
_GUID_CONTEXT = frozenset({"with_iid", "with_clsid", "clsid"})

GUID_RE = re.compile(
    r"[0-9A-Fa-f]{8}-[0-9A-Fa-f]{4}-[0-9A-Fa-f]{4}-[0-9A-Fa-f]{4}-[0-9A-Fa-f]{12}(?![0-9A-Za-z_'])")
_GUIDISH_RE = re.compile(r"[0-9A-Za-z_\-]+")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_REAL_RE = re.compile(r"\d+\.\d+(?:[eE][+\-~]?\d+)?|\d+[eE][+\-~]?\d+")
_INT_RE = re.compile(r"\d+")

# longest first
_PUNCT = ("||", "::", "=>", "->", "<>", "<=", ">=",
          "(", ")", "{", "}", "[", "]", ",", ";", ":", ".", "|", "_",
          "=", "<", ">", "+", "-", "*", "/", "^", "@", "~")

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"'}


def is_guid(text: str) -> bool:
    return GUID_RE.fullmatch(text) is not None


def normalize_guid(text: str) -> str:
    if not is_guid(text):
        raise ValueError(f"malformed GUID {text!r}")
    return text.upper()


def unescape_string(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            out.append(_ESCAPES[body[i + 1]])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def escape_string(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Split ``source`` into tokens, dropping whitespace and nestable ``(* *)`` comments."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    col = 1
    n = len(source)

    def span(length: int, at_line: int = None, at_col: int = None) -> SourceSpan:
        return SourceSpan(file, at_line or line, at_col or col, length)

    def advance(text: str) -> None:
        nonlocal pos, line, col
        for ch in text:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        pos += len(text)

    while pos < n:
        ch = source[pos]
        if ch in " \t\r\n":
            advance(ch)
            continue
        if source.startswith("(*", pos):
            start_line, start_col = line, col
            depth = 0
            j = pos
            while j < n:
                if source.startswith("(*", j):
                    depth += 1
                    j += 2
                elif source.startswith("*)", j):
                    depth -= 1
                    j += 2
                    if depth == 0:
                        break
                else:
                    j += 1
            if depth != 0:
                raise LexError("unterminated comment", span(2, start_line, start_col))
            advance(source[pos:j])
            continue

        if tokens and tokens[-1].is_(TokenKind.KEYWORD) and tokens[-1].text in _GUID_CONTEXT:
            m = GUID_RE.match(source, pos)
            if not m:
                bad = _GUIDISH_RE.match(source, pos)
                length = len(bad.group()) if bad else 1
                raise LexError(f"malformed GUID literal after {tokens[-1].text}", span(length))
            tokens.append(Token(TokenKind.GUID, m.group(), span(len(m.group()))))
            advance(m.group())
            continue

        m = GUID_RE.match(source, pos)
        if m:
            tokens.append(Token(TokenKind.GUID, m.group(), span(len(m.group()))))
            advance(m.group())
            continue

        if ch == '"':
            j = pos + 1
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    break
                if source[j] == "\\":
                    if j + 1 >= n or source[j + 1] not in _ESCAPES:
                        raise LexError("invalid escape in string literal", span(2, line, col + (j - pos)))
                    j += 2
                else:
                    j += 1
            if j >= n or source[j] != '"':
                raise LexError("unterminated string literal", span(1))
            text = source[pos:j + 1]
            tokens.append(Token(TokenKind.STRING, text, span(len(text))))
            advance(text)
            continue

        m = _REAL_RE.match(source, pos)
        if m:
            tokens.append(Token(TokenKind.REAL, m.group(), span(len(m.group()))))
            advance(m.group())
            continue
        m = _INT_RE.match(source, pos)
        if m:
            tokens.append(Token(TokenKind.INT, m.group(), span(len(m.group()))))
            advance(m.group())
            continue

        m = _IDENT_RE.match(source, pos)
        if m and m.group() != "_":
            text = m.group()
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, text, span(len(text))))
            advance(text)
            continue

        for p in _PUNCT:
            if source.startswith(p, pos):
                tokens.append(Token(TokenKind.PUNCT, p, span(len(p))))
                advance(p)
                break
        else:
            raise LexError(f"illegal character {ch!r}", span(1))
    return tokens
