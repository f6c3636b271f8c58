"""Lexing, parsing and pretty-printing of ``.cml`` sources."""

from .ast import SurfaceProgram
from .lexer import Token, TokenKind, tokenize
from .parser import parse_expr, parse_program, parse_source
from .printer import pretty_print

__all__ = ["SurfaceProgram", "Token", "TokenKind", "tokenize", "parse_program",
           "parse_source", "parse_expr", "pretty_print"]
