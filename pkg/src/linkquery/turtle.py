"""
Parser for the Turtle subset used by small RDF document webs.

Supported: IRI references in angle brackets (absolute or relative), prefixed
names, plain literals with an optional @lang tag, predicate-object lists with
`;`, object lists with `,`, `.`-terminated statements, `@prefix` declarations,
`a` as rdf:type, and `#` comments outside tokens. Relative IRIs are resolved
against the caller-supplied base.

Not supported (by design): blank nodes, collections, datatyped literals,
@base, named graphs.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional

from .rdf import Graph, Term, Triple, resolve_iri

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

# Prefixes the document webs in this package rely on without declaring.
DEFAULT_PREFIXES: Dict[str, str] = {
    "foaf": "http://xmlns.com/foaf/0.1/",
    "dbr": "http://dbpedia.org/resource/",
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
}


class TurtleParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__("%s (line %d, column %d)" % (message, line, column))
        self.line = line
        self.column = column


@dataclass
class _Token:
    type: str  # iriref | pname | literal | dot | semi | comma | prefix_kw | word
    value: str
    language: Optional[str]
    line: int
    column: int


_PNAME_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_\-]*)?:([A-Za-z0-9_\-]*)")
_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")
_LANG_RE = re.compile(r"[A-Za-z][A-Za-z0-9\-]*")

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> TurtleParseError:
        return TurtleParseError(message, self.line, self.col)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.text) and self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def tokens(self) -> List[_Token]:
        out: List[_Token] = []
        while True:
            tok = self._next()
            if tok is None:
                return out
            out.append(tok)

    def _next(self) -> Optional[_Token]:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n":
                self._advance()
            elif ch == "#":
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance()
            else:
                break
        if self.pos >= len(text):
            return None
        line, col = self.line, self.col
        ch = text[self.pos]
        if ch == "<":
            end = text.find(">", self.pos + 1)
            newline = text.find("\n", self.pos + 1)
            if end == -1 or (newline != -1 and newline < end):
                raise TurtleParseError("unterminated IRI reference", line, col)
            value = text[self.pos + 1 : end]
            self._advance(end - self.pos + 1)
            return _Token("iriref", value, None, line, col)
        if ch == '"':
            self._advance()
            chars: List[str] = []
            while True:
                if self.pos >= len(text) or text[self.pos] == "\n":
                    raise TurtleParseError("unterminated literal", line, col)
                c = text[self.pos]
                if c == "\\":
                    self._advance()
                    if self.pos >= len(text) or text[self.pos] not in _ESCAPES:
                        raise TurtleParseError("unknown escape in literal", self.line, self.col)
                    chars.append(_ESCAPES[text[self.pos]])
                    self._advance()
                elif c == '"':
                    self._advance()
                    break
                else:
                    chars.append(c)
                    self._advance()
            language = None
            if self.pos < len(text) and text[self.pos] == "@":
                self._advance()
                m = _LANG_RE.match(text, self.pos)
                if not m:
                    raise TurtleParseError("malformed language tag", self.line, self.col)
                language = m.group(0)
                self._advance(len(language))
            return _Token("literal", "".join(chars), language, line, col)
        if ch == ".":
            self._advance()
            return _Token("dot", ".", None, line, col)
        if ch == ";":
            self._advance()
            return _Token("semi", ";", None, line, col)
        if ch == ",":
            self._advance()
            return _Token("comma", ",", None, line, col)
        if ch == "@":
            m = _WORD_RE.match(text, self.pos + 1)
            if m and m.group(0) == "prefix":
                self._advance(1 + len("prefix"))
                return _Token("prefix_kw", "@prefix", None, line, col)
            raise TurtleParseError("unexpected '@'", line, col)
        m = _PNAME_RE.match(text, self.pos)
        if m and ":" in m.group(0):
            self._advance(len(m.group(0)))
            return _Token("pname", m.group(0), None, line, col)
        m = _WORD_RE.match(text, self.pos)
        if m:
            self._advance(len(m.group(0)))
            return _Token("word", m.group(0), None, line, col)
        raise TurtleParseError("unexpected character %r" % ch, line, col)


class _Parser:
    def __init__(self, tokens: List[_Token], base: str, prefixes: Dict[str, str]):
        self.tokens = tokens
        self.pos = 0
        self.base = base
        self.prefixes = dict(prefixes)

    def _peek(self) -> Optional[_Token]:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def _take(self) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("dot", "", None, 1, 1)
            raise TurtleParseError("unterminated statement", last.line, last.column)
        self.pos += 1
        return tok

    def _expand(self, tok: _Token) -> Term:
        if tok.type == "iriref":
            return Term.iri(resolve_iri(self.base, tok.value))
        if tok.type == "pname":
            prefix, local = tok.value.split(":", 1)
            if prefix not in self.prefixes:
                raise TurtleParseError("unknown prefix %r" % prefix, tok.line, tok.column)
            return Term.iri(self.prefixes[prefix] + local)
        if tok.type == "literal":
            return Term.literal(tok.value, tok.language)
        if tok.type == "word" and tok.value == "a":
            return Term.iri(RDF_TYPE)
        raise TurtleParseError("unexpected token %r" % tok.value, tok.line, tok.column)

    def parse(self) -> Graph:
        graph = Graph()
        while self._peek() is not None:
            tok = self._peek()
            if tok.type == "prefix_kw":
                self._parse_prefix()
            else:
                self._parse_statement(graph)
        return graph

    def _parse_prefix(self) -> None:
        self._take()  # @prefix
        name = self._take()
        if name.type != "pname" or not name.value.endswith(":"):
            raise TurtleParseError("expected prefix name", name.line, name.column)
        iri = self._take()
        if iri.type != "iriref":
            raise TurtleParseError("expected namespace IRI", iri.line, iri.column)
        dot = self._take()
        if dot.type != "dot":
            raise TurtleParseError("expected '.' after @prefix", dot.line, dot.column)
        self.prefixes[name.value[:-1]] = resolve_iri(self.base, iri.value)

    def _parse_statement(self, graph: Graph) -> None:
        subject_tok = self._take()
        subject = self._expand(subject_tok)
        if subject.kind != "iri":
            raise TurtleParseError(
                "subject must be an IRI", subject_tok.line, subject_tok.column
            )
        first = True
        while True:
            tok = self._peek()
            if tok is not None and tok.type == "dot" and not first:
                # permit a trailing ';' before the terminator
                self._take()
                return
            first = False
            pred_tok = self._take()
            predicate = self._expand(pred_tok)
            if predicate.kind != "iri":
                raise TurtleParseError(
                    "predicate must be an IRI", pred_tok.line, pred_tok.column
                )
            while True:
                obj = self._expand(self._take())
                graph.add(Triple(subject, predicate, obj))
                sep = self._take()
                if sep.type == "comma":
                    continue
                if sep.type == "semi":
                    break
                if sep.type == "dot":
                    return
                raise TurtleParseError(
                    "expected ',', ';' or '.'", sep.line, sep.column
                )


def parse_turtle(text: str, base: str, prefixes: Optional[Dict[str, str]] = None) -> Graph:
    """Parse Turtle-subset text into a Graph, resolving IRIs against base."""
    merged = dict(DEFAULT_PREFIXES)
    if prefixes:
        merged.update(prefixes)
    tokens = _Tokenizer(text).tokens()
    return _Parser(tokens, base, merged).parse()
