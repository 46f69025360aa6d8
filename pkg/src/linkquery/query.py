"""
Parsing and evaluation of the SELECT query subset.

Grammar: optional PREFIX declarations, SELECT with an explicit variable list,
a WHERE block of triple patterns (`.`-separated, `;` predicate-object lists
allowed) and zero or more non-nested OPTIONAL groups of triple patterns.

Evaluation is the standard algebra: natural join of the required patterns,
then each OPTIONAL group left-joins the result all-or-nothing (a group either
extends a solution completely or leaves its variables unbound). Results are
deduplicated and sorted by projected values, NULL last.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .rdf import (
    Graph,
    SolutionMapping,
    Term,
    TriplePattern,
    graph_match,
    resolve_iri,
)
from .turtle import DEFAULT_PREFIXES, RDF_TYPE, TurtleParseError, _Tokenizer, _Token

_UNSUPPORTED = {
    "FILTER",
    "UNION",
    "GRAPH",
    "SERVICE",
    "BIND",
    "VALUES",
    "MINUS",
    "EXISTS",
    "ORDER",
    "GROUP",
    "HAVING",
    "LIMIT",
    "OFFSET",
    "DISTINCT",
    "REDUCED",
    "ASK",
    "CONSTRUCT",
    "DESCRIBE",
}


class QueryParseError(Exception):
    pass


class UnsupportedFeatureError(QueryParseError):
    def __init__(self, feature: str):
        super().__init__("unsupported query construct: %s" % feature)
        self.feature = feature


@dataclass
class Query:
    projection: List[str]
    required: List[TriplePattern]
    optional_groups: List[List[TriplePattern]] = field(default_factory=list)

    def __post_init__(self):
        if not self.projection:
            raise QueryParseError("projection must be non-empty")
        if len(set(self.projection)) != len(self.projection):
            raise QueryParseError("duplicate variable in projection")
        bound = set()
        for pattern in self.all_patterns():
            bound.update(pattern.variables())
        for var in self.projection:
            if var not in bound:
                raise QueryParseError(
                    "projected variable ?%s does not occur in any pattern" % var
                )

    def all_patterns(self) -> List[TriplePattern]:
        out = list(self.required)
        for group in self.optional_groups:
            out.extend(group)
        return out


def triple_patterns(query: Query) -> List[TriplePattern]:
    """All patterns of the query, required and optional, deduplicated."""
    seen = []
    for pattern in query.all_patterns():
        if pattern not in seen:
            seen.append(pattern)
    return seen


class _QueryTokenizer(_Tokenizer):
    """Extends the Turtle tokenizer with ?variables and braces."""

    def _next(self):
        text = self.text
        while self.pos < len(text) and text[self.pos] in " \t\r\n":
            self._advance()
        if self.pos < len(text):
            line, col = self.line, self.col
            ch = text[self.pos]
            if ch == "?":
                self._advance()
                m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", text[self.pos :])
                if not m:
                    raise TurtleParseError("malformed variable", line, col)
                self._advance(len(m.group(0)))
                return _Token("var", m.group(0), None, line, col)
            if ch in "{}":
                self._advance()
                return _Token("brace", ch, None, line, col)
        return super()._next()


class _QueryParser:
    def __init__(self, tokens: List[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.prefixes = dict(DEFAULT_PREFIXES)

    def _peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _take(self) -> _Token:
        tok = self._peek()
        if tok is None:
            raise QueryParseError("unexpected end of query")
        self.pos += 1
        return tok

    def _check_supported(self, tok: _Token) -> None:
        if tok.type == "word" and tok.value.upper() in _UNSUPPORTED:
            raise UnsupportedFeatureError(tok.value.upper())

    def _term(self, tok: _Token) -> Term:
        self._check_supported(tok)
        if tok.type == "var":
            return Term.var(tok.value)
        if tok.type == "iriref":
            if ":" not in tok.value:
                raise QueryParseError("relative IRI %r in query" % tok.value)
            return Term.iri(tok.value)
        if tok.type == "pname":
            prefix, local = tok.value.split(":", 1)
            if prefix not in self.prefixes:
                raise QueryParseError("unknown prefix %r" % prefix)
            return Term.iri(self.prefixes[prefix] + local)
        if tok.type == "literal":
            return Term.literal(tok.value, tok.language)
        if tok.type == "word" and tok.value == "a":
            return Term.iri(RDF_TYPE)
        raise QueryParseError("unexpected token %r" % tok.value)

    def parse(self) -> Query:
        while True:
            tok = self._peek()
            if tok is None:
                raise QueryParseError("empty query")
            if tok.type == "word" and tok.value.upper() == "PREFIX":
                self._take()
                name = self._take()
                if name.type != "pname" or not name.value.endswith(":"):
                    raise QueryParseError("expected prefix name after PREFIX")
                iri = self._take()
                if iri.type != "iriref":
                    raise QueryParseError("expected namespace IRI in PREFIX")
                self.prefixes[name.value[:-1]] = iri.value
                continue
            break
        tok = self._take()
        self._check_supported(tok)
        if tok.type != "word" or tok.value.upper() != "SELECT":
            raise QueryParseError("expected SELECT")
        projection: List[str] = []
        while True:
            tok = self._peek()
            if tok is not None and tok.type == "var":
                projection.append(self._take().value)
            else:
                break
        tok = self._take()
        self._check_supported(tok)
        if tok.type != "word" or tok.value.upper() != "WHERE":
            raise QueryParseError("expected WHERE")
        tok = self._take()
        if tok.type != "brace" or tok.value != "{":
            raise QueryParseError("expected '{' after WHERE")
        required, optional_groups = self._parse_group(allow_optional=True)
        if self._peek() is not None:
            trailing = self._take()
            self._check_supported(trailing)
            raise QueryParseError("unexpected trailing token %r" % trailing.value)
        return Query(projection, required, optional_groups)

    def _parse_group(self, allow_optional: bool) -> Tuple[List[TriplePattern], List[List[TriplePattern]]]:
        patterns: List[TriplePattern] = []
        optional_groups: List[List[TriplePattern]] = []
        while True:
            tok = self._take()
            if tok.type == "brace" and tok.value == "}":
                return patterns, optional_groups
            if tok.type == "word" and tok.value.upper() == "OPTIONAL":
                if not allow_optional:
                    raise UnsupportedFeatureError("nested OPTIONAL")
                opening = self._take()
                if opening.type != "brace" or opening.value != "{":
                    raise QueryParseError("expected '{' after OPTIONAL")
                group, nested = self._parse_group(allow_optional=False)
                assert not nested
                optional_groups.append(group)
                continue
            if tok.type == "dot":
                continue
            self._check_supported(tok)
            subject = self._term(tok)
            while True:
                predicate = self._term(self._take())
                obj = self._term(self._take())
                patterns.append(TriplePattern(subject, predicate, obj))
                sep = self._peek()
                if sep is not None and sep.type == "semi":
                    self._take()
                    continue
                break


def parse_query(text: str) -> Query:
    try:
        tokens = _QueryTokenizer(text).tokens()
    except TurtleParseError as exc:
        raise QueryParseError(str(exc)) from exc
    return _QueryParser(tokens).parse()


Row = Dict[str, Optional[Term]]


def _substitute(pattern: TriplePattern, mapping: SolutionMapping) -> TriplePattern:
    def sub(term: Term) -> Term:
        if term.is_variable and term.value in mapping:
            return mapping[term.value]
        return term

    return TriplePattern(sub(pattern.subject), sub(pattern.predicate), sub(pattern.object))


def _extend(mapping: SolutionMapping, patterns: List[TriplePattern], graph: Graph) -> List[SolutionMapping]:
    out = [mapping]
    for pattern in patterns:
        nxt = []
        for m in out:
            for _, bindings in graph_match(graph, _substitute(pattern, m)):
                merged = dict(m)
                merged.update(bindings)
                nxt.append(merged)
        out = nxt
    return out


def _row_sort_key(row: Row, projection: List[str]):
    key = []
    for var in projection:
        term = row[var]
        if term is None:
            key.append((1, ("", "", "")))
        else:
            key.append((0, term.sort_key()))
    return key


def evaluate(query: Query, graph: Graph) -> List[Row]:
    """Evaluate the query over a graph, returning sorted, deduplicated rows."""
    solutions = _extend({}, query.required, graph)
    for group in query.optional_groups:
        joined: List[SolutionMapping] = []
        for m in solutions:
            extensions = _extend(m, group, graph)
            if extensions:
                joined.extend(extensions)
            else:
                joined.append(m)
        solutions = joined
    seen = set()
    rows: List[Row] = []
    for m in solutions:
        row = {var: m.get(var) for var in query.projection}
        fingerprint = tuple(
            (t.kind, t.value, t.language) if t is not None else None
            for t in (row[v] for v in query.projection)
        )
        if fingerprint not in seen:
            seen.add(fingerprint)
            rows.append(row)
    rows.sort(key=lambda r: _row_sort_key(r, query.projection))
    return rows


def _cell(term: Optional[Term]) -> str:
    return "NULL" if term is None else term.n3()


def render_table(rows: List[Row], projection: List[str]) -> str:
    headers = ["?" + v for v in projection]
    table = [headers] + [[_cell(row[v]) for v in projection] for row in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(headers))]
    out = []
    for line in table:
        out.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
    return "\n".join(out) + "\n"


def render_tsv(rows: List[Row], projection: List[str]) -> str:
    lines = ["\t".join("?" + v for v in projection)]
    for row in rows:
        lines.append(
            "\t".join("" if row[v] is None else row[v].n3() for v in projection)
        )
    return "\n".join(lines) + "\n"


def rows_to_json(rows: List[Row], projection: List[str]) -> List[Dict[str, Optional[str]]]:
    return [
        {v: (None if row[v] is None else row[v].n3()) for v in projection}
        for row in rows
    ]


def render_json(rows: List[Row], projection: List[str]) -> str:
    return json.dumps(rows_to_json(rows, projection), indent=2, sort_keys=True) + "\n"
