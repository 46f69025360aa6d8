"""
Core RDF data model: terms, triples, triple patterns and an in-memory graph
with pattern matching, plus IRI reference resolution and fragment stripping.

Only the machinery needed for small webs of hyperlinked documents: IRIs,
plain literals with optional language tags, and variables inside patterns.
No blank nodes, no datatypes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Tuple
from urllib.parse import urljoin, urldefrag, urlsplit

IRI = "iri"
LITERAL = "literal"
VARIABLE = "variable"


class IriError(ValueError):
    """Raised when an IRI that must be absolute has no scheme."""


def is_absolute_iri(text: str) -> bool:
    return urlsplit(text).scheme != ""


def resolve_iri(base: str, reference: str) -> str:
    """Resolve an IRI reference against an absolute base.

    Absolute references are returned unchanged; relative ones are resolved
    with the standard reference-resolution algorithm (merge paths, remove
    dot segments).
    """
    if not reference:
        raise IriError("empty IRI reference")
    if is_absolute_iri(reference):
        return reference
    if not is_absolute_iri(base):
        raise IriError("base IRI %r has no scheme" % (base,))
    return urljoin(base, reference)


def strip_fragment(iri: str) -> str:
    """Drop any #fragment from an absolute IRI. Idempotent."""
    if not is_absolute_iri(iri):
        raise IriError("IRI %r is not absolute" % (iri,))
    return urldefrag(iri)[0]


@dataclass(frozen=True)
class Term:
    """An RDF term: an IRI, a plain literal, or (in patterns) a variable."""

    kind: str
    value: str
    language: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (IRI, LITERAL, VARIABLE):
            raise ValueError("unknown term kind %r" % (self.kind,))
        if self.language is not None and self.kind != LITERAL:
            raise ValueError("language tag on non-literal term")
        if self.kind == IRI and not is_absolute_iri(self.value):
            raise IriError("IRI term %r is not absolute" % (self.value,))

    @staticmethod
    def iri(value: str) -> "Term":
        return Term(IRI, value)

    @staticmethod
    def literal(value: str, language: Optional[str] = None) -> "Term":
        return Term(LITERAL, value, language)

    @staticmethod
    def var(name: str) -> "Term":
        return Term(VARIABLE, name.lstrip("?"))

    @property
    def is_variable(self) -> bool:
        return self.kind == VARIABLE

    def sort_key(self) -> Tuple[str, str, str]:
        return (self.value, self.language or "", self.kind)

    def n3(self) -> str:
        if self.kind == IRI:
            return "<%s>" % self.value
        if self.kind == VARIABLE:
            return "?%s" % self.value
        body = _escape_literal(self.value)
        if self.language:
            return '"%s"@%s' % (body, self.language)
        return '"%s"' % body


def _escape_literal(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\t", "\\t")
    )


@dataclass(frozen=True)
class Triple:
    """A ground RDF triple; no component may be a variable."""

    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if self.subject.kind != IRI:
            raise ValueError("triple subject must be an IRI")
        if self.predicate.kind != IRI:
            raise ValueError("triple predicate must be an IRI")
        if self.object.kind == VARIABLE:
            raise ValueError("triple object may not be a variable")

    def sort_key(self):
        return (
            self.subject.sort_key(),
            self.predicate.sort_key(),
            self.object.sort_key(),
        )

    def n3(self) -> str:
        return "%s %s %s." % (self.subject.n3(), self.predicate.n3(), self.object.n3())


@dataclass(frozen=True)
class TriplePattern:
    """A triple pattern; any position may be a variable."""

    subject: Term
    predicate: Term
    object: Term

    def variables(self) -> List[str]:
        return [t.value for t in (self.subject, self.predicate, self.object) if t.is_variable]

    def n3(self) -> str:
        return "%s %s %s." % (self.subject.n3(), self.predicate.n3(), self.object.n3())


SolutionMapping = Dict[str, Term]


def match_triple(triple: Triple, pattern: TriplePattern) -> Optional[SolutionMapping]:
    """Bind the pattern's variables against a ground triple.

    Returns the variable bindings when every concrete pattern position equals
    the triple's term and repeated variables bind consistently; None otherwise.
    """
    bindings: SolutionMapping = {}
    pairs = (
        (pattern.subject, triple.subject),
        (pattern.predicate, triple.predicate),
        (pattern.object, triple.object),
    )
    for pat, term in pairs:
        if pat.is_variable:
            bound = bindings.get(pat.value)
            if bound is None:
                bindings[pat.value] = term
            elif bound != term:
                return None
        elif pat != term:
            return None
    return bindings


class Graph:
    """A deduplicated set of triples with deterministic iteration order."""

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples = set(triples)

    def add(self, triple: Triple) -> None:
        self._triples.add(triple)

    def update(self, triples: Iterable[Triple]) -> None:
        self._triples.update(triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self._triples, key=Triple.sort_key))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __repr__(self) -> str:
        return "Graph(%d triples)" % len(self)

    def union(self, other: "Graph") -> "Graph":
        return Graph(self._triples | other._triples)


def graph_match(graph: Graph, pattern: TriplePattern) -> List[Tuple[Triple, SolutionMapping]]:
    """All triples in the graph matching the pattern, with their bindings.

    Matches come back sorted by (subject, predicate, object) term order so
    downstream results never depend on insertion order.
    """
    out = []
    for triple in graph:
        bindings = match_triple(triple, pattern)
        if bindings is not None:
            out.append((triple, bindings))
    return out


def to_ntriples(graph: Graph) -> str:
    """Canonical serialization: one sorted `<s> <p> o.` line per triple."""
    return "".join(t.n3() + "\n" for t in graph)
