"""
Reachability fixed points over a web of documents.

Unguided traversal expands a frontier from the seed documents under one of
three link-following semantics (seeds-only, follow-all, query-match). Guided
traversal replaces the semantics with user guidance: a content policy filters
each document's triples before links are discovered, and linking-structure
rules decide which of the discovered links are worth dereferencing for the
query's patterns. Both produce a provenance-carrying triple pool and a trace
that records why every document was admitted or pruned.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .guidance import (
    ContentPolicy,
    EffectiveStructure,
    LinkingStructureRegistry,
    apply_overrides,
    get_linking_structure,
    lambda_allows,
    relevance_decision,
    triple_relevant,
)
from .query import Query, evaluate, triple_patterns
from .rdf import Graph, Triple, TriplePattern, match_triple, strip_fragment
from .webfetch import Dereferencer, Document, FetchLedger

C_NONE = "c-none"
C_ALL = "c-all"
C_MATCH = "c-match"

UNGUIDED = "unguided"
GUIDED = "guided"

DEFAULT_MAX_DOCUMENTS = 64

# The four documents that make up Ann's corner of the bundled demo web.
ANN_SUBTREE = frozenset(
    {
        "https://ann.ex/",
        "https://ann.ex/about/",
        "https://ann.ex/blog/",
        "https://photos.ex/ann/",
    }
)


@dataclass
class TraversalConfig:
    mode: str = UNGUIDED
    semantics: str = C_MATCH
    seeds: Sequence[str] = ()
    max_documents: int = DEFAULT_MAX_DOCUMENTS


@dataclass(frozen=True)
class Admission:
    doc_iri: str
    reason: str  # seed | link | pruned
    from_doc: Optional[str] = None
    via_triple: Optional[Triple] = None
    via_pattern: Optional[TriplePattern] = None
    cause: Optional[str] = None

    def to_json_dict(self) -> Dict:
        out: Dict = {"doc": self.doc_iri, "reason": self.reason}
        if self.from_doc is not None:
            out["from"] = self.from_doc
        if self.via_triple is not None:
            out["viaTriple"] = self.via_triple.n3()
        if self.via_pattern is not None:
            out["viaPattern"] = self.via_pattern.n3()
        if self.cause is not None:
            out["cause"] = self.cause
        return out


class TriplePool:
    """Triples with per-source provenance, plus a plain union-graph view."""

    def __init__(self, entries=()):
        self.entries: Set[Tuple[Triple, str]] = set(entries)

    def add(self, triple: Triple, source_doc_iri: str) -> None:
        self.entries.add((triple, source_doc_iri))

    def graph(self) -> Graph:
        return Graph(t for t, _ in self.entries)

    def provenance(self) -> Dict[Triple, Set[str]]:
        out: Dict[Triple, Set[str]] = {}
        for t, src in self.entries:
            out.setdefault(t, set()).add(src)
        return out

    def sources_of(self, triple: Triple) -> List[str]:
        return sorted(src for t, src in self.entries if t == triple)


@dataclass
class TraversalTrace:
    admissions: List[Admission] = field(default_factory=list)
    pool: Optional[TriplePool] = None
    ledger: Optional[FetchLedger] = None
    documents: Dict[str, Document] = field(default_factory=dict)

    def admitted_documents(self) -> List[str]:
        seen = []
        for a in self.admissions:
            if a.reason != "pruned" and a.doc_iri not in seen:
                seen.append(a.doc_iri)
        return seen

    def admission_of(self, doc_iri: str) -> Optional[Admission]:
        for a in self.admissions:
            if a.doc_iri == doc_iri and a.reason != "pruned":
                return a
        return None

    def to_json_dict(self) -> Dict:
        pool_json: Dict[str, List[str]] = {}
        if self.pool is not None:
            for triple, sources in self.pool.provenance().items():
                pool_json[triple.n3()] = sorted(sources)
        return {
            "admissions": [a.to_json_dict() for a in self.admissions],
            "pool": dict(sorted(pool_json.items())),
            "ledger": self.ledger.to_json_list() if self.ledger else [],
        }


class CappedTraversalError(Exception):
    """Raised when a traversal would exceed its document cap."""

    def __init__(self, max_documents: int, trace: TraversalTrace):
        super().__init__(
            "traversal exceeded the cap of %d documents" % max_documents
        )
        self.max_documents = max_documents
        self.trace = trace


def _iri_positions(triple: Triple) -> List[str]:
    out = [strip_fragment(triple.subject.value)]
    if triple.object.kind == "iri":
        out.append(strip_fragment(triple.object.value))
    return out


def _matching_pattern(triple: Triple, patterns: Sequence[TriplePattern]) -> Optional[TriplePattern]:
    for tp in patterns:
        if match_triple(triple, tp) is not None:
            return tp
    return None


def _order(candidates: Set[str], rng: Optional[random.Random]) -> List[str]:
    ordered = sorted(candidates)
    if rng is not None:
        rng.shuffle(ordered)
    return ordered


def _seed_iris(seeds: Sequence[str]) -> List[str]:
    if not seeds:
        raise ValueError("at least one seed IRI is required")
    return sorted({strip_fragment(s) for s in seeds})


def traverse_unguided(config: TraversalConfig, source, query: Query, *,
                      rng: Optional[random.Random] = None,
                      workers: int = 4) -> Tuple[TriplePool, TraversalTrace]:
    """Breadth-first reachability fixed point under classical semantics.

    c-none never follows links; c-all follows every subject/object IRI of
    every parsed triple; c-match follows IRIs from triples that match a query
    pattern, plus links asserted about entities already known to occur in
    such matching triples. Predicate-position IRIs are never followed.
    """
    if config.semantics not in (C_NONE, C_ALL, C_MATCH):
        raise ValueError("unknown semantics %r" % config.semantics)
    patterns = triple_patterns(query)
    deref = Dereferencer(source)
    trace = TraversalTrace(ledger=deref.ledger)
    pool = TriplePool()
    docs: Dict[str, Document] = {}
    visited: Set[str] = set()

    def fetch(iris: List[str], reasons: Dict[str, Admission]) -> None:
        if len(visited) + len(iris) > config.max_documents:
            raise CappedTraversalError(config.max_documents, trace)
        visited.update(iris)
        for iri, doc in deref.fetch_wave(iris, workers=workers).items():
            docs[iri] = doc
            trace.admissions.append(reasons[iri])
            for t in doc.triples:
                pool.add(t, doc.doc_iri)

    seeds = _seed_iris(config.seeds)
    fetch(list(seeds), {s: Admission(s, "seed") for s in seeds})

    if config.semantics != C_NONE:
        while True:
            reasons: Dict[str, Admission] = {}
            if config.semantics == C_ALL:
                for doc in docs.values():
                    for t in doc.triples:
                        for iri in _iri_positions(t):
                            if iri not in visited and iri not in reasons:
                                reasons[iri] = Admission(iri, "link", doc.doc_iri, t)
            else:  # C_MATCH
                entities: Set[str] = set()
                for doc in docs.values():
                    for t in doc.triples:
                        if _matching_pattern(t, patterns) is not None:
                            entities.add(t.subject.value)
                            if t.object.kind == "iri":
                                entities.add(t.object.value)
                for doc in docs.values():
                    for t in doc.triples:
                        tp = _matching_pattern(t, patterns)
                        if tp is None and t.subject.value not in entities:
                            continue
                        for iri in _iri_positions(t):
                            if iri not in visited and iri not in reasons:
                                reasons[iri] = Admission(iri, "link", doc.doc_iri, t, tp)
            if not reasons:
                break
            fetch(_order(set(reasons), rng), reasons)
    trace.pool = pool
    trace.documents = docs
    return pool, trace


def _relevant_triples(doc: Document, policy: ContentPolicy) -> List[Triple]:
    return [t for t in doc.triples if triple_relevant(policy, t, doc.doc_iri)]


def _guided_candidates(doc: Document, structure: EffectiveStructure,
                       policy: ContentPolicy) -> Dict[str, Triple]:
    """Candidate document IRIs hyperlinked from doc, with one witness triple.

    Links are discovered from policy-relevant triples, and additionally from
    any triple whose predicate a structure rule explicitly says to follow;
    structure rules are trusted user guidance, so the links they sanction are
    considered even when the linking triple itself is not policy-relevant.
    """
    follow_predicates: Set[str] = set()
    if isinstance(structure, list):
        for rule in structure:
            follow_predicates.update(rule.follow_predicates())
    out: Dict[str, Triple] = {}
    for t in sorted(doc.triples, key=Triple.sort_key):
        via_relevance = triple_relevant(policy, t, doc.doc_iri)
        via_structure = (
            t.predicate.value in follow_predicates and t.object.kind == "iri"
        )
        if not via_relevance and not via_structure:
            continue
        iris = _iri_positions(t) if via_relevance else [strip_fragment(t.object.value)]
        for iri in iris:
            out.setdefault(iri, t)
    return out


def traverse_guided(seeds: Sequence[str], registry: LinkingStructureRegistry,
                    policy: ContentPolicy, query: Query, source, *,
                    max_documents: int = DEFAULT_MAX_DOCUMENTS,
                    rng: Optional[random.Random] = None,
                    workers: int = 4) -> Tuple[TriplePool, TraversalTrace]:
    """Guided reachability fixed point.

    Each admitted document's triples are filtered by the content policy; only
    relevant triples enter the pool. A hyperlinked candidate document is
    admitted when the linking structure of the referring document allows it
    for some query pattern. After the fixed point, exclusive policy rules are
    enforced over the whole pool.
    """
    patterns = triple_patterns(query)
    deref = Dereferencer(source)
    trace = TraversalTrace(ledger=deref.ledger)
    docs: Dict[str, Document] = {}
    visited: Set[str] = set()
    pruned_logged: Set[str] = set()

    def fetch(iris: List[str], reasons: Dict[str, Admission]) -> None:
        if len(visited) + len(iris) > max_documents:
            raise CappedTraversalError(max_documents, trace)
        visited.update(iris)
        for iri, doc in deref.fetch_wave(iris, workers=workers).items():
            docs[iri] = doc
            trace.admissions.append(reasons[iri])

    seeds = _seed_iris(seeds)
    fetch(list(seeds), {s: Admission(s, "seed") for s in seeds})

    while True:
        reasons: Dict[str, Admission] = {}
        for doc_iri in sorted(docs):
            doc = docs[doc_iri]
            structure = get_linking_structure(registry, doc.doc_iri)
            for candidate, witness in _guided_candidates(doc, structure, policy).items():
                if candidate in visited or candidate in reasons:
                    continue
                admitting_tp = None
                for tp in patterns:
                    if lambda_allows(structure, doc, candidate, tp):
                        admitting_tp = tp
                        break
                if admitting_tp is not None:
                    reasons[candidate] = Admission(
                        candidate, "link", doc.doc_iri, witness, admitting_tp
                    )
                elif candidate not in pruned_logged:
                    pruned_logged.add(candidate)
                    trace.admissions.append(
                        Admission(
                            candidate,
                            "pruned",
                            doc.doc_iri,
                            witness,
                            cause="no structure rule permits following this link",
                        )
                    )
        if not reasons:
            break
        fetch(_order(set(reasons), rng), reasons)

    raw_pool = set()
    for doc in docs.values():
        for t in _relevant_triples(doc, policy):
            raw_pool.add((t, doc.doc_iri))
    pool = TriplePool(apply_overrides(raw_pool, policy))
    trace.pool = pool
    trace.documents = docs
    return pool, trace


def evaluate_augmented(query: Query, registry: LinkingStructureRegistry,
                       policy: ContentPolicy, seeds: Sequence[str], source, *,
                       max_documents: int = DEFAULT_MAX_DOCUMENTS,
                       rng: Optional[random.Random] = None,
                       workers: int = 4):
    """Guided traversal followed by query evaluation over the pool's graph."""
    pool, trace = traverse_guided(
        seeds, registry, policy, query, source,
        max_documents=max_documents, rng=rng, workers=workers,
    )
    return evaluate(query, pool.graph()), trace


def ann_subtree_request_count(trace: TraversalTrace) -> int:
    """Distinct successfully fetched documents within Ann's demo subtree."""
    if trace.ledger is None:
        return 0
    return len(trace.ledger.ok_documents & ANN_SUBTREE)
