"""
Traversal guidance: linking-structure registries and content policies.

A linking-structure registry tells the engine, per document scope, which link
predicates lead to documents worth following for which kinds of triple
patterns. A content policy decides which triples from which source documents
may contribute to results at all, with priorities, a same-origin source
constraint, and exclusive rules whose admitted triples displace same-subject
same-predicate triples admitted from other sources by lower-priority rules.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union
from urllib.parse import urlsplit

from .rdf import (
    Term,
    Triple,
    TriplePattern,
    match_triple,
    strip_fragment,
)
from .webfetch import Document

SELF = "self"
WILDCARD = "*"
SAME_ORIGIN = "same-origin-as-subject"

PERMISSIVE = "permissive"
RESTRICTIVE = "restrictive"

ALLOW = "allow"
DENY = "deny"

SUBJECT_PREDICATE = "subject-predicate"


class GuidanceParseError(Exception):
    pass


@dataclass(frozen=True)
class StructureRule:
    scope: str  # document-IRI prefix
    pattern_predicates: Union[str, FrozenSet[str]]  # WILDCARD or predicate IRIs
    follow: Union[str, FrozenSet[str]]  # SELF or link predicate IRIs

    def covers_pattern(self, tp: TriplePattern) -> bool:
        if self.pattern_predicates == WILDCARD:
            return True
        if tp.predicate.is_variable:
            return True
        return tp.predicate.value in self.pattern_predicates

    def follow_predicates(self) -> FrozenSet[str]:
        if self.follow == SELF:
            return frozenset()
        return self.follow


@dataclass
class LinkingStructureRegistry:
    rules: List[StructureRule]
    default_mode: str = PERMISSIVE


# The effective structure for one document: either a list of explicit rules
# or the registry's default mode.
EffectiveStructure = Union[List[StructureRule], str]


def get_linking_structure(registry: LinkingStructureRegistry, doc_iri: str) -> EffectiveStructure:
    """Rules whose scope is the longest prefix of doc_iri, declaration order.

    Falls back to the registry's default mode when no scope matches.
    """
    best_len = -1
    for rule in registry.rules:
        if doc_iri.startswith(rule.scope) and len(rule.scope) > best_len:
            best_len = len(rule.scope)
    if best_len < 0:
        return registry.default_mode
    return [r for r in registry.rules if doc_iri.startswith(r.scope) and len(r.scope) == best_len]


def _hyperlinked_iris(doc: Document) -> Set[str]:
    out = set()
    for t in doc.triples:
        out.add(strip_fragment(t.subject.value))
        if t.object.kind == "iri":
            out.add(strip_fragment(t.object.value))
    return out


def lambda_allows(structure: EffectiveStructure, from_doc: Document,
                  candidate_doc_iri: str, tp: TriplePattern) -> bool:
    """Should candidate_doc_iri be considered, from from_doc, for matches to tp?

    Candidates must always be hyperlinked from from_doc; rules then restrict
    which of those links qualify. With explicit rules, a rule must cover the
    pattern's predicate and either name follow predicates whose objects link
    to the candidate, or (follow = self) the candidate must be the document
    itself. The permissive default admits any hyperlinked candidate; the
    restrictive default admits none.
    """
    if structure == RESTRICTIVE:
        return False
    if structure == PERMISSIVE:
        return candidate_doc_iri in _hyperlinked_iris(from_doc)
    for rule in structure:
        if not rule.covers_pattern(tp):
            continue
        if rule.follow == SELF:
            if candidate_doc_iri == from_doc.doc_iri:
                return True
            continue
        for t in from_doc.triples:
            if (
                t.predicate.value in rule.follow
                and t.object.kind == "iri"
                and strip_fragment(t.object.value) == candidate_doc_iri
            ):
                return True
    return False


def parse_structure_registry(text: str) -> LinkingStructureRegistry:
    """Compile a registry from its JSON form.

    {"default": "permissive"|"restrictive",
     "rules": [{"scope": iri-prefix,
                "patternPredicates": [iri, ...] | "*",
                "follow": "self" | [iri, ...]}, ...]}
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GuidanceParseError("structure registry is not valid JSON: %s" % exc) from exc
    default = data.get("default", PERMISSIVE)
    if default not in (PERMISSIVE, RESTRICTIVE):
        raise GuidanceParseError("unknown default mode %r" % default)
    rules = []
    for i, raw in enumerate(data.get("rules", [])):
        where = "rule %d" % i
        scope = raw.get("scope")
        if not isinstance(scope, str) or "://" not in scope:
            raise GuidanceParseError("%s: scope must be an IRI prefix" % where)
        preds = raw.get("patternPredicates", WILDCARD)
        if preds == WILDCARD:
            pattern_predicates: Union[str, FrozenSet[str]] = WILDCARD
        elif isinstance(preds, list) and preds and all(isinstance(p, str) for p in preds):
            pattern_predicates = frozenset(preds)
        else:
            raise GuidanceParseError(
                "%s: patternPredicates must be '*' or a non-empty IRI list" % where
            )
        follow_raw = raw.get("follow")
        if follow_raw == SELF:
            follow: Union[str, FrozenSet[str]] = SELF
        elif isinstance(follow_raw, list) and all(isinstance(p, str) for p in follow_raw):
            follow = frozenset(follow_raw)
        else:
            raise GuidanceParseError(
                "%s: follow must be 'self' or a list of link predicates" % where
            )
        rules.append(StructureRule(scope, pattern_predicates, follow))
    return LinkingStructureRegistry(rules, default)


@dataclass(frozen=True)
class PolicyRule:
    action: str  # allow | deny
    pattern: TriplePattern  # variables act as wildcards
    source: str  # IRI prefix, SAME_ORIGIN, or WILDCARD
    priority: int
    exclusive_key: Optional[str] = None  # only SUBJECT_PREDICATE
    index: int = 0  # declaration position, used for tie-breaks and explain

    def matches(self, triple: Triple, source_doc_iri: str) -> bool:
        if match_triple(triple, self.pattern) is None:
            return False
        return self.source_matches(triple, source_doc_iri)

    def source_matches(self, triple: Triple, source_doc_iri: str) -> bool:
        if self.source == WILDCARD:
            return True
        if self.source == SAME_ORIGIN:
            return _same_origin(triple.subject.value, source_doc_iri)
        return source_doc_iri.startswith(self.source)


def _same_origin(subject_iri: str, source_iri: str) -> bool:
    a, b = urlsplit(subject_iri), urlsplit(source_iri)
    return a.scheme == b.scheme and a.netloc == b.netloc


@dataclass
class ContentPolicy:
    rules: List[PolicyRule] = field(default_factory=list)
    default_action: str = ALLOW

    def ordered_rules(self) -> List[PolicyRule]:
        return sorted(self.rules, key=lambda r: (-r.priority, r.index))


PERMISSIVE_POLICY = ContentPolicy([], ALLOW)


def _parse_policy_term(raw: str, position: str) -> Term:
    if raw == "?":
        return Term.var("any_%s" % position)
    if raw.startswith('"'):
        if not raw.endswith('"') or len(raw) < 2:
            raise GuidanceParseError("malformed literal %r in policy pattern" % raw)
        return Term.literal(raw[1:-1])
    if "://" not in raw and not raw.startswith("mailto:"):
        raise GuidanceParseError("malformed IRI %r in policy pattern" % raw)
    return Term.iri(raw)


def parse_policy(text: str) -> ContentPolicy:
    """Compile a content policy from its JSON form.

    {"default": "allow"|"deny",
     "rules": [{"action": "allow"|"deny",
                "pattern": {"s": iri|"?", "p": iri|[iri,...]|"?", "o": iri|literal|"?"},
                "source": iri-prefix|"same-origin-as-subject"|"*",
                "priority": int,
                "exclusive": "subject-predicate"?}, ...]}

    A list in the "p" field is shorthand for one sibling rule per predicate.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GuidanceParseError("policy is not valid JSON: %s" % exc) from exc
    default = data.get("default", ALLOW)
    if default not in (ALLOW, DENY):
        raise GuidanceParseError("unknown default action %r" % default)
    rules: List[PolicyRule] = []
    for i, raw in enumerate(data.get("rules", [])):
        where = "rule %d" % i
        action = raw.get("action")
        if action not in (ALLOW, DENY):
            raise GuidanceParseError("%s: action must be allow or deny" % where)
        pattern_raw = raw.get("pattern")
        if not isinstance(pattern_raw, dict):
            raise GuidanceParseError("%s: missing pattern" % where)
        predicates = pattern_raw.get("p", "?")
        if not isinstance(predicates, list):
            predicates = [predicates]
        source = raw.get("source", WILDCARD)
        if not isinstance(source, str):
            raise GuidanceParseError("%s: malformed source constraint" % where)
        priority = raw.get("priority", 0)
        if not isinstance(priority, int):
            raise GuidanceParseError("%s: priority must be an integer" % where)
        exclusive = raw.get("exclusive")
        if exclusive not in (None, SUBJECT_PREDICATE):
            raise GuidanceParseError("%s: unknown exclusive key %r" % (where, exclusive))
        for pred in predicates:
            try:
                pattern = TriplePattern(
                    _parse_policy_term(pattern_raw.get("s", "?"), "s"),
                    _parse_policy_term(pred, "p"),
                    _parse_policy_term(pattern_raw.get("o", "?"), "o"),
                )
            except GuidanceParseError as exc:
                raise GuidanceParseError("%s: %s" % (where, exc)) from exc
            rules.append(PolicyRule(action, pattern, source, priority, exclusive, len(rules)))
    return ContentPolicy(rules, default)


def relevance_decision(policy: ContentPolicy, triple: Triple,
                       source_doc_iri: str) -> Tuple[bool, Optional[PolicyRule]]:
    """Evaluate rules in descending priority; the first match decides."""
    for rule in policy.ordered_rules():
        if rule.matches(triple, source_doc_iri):
            return rule.action == ALLOW, rule
    return policy.default_action == ALLOW, None


def triple_relevant(policy: ContentPolicy, triple: Triple, source_doc_iri: str) -> bool:
    return relevance_decision(policy, triple, source_doc_iri)[0]


PoolEntry = Tuple[Triple, str]


def apply_overrides(pool: Iterable[PoolEntry], policy: ContentPolicy) -> Set[PoolEntry]:
    """Enforce exclusive rules over the already-relevant pool.

    For each rule with an exclusive subject-predicate key (descending
    priority): when some pool triple is admitted by that rule, drop all pool
    triples sharing its (subject, predicate) that were admitted from other
    sources by lower-priority rules.
    """
    surviving: Set[PoolEntry] = set(pool)
    exclusive_rules = [
        r for r in policy.ordered_rules() if r.exclusive_key == SUBJECT_PREDICATE
    ]
    for rule in exclusive_rules:
        winners = {
            (t, src) for (t, src) in surviving if rule.matches(t, src)
        }
        winner_keys = {(t.subject, t.predicate) for (t, _) in winners}
        if not winner_keys:
            continue
        dropped = set()
        for entry in surviving:
            t, src = entry
            if (t.subject, t.predicate) not in winner_keys or entry in winners:
                continue
            _, deciding = relevance_decision(policy, t, src)
            lower_priority = deciding is None or (
                (-deciding.priority, deciding.index) > (-rule.priority, rule.index)
            )
            if lower_priority and not rule.source_matches(t, src):
                dropped.add(entry)
        surviving -= dropped
    return surviving
