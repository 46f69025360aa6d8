"""
Command-line surface: run a traversal, compare guided vs unguided runs, or
explain why a document was (not) fetched / how a result row is supported.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import List, Optional

from .guidance import (
    GuidanceParseError,
    PERMISSIVE,
    PERMISSIVE_POLICY,
    LinkingStructureRegistry,
    get_linking_structure,
    lambda_allows,
    parse_policy,
    parse_structure_registry,
    relevance_decision,
)
from .query import (
    QueryParseError,
    _substitute,
    evaluate,
    parse_query,
    render_table,
    render_tsv,
    rows_to_json,
)
from .rdf import IriError, graph_match, match_triple, strip_fragment
from .traversal import (
    C_ALL,
    C_MATCH,
    C_NONE,
    GUIDED,
    UNGUIDED,
    CappedTraversalError,
    TraversalConfig,
    ann_subtree_request_count,
    traverse_guided,
    traverse_unguided,
)
from .turtle import TurtleParseError
from .webfetch import FixtureError, FixtureSource, LiveHttpSource

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CAPPED = 2
EXIT_INPUT = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_common_flags(p: argparse.ArgumentParser, with_mode: bool) -> None:
    p.add_argument("--query", required=True, metavar="FILE")
    p.add_argument("--seed", action="append", default=[], metavar="IRI")
    if with_mode:
        p.add_argument("--mode", choices=[UNGUIDED, GUIDED], default=UNGUIDED)
    p.add_argument("--semantics", choices=[C_NONE, C_ALL, C_MATCH], default=C_MATCH)
    p.add_argument("--structures", metavar="FILE")
    p.add_argument("--policy", metavar="FILE")
    p.add_argument("--fixtures", metavar="FILE")
    p.add_argument("--live", action="store_true")
    p.add_argument("--format", choices=["table", "tsv", "json"], default="table")
    p.add_argument("--max-docs", type=int, default=64)
    p.add_argument("--timing", action="store_true")
    p.add_argument("--timeout", type=float, default=10.0)
    p.add_argument("--max-body-bytes", type=int, default=1_000_000)
    p.add_argument("--accept", default="text/turtle")


def _build_parser() -> _Parser:
    parser = _Parser(prog="linkquery", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    run = sub.add_parser("run", help="traverse and print query solutions")
    _add_common_flags(run, with_mode=True)
    compare = sub.add_parser("compare", help="side-by-side unguided vs guided report")
    _add_common_flags(compare, with_mode=False)
    explain = sub.add_parser("explain", help="explain a document or result row")
    _add_common_flags(explain, with_mode=True)
    explain.add_argument("--row", type=int, metavar="N")
    explain.add_argument("--doc", metavar="IRI")
    return parser


def _make_source(args):
    if args.live == bool(args.fixtures):
        raise _UsageError("exactly one of --fixtures and --live is required")
    if args.live:
        return LiveHttpSource(
            timeout=args.timeout,
            max_body_bytes=args.max_body_bytes,
            accept=args.accept,
        )
    return FixtureSource.from_manifest(args.fixtures)


def _load_inputs(args, mode: str):
    if not args.seed:
        raise _UsageError("at least one --seed is required")
    query = parse_query(Path(args.query).read_text(encoding="utf-8"))
    registry = policy = None
    if mode == GUIDED:
        if not args.structures or not args.policy:
            raise _UsageError("guided mode requires --structures and --policy")
        registry = parse_structure_registry(Path(args.structures).read_text(encoding="utf-8"))
        policy = parse_policy(Path(args.policy).read_text(encoding="utf-8"))
    return query, registry, policy


def _run_mode(args, mode: str, source, query, registry, policy):
    if mode == GUIDED:
        return traverse_guided(
            args.seed, registry, policy, query, source, max_documents=args.max_docs
        )
    config = TraversalConfig(
        mode=UNGUIDED, semantics=args.semantics, seeds=args.seed,
        max_documents=args.max_docs,
    )
    return traverse_unguided(config, source, query)


def _cmd_run(args, out) -> int:
    query, registry, policy = _load_inputs(args, args.mode)
    source = _make_source(args)
    started = time.monotonic()
    pool, trace = _run_mode(args, args.mode, source, query, registry, policy)
    rows = evaluate(query, pool.graph())
    elapsed = time.monotonic() - started
    fetched = sorted(trace.ledger.ok_documents)
    if args.mode == GUIDED:
        mode_descriptor = GUIDED
    else:
        mode_descriptor = "%s/%s" % (UNGUIDED, args.semantics)
    if args.format == "json":
        report = {
            "solutions": rows_to_json(rows, query.projection),
            "documents_fetched": trace.ledger.distinct_ok,
            "documents": fetched,
            "mode": mode_descriptor,
        }
        if args.timing:
            report["elapsed_seconds"] = round(elapsed, 6)
        out.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    if args.format == "tsv":
        out.write(render_tsv(rows, query.projection))
    else:
        out.write(render_table(rows, query.projection))
    out.write("\n")
    out.write("mode: %s\n" % mode_descriptor)
    out.write("documents fetched: %d\n" % trace.ledger.distinct_ok)
    for iri in fetched:
        out.write("  %s\n" % iri)
    if args.timing:
        out.write("elapsed: %.3fs\n" % elapsed)
    return EXIT_OK


def _row_fingerprints(rows, projection):
    return [
        tuple(None if row[v] is None else row[v].n3() for v in projection)
        for row in rows
    ]


def _cmd_compare(args, out) -> int:
    query, registry, policy = _load_inputs(args, GUIDED)
    source = _make_source(args)

    config = TraversalConfig(
        mode=UNGUIDED, semantics=args.semantics, seeds=args.seed,
        max_documents=args.max_docs,
    )
    unguided_pool, unguided_trace = traverse_unguided(config, source, query)
    unguided_rows = evaluate(query, unguided_pool.graph())

    source2 = _make_source(args)
    guided_pool, guided_trace = traverse_guided(
        args.seed, registry, policy, query, source2, max_documents=args.max_docs
    )
    guided_rows = evaluate(query, guided_pool.graph())

    unguided_set = set(_row_fingerprints(unguided_rows, query.projection))
    guided_set = set(_row_fingerprints(guided_rows, query.projection))
    removed = unguided_set - guided_set
    added = guided_set - unguided_set

    out.write(
        "unguided (%s): %d rows / %d docs; guided: %d rows / %d docs; "
        "rows removed: %d\n"
        % (
            args.semantics,
            len(unguided_rows),
            unguided_trace.ledger.distinct_ok,
            len(guided_rows),
            guided_trace.ledger.distinct_ok,
            len(removed),
        )
    )
    for fp in sorted(removed, key=lambda f: tuple(x or "" for x in f)):
        out.write("  removed: %s\n" % "\t".join(x if x is not None else "NULL" for x in fp))
    for fp in sorted(added, key=lambda f: tuple(x or "" for x in f)):
        out.write("  added: %s\n" % "\t".join(x if x is not None else "NULL" for x in fp))
    out.write(
        "ann.ex requests: %d -> %d\n"
        % (
            ann_subtree_request_count(unguided_trace),
            ann_subtree_request_count(guided_trace),
        )
    )

    # Structure pruning is meant to be performance-only; report whether the
    # registry alone (policy fully permissive) changed results versus c-all.
    source3 = _make_source(args)
    all_config = TraversalConfig(
        mode=UNGUIDED, semantics=C_ALL, seeds=args.seed, max_documents=args.max_docs
    )
    all_pool, _ = traverse_unguided(all_config, source3, query)
    all_rows = evaluate(query, all_pool.graph())
    source4 = _make_source(args)
    structure_pool, _ = traverse_guided(
        args.seed, registry, PERMISSIVE_POLICY, query, source4,
        max_documents=args.max_docs,
    )
    structure_rows = evaluate(query, structure_pool.graph())
    changed = set(_row_fingerprints(all_rows, query.projection)) != set(
        _row_fingerprints(structure_rows, query.projection)
    )
    out.write(
        "structure pruning alone vs c-all: %s\n"
        % ("results changed" if changed else "results unchanged")
    )
    return EXIT_OK


def _explain_doc(args, out, query, registry, policy, trace, pool) -> int:
    doc_iri = strip_fragment(args.doc)
    admission = trace.admission_of(doc_iri)
    if admission is not None:
        chain = []
        current = admission
        while current is not None:
            if current.reason == "seed":
                chain.append("%s: seed" % current.doc_iri)
                current = None
            else:
                chain.append(
                    "%s: linked from %s via %s (pattern %s)"
                    % (
                        current.doc_iri,
                        current.from_doc,
                        current.via_triple.n3(),
                        current.via_pattern.n3() if current.via_pattern else "-",
                    )
                )
                current = trace.admission_of(current.from_doc)
        for line in chain:
            out.write(line + "\n")
        return EXIT_OK
    # Not admitted: find linking triples in fetched documents and say why
    # each link did not lead to a fetch.
    findings = []
    for from_iri in sorted(trace.documents):
        doc = trace.documents[from_iri]
        for t in doc.triples:
            positions = [strip_fragment(t.subject.value)]
            if t.object.kind == "iri":
                positions.append(strip_fragment(t.object.value))
            if doc_iri not in positions:
                continue
            if args.mode == GUIDED:
                relevant, rule = relevance_decision(policy, t, doc.doc_iri)
                if not relevant:
                    ordered = policy.ordered_rules()
                    if rule is None:
                        # Denied by default.  If some rule's pattern covers the
                        # triple but its source constraint rejected this
                        # document, cite that rule: it is the one whose
                        # restriction blocked the link.
                        rule = next(
                            (r for r in ordered
                             if match_triple(t, r.pattern) is not None),
                            None,
                        )
                    label = (
                        "policy rule #%d" % (ordered.index(rule) + 1)
                        if rule is not None
                        else "the policy default"
                    )
                    findings.append(
                        "not fetched: linking triple %s from %s denied by %s"
                        % (t.n3(), doc.doc_iri, label)
                    )
                    continue
                structure = get_linking_structure(registry, doc.doc_iri)
                allowed = any(
                    lambda_allows(structure, doc, doc_iri, tp)
                    for tp in query.all_patterns()
                )
                if not allowed:
                    findings.append(
                        "not fetched: link %s from %s not sanctioned by any "
                        "structure rule" % (t.n3(), doc.doc_iri)
                    )
            else:
                findings.append(
                    "not fetched: linking triple %s from %s did not qualify "
                    "under %s semantics" % (t.n3(), doc.doc_iri, args.semantics)
                )
    if not findings:
        sys.stderr.write("unknown document: no fetched document links to %s\n" % doc_iri)
        return EXIT_USAGE
    for line in findings:
        out.write(line + "\n")
    return EXIT_OK


def _explain_row(args, out, query, policy, rows, pool) -> int:
    if args.row < 1 or args.row > len(rows):
        sys.stderr.write("no such row: %d (have %d rows)\n" % (args.row, len(rows)))
        return EXIT_USAGE
    row = rows[args.row - 1]
    out.write(
        "row %d: %s\n"
        % (
            args.row,
            ", ".join(
                "?%s=%s" % (v, row[v].n3() if row[v] is not None else "NULL")
                for v in query.projection
            ),
        )
    )
    mapping = {v: t for v, t in row.items() if t is not None}
    graph = pool.graph()
    ordered = policy.ordered_rules() if policy is not None else []
    for pattern in query.all_patterns():
        concrete = _substitute(pattern, mapping)
        if any(term.is_variable for term in (concrete.subject, concrete.predicate, concrete.object)):
            continue
        for triple, _ in graph_match(graph, concrete):
            for src in pool.sources_of(triple):
                if policy is not None:
                    _, rule = relevance_decision(policy, triple, src)
                    label = (
                        " (policy rule #%d)" % (ordered.index(rule) + 1)
                        if rule is not None
                        else ""
                    )
                else:
                    label = ""
                out.write("  %s from %s%s\n" % (triple.n3(), src, label))
    return EXIT_OK


def _cmd_explain(args, out) -> int:
    if (args.row is None) == (args.doc is None):
        raise _UsageError("explain requires exactly one of --row and --doc")
    query, registry, policy = _load_inputs(args, args.mode)
    source = _make_source(args)
    pool, trace = _run_mode(args, args.mode, source, query, registry, policy)
    if args.doc is not None:
        return _explain_doc(args, out, query, registry, policy, trace, pool)
    rows = evaluate(query, pool.graph())
    return _explain_row(args, out, query, policy, rows, pool)


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a command is required: run, compare or explain")
        if args.command == "run":
            return _cmd_run(args, sys.stdout)
        if args.command == "compare":
            return _cmd_compare(args, sys.stdout)
        return _cmd_explain(args, sys.stdout)
    except _UsageError as exc:
        sys.stderr.write("usage error: %s\n" % exc)
        sys.stderr.write("run 'linkquery --help' for usage\n")
        return EXIT_USAGE
    except CappedTraversalError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_CAPPED
    except (
        QueryParseError,
        TurtleParseError,
        GuidanceParseError,
        FixtureError,
        IriError,
        FileNotFoundError,
    ) as exc:
        sys.stderr.write("input error: %s\n" % exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
