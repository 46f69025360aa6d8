import random

import pytest

from helpers import (
    brute_force_evaluate,
    parse_web,
    random_bgp_query,
    random_web,
    row_fingerprints,
)
from linkquery.query import (
    Query,
    QueryParseError,
    UnsupportedFeatureError,
    evaluate,
    parse_query,
    render_json,
    render_table,
    render_tsv,
    triple_patterns,
)
from linkquery.rdf import Graph, Term, Triple, TriplePattern

FOAF = "http://xmlns.com/foaf/0.1/"

FRIENDS_QUERY = """
PREFIX foaf: <http://xmlns.com/foaf/0.1/>
SELECT ?friend ?name ?email ?picture WHERE {
  <https://uma.ex/#me> foaf:knows ?friend.
  ?friend foaf:name ?name.
  OPTIONAL { ?friend foaf:mbox ?email.
             ?friend foaf:img  ?picture. }
}
"""


def t(s, p, o):
    obj = o if isinstance(o, Term) else Term.iri(o)
    return Triple(Term.iri(s), Term.iri(p), obj)


class TestParseQuery:
    def test_friends_query_shape(self):
        q = parse_query(FRIENDS_QUERY)
        assert q.projection == ["friend", "name", "email", "picture"]
        assert len(q.required) == 2
        assert [len(g) for g in q.optional_groups] == [2]
        assert q.required[0] == TriplePattern(
            Term.iri("https://uma.ex/#me"),
            Term.iri(FOAF + "knows"),
            Term.var("friend"),
        )

    def test_minimal_query(self):
        q = parse_query("SELECT ?s WHERE { ?s ?p ?o }")
        assert q.projection == ["s"]
        assert len(q.required) == 1
        assert q.optional_groups == []

    def test_unbound_projection_rejected(self):
        with pytest.raises(QueryParseError, match="\\?x"):
            parse_query("SELECT ?x WHERE { ?a ?b ?c }")

    def test_duplicate_projection_rejected(self):
        with pytest.raises(QueryParseError):
            parse_query("SELECT ?a ?a WHERE { ?a ?b ?c }")

    @pytest.mark.parametrize("construct", ["FILTER", "UNION", "BIND", "LIMIT"])
    def test_unsupported_constructs_named(self, construct):
        text = "SELECT ?s WHERE { ?s ?p ?o. %s }" % construct
        with pytest.raises(UnsupportedFeatureError) as exc:
            parse_query(text)
        assert construct in str(exc.value)

    def test_nested_optional_rejected(self):
        text = (
            "SELECT ?s WHERE { ?s ?p ?o. "
            "OPTIONAL { ?s ?p ?x. OPTIONAL { ?x ?p ?y } } }"
        )
        with pytest.raises(UnsupportedFeatureError, match="OPTIONAL"):
            parse_query(text)

    def test_unknown_prefix(self):
        with pytest.raises(QueryParseError, match="wat"):
            parse_query("SELECT ?s WHERE { ?s wat:p ?o }")

    def test_predicate_object_list(self):
        q = parse_query("SELECT ?n ?m WHERE { ?x foaf:name ?n; foaf:mbox ?m }")
        assert len(q.required) == 2
        assert q.required[0].subject == q.required[1].subject


class TestTriplePatterns:
    def test_friends_query_has_four(self):
        assert len(triple_patterns(parse_query(FRIENDS_QUERY))) == 4

    def test_required_only(self):
        q = parse_query("SELECT ?s WHERE { ?s ?p ?o }")
        assert triple_patterns(q) == q.required

    def test_deduplicated(self):
        q = parse_query("SELECT ?s WHERE { ?s foaf:name ?n. OPTIONAL { ?s foaf:name ?n } }")
        assert len(triple_patterns(q)) == 1


class TestEvaluate:
    def test_empty_graph(self):
        q = parse_query(FRIENDS_QUERY)
        assert evaluate(q, Graph()) == []

    def test_left_join_hand_enumerated(self):
        # over {(a,p,b),(b,p,c)}: required (?s,p,?o), optional (?o,p,?x)
        p = "https://vocab.ex/p"
        g = Graph([t("https://a.ex/", p, "https://b.ex/"), t("https://b.ex/", p, "https://c.ex/")])
        q = Query(
            ["s", "o", "x"],
            [TriplePattern(Term.var("s"), Term.iri(p), Term.var("o"))],
            [[TriplePattern(Term.var("o"), Term.iri(p), Term.var("x"))]],
        )
        rows = evaluate(q, g)
        assert row_fingerprints(rows, q.projection) == {
            (
                ("iri", "https://a.ex/", None),
                ("iri", "https://b.ex/", None),
                ("iri", "https://c.ex/", None),
            ),
            (
                ("iri", "https://b.ex/", None),
                ("iri", "https://c.ex/", None),
                None,
            ),
        }

    def test_optional_group_all_or_nothing(self):
        name, mbox, img = FOAF + "name", FOAF + "mbox", FOAF + "img"
        g = Graph(
            [
                t("https://a.ex/#me", name, Term.literal("A")),
                t("https://a.ex/#me", mbox, "mailto:a@a.ex"),
                # no img triple: the whole optional group must stay unbound
            ]
        )
        q = Query(
            ["n", "e", "i"],
            [TriplePattern(Term.var("x"), Term.iri(name), Term.var("n"))],
            [[
                TriplePattern(Term.var("x"), Term.iri(mbox), Term.var("e")),
                TriplePattern(Term.var("x"), Term.iri(img), Term.var("i")),
            ]],
        )
        [row] = evaluate(q, g)
        assert row["n"] == Term.literal("A")
        assert row["e"] is None and row["i"] is None

    def test_soundness_of_required_patterns(self):
        rng = random.Random(11)
        for _ in range(25):
            bodies = random_web(rng, max_docs=4, max_triples=8)
            graph = Graph()
            for g in parse_web(bodies).values():
                graph.update(iter(g))
            q = random_bgp_query(rng, 4)
            for row in evaluate(q, graph):
                full = brute_force_evaluate(q, graph)
                fp = tuple(
                    (x.kind, x.value, x.language) if x is not None else None
                    for x in (row[v] for v in q.projection)
                )
                assert fp in full

    def test_completeness_against_enumeration_oracle(self):
        rng = random.Random(23)
        for _ in range(30):
            bodies = random_web(rng, max_docs=4, max_triples=7)
            graph = Graph()
            for g in parse_web(bodies).values():
                graph.update(iter(g))
            if len(graph) > 30:
                continue
            q = random_bgp_query(rng, 4)
            assert row_fingerprints(evaluate(q, graph), q.projection) == \
                brute_force_evaluate(q, graph)

    def test_bgp_monotone_under_graph_growth(self):
        rng = random.Random(31)
        for _ in range(20):
            bodies = random_web(rng, max_docs=4, max_triples=6)
            graphs = list(parse_web(bodies).values())
            small = Graph()
            for g in graphs[: max(1, len(graphs) // 2)]:
                small.update(iter(g))
            big = Graph(iter(small))
            for g in graphs:
                big.update(iter(g))
            q = random_bgp_query(rng, 4)
            assert row_fingerprints(evaluate(q, small), q.projection) <= \
                row_fingerprints(evaluate(q, big), q.projection)

    def test_unbound_optional_only_when_no_extension_exists(self):
        rng = random.Random(41)
        p = "https://vocab.ex/p"
        for _ in range(20):
            bodies = random_web(rng, max_docs=3, max_triples=6)
            graph = Graph()
            for g in parse_web(bodies).values():
                graph.update(iter(g))
            q = Query(
                ["a", "b"],
                [TriplePattern(Term.var("a"), Term.iri(p), Term.var("x"))],
                [[TriplePattern(Term.var("x"), Term.iri(p), Term.var("b"))]],
            )
            for row in evaluate(q, graph):
                if row["b"] is None:
                    # no compatible full extension may exist
                    for m in brute_force_evaluate(
                        Query(["a", "b"], q.required + q.optional_groups[0]), graph
                    ):
                        assert m[0] != ("iri", row["a"].value, None)

    def test_results_deduplicated_and_sorted(self):
        p = "https://vocab.ex/p"
        g = Graph(
            [
                t("https://b.ex/", p, "https://x.ex/"),
                t("https://a.ex/", p, "https://x.ex/"),
            ]
        )
        q = Query(["s"], [TriplePattern(Term.var("s"), Term.iri(p), Term.var("o"))])
        rows = evaluate(q, g)
        values = [r["s"].value for r in rows]
        assert values == sorted(values)
        # projecting away ?o collapses duplicates
        assert len(rows) == 2


class TestRendering:
    def test_tsv_null_is_empty_cell(self):
        q = parse_query(
            "SELECT ?s ?x WHERE { ?s ?p ?o. OPTIONAL { ?s <https://none.ex/p> ?x } }"
        )
        g = Graph([t("https://a.ex/", "https://p.ex/", Term.literal("v"))])
        rows = evaluate(q, g)
        tsv = render_tsv(rows, q.projection)
        assert tsv.splitlines()[1].endswith("\t")

    def test_json_null(self):
        import json

        q = parse_query(
            "SELECT ?s ?x WHERE { ?s ?p ?o. OPTIONAL { ?s <https://none.ex/p> ?x } }"
        )
        g = Graph([t("https://a.ex/", "https://p.ex/", Term.literal("v"))])
        data = json.loads(render_json(evaluate(q, g), q.projection))
        assert data[0]["x"] is None

    def test_table_has_headers(self):
        q = parse_query("SELECT ?s WHERE { ?s ?p ?o }")
        out = render_table([], q.projection)
        assert out.startswith("?s")
