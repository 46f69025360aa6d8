import json

import pytest

from linkquery.cli import main
from linkquery.fixtures import demo_manifest, demo_policy, demo_query, demo_structures

SEED = "https://uma.ex/#me"


def base_flags():
    return [
        "--query", str(demo_query()),
        "--seed", SEED,
        "--fixtures", str(demo_manifest()),
    ]


def guided_flags():
    return base_flags() + [
        "--mode", "guided",
        "--structures", str(demo_structures()),
        "--policy", str(demo_policy()),
    ]


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRun:
    def test_guided_run(self, capsys):
        code, out, _ = run_cli(capsys, ["run"] + guided_flags())
        assert code == 0
        assert "documents fetched: 4" in out
        assert out.count("<https://ann.ex/#me>") == 1
        assert out.count("<https://bob.ex/#me>") == 1
        assert "Mickey" not in out

    def test_unguided_c_match_run(self, capsys):
        code, out, _ = run_cli(
            capsys, ["run"] + base_flags() + ["--mode", "unguided", "--semantics", "c-match"]
        )
        assert code == 0
        assert "documents fetched: 7" in out
        assert out.count("NULL") == 2  # one row with unbound email and picture

    def test_c_none_uses_seed_document_only(self, capsys):
        code, out, _ = run_cli(
            capsys, ["run"] + base_flags() + ["--semantics", "c-none"]
        )
        assert code == 0
        assert "documents fetched: 1" in out

    def test_json_report_round_trips(self, capsys):
        code, out, _ = run_cli(capsys, ["run"] + guided_flags() + ["--format", "json"])
        assert code == 0
        assert json.dumps(json.loads(out), indent=2, sort_keys=True) + "\n" == out
        report = json.loads(out)
        assert report["documents_fetched"] == 4
        assert len(report["solutions"]) == 2

    def test_byte_identical_across_invocations(self, capsys):
        _, first, _ = run_cli(capsys, ["run"] + guided_flags())
        _, second, _ = run_cli(capsys, ["run"] + guided_flags())
        assert first == second

    def test_missing_required_flag_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, ["run", "--seed", SEED])
        assert code == 1
        assert "usage" in err.lower()

    def test_fixtures_and_live_are_exclusive(self, capsys):
        code, _, err = run_cli(
            capsys, ["run"] + base_flags() + ["--live"]
        )
        assert code == 1

    def test_guided_requires_guidance_files(self, capsys):
        code, _, err = run_cli(capsys, ["run"] + base_flags() + ["--mode", "guided"])
        assert code == 1

    def test_traversal_cap_exit_code(self, capsys):
        code, _, err = run_cli(
            capsys,
            ["run"] + base_flags() + ["--semantics", "c-all", "--max-docs", "2"],
        )
        assert code == 2

    def test_bad_query_file_exit_code(self, capsys, tmp_path):
        bad = tmp_path / "bad.rq"
        bad.write_text("SELECT ?s WHERE { ?s ?p ?o. FILTER }")
        code, _, err = run_cli(
            capsys,
            ["run", "--query", str(bad), "--seed", SEED, "--fixtures", str(demo_manifest())],
        )
        assert code == 3
        assert "FILTER" in err

    def test_tsv_format(self, capsys):
        code, out, _ = run_cli(capsys, ["run"] + guided_flags() + ["--format", "tsv"])
        assert code == 0
        header = out.splitlines()[0]
        assert header == "?friend\t?name\t?email\t?picture"


class TestCompare:
    def test_demo_comparison(self, capsys):
        code, out, _ = run_cli(capsys, ["compare"] + base_flags() + [
            "--structures", str(demo_structures()),
            "--policy", str(demo_policy()),
        ])
        assert code == 0
        assert "unguided (c-match): 5 rows / 7 docs; guided: 2 rows / 4 docs" in out
        assert "rows removed: 3" in out
        assert "ann.ex requests: 4 -> 2" in out
        # the demo registry prunes the encyclopedia document, so the Mickey
        # row disappears even before the policy filters triples
        assert "structure pruning alone vs c-all: results changed" in out

    def test_permissive_guidance_no_row_difference(self, capsys, tmp_path):
        structures = tmp_path / "structures.json"
        structures.write_text('{"default": "permissive", "rules": []}')
        policy = tmp_path / "policy.json"
        policy.write_text('{"default": "allow", "rules": []}')
        code, out, _ = run_cli(
            capsys,
            ["compare"] + base_flags() + [
                "--semantics", "c-all",
                "--structures", str(structures),
                "--policy", str(policy),
            ],
        )
        assert code == 0
        assert "rows removed: 0" in out
        assert "structure pruning alone vs c-all: results unchanged" in out


class TestExplain:
    def test_seed_document(self, capsys):
        code, out, _ = run_cli(
            capsys, ["explain", "--doc", "https://uma.ex/"] + guided_flags()
        )
        assert code == 0
        assert "seed" in out

    def test_skipped_encyclopedia_document(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["explain", "--doc", "http://dbpedia.org/resource/Mickey_Mouse"]
            + guided_flags(),
        )
        assert code == 0
        assert "not fetched" in out
        assert "denied by policy rule #1" in out
        assert "https://bob.ex/" in out

    def test_admission_chain(self, capsys):
        code, out, _ = run_cli(
            capsys, ["explain", "--doc", "https://ann.ex/about/"] + guided_flags()
        )
        assert code == 0
        assert "linked from https://ann.ex/" in out
        assert "https://ann.ex/: linked from https://uma.ex/" in out

    def test_row_support(self, capsys):
        code, out, _ = run_cli(
            capsys, ["explain", "--row", "1"] + guided_flags()
        )
        assert code == 0
        # first guided row is Ann; contact details all come from her
        # dedicated details document
        assert "?name=\"Ann\"" in out
        assert out.count("from https://ann.ex/about/") == 3

    def test_unknown_doc(self, capsys):
        code, _, err = run_cli(
            capsys, ["explain", "--doc", "https://stranger.ex/"] + guided_flags()
        )
        assert code == 1

    def test_unknown_row(self, capsys):
        code, _, err = run_cli(capsys, ["explain", "--row", "99"] + guided_flags())
        assert code == 1

    def test_row_and_doc_mutually_exclusive(self, capsys):
        code, _, err = run_cli(
            capsys, ["explain", "--row", "1", "--doc", "https://uma.ex/"] + guided_flags()
        )
        assert code == 1
