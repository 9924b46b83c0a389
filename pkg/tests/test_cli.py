import json

import jsonschema

from paramax import cli
from paramax.cli import (
    DOCUMENT_SCHEMA,
    EXIT_IMPOSSIBLE,
    EXIT_MISMATCH,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    EXIT_UNKNOWN,
    EXIT_USAGE,
    main,
)
from paramax.engine import OracleReport

from conftest import CORPUS, CORPUS_DIR


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def corpus_path(name: str) -> str:
    return str(CORPUS_DIR / name)


def test_analyze_text_output(capsys):
    code, out, _ = run(capsys, "analyze", corpus_path("example1.pwl"))
    assert code == EXIT_OK
    assert "true -> x:[5,5]" in out
    assert "assumptions: a, b" in out
    assert "converged=true" in out


def test_analyze_json_matches_schema(capsys):
    code, out, _ = run(capsys, "analyze", corpus_path("example1.pwl"), "--format", "json")
    assert code == EXIT_OK
    document = json.loads(out)
    jsonschema.validate(document, DOCUMENT_SCHEMA)
    assert document["assumptions"] == ["a", "b"]
    node3 = document["nodes"][3]
    assert node3["rules"] == [
        {"condition": "true", "condition_sets": [0, 1, 2, 3], "state": {"x": [5, 5]}}
    ]


def test_all_corpus_documents_validate(capsys):
    for entry in CORPUS:
        argv = ["analyze", corpus_path(entry.name), "--format", "json"]
        if entry.config is not None and entry.config.widening_delay:
            argv += ["--widen", str(entry.config.widening_delay)]
        code, out, _ = run(capsys, *argv)
        document = json.loads(out)
        jsonschema.validate(document, DOCUMENT_SCHEMA)
        assert code in (EXIT_OK, EXIT_NOT_CONVERGED)


def test_text_and_json_agree_on_rules(capsys):
    _, text_out, _ = run(capsys, "analyze", corpus_path("mutex.pwl"))
    _, json_out, _ = run(capsys, "analyze", corpus_path("mutex.pwl"), "--format", "json")
    document = json.loads(json_out)
    for node in document["nodes"]:
        for rule in node["rules"]:
            state = rule["state"]
            if state == "bottom":
                rendered = "bottom"
            else:
                rendered = " ".join(
                    f"{var}:[{lo},{hi}]" for var, (lo, hi) in sorted(state.items())
                )
            assert f"{rule['condition']} -> {rendered}" in text_out


def test_analyze_nonconvergent_exit(capsys):
    code, out, _ = run(capsys, "analyze", corpus_path("loop_diverge.pwl"))
    assert code == EXIT_NOT_CONVERGED
    assert "converged=false" in out


def test_analyze_with_widening_converges(capsys):
    code, out, _ = run(capsys, "analyze", corpus_path("loop_diverge.pwl"), "--widen", "3")
    assert code == EXIT_OK
    assert "x:[0,+inf]" in out


def test_analyze_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.pwl"
    bad.write_text("x := ;")
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == EXIT_USAGE
    assert "line 1" in err


def test_analyze_missing_file(capsys):
    code, _, err = run(capsys, "analyze", "/nonexistent/nope.pwl")
    assert code == EXIT_USAGE
    assert err


def test_max_rules_flag(capsys):
    code, _, _ = run(capsys, "analyze", corpus_path("mutex.pwl"), "--max-rules", "1")
    assert code == EXIT_OK
    _, json_out, _ = run(
        capsys, "analyze", corpus_path("mutex.pwl"), "--max-rules", "1", "--format", "json"
    )
    document = json.loads(json_out)
    assert all(len(node["rules"]) <= 1 for node in document["nodes"])


def test_synthesize_solutions_exit(capsys):
    code, out, _ = run(capsys, "synthesize", corpus_path("synth_gate.pwl"))
    assert code == EXIT_OK
    assert "solutions: [{a}]" in out
    assert "minimal: [{a}]" in out
    assert "verification: ok" in out


def test_synthesize_no_asserts(capsys):
    code, out, _ = run(capsys, "synthesize", corpus_path("example1.pwl"))
    assert code == EXIT_OK
    assert "solutions: all subsets" in out


def test_synthesize_impossible_exit(capsys):
    code, out, _ = run(capsys, "synthesize", corpus_path("impossible.pwl"))
    assert code == EXIT_IMPOSSIBLE
    assert "verdict: impossible" in out


def test_synthesize_unknown_exit(capsys):
    code, out, _ = run(capsys, "synthesize", corpus_path("unknown_assert.pwl"))
    assert code == EXIT_UNKNOWN
    assert "verdict: unknown" in out


def test_synthesize_json_document(capsys):
    code, out, _ = run(
        capsys, "synthesize", corpus_path("branch_assume.pwl"), "--format", "json"
    )
    assert code == EXIT_OK
    document = json.loads(out)
    jsonschema.validate(document, DOCUMENT_SCHEMA)
    assert document["synthesis"]["verdict"] == "solutions"
    assert document["synthesis"]["solutions"] == [3]


def test_consistency_never_consistent(capsys):
    code, out, _ = run(capsys, "consistency", corpus_path("never_consistent.pwl"))
    assert code == EXIT_OK
    assert "a1: never-consistent" in out


def test_consistency_irrefutable(capsys):
    code, out, _ = run(capsys, "consistency", corpus_path("irrefutable.pwl"))
    assert code == EXIT_OK
    assert "a: in-every-consistent-set" in out


def test_consistency_phi_table(capsys):
    code, out, _ = run(
        capsys, "consistency", corpus_path("mutex.pwl"), "--phi-table"
    )
    assert code == EXIT_OK
    assert "phi-table:" in out
    assert "{lo, hi} -> {lo}" in out


def test_consistency_json(capsys):
    code, out, _ = run(
        capsys, "consistency", corpus_path("mutex.pwl"), "--format", "json"
    )
    document = json.loads(out)
    jsonschema.validate(document, DOCUMENT_SCHEMA)
    assert document["consistency"]["classification"] == {
        "lo": "in-every-consistent-set",
        "hi": "never-consistent",
    }


def test_check_oracle_passes(capsys):
    code, out, _ = run(
        capsys, "check-oracle", corpus_path("example1.pwl"), "--theorem1"
    )
    assert code == EXIT_OK
    assert "equivalence: pass" in out


def test_check_oracle_soundness_with_range(capsys):
    code, out, _ = run(
        capsys,
        "check-oracle",
        corpus_path("fig1.pwl"),
        "--soundness",
        "--input-range",
        "-2:13",
    )
    assert code == EXIT_OK
    assert "soundness: pass" in out


def test_check_oracle_runs_both_by_default(capsys):
    code, out, _ = run(capsys, "check-oracle", corpus_path("meet_narrow.pwl"))
    assert code == EXIT_OK
    assert "equivalence: pass" in out and "soundness: pass" in out


def test_check_oracle_mutant_exits_5(capsys, monkeypatch):
    # mismatching analyzer stand-in: report a fabricated inequality
    def fake_verify(cfg, config=None, program_name="x", **kw):
        report = OracleReport("equivalence", program_name, 4, "equality")
        report.mismatches.append({"subset": 1, "node": 3, "baseline": "x", "parameterized": "y"})
        return report

    monkeypatch.setattr(cli, "verify_equivalence", fake_verify)
    code, out, _ = run(
        capsys, "check-oracle", corpus_path("example1.pwl"), "--theorem1"
    )
    assert code == EXIT_MISMATCH
    assert "FAIL" in out


def test_dump_cfg(capsys):
    code, out, _ = run(capsys, "dump-cfg", corpus_path("example1.pwl"))
    assert code == EXIT_OK
    assert out.splitlines()[0] == "id=0 kind=entry succs=[1]"
    assert out.splitlines()[-1] == "id=5 kind=exit succs=[]"


def test_usage_error_exit():
    assert main(["analyze"]) == EXIT_USAGE
    assert main(["frobnicate", "x.pwl"]) == EXIT_USAGE


def test_width_cap_env_var(capsys, monkeypatch):
    monkeypatch.setenv("PARAMAX_WIDTH_CAP", "4")
    code, _, err = run(capsys, "analyze", corpus_path("chain8.pwl"))
    assert code == EXIT_USAGE
    assert "width cap" in err


def test_deterministic_output(capsys):
    _, first, _ = run(capsys, "analyze", corpus_path("chain8.pwl"), "--format", "json")
    _, second, _ = run(capsys, "analyze", corpus_path("chain8.pwl"), "--format", "json")
    assert first == second
