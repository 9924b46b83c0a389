import pytest

from paramax.conditions import render, satisfying_sets
from paramax.engine import AnalysisConfig, analyze_baseline, analyze_param
from paramax.frontend import parse_cfg, restrict
from paramax.intervals import ProofVerdict, proves
from paramax.synthesis import (
    SynthesisVerdict,
    minimal_solutions,
    synthesize,
    verify_solutions,
)

from conftest import CORPUS, corpus_cfg


def outcome_for(source_or_name: str, config: AnalysisConfig | None = None):
    if source_or_name.endswith(".pwl"):
        cfg = corpus_cfg(source_or_name)
    else:
        cfg = parse_cfg(source_or_name)
    result = analyze_param(cfg, config)
    assert result.converged
    return cfg, result, synthesize(result, cfg)


def brute_force_solutions(cfg, config=None):
    width = len(cfg.assumptions)
    out = []
    for accepted in range(1 << width):
        base = analyze_baseline(restrict(cfg, accepted), config)
        assert base.converged
        if all(
            proves(base.states[n.id], n.op.test) is ProofVerdict.PROVED
            for n in cfg.assert_nodes()
        ):
            out.append(accepted)
    return out


def test_gate_assumption_is_the_only_solution():
    cfg, _, outcome = outcome_for("synth_gate.pwl")
    assert outcome.verdict is SynthesisVerdict.SOLUTIONS
    assert render(outcome.condition) == "a"
    assert list(outcome.solutions) == [0b1]
    assert minimal_solutions(outcome) == [0b1]
    report = verify_solutions(cfg, outcome)
    assert report.passed


def test_no_asserts_every_subset_works():
    _, _, outcome = outcome_for("example1.pwl")
    assert outcome.verdict is SynthesisVerdict.SOLUTIONS
    assert list(outcome.solutions) == [0, 1, 2, 3]
    assert minimal_solutions(outcome) == [0]


def test_impossible_program():
    _, _, outcome = outcome_for("impossible.pwl")
    assert outcome.verdict is SynthesisVerdict.IMPOSSIBLE
    assert outcome.solutions == ()
    with pytest.raises(ValueError):
        minimal_solutions(outcome)


def test_unknown_program():
    _, _, outcome = outcome_for("unknown_assert.pwl")
    assert outcome.verdict is SynthesisVerdict.UNKNOWN


def test_conjunction_of_assumptions_needed():
    _, _, outcome = outcome_for("branch_assume.pwl")
    assert outcome.verdict is SynthesisVerdict.SOLUTIONS
    assert list(outcome.solutions) == [0b11]
    assert minimal_solutions(outcome) == [0b11]


def test_relational_assert_needs_both_bounds():
    _, _, outcome = outcome_for("bounds_pair.pwl")
    assert list(outcome.solutions) == [0b11]


def test_chain_minimal_solutions():
    _, _, outcome = outcome_for("chain8.pwl")
    # any assumption forcing x >= 4 suffices on its own
    assert minimal_solutions(outcome) == [1 << i for i in range(3, 8)]


def test_per_assertion_detail():
    cfg, _, outcome = outcome_for("synth_gate.pwl")
    (node_id,) = outcome.per_assertion.keys()
    rows = dict(
        (render(cond), verdict) for cond, verdict in outcome.per_assertion[node_id]
    )
    assert rows == {"a": ProofVerdict.PROVED, "!a": ProofVerdict.UNKNOWN}


def test_minimal_rejects_other_verdicts():
    _, _, outcome = outcome_for("impossible.pwl")
    with pytest.raises(ValueError):
        minimal_solutions(outcome)


def test_solution_cap_truncates():
    cfg = corpus_cfg("chain8.pwl")
    result = analyze_param(cfg)
    outcome = synthesize(result, cfg, solution_cap=10)
    assert outcome.truncated
    assert len(outcome.solutions) == 10
    # minimal solutions still cover the whole space
    assert minimal_solutions(outcome) == [1 << i for i in range(3, 8)]


def test_exact_completeness_against_brute_force():
    for entry in CORPUS:
        if not entry.kleene:
            continue
        cfg = corpus_cfg(entry.name)
        if not cfg.assert_nodes() or len(cfg.assumptions) > 8:
            continue
        result = analyze_param(cfg)
        outcome = synthesize(result, cfg)
        expected = brute_force_solutions(cfg)
        assert satisfying_sets(outcome.condition, len(cfg.assumptions)) == expected


def test_verified_solutions_on_corpus():
    for entry in CORPUS:
        if not entry.kleene:
            continue
        cfg = corpus_cfg(entry.name)
        if not cfg.assert_nodes():
            continue
        result = analyze_param(cfg)
        outcome = synthesize(result, cfg)
        if outcome.verdict is not SynthesisVerdict.SOLUTIONS:
            continue
        report = verify_solutions(cfg, outcome, limit=len(outcome.solutions))
        assert report.passed, report.mismatches


def test_budget_never_adds_solutions():
    for entry in CORPUS:
        if not entry.kleene:
            continue
        cfg = corpus_cfg(entry.name)
        if not cfg.assert_nodes() or not cfg.assumptions:
            continue
        exact = synthesize(analyze_param(cfg), cfg)
        width = len(cfg.assumptions)
        exact_sets = set(satisfying_sets(exact.condition, width))
        for budget in (1, 2):
            config = AnalysisConfig(merge_budget=budget)
            budgeted = synthesize(analyze_param(cfg, config), cfg)
            budget_sets = set(satisfying_sets(budgeted.condition, width))
            assert budget_sets <= exact_sets
