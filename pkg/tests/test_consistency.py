import random

import pytest

from paramax.conditions import render
from paramax.consistency import (
    Membership,
    brute_force_fixpoints,
    consistency_bounds,
    consistency_report,
    refuting_condition,
    unrefuted,
)
from paramax.engine import AnalysisConfig, analyze_param
from paramax.frontend import parse_cfg

from conftest import CORPUS, corpus_cfg


def analyzed(name_or_source: str):
    cfg = (
        corpus_cfg(name_or_source)
        if name_or_source.endswith(".pwl")
        else parse_cfg(name_or_source)
    )
    result = analyze_param(cfg)
    assert result.converged
    return cfg, result


def test_refuting_condition_always():
    cfg, result = analyzed("never_consistent.pwl")
    cond = refuting_condition(result, cfg, cfg.assumptions[0])
    assert render(cond) == "true"


def test_refuting_condition_never():
    cfg, result = analyzed("irrefutable.pwl")
    cond = refuting_condition(result, cfg, cfg.assumptions[0])
    assert render(cond) == "false"


def test_refuting_condition_includes_bottom_rules():
    # accepting the assumption against x = 0 leaves the bottom state,
    # whose condition must appear in the refuting disjunction
    cfg, result = analyzed("x := 0; assume a: x >= 1;")
    cond = refuting_condition(result, cfg, cfg.assumptions[0])
    assert render(cond) != "false"


def test_refuting_condition_rejects_non_assume_nodes():
    cfg, result = analyzed("never_consistent.pwl")
    from paramax.frontend import AssumptionId

    fake = AssumptionId(0, "a1", cfg.exit)
    with pytest.raises(ValueError, match="not an assume node"):
        refuting_condition(result, cfg, fake)


def test_unrefuted_never_consistent():
    cfg, result = analyzed("never_consistent.pwl")
    assert unrefuted(result, cfg, 0b0) == 0
    assert unrefuted(result, cfg, 0b1) == 0


def test_unrefuted_irrefutable():
    cfg, result = analyzed("irrefutable.pwl")
    assert unrefuted(result, cfg, 0b0) == 0b1
    assert unrefuted(result, cfg, 0b1) == 0b1


def test_bounds_never_consistent():
    cfg, result = analyzed("never_consistent.pwl")
    core, envelope = consistency_bounds(result, cfg)
    assert (core, envelope) == (0, 0)
    assert brute_force_fixpoints(result, cfg) == [0]


def test_bounds_irrefutable():
    cfg, result = analyzed("irrefutable.pwl")
    core, envelope = consistency_bounds(result, cfg)
    assert (core, envelope) == (0b1, 0b1)
    assert brute_force_fixpoints(result, cfg) == [0b1]


def test_bounds_no_assumptions():
    cfg, result = analyzed("straightline.pwl")
    assert consistency_bounds(result, cfg) == (0, 0)
    assert brute_force_fixpoints(result, cfg) == [0]


def test_mutex_classification():
    cfg, result = analyzed("mutex.pwl")
    report = consistency_report(result, cfg)
    assert report.classification["lo"] is Membership.IN_EVERY
    assert report.classification["hi"] is Membership.NEVER
    assert report.fixpoints == (0b01,)  # only {lo} survives its own analysis
    # accepting lo refutes hi; not accepting lo leaves hi alive
    assert unrefuted(result, cfg, 0b01) == 0b01
    assert unrefuted(result, cfg, 0b00) == 0b11


def test_report_fixture_classifies_never_consistent():
    cfg, result = analyzed("never_consistent.pwl")
    report = consistency_report(result, cfg)
    assert report.classification == {"a1": Membership.NEVER}
    assert not report.approximate


def test_phi_table_inclusion():
    cfg, result = analyzed("mutex.pwl")
    report = consistency_report(result, cfg)
    assert report.phi_table == {0b00: 0b11, 0b01: 0b01, 0b10: 0b11, 0b11: 0b01}
    off = consistency_report(result, cfg, include_phi_table=False)
    assert off.phi_table is None


def test_approximate_flag_under_budget():
    cfg = corpus_cfg("mutex.pwl")
    result = analyze_param(cfg, AnalysisConfig(merge_budget=1))
    report = consistency_report(result, cfg)
    assert report.approximate


def corpus_consistency_cases():
    for entry in CORPUS:
        if not entry.kleene:
            continue
        cfg = corpus_cfg(entry.name)
        if not cfg.assumptions or len(cfg.assumptions) > 10:
            continue
        result = analyze_param(cfg)
        yield entry.name, cfg, result


def test_anti_monotonicity_sampled():
    rng = random.Random(31337)
    for name, cfg, result in corpus_consistency_cases():
        width = len(cfg.assumptions)
        for _ in range(100):
            small = rng.randrange(1 << width)
            big = small | rng.randrange(1 << width)
            assert (
                unrefuted(result, cfg, big) & unrefuted(result, cfg, small)
            ) == unrefuted(result, cfg, big), name


def test_sandwich_on_corpus():
    for name, cfg, result in corpus_consistency_cases():
        core, envelope = consistency_bounds(result, cfg)
        assert core & envelope == core, name  # core within envelope
        fixpoints = brute_force_fixpoints(result, cfg)
        for fixed in fixpoints:
            assert core & fixed == core, name
            assert fixed & envelope == fixed, name
        # the pair alternates under the operator
        assert unrefuted(result, cfg, core) == envelope, name
        assert unrefuted(result, cfg, envelope) == core, name


def test_classification_matches_brute_force():
    for name, cfg, result in corpus_consistency_cases():
        report = consistency_report(result, cfg)
        fixpoints = brute_force_fixpoints(result, cfg)
        for aid in cfg.assumptions:
            bit = 1 << aid.index
            label = aid.label
            if report.classification[label] is Membership.IN_EVERY:
                assert all(f & bit for f in fixpoints), (name, label)
            if report.classification[label] is Membership.NEVER:
                assert not any(f & bit for f in fixpoints), (name, label)
