"""Assumption synthesis: which assumption subsets prove every assertion.

From a parameterized analysis result, each assertion contributes the
disjunction of the rule conditions under which its check is proved; the
conjunction over all assertions describes exactly the subsets the analysis
certifies. The verdict is `solutions` when that condition is satisfiable,
`impossible` when every remaining subset is actively refuted at some
assertion, and `unknown` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .conditions import (
    And,
    Condition,
    FALSE,
    Or,
    TRUE,
    render,
    satisfying_sets,
    simplify,
    truth_table,
)
from .engine import AnalysisConfig, OracleReport, ParamAnalysisResult, analyze_baseline
from .frontend import Cfg, render_assert, restrict
from .intervals import ProofVerdict, proves


class SynthesisVerdict(Enum):
    SOLUTIONS = "solutions"
    UNKNOWN = "unknown"
    IMPOSSIBLE = "impossible"


@dataclass
class SynthesisOutcome:
    condition: Condition  # subsets under which every assertion is proved
    verdict: SynthesisVerdict
    solutions: tuple[int, ...]  # present when verdict is SOLUTIONS (capped)
    minimal: tuple[int, ...]  # minimum-cardinality solutions, ascending
    per_assertion: dict[int, tuple[tuple[Condition, ProofVerdict], ...]]
    truncated: bool
    width: int

    def to_json(self) -> dict:
        return {
            "syn_condition": render(self.condition),
            "verdict": self.verdict.value,
            "solutions": list(self.solutions),
            "minimal_solutions": list(self.minimal),
            "truncated": self.truncated,
            "per_assertion": {
                str(node): [
                    {"condition": render(cond), "verdict": verdict.value}
                    for cond, verdict in rows
                ]
                for node, rows in self.per_assertion.items()
            },
        }


def synthesize(
    result: ParamAnalysisResult, cfg: Cfg, solution_cap: int = 256
) -> SynthesisOutcome:
    """Intersect, across assertions, the conditions whose states prove them."""
    width = len(cfg.assumptions)
    proved_parts: list[Condition] = []
    refuted_parts: list[Condition] = []
    per_assertion: dict[int, tuple[tuple[Condition, ProofVerdict], ...]] = {}
    for node in cfg.assert_nodes():
        rows = tuple(
            (rule.condition, proves(rule.state, node.op.test))
            for rule in result.states[node.id].rules
        )
        per_assertion[node.id] = rows
        proved = [cond for cond, verdict in rows if verdict is ProofVerdict.PROVED]
        refuted = [cond for cond, verdict in rows if verdict is ProofVerdict.REFUTED]
        proved_parts.append(Or(tuple(proved)) if proved else FALSE)
        refuted_parts.append(Or(tuple(refuted)) if refuted else FALSE)

    condition = simplify(And(tuple(proved_parts))) if proved_parts else TRUE
    table = truth_table(condition, width)
    full = (1 << (1 << width)) - 1
    if table:
        verdict = SynthesisVerdict.SOLUTIONS
    else:
        refuted_anywhere = 0
        for part in refuted_parts:
            refuted_anywhere |= truth_table(part, width)
        # Impossible only when every subset hits a refuted assertion.
        verdict = (
            SynthesisVerdict.IMPOSSIBLE
            if refuted_anywhere == full
            else SynthesisVerdict.UNKNOWN
        )

    all_solutions = satisfying_sets(condition, width) if table else []
    min_card = min((s.bit_count() for s in all_solutions), default=0)
    minimal = tuple(s for s in all_solutions if s.bit_count() == min_card)
    return SynthesisOutcome(
        condition=condition,
        verdict=verdict,
        solutions=tuple(all_solutions[:solution_cap]),
        minimal=minimal,
        per_assertion=per_assertion,
        truncated=len(all_solutions) > solution_cap,
        width=width,
    )


def minimal_solutions(outcome: SynthesisOutcome) -> list[int]:
    """All minimum-cardinality solutions, ascending bit-field order."""
    if outcome.verdict is not SynthesisVerdict.SOLUTIONS:
        raise ValueError(f"no solutions to minimize: verdict is {outcome.verdict.value}")
    return list(outcome.minimal)


def verify_solutions(
    cfg: Cfg,
    outcome: SynthesisOutcome,
    config: AnalysisConfig | None = None,
    limit: int = 8,
    program_name: str = "<program>",
) -> OracleReport:
    """Re-analyze restricted variants and re-prove every assertion.

    Checks up to `limit` of the reported solutions with the plain analysis;
    any assertion not proved is a mismatch.
    """
    if outcome.verdict is not SynthesisVerdict.SOLUTIONS:
        raise ValueError("can only verify a solutions outcome")
    config = config or AnalysisConfig()
    chosen = outcome.solutions[:limit]
    report = OracleReport("synthesis", program_name, len(chosen), "reproof")
    for accepted in chosen:
        base = analyze_baseline(restrict(cfg, accepted), config)
        if not base.converged:
            report.skipped.append(accepted)
            continue
        for node in cfg.assert_nodes():
            verdict = proves(base.states[node.id], node.op.test)
            if verdict is not ProofVerdict.PROVED:
                report.mismatches.append(
                    {
                        "subset": accepted,
                        "node": node.id,
                        "assertion": render_assert(node.op.test),
                        "verdict": verdict.value,
                    }
                )
    return report
