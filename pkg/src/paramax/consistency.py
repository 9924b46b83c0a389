"""Consistency bounds on assumption sets.

An assumption set is consistent when re-analyzing under it neither refutes
any member nor admits any outside assumption. Refutation is read off the
parameterized result: an assumption is refuted under a subset when the rule
applying to that subset at its assume node leaves no feasible state. The
induced operator (subset -> surviving assumptions) is anti-monotone, so its
square is monotone; iterating the square from the empty set yields a core
contained in every consistent set, and its image an envelope containing
them all. A brute-force fixpoint enumeration serves as the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .conditions import Condition, FALSE, Or, simplify, truth_table
from .engine import ParamAnalysisResult
from .frontend import Assume, AssumptionId, Cfg
from .intervals import AssumeState, feasible


class Membership(Enum):
    IN_EVERY = "in-every-consistent-set"
    IN_SOME = "in-some-consistent-set"
    NEVER = "never-consistent"


@dataclass
class ConsistencyReport:
    core: int  # assumptions present in every consistent set
    envelope: int  # assumptions present in at least one consistent set
    classification: dict[str, Membership]  # by label, in assumption order
    phi_table: dict[int, int] | None
    fixpoints: tuple[int, ...] | None
    approximate: bool
    width: int

    def to_json(self) -> dict:
        out = {
            "core": self.core,
            "envelope": self.envelope,
            "classification": {k: v.value for k, v in self.classification.items()},
            "approximate": self.approximate,
        }
        if self.phi_table is not None:
            out["phi_table"] = {str(k): v for k, v in self.phi_table.items()}
        if self.fixpoints is not None:
            out["fixpoints"] = list(self.fixpoints)
        return out


def refuting_condition(
    result: ParamAnalysisResult, cfg: Cfg, assumption: AssumptionId
) -> Condition:
    """Disjunction of rule conditions at the assume node with no feasible state."""
    node = cfg.nodes[assumption.node_id]
    if not isinstance(node.op, Assume):
        raise ValueError(f"node {assumption.node_id} is not an assume node")
    pi = AssumeState.from_constraint(node.op.constraint)
    conds = [
        rule.condition
        for rule in result.states[node.id].rules
        if not feasible(rule.state, pi)
    ]
    if not conds:
        return FALSE
    return simplify(Or(tuple(conds)) if len(conds) > 1 else conds[0])


def _refuting_tables(result: ParamAnalysisResult, cfg: Cfg) -> list[int]:
    width = len(cfg.assumptions)
    return [
        truth_table(refuting_condition(result, cfg, a), width) for a in cfg.assumptions
    ]


def unrefuted(result: ParamAnalysisResult, cfg: Cfg, accepted: int) -> int:
    """Assumptions the analysis under `accepted` does not refute."""
    out = 0
    for aid, table in zip(cfg.assumptions, _refuting_tables(result, cfg)):
        if not (table >> accepted) & 1:
            out |= 1 << aid.index
    return out


def _phi(tables: list[int], assumptions, accepted: int) -> int:
    out = 0
    for aid, table in zip(assumptions, tables):
        if not (table >> accepted) & 1:
            out |= 1 << aid.index
    return out


def consistency_bounds(result: ParamAnalysisResult, cfg: Cfg) -> tuple[int, int]:
    """(core, envelope): bounds sandwiching every consistent assumption set.

    The core is the least fixpoint of the squared operator, iterated from
    the empty set; the envelope is its image. The dual iteration from the
    full set must land on the same pair; with an exact analysis this is
    asserted, with a merge budget the operator can lose anti-monotonicity,
    so the check is skipped and the report flagged approximate instead.
    """
    width = len(cfg.assumptions)
    tables = _refuting_tables(result, cfg)
    assumptions = cfg.assumptions

    def phi2(accepted: int) -> int:
        return _phi(tables, assumptions, _phi(tables, assumptions, accepted))

    core = 0
    for _ in range(width + 2):
        nxt = phi2(core)
        if nxt == core:
            break
        core = nxt
    envelope = _phi(tables, assumptions, core)

    if result.config.merge_budget is None:
        upper = (1 << width) - 1
        for _ in range(width + 2):
            nxt = phi2(upper)
            if nxt == upper:
                break
            upper = nxt
        if upper != envelope:
            raise AssertionError(
                f"fixpoint iterations disagree: envelope {envelope:#x} vs {upper:#x}"
            )
    return core, envelope


def brute_force_fixpoints(
    result: ParamAnalysisResult, cfg: Cfg, max_assumptions: int = 12
) -> list[int]:
    """All subsets the operator maps to themselves; the oracle for bounds."""
    width = len(cfg.assumptions)
    if width > max_assumptions:
        raise ValueError(f"refusing to enumerate 2**{width} subsets (cap {max_assumptions})")
    tables = _refuting_tables(result, cfg)
    return [
        a for a in range(1 << width) if _phi(tables, cfg.assumptions, a) == a
    ]


def consistency_report(
    result: ParamAnalysisResult,
    cfg: Cfg,
    include_phi_table: bool | None = None,
    include_fixpoints: bool | None = None,
) -> ConsistencyReport:
    """Classify each assumption against the consistency bounds.

    The full operator table and the brute-forced fixpoints are attached for
    small assumption counts (or on request).
    """
    width = len(cfg.assumptions)
    core, envelope = consistency_bounds(result, cfg)
    classification = {}
    for aid in cfg.assumptions:
        bit = 1 << aid.index
        if core & bit:
            classification[aid.label] = Membership.IN_EVERY
        elif envelope & bit:
            classification[aid.label] = Membership.IN_SOME
        else:
            classification[aid.label] = Membership.NEVER

    if include_phi_table is None:
        include_phi_table = width <= 6
    if include_fixpoints is None:
        include_fixpoints = width <= 12
    phi_table = None
    if include_phi_table:
        tables = _refuting_tables(result, cfg)
        phi_table = {
            a: _phi(tables, cfg.assumptions, a) for a in range(1 << width)
        }
    fixpoints = (
        tuple(brute_force_fixpoints(result, cfg)) if include_fixpoints else None
    )
    return ConsistencyReport(
        core=core,
        envelope=envelope,
        classification=classification,
        phi_table=phi_table,
        fixpoints=fixpoints,
        approximate=result.config.merge_budget is not None,
        width=width,
    )
