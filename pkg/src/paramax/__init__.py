"""Interval static analysis parameterized by labeled program assumptions.

The analyzer runs once per program and produces, at every CFG node, a small
set of rules mapping assumption subsets to interval states: asking "what
would the analysis say under these assumptions?" becomes a table lookup
instead of a re-analysis. On top of that sit two applications, assumption
synthesis (which subsets prove all assertions) and consistency bounds
(which subsets survive their own analysis), plus brute-force oracles that
make the correctness claims executable.
"""

from .conditions import (
    And,
    Atom,
    Condition,
    FALSE,
    Not,
    Or,
    TRUE,
    equivalent,
    eval_condition,
    format_subset,
    implies,
    parse_condition,
    render,
    sat,
    satisfying_sets,
    simplify,
)
from .consistency import (
    ConsistencyReport,
    Membership,
    brute_force_fixpoints,
    consistency_bounds,
    consistency_report,
    refuting_condition,
    unrefuted,
)
from .engine import (
    AnalysisConfig,
    AnalysisResult,
    CollectingResult,
    OracleReport,
    ParamAnalysisResult,
    WidthCapError,
    analyze_baseline,
    analyze_param,
    run_collecting,
    verify_equivalence,
    verify_soundness,
)
from .frontend import (
    AssumptionId,
    AtomicConstraint,
    Cfg,
    CfgNode,
    ParseError,
    Program,
    build_cfg,
    dump_cfg,
    parse,
    parse_cfg,
    predecessors,
    restrict,
)
from .intervals import (
    BOTTOM,
    AssumeState,
    Interval,
    IntervalEnv,
    NEG_INF,
    POS_INF,
    ProofVerdict,
    enforce,
    feasible,
    gamma_contains,
    join,
    leq,
    meet,
    proves,
    transfer,
    widen,
)
from .param import (
    ParamState,
    PartitionError,
    Rule,
    approx_merge,
    exact_merge_step,
    join_states,
    leq_param,
    merge_loss,
    normalize,
    redundancy_elim_step,
    reduce_to_budget,
    split,
    widen_param,
)
from .synthesis import (
    SynthesisOutcome,
    SynthesisVerdict,
    minimal_solutions,
    synthesize,
    verify_solutions,
)

__version__ = "0.1.0"
