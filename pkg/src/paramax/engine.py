"""Fixpoint engines and executable correctness checks.

`analyze_baseline` runs the plain interval analysis of one program variant;
`analyze_param` runs the one-pass analysis whose per-node result maps every
assumption subset to the interval state that the plain analysis would
compute for the matching restricted program. `run_collecting` enumerates
concrete executions over finite input ranges. The two `verify_*` functions
exhaustively check the per-subset equality and the concretization-membership
soundness claim against those oracles.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .conditions import WIDTH_CAP
from .frontend import (
    Assign,
    Assume,
    Cfg,
    GuardFilter,
    Input,
    Rel,
    restrict,
)
from .intervals import (
    BOTTOM,
    AssumeState,
    IntervalEnv,
    enforce,
    gamma_contains,
    transfer,
)
from .param import ParamState, join_states, lift_transfer, reduce_to_budget, split, widen_param


class WidthCapError(ValueError):
    """The program has more assumptions than the configured condition width."""


@dataclass
class AnalysisConfig:
    max_iterations: int = 1000  # node evaluations before giving up
    widening_delay: int | None = None  # widen loop heads from this visit on; None = off
    merge_budget: int | None = None  # max rules kept per node; None = exact
    condition_width_cap: int = WIDTH_CAP

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.widening_delay is not None and self.widening_delay < 1:
            raise ValueError("widening delay must be at least 1")
        if self.merge_budget is not None and self.merge_budget < 1:
            raise ValueError("merge budget must be at least 1")
        if not 0 <= self.condition_width_cap <= WIDTH_CAP:
            raise ValueError(f"condition width cap must be within 0..{WIDTH_CAP}")

    def to_json(self) -> dict:
        return {
            "max_iterations": self.max_iterations,
            "widening": "off" if self.widening_delay is None else self.widening_delay,
            "merge_budget": self.merge_budget,
            "condition_width_cap": self.condition_width_cap,
        }


@dataclass
class AnalysisResult:
    states: list[IntervalEnv]  # indexed by node id; the state after each node
    iterations: int
    converged: bool
    config: AnalysisConfig


@dataclass
class ParamAnalysisResult:
    states: list[ParamState]
    iterations: int
    converged: bool
    config: AnalysisConfig


ConcreteState = Mapping[str, int]


@dataclass
class CollectingResult:
    states: list[list[dict[str, int]]]  # per node, deterministic order
    truncated: bool


@dataclass
class OracleReport:
    """Outcome of one exhaustive verification sweep."""

    check: str
    program: str
    subsets_checked: int
    mode: str
    mismatches: list[dict] = field(default_factory=list)
    skipped: list[int] = field(default_factory=list)
    partial: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {
            "theorem": self.check,
            "program": self.program,
            "subsets_checked": self.subsets_checked,
            "mode": self.mode,
            "mismatches": self.mismatches,
            "skipped": self.skipped,
            "partial": self.partial,
        }


def _rpo_rank(cfg: Cfg) -> dict[int, int]:
    seen: set[int] = set()
    postorder: list[int] = []
    stack: list[tuple[int, int]] = [(cfg.entry, 0)]
    seen.add(cfg.entry)
    while stack:
        node, i = stack.pop()
        succs = cfg.successors(node)
        if i < len(succs):
            stack.append((node, i + 1))
            nxt = succs[i]
            if nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, 0))
        else:
            postorder.append(node)
    order = list(reversed(postorder))
    return {v: k for k, v in enumerate(order)}


def _solve(
    cfg: Cfg,
    config: AnalysisConfig,
    seed,
    bottom,
    evaluate: Callable,
    equals: Callable,
    widen_fn: Callable,
    post: Callable,
    observer: Callable | None,
):
    """Worklist chaotic iteration from bottom, entry pinned to its seed."""
    rank = _rpo_rank(cfg)
    states = {v.id: bottom for v in cfg.nodes}
    states[cfg.entry] = seed
    pending = [(rank[v.id], v.id) for v in cfg.nodes if v.id != cfg.entry]
    heapq.heapify(pending)
    queued = {v for _, v in pending}
    visits = {v.id: 0 for v in cfg.nodes}
    evals = 0
    converged = True
    while pending:
        if evals >= config.max_iterations:
            converged = False
            break
        _, v = heapq.heappop(pending)
        queued.discard(v)
        evals += 1
        visits[v] += 1
        new = evaluate(v, states)
        node = cfg.nodes[v]
        if (
            config.widening_delay is not None
            and node.loop_head
            and visits[v] >= config.widening_delay
        ):
            new = widen_fn(states[v], new)
        new = post(new)
        if not equals(states[v], new):
            if observer is not None:
                observer(v, states[v], new)
            states[v] = new
            for w in cfg.successors(v):
                if w != cfg.entry and w not in queued:
                    queued.add(w)
                    heapq.heappush(pending, (rank[w], w))
    return [states[v.id] for v in cfg.nodes], evals, converged


def _assume_states(cfg: Cfg) -> dict[int, AssumeState]:
    return {
        n.id: AssumeState.from_constraint(n.op.constraint)
        for n in cfg.nodes
        if isinstance(n.op, Assume)
    }


def analyze_baseline(
    cfg: Cfg, config: AnalysisConfig | None = None, observer: Callable | None = None
) -> AnalysisResult:
    """Plain interval analysis: Kleene iteration of the node constraints."""
    config = config or AnalysisConfig()
    pis = _assume_states(cfg)
    top = IntervalEnv.top(cfg.variables)

    def apply_node(v: int, env: IntervalEnv) -> IntervalEnv:
        node = cfg.nodes[v]
        if isinstance(node.op, Assume):
            return enforce(env, pis[v])
        return transfer(node, env)

    def evaluate(v: int, states) -> IntervalEnv:
        acc = BOTTOM
        for p in cfg.predecessors(v):
            acc = acc.join(apply_node(v, states[p]))
        return acc

    states, evals, converged = _solve(
        cfg,
        config,
        seed=top,
        bottom=BOTTOM,
        evaluate=evaluate,
        equals=lambda a, b: a == b,
        widen_fn=lambda old, new: old.widen(new),
        post=lambda s: s,
        observer=observer,
    )
    return AnalysisResult(states, evals, converged, config)


def analyze_param(
    cfg: Cfg, config: AnalysisConfig | None = None, observer: Callable | None = None
) -> ParamAnalysisResult:
    """One-pass analysis over rule states covering every assumption subset."""
    config = config or AnalysisConfig()
    width = len(cfg.assumptions)
    if width > config.condition_width_cap:
        raise WidthCapError(
            f"program has {width} assumptions; configured width cap is {config.condition_width_cap}"
        )
    pis = _assume_states(cfg)
    seed = ParamState.of_state(IntervalEnv.top(cfg.variables), width)
    bottom = ParamState.bottom(width)

    def apply_node(v: int, state: ParamState) -> ParamState:
        node = cfg.nodes[v]
        if isinstance(node.op, Assume):
            return split(state, node.op.assumption, pis[v])
        return lift_transfer(state, lambda env: transfer(node, env))

    def evaluate(v: int, states) -> ParamState:
        return join_states([apply_node(v, states[p]) for p in cfg.predecessors(v)])

    def post(state: ParamState) -> ParamState:
        if config.merge_budget is not None:
            return reduce_to_budget(state, config.merge_budget)
        return state

    states, evals, converged = _solve(
        cfg,
        config,
        seed=seed,
        bottom=bottom,
        evaluate=evaluate,
        equals=lambda a, b: a.semantic_items() == b.semantic_items(),
        widen_fn=widen_param,
        post=post,
        observer=observer,
    )
    return ParamAnalysisResult(states, evals, converged, config)


def _concrete_guard(test, values: Mapping[str, int]) -> bool:
    def val(operand):
        return operand if isinstance(operand, int) else values[operand]

    a, b = val(test.lhs), val(test.rhs)
    return {
        Rel.LE: a <= b,
        Rel.LT: a < b,
        Rel.GE: a >= b,
        Rel.GT: a > b,
        Rel.EQ: a == b,
        Rel.NE: a != b,
    }[test.op]


def run_collecting(
    cfg: Cfg,
    input_range: tuple[int, int] = (-8, 8),
    step_bound: int = 100_000,
) -> CollectingResult:
    """Enumerate concrete executions, collecting the post-states per node.

    Variables start at zero; every input site draws from `input_range`
    unless the site carries its own range annotation. Assume nodes filter
    states that do not satisfy their constraint. Exploration is
    breadth-first over (node, state) pairs and paths stop at `step_bound`
    steps, setting the truncated flag.
    """
    lo, hi = input_range
    if lo > hi:
        raise ValueError("empty input range")
    init = tuple((v, 0) for v in cfg.variables)
    seen: list[set[tuple[tuple[str, int], ...]]] = [set() for _ in cfg.nodes]
    seen[cfg.entry].add(init)
    frontier: list[tuple[int, tuple[tuple[str, int], ...]]] = [(cfg.entry, init)]
    truncated = False
    depth = 0

    def step(v: int, state: tuple[tuple[str, int], ...]):
        node = cfg.nodes[v]
        op = node.op
        values = dict(state)
        if isinstance(op, Assign):
            values[op.var] = op.expr.constant + sum(
                coef * values[var] for coef, var in op.expr.terms
            )
            return [tuple(sorted(values.items()))]
        if isinstance(op, Input):
            site_lo, site_hi = op.input_range if op.input_range is not None else (lo, hi)
            out = []
            for value in range(site_lo, site_hi + 1):
                values[op.var] = value
                out.append(tuple(sorted(values.items())))
            return out
        if isinstance(op, GuardFilter):
            return [state] if _concrete_guard(op.test, values) else []
        if isinstance(op, Assume):
            return [state] if op.constraint.holds(values) else []
        return [state]  # entry, exit, skip, assert

    while frontier:
        depth += 1
        if depth > step_bound:
            truncated = True
            break
        nxt: list[tuple[int, tuple[tuple[str, int], ...]]] = []
        for v, state in frontier:
            for w in cfg.successors(v):
                for out in step(w, state):
                    if out not in seen[w]:
                        seen[w].add(out)
                        nxt.append((w, out))
        frontier = nxt

    states = [[dict(s) for s in sorted(bucket)] for bucket in seen]
    return CollectingResult(states, truncated)


def verify_equivalence(
    cfg: Cfg,
    config: AnalysisConfig | None = None,
    max_assumptions: int = 12,
    program_name: str = "<program>",
) -> OracleReport:
    """Check the one-pass result against a fresh analysis of every variant.

    For each assumption subset, the restricted program is analyzed from
    scratch and compared per node with the rule lookup. Without widening the
    comparison is exact equality; with widening it is downgraded to
    containment of the fresh result, since the two iterations are not
    guaranteed to widen in lock step. Non-convergent runs are recorded as
    skipped, never passed.
    """
    config = config or AnalysisConfig()
    width = len(cfg.assumptions)
    if width > max_assumptions:
        raise ValueError(f"refusing to enumerate 2**{width} subsets (cap {max_assumptions})")
    exact = config.widening_delay is None and config.merge_budget is None
    mode = "equality" if exact else "containment"
    report = OracleReport("equivalence", program_name, 1 << width, mode)
    param = analyze_param(cfg, config)
    if not param.converged:
        report.skipped = list(range(1 << width))
        return report
    for accepted in range(1 << width):
        base = analyze_baseline(restrict(cfg, accepted), config)
        if not base.converged:
            report.skipped.append(accepted)
            continue
        for node in cfg.nodes:
            expected = base.states[node.id]
            got = param.states[node.id].state_for(accepted)
            ok = expected == got if exact else expected.leq(got)
            if not ok:
                report.mismatches.append(
                    {
                        "subset": accepted,
                        "node": node.id,
                        "baseline": expected.to_json(),
                        "parameterized": got.to_json(),
                    }
                )
    return report


def verify_soundness(
    cfg: Cfg,
    config: AnalysisConfig | None = None,
    input_range: tuple[int, int] = (-8, 8),
    step_bound: int = 100_000,
    max_assumptions: int = 12,
    program_name: str = "<program>",
) -> OracleReport:
    """Check that enumerated concrete states lie inside the abstract ones.

    For each assumption subset, the restricted program is executed over the
    finite input ranges and every collected concrete state is tested for
    membership in the concretization of the rule state at its node.
    Truncated explorations are recorded as partial evidence.
    """
    config = config or AnalysisConfig()
    width = len(cfg.assumptions)
    if width > max_assumptions:
        raise ValueError(f"refusing to enumerate 2**{width} subsets (cap {max_assumptions})")
    report = OracleReport("soundness", program_name, 1 << width, "membership")
    param = analyze_param(cfg, config)
    if not param.converged:
        report.skipped = list(range(1 << width))
        return report
    for accepted in range(1 << width):
        collected = run_collecting(restrict(cfg, accepted), input_range, step_bound)
        if collected.truncated:
            report.partial.append(accepted)
        for node in cfg.nodes:
            abstract = param.states[node.id].state_for(accepted)
            for values in collected.states[node.id]:
                if not gamma_contains(abstract, values):
                    report.mismatches.append(
                        {"subset": accepted, "node": node.id, "state": values}
                    )
    return report
