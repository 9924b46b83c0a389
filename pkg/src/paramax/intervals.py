"""Integer interval environments: the base lattice of the analysis.

An `IntervalEnv` is either the distinguished bottom element or a total map
from the program's variables to intervals. Endpoints are 64-bit integers
plus infinity sentinels; arithmetic saturates at the sentinels, which only
ever widens a result and therefore stays sound.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Union

from .frontend import (
    AssertAnd,
    AssertExpr,
    Assign,
    Assume,
    AtomicConstraint,
    CfgNode,
    Comparison,
    GuardFilter,
    Input,
    LinearExpr,
    Operand,
    Rel,
)

NEG_INF = float("-inf")
POS_INF = float("inf")
_LIMIT = 2**63 - 1

Endpoint = Union[int, float]


def _sat_lo(lo: Endpoint) -> Endpoint:
    if lo == NEG_INF or lo == POS_INF:
        return lo
    if lo < -_LIMIT:
        return NEG_INF
    if lo > _LIMIT:
        return _LIMIT
    return int(lo)


def _sat_hi(hi: Endpoint) -> Endpoint:
    if hi == NEG_INF or hi == POS_INF:
        return hi
    if hi > _LIMIT:
        return POS_INF
    if hi < -_LIMIT:
        return -_LIMIT
    return int(hi)


def _fmt(v: Endpoint) -> str:
    if v == NEG_INF:
        return "-inf"
    if v == POS_INF:
        return "+inf"
    return str(v)


@dataclass(frozen=True)
class Interval:
    """Nonempty integer interval [lo, hi]; emptiness lives at the env level."""

    lo: Endpoint
    hi: Endpoint

    def __post_init__(self) -> None:
        if self.lo > self.hi or self.lo == POS_INF or self.hi == NEG_INF:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def top() -> "Interval":
        return _TOP_INTERVAL

    @staticmethod
    def make(lo: Endpoint, hi: Endpoint) -> "Interval":
        return Interval(_sat_lo(lo), _sat_hi(hi))

    def contains(self, value: int) -> bool:
        return self.lo <= value <= self.hi

    def width(self) -> Endpoint:
        return self.hi - self.lo

    def join(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def meet(self, other: "Interval") -> "Interval | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return None if lo > hi else Interval(lo, hi)

    def widen(self, nxt: "Interval") -> "Interval":
        lo = self.lo if nxt.lo >= self.lo else NEG_INF
        hi = self.hi if nxt.hi <= self.hi else POS_INF
        return Interval(lo, hi)

    def add(self, other: "Interval") -> "Interval":
        return Interval.make(self.lo + other.lo, self.hi + other.hi)

    def scale(self, coef: int) -> "Interval":
        if coef == 0:
            return Interval(0, 0)
        if coef > 0:
            return Interval.make(coef * self.lo, coef * self.hi)
        return Interval.make(coef * self.hi, coef * self.lo)

    def render(self) -> str:
        return f"[{_fmt(self.lo)},{_fmt(self.hi)}]"

    def to_json(self) -> list:
        def enc(v: Endpoint):
            return _fmt(v) if v in (NEG_INF, POS_INF) else v

        return [enc(self.lo), enc(self.hi)]


_TOP_INTERVAL = Interval(NEG_INF, POS_INF)


class IntervalEnv:
    """Total map from variables to intervals, or the unique bottom element."""

    __slots__ = ("_bindings",)

    # None marks bottom; otherwise a name-sorted tuple of (var, Interval).
    def __init__(self, bindings: tuple[tuple[str, Interval], ...] | None):
        self._bindings = bindings

    @staticmethod
    def top(variables) -> "IntervalEnv":
        return IntervalEnv(tuple((v, _TOP_INTERVAL) for v in sorted(variables)))

    @staticmethod
    def of(mapping: Mapping[str, Interval]) -> "IntervalEnv":
        return IntervalEnv(tuple(sorted(mapping.items())))

    @property
    def is_bottom(self) -> bool:
        return self._bindings is None

    def variables(self) -> tuple[str, ...]:
        if self._bindings is None:
            return ()
        return tuple(v for v, _ in self._bindings)

    def get(self, var: str) -> Interval:
        if self._bindings is None:
            raise ValueError("bottom environment has no bindings")
        for name, iv in self._bindings:
            if name == var:
                return iv
        raise KeyError(var)

    def updated(self, var: str, iv: Interval) -> "IntervalEnv":
        if self._bindings is None:
            return self
        return IntervalEnv(tuple((n, iv if n == var else old) for n, old in self._bindings))

    def items(self) -> tuple[tuple[str, Interval], ...]:
        if self._bindings is None:
            raise ValueError("bottom environment has no bindings")
        return self._bindings

    def _check_universe(self, other: "IntervalEnv") -> None:
        if self._bindings is None or other._bindings is None:
            return
        if self.variables() != other.variables():
            raise ValueError("mismatched variable universes")

    def join(self, other: "IntervalEnv") -> "IntervalEnv":
        self._check_universe(other)
        if self._bindings is None:
            return other
        if other._bindings is None:
            return self
        return IntervalEnv(
            tuple((v, a.join(b)) for (v, a), (_, b) in zip(self._bindings, other._bindings))
        )

    def meet(self, other: "IntervalEnv | AssumeState") -> "IntervalEnv":
        if isinstance(other, AssumeState):
            return self._meet_partial(other)
        self._check_universe(other)
        if self._bindings is None or other._bindings is None:
            return BOTTOM
        out = []
        for (v, a), (_, b) in zip(self._bindings, other._bindings):
            m = a.meet(b)
            if m is None:
                return BOTTOM
            out.append((v, m))
        return IntervalEnv(tuple(out))

    def _meet_partial(self, state: "AssumeState") -> "IntervalEnv":
        if self._bindings is None or state.is_empty:
            return BOTTOM
        bounds = dict(state.intervals)
        out = []
        for v, a in self._bindings:
            b = bounds.get(v)
            if b is None:
                out.append((v, a))
                continue
            m = a.meet(b)
            if m is None:
                return BOTTOM
            out.append((v, m))
        return IntervalEnv(tuple(out))

    def leq(self, other: "IntervalEnv") -> bool:
        if self._bindings is None:
            return True
        if other._bindings is None:
            return False
        self._check_universe(other)
        return all(
            b.lo <= a.lo and a.hi <= b.hi
            for (_, a), (_, b) in zip(self._bindings, other._bindings)
        )

    def widen(self, nxt: "IntervalEnv") -> "IntervalEnv":
        if self._bindings is None:
            return nxt
        if nxt._bindings is None:
            return self
        self._check_universe(nxt)
        return IntervalEnv(
            tuple((v, a.widen(b)) for (v, a), (_, b) in zip(self._bindings, nxt._bindings))
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntervalEnv):
            return NotImplemented
        return self._bindings == other._bindings

    def __hash__(self) -> int:
        return hash(self._bindings)

    def render(self) -> str:
        if self._bindings is None:
            return "bottom"
        if not self._bindings:
            return "{}"
        return " ".join(f"{v}:{iv.render()}" for v, iv in self._bindings)

    def __repr__(self) -> str:
        return f"IntervalEnv({self.render()})"

    def to_json(self):
        if self._bindings is None:
            return "bottom"
        return {v: iv.to_json() for v, iv in self._bindings}


BOTTOM = IntervalEnv(None)


@dataclass(frozen=True)
class AssumeState:
    """The interval encoding of an assumption's constraint.

    Maps only the mentioned variables; unmentioned variables are implicitly
    unconstrained. A constraint whose conjuncts contradict each other has no
    representable state; it is marked empty and meets to bottom.
    """

    intervals: tuple[tuple[str, Interval], ...]
    is_empty: bool = False

    @staticmethod
    def from_constraint(constraint: AtomicConstraint) -> "AssumeState":
        acc: dict[str, Interval] = {}
        for bound in constraint.bounds:
            if bound.op is Rel.LE:
                iv = Interval(NEG_INF, bound.value)
            elif bound.op is Rel.GE:
                iv = Interval(bound.value, POS_INF)
            else:
                iv = Interval(bound.value, bound.value)
            if bound.var in acc:
                met = acc[bound.var].meet(iv)
                if met is None:
                    return AssumeState((), is_empty=True)
                acc[bound.var] = met
            else:
                acc[bound.var] = iv
        return AssumeState(tuple(sorted(acc.items())))


def join(a: IntervalEnv, b: IntervalEnv) -> IntervalEnv:
    return a.join(b)


def meet(a: IntervalEnv, b: "IntervalEnv | AssumeState") -> IntervalEnv:
    return a.meet(b)


def leq(a: IntervalEnv, b: IntervalEnv) -> bool:
    return a.leq(b)


def widen(prev: IntervalEnv, nxt: IntervalEnv) -> IntervalEnv:
    return prev.widen(nxt)


def enforce(env: IntervalEnv, state: AssumeState) -> IntervalEnv:
    """Force an assumption onto a state by meeting with its encoding."""
    return env.meet(state)


def feasible(env: IntervalEnv, state: AssumeState) -> bool:
    """Whether the state admits the assumption (the meet is not bottom)."""
    return not env.meet(state).is_bottom


def eval_linear(expr: LinearExpr, env: IntervalEnv) -> Interval:
    if env.is_bottom:
        raise ValueError("cannot evaluate in the bottom environment")
    acc = Interval(expr.constant, expr.constant)
    for coef, var in expr.terms:
        acc = acc.add(env.get(var).scale(coef))
    return acc


def _refine_against_const(iv: Interval, op: Rel, c: int) -> Interval | None:
    if op is Rel.LE:
        return iv.meet(Interval(NEG_INF, c))
    if op is Rel.LT:
        return iv.meet(Interval(NEG_INF, c - 1))
    if op is Rel.GE:
        return iv.meet(Interval(c, POS_INF))
    if op is Rel.GT:
        return iv.meet(Interval(c + 1, POS_INF))
    if op is Rel.EQ:
        return iv.meet(Interval(c, c))
    # NE: trim an endpoint when the constant sits on it.
    if iv.lo == iv.hi == c:
        return None
    if iv.lo == c:
        return Interval(c + 1, iv.hi)
    if iv.hi == c:
        return Interval(iv.lo, c - 1)
    return iv


def _refine_guard(env: IntervalEnv, test: Comparison) -> IntervalEnv:
    lhs, op, rhs = test.lhs, test.op, test.rhs
    if isinstance(lhs, int) and isinstance(rhs, int):
        ok = {
            Rel.LE: lhs <= rhs,
            Rel.LT: lhs < rhs,
            Rel.GE: lhs >= rhs,
            Rel.GT: lhs > rhs,
            Rel.EQ: lhs == rhs,
            Rel.NE: lhs != rhs,
        }[op]
        return env if ok else BOTTOM
    if isinstance(lhs, int):
        lhs, op, rhs = rhs, {
            Rel.LE: Rel.GE, Rel.LT: Rel.GT, Rel.GE: Rel.LE,
            Rel.GT: Rel.LT, Rel.EQ: Rel.EQ, Rel.NE: Rel.NE,
        }[op], lhs
    if isinstance(rhs, int):
        refined = _refine_against_const(env.get(lhs), op, rhs)
        return BOTTOM if refined is None else env.updated(lhs, refined)

    # Variable against variable: tighten each side from the other's bounds.
    x, y = env.get(lhs), env.get(rhs)
    if op in (Rel.LE, Rel.LT):
        shift = 0 if op is Rel.LE else 1
        nx = x.meet(Interval(NEG_INF, y.hi - shift))
        ny = y.meet(Interval(x.lo + shift, POS_INF))
    elif op in (Rel.GE, Rel.GT):
        shift = 0 if op is Rel.GE else 1
        nx = x.meet(Interval(y.lo + shift, POS_INF))
        ny = y.meet(Interval(NEG_INF, x.hi - shift))
    elif op is Rel.EQ:
        nx = ny = x.meet(y)
    else:  # NE: only singleton collisions can be refined soundly
        if x.lo == x.hi == y.lo == y.hi:
            return BOTTOM
        nx = _refine_against_const(x, Rel.NE, int(y.lo)) if y.lo == y.hi else x
        ny = _refine_against_const(y, Rel.NE, int(x.lo)) if x.lo == x.hi else y
    if nx is None or ny is None:
        return BOTTOM
    return env.updated(lhs, nx).updated(rhs, ny)


def transfer(node: CfgNode, env: IntervalEnv) -> IntervalEnv:
    """Node transformer for everything but assume nodes.

    Assume nodes are handled by the caller (`enforce` for the plain analysis,
    rule splitting for the parameterized one).
    """
    op = node.op
    if isinstance(op, Assume):
        raise ValueError("assume nodes have no plain transfer; use enforce or split")
    if env.is_bottom:
        return env
    if isinstance(op, Assign):
        return env.updated(op.var, eval_linear(op.expr, env))
    if isinstance(op, Input):
        return env.updated(op.var, Interval.top())
    if isinstance(op, GuardFilter):
        return _refine_guard(env, op.test)
    return env  # entry, exit, skip, assert


class ProofVerdict(Enum):
    PROVED = "proved"
    UNKNOWN = "unknown"
    REFUTED = "refuted"


def _operand_interval(env: IntervalEnv, operand: Operand) -> Interval:
    if isinstance(operand, int):
        return Interval(operand, operand)
    return env.get(operand)


def _compare_verdict(a: Interval, op: Rel, b: Interval) -> ProofVerdict:
    if op is Rel.LE:
        if a.hi <= b.lo:
            return ProofVerdict.PROVED
        if a.lo > b.hi:
            return ProofVerdict.REFUTED
    elif op is Rel.LT:
        if a.hi < b.lo:
            return ProofVerdict.PROVED
        if a.lo >= b.hi:
            return ProofVerdict.REFUTED
    elif op is Rel.GE:
        return _compare_verdict(b, Rel.LE, a)
    elif op is Rel.GT:
        return _compare_verdict(b, Rel.LT, a)
    elif op is Rel.EQ:
        if a.lo == a.hi == b.lo == b.hi:
            return ProofVerdict.PROVED
        if a.hi < b.lo or b.hi < a.lo:
            return ProofVerdict.REFUTED
    else:
        raise ValueError(f"unsupported assertion operator {op}")
    return ProofVerdict.UNKNOWN


def proves(env: IntervalEnv, test: AssertExpr) -> ProofVerdict:
    """Three-valued assertion check; the bottom state proves everything."""
    if env.is_bottom:
        return ProofVerdict.PROVED
    if isinstance(test, Comparison):
        return _compare_verdict(
            _operand_interval(env, test.lhs), test.op, _operand_interval(env, test.rhs)
        )
    verdicts = [proves(env, part) for part in test.parts]
    if isinstance(test, AssertAnd):
        if all(v is ProofVerdict.PROVED for v in verdicts):
            return ProofVerdict.PROVED
        if any(v is ProofVerdict.REFUTED for v in verdicts):
            return ProofVerdict.REFUTED
    else:
        if any(v is ProofVerdict.PROVED for v in verdicts):
            return ProofVerdict.PROVED
        if all(v is ProofVerdict.REFUTED for v in verdicts):
            return ProofVerdict.REFUTED
    return ProofVerdict.UNKNOWN


def gamma_contains(env: IntervalEnv, values: Mapping[str, int]) -> bool:
    """Concretization membership: every variable's value lies in its interval."""
    if env.is_bottom:
        return False
    for var, iv in env.items():
        if var not in values:
            raise ValueError(f"concrete state is missing variable {var!r}")
        if not iv.contains(values[var]):
            return False
    return True
