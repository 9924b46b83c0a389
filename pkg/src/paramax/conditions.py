"""Propositional conditions over assumption atoms.

A condition selects a set of assumption subsets: the atom for assumption
`a` is true exactly when `a` is in the accepted set. Subsets are encoded as
bit fields (bit i = assumption with index i). Satisfiability, implication,
and equivalence are decided exactly by enumeration, realized as memoized
truth-table bitmasks: bit A of `truth_table(cond, width)` is set when the
subset A satisfies the condition. The width cap keeps enumeration at desk
scale; formulas themselves stay as trees for faithful display.

Condition nodes cache their hash and highest atom index at construction,
so table memoization and set operations stay cheap on shared subtrees.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Iterable, Mapping, Union

from .frontend import AssumptionId

WIDTH_CAP = 16


class WidthError(ValueError):
    """Raised when a condition needs more assumption atoms than configured."""


class TrueCond:
    __slots__ = ()
    max_index = 0

    def __repr__(self) -> str:
        return "TrueCond()"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TrueCond)

    def __hash__(self) -> int:
        return hash("cond:true")


class FalseCond:
    __slots__ = ()
    max_index = 0

    def __repr__(self) -> str:
        return "FalseCond()"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FalseCond)

    def __hash__(self) -> int:
        return hash("cond:false")


class Atom:
    __slots__ = ("assumption", "max_index", "_hash")

    def __init__(self, assumption: AssumptionId):
        self.assumption = assumption
        self.max_index = assumption.index + 1
        self._hash = hash(("cond:atom", assumption))

    def __repr__(self) -> str:
        return f"Atom({self.assumption!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Atom) and self.assumption == other.assumption

    def __hash__(self) -> int:
        return self._hash


class Not:
    __slots__ = ("operand", "max_index", "_hash")

    def __init__(self, operand: "Condition"):
        self.operand = operand
        self.max_index = operand.max_index
        self._hash = hash(("cond:not", operand))

    def __repr__(self) -> str:
        return f"Not({self.operand!r})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Not)
            and self._hash == other._hash
            and self.operand == other.operand
        )

    def __hash__(self) -> int:
        return self._hash


class And:
    __slots__ = ("parts", "max_index", "_hash")

    def __init__(self, parts: Iterable["Condition"]):
        self.parts = tuple(parts)
        self.max_index = max((p.max_index for p in self.parts), default=0)
        self._hash = hash(("cond:and", self.parts))

    def __repr__(self) -> str:
        return f"And({self.parts!r})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, And)
            and self._hash == other._hash
            and self.parts == other.parts
        )

    def __hash__(self) -> int:
        return self._hash


class Or:
    __slots__ = ("parts", "max_index", "_hash")

    def __init__(self, parts: Iterable["Condition"]):
        self.parts = tuple(parts)
        self.max_index = max((p.max_index for p in self.parts), default=0)
        self._hash = hash(("cond:or", self.parts))

    def __repr__(self) -> str:
        return f"Or({self.parts!r})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Or)
            and self._hash == other._hash
            and self.parts == other.parts
        )

    def __hash__(self) -> int:
        return self._hash


Condition = Union[TrueCond, FalseCond, Atom, Not, And, Or]

TRUE = TrueCond()
FALSE = FalseCond()


def eval_condition(cond: Condition, accepted: int) -> bool:
    """Evaluate with Atom(a) true iff a's bit is set in `accepted`."""
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, FalseCond):
        return False
    if isinstance(cond, Atom):
        return bool((accepted >> cond.assumption.index) & 1)
    if isinstance(cond, Not):
        return not eval_condition(cond.operand, accepted)
    if isinstance(cond, And):
        return all(eval_condition(p, accepted) for p in cond.parts)
    return any(eval_condition(p, accepted) for p in cond.parts)


def atoms_of(cond: Condition) -> frozenset[AssumptionId]:
    out: set[AssumptionId] = set()
    stack = [cond]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.add(node.assumption)
        elif isinstance(node, Not):
            stack.append(node.operand)
        elif isinstance(node, (And, Or)):
            stack.extend(node.parts)
    return frozenset(out)


def _full_mask(width: int) -> int:
    return (1 << (1 << width)) - 1


@lru_cache(maxsize=None)
def _atom_pattern(index: int, width: int) -> int:
    block = 1 << index  # run length of the alternating 0/1 blocks
    run = (1 << block) - 1
    pattern = 0
    for start in range(block, 1 << width, block * 2):
        pattern |= run << start
    return pattern


@lru_cache(maxsize=1 << 16)
def truth_table(cond: Condition, width: int) -> int:
    """Bitmask over all 2**width subsets that satisfy the condition."""
    if width > WIDTH_CAP:
        raise WidthError(f"condition width {width} exceeds the cap of {WIDTH_CAP}")
    if isinstance(cond, TrueCond):
        return _full_mask(width)
    if isinstance(cond, FalseCond):
        return 0
    if isinstance(cond, Atom):
        if cond.assumption.index >= width:
            raise WidthError(
                f"atom {cond.assumption.label!r} has index {cond.assumption.index}, width is {width}"
            )
        return _atom_pattern(cond.assumption.index, width)
    if isinstance(cond, Not):
        return _full_mask(width) & ~truth_table(cond.operand, width)
    if isinstance(cond, And):
        out = _full_mask(width)
        for p in cond.parts:
            out &= truth_table(p, width)
        return out
    out = 0
    for p in cond.parts:
        out |= truth_table(p, width)
    return out


def sat(cond: Condition, width: int | None = None) -> bool:
    """Satisfiable over some assumption subset.

    With `width=None`, enumeration covers just the occurring atoms, which
    decides the same question.
    """
    if width is None:
        width = cond.max_index
    return truth_table(cond, width) != 0


def valid(cond: Condition, width: int | None = None) -> bool:
    if width is None:
        width = cond.max_index
    return truth_table(cond, width) == _full_mask(width)


def implies(a: Condition, b: Condition, width: int | None = None) -> bool:
    if width is None:
        width = max(a.max_index, b.max_index)
    return truth_table(a, width) & ~truth_table(b, width) == 0


def equivalent(a: Condition, b: Condition, width: int | None = None) -> bool:
    if width is None:
        width = max(a.max_index, b.max_index)
    return truth_table(a, width) == truth_table(b, width)


def satisfying_sets(cond: Condition, width: int) -> list[int]:
    """All assumption subsets satisfying the condition, ascending."""
    table = truth_table(cond, width)
    return [a for a in range(1 << width) if (table >> a) & 1]


def _is_literal(cond: Condition) -> bool:
    return isinstance(cond, Atom) or (isinstance(cond, Not) and isinstance(cond.operand, Atom))


def _complement(cond: Condition) -> Condition:
    return cond.operand if isinstance(cond, Not) else Not(cond)


def _flatten(cond: Condition) -> Condition:
    """Constant folding, double negation, flattening, and duplicate removal."""
    if isinstance(cond, Not):
        inner = _flatten(cond.operand)
        if isinstance(inner, TrueCond):
            return FALSE
        if isinstance(inner, FalseCond):
            return TRUE
        if isinstance(inner, Not):
            return inner.operand
        return Not(inner)
    if not isinstance(cond, (And, Or)):
        return cond

    conj = isinstance(cond, And)
    parts: list[Condition] = []
    seen: set[Condition] = set()
    for raw in cond.parts:
        p = _flatten(raw)
        if isinstance(p, FalseCond if conj else TrueCond):
            return FALSE if conj else TRUE
        if isinstance(p, TrueCond if conj else FalseCond):
            continue
        inline = p.parts if isinstance(p, And if conj else Or) else (p,)
        for q in inline:
            if q in seen:
                continue
            if _is_literal(q) and _complement(q) in seen:
                return FALSE if conj else TRUE
            seen.add(q)
            parts.append(q)
    if not parts:
        return TRUE if conj else FALSE
    if len(parts) == 1:
        return parts[0]
    return And(parts) if conj else Or(parts)


def _cube_for(table: int, width: int, atoms: dict[int, AssumptionId]) -> Condition | None:
    """The conjunction of literals matching `table` exactly, if one exists."""
    if table == 0:
        return FALSE
    full = _full_mask(width)
    literals: list[Condition] = []
    cube = full
    for index in sorted(atoms):
        pattern = _atom_pattern(index, width)
        if table & ~pattern == 0:
            literals.append(Atom(atoms[index]))
            cube &= pattern
        elif table & pattern == 0:
            literals.append(Not(Atom(atoms[index])))
            cube &= full & ~pattern
    if cube != table:
        return None
    if not literals:
        return TRUE
    if len(literals) == 1:
        return literals[0]
    return And(literals)


def _prune_implied_literals(cond: And) -> Condition:
    """Drop conjoined literals already implied by the rest of the conjunction."""
    width = cond.max_index
    parts = list(cond.parts)
    tables = [truth_table(p, width) for p in parts]
    keep = [True] * len(parts)
    for i, p in enumerate(parts):
        if not _is_literal(p):
            continue
        rest = _full_mask(width)
        for j in range(len(parts)):
            if j != i and keep[j]:
                rest &= tables[j]
        if rest & ~tables[i] == 0 and sum(keep) > 1:
            keep[i] = False
    kept = [p for p, k in zip(parts, keep) if k]
    if len(kept) == 1:
        return kept[0]
    if len(kept) == len(parts):
        return cond
    return And(kept)


@lru_cache(maxsize=1 << 15)
def simplify(cond: Condition) -> Condition:
    """Equivalent but tidier condition; canonical for display only.

    Folds constants, removes double negation, dedups and flattens
    connectives, drops conjoined literals already implied by the rest, and
    replaces any condition that denotes a single conjunction of literals
    (including tautologies and contradictions) by that minimal form.
    """
    out = _flatten(cond)
    if isinstance(out, (TrueCond, FalseCond)):
        return out
    width = out.max_index
    if width <= 12:
        table = truth_table(out, width)
        atom_map = {a.index: a for a in atoms_of(out)}
        cube = _cube_for(table, width, atom_map)
        if cube is not None:
            return cube
        anti = _cube_for(_full_mask(width) & ~table, width, atom_map)
        if anti is not None and not isinstance(anti, (TrueCond, FalseCond)):
            return _complement(anti) if _is_literal(anti) else Not(anti)
    if isinstance(out, And):
        out = _prune_implied_literals(out)
    return out


def render(cond: Condition) -> str:
    """Text form with atoms as assume labels, e.g. `(a1 & !a2) | a3`."""
    if isinstance(cond, TrueCond):
        return "true"
    if isinstance(cond, FalseCond):
        return "false"
    if isinstance(cond, Atom):
        return cond.assumption.label
    if isinstance(cond, Not):
        inner = render(cond.operand)
        if isinstance(cond.operand, (And, Or)):
            inner = f"({inner})"
        return f"!{inner}"
    if isinstance(cond, And):
        return " & ".join(
            f"({render(p)})" if isinstance(p, Or) else render(p) for p in cond.parts
        )
    return " | ".join(
        f"({render(p)})" if isinstance(p, And) else render(p) for p in cond.parts
    )


def format_subset(accepted: int, assumptions: Iterable[AssumptionId]) -> str:
    labels = [a.label for a in assumptions if (accepted >> a.index) & 1]
    return "{" + ", ".join(labels) + "}"


class ConditionSyntaxError(ValueError):
    pass


def parse_condition(text: str, atoms: Mapping[str, AssumptionId]) -> Condition:
    """Parse the rendered condition syntax back into a tree."""
    tokens = re.findall(r"[()!&|]|true|false|[A-Za-z_][A-Za-z0-9_]*", text)
    if "".join(tokens).replace(" ", "") != text.replace(" ", ""):
        raise ConditionSyntaxError(f"cannot tokenize condition {text!r}")
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise ConditionSyntaxError("unexpected end of condition")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise ConditionSyntaxError(f"expected {expected!r}, found {tok!r}")
        pos += 1
        return tok

    def parse_or() -> Condition:
        parts = [parse_and()]
        while peek() == "|":
            take()
            parts.append(parse_and())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_and() -> Condition:
        parts = [parse_unary()]
        while peek() == "&":
            take()
            parts.append(parse_unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_unary() -> Condition:
        tok = peek()
        if tok == "!":
            take()
            return Not(parse_unary())
        if tok == "(":
            take()
            inner = parse_or()
            take(")")
            return inner
        if tok == "true":
            take()
            return TRUE
        if tok == "false":
            take()
            return FALSE
        if tok is None:
            raise ConditionSyntaxError("unexpected end of condition")
        take()
        if tok not in atoms:
            raise ConditionSyntaxError(f"unknown assumption label {tok!r}")
        return Atom(atoms[tok])

    out = parse_or()
    if pos != len(tokens):
        raise ConditionSyntaxError(f"trailing tokens in condition {text!r}")
    return out
