"""Parser, AST, and control-flow graph for the analyzed while-language.

Source programs are plain text (`.pwl`): statements end with `;`, blocks use
braces. Supported statements:

    x := 2*x + 1;            linear integer assignment
    x := input();            nondeterministic input, optionally `input() in [lo, hi]`
    if (x > 0) { ... } else { ... }
    while (x <= 10) { ... }
    assume lbl: x >= 3 && x <= 10;
    assert x <= y || x = 0;
    skip;

Branch conditions are compiled into a pair of guard-filter nodes (condition
and its negation) so every CFG node carries a single transformer. Strict
comparisons against constants are normalized to non-strict form over the
integers (`x > 0` becomes `x >= 1`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union


class ParseError(Exception):
    """Syntax or well-formedness error with source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class Rel(Enum):
    LE = "<="
    LT = "<"
    GE = ">="
    GT = ">"
    EQ = "="
    NE = "!="


# Operands of comparisons: a variable name or an integer constant.
Operand = Union[str, int]


@dataclass(frozen=True)
class Comparison:
    """`lhs REL rhs` where each side is a variable or constant."""

    lhs: Operand
    op: Rel
    rhs: Operand

    def render(self) -> str:
        return f"{self.lhs} {self.op.value} {self.rhs}"


_NEGATED = {
    Rel.LE: Rel.GT,
    Rel.LT: Rel.GE,
    Rel.GE: Rel.LT,
    Rel.GT: Rel.LE,
    Rel.EQ: Rel.NE,
    Rel.NE: Rel.EQ,
}

_FLIPPED = {
    Rel.LE: Rel.GE,
    Rel.LT: Rel.GT,
    Rel.GE: Rel.LE,
    Rel.GT: Rel.LT,
    Rel.EQ: Rel.EQ,
    Rel.NE: Rel.NE,
}


def negate_comparison(cmp: Comparison) -> Comparison:
    return normalize_comparison(Comparison(cmp.lhs, _NEGATED[cmp.op], cmp.rhs))


def normalize_comparison(cmp: Comparison) -> Comparison:
    """Put the variable on the left and drop strictness against constants."""
    lhs, op, rhs = cmp.lhs, cmp.op, cmp.rhs
    if isinstance(lhs, int) and isinstance(rhs, str):
        lhs, op, rhs = rhs, _FLIPPED[op], lhs
    if isinstance(lhs, str) and isinstance(rhs, int):
        if op is Rel.LT:
            op, rhs = Rel.LE, rhs - 1
        elif op is Rel.GT:
            op, rhs = Rel.GE, rhs + 1
    return Comparison(lhs, op, rhs)


@dataclass(frozen=True)
class LinearExpr:
    """Normalized linear form: constant + sum of coef*var terms.

    Terms are sorted by variable name and never carry a zero coefficient,
    so structurally equal expressions denote the same function.
    """

    constant: int
    terms: tuple[tuple[int, str], ...]

    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.terms)

    def render(self) -> str:
        parts: list[str] = []
        for coef, var in self.terms:
            mag = var if abs(coef) == 1 else f"{abs(coef)}*{var}"
            if not parts:
                parts.append(mag if coef > 0 else f"-{mag}")
            else:
                parts.append(f"+ {mag}" if coef > 0 else f"- {mag}")
        if self.constant or not parts:
            c = self.constant
            if not parts:
                parts.append(str(c))
            else:
                parts.append(f"+ {c}" if c > 0 else f"- {-c}")
        return " ".join(parts)


@dataclass(frozen=True)
class Bound:
    """Single-variable bound usable as an assumption conjunct."""

    var: str
    op: Rel  # LE, GE or EQ only
    value: int

    def render(self) -> str:
        return f"{self.var} {self.op.value} {self.value}"

    def holds(self, value: int) -> bool:
        if self.op is Rel.LE:
            return value <= self.value
        if self.op is Rel.GE:
            return value >= self.value
        return value == self.value


@dataclass(frozen=True)
class AtomicConstraint:
    """Conjunction of single-variable bounds; always interval-representable."""

    bounds: tuple[Bound, ...]

    def variables(self) -> tuple[str, ...]:
        return tuple(b.var for b in self.bounds)

    def render(self) -> str:
        return " && ".join(b.render() for b in self.bounds)

    def holds(self, values) -> bool:
        return all(b.holds(values[b.var]) for b in self.bounds)


@dataclass(frozen=True)
class AssertAnd:
    parts: tuple["AssertExpr", ...]


@dataclass(frozen=True)
class AssertOr:
    parts: tuple["AssertExpr", ...]


AssertExpr = Union[Comparison, AssertAnd, AssertOr]


def render_assert(expr: AssertExpr) -> str:
    if isinstance(expr, Comparison):
        return expr.render()
    sep = " && " if isinstance(expr, AssertAnd) else " || "
    rendered = []
    for p in expr.parts:
        text = render_assert(p)
        if isinstance(p, (AssertAnd, AssertOr)):
            text = f"({text})"
        rendered.append(text)
    return sep.join(rendered)


# --- AST ---------------------------------------------------------------


@dataclass(frozen=True)
class AssignStmt:
    var: str
    expr: LinearExpr


@dataclass(frozen=True)
class InputStmt:
    var: str
    input_range: tuple[int, int] | None = None


@dataclass(frozen=True)
class IfStmt:
    cond: Comparison
    then_body: tuple["Stmt", ...]
    else_body: tuple["Stmt", ...]


@dataclass(frozen=True)
class WhileStmt:
    cond: Comparison
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class AssumeStmt:
    label: str
    constraint: AtomicConstraint


@dataclass(frozen=True)
class AssertStmt:
    test: AssertExpr


@dataclass(frozen=True)
class SkipStmt:
    pass


Stmt = Union[AssignStmt, InputStmt, IfStmt, WhileStmt, AssumeStmt, AssertStmt, SkipStmt]


@dataclass(frozen=True)
class Program:
    statements: tuple[Stmt, ...]


# --- Lexer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[^\S\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<nl>\n)
    | (?P<number>[0-9]+)
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>:=|<=|>=|==|!=|&&|\|\||[<>=:;{}()\[\],+\-*])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"if", "else", "while", "assume", "assert", "skip", "input", "in"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "number", "name", "op", "kw", "eof"
    text: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(text)
        else:
            if kind == "name" and text in _KEYWORDS:
                kind = "kw"
            tokens.append(_Token(kind, text, line, col))
            col += len(text)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


_REL_TOKENS = {
    "<=": Rel.LE,
    "<": Rel.LT,
    ">=": Rel.GE,
    ">": Rel.GT,
    "=": Rel.EQ,
    "==": Rel.EQ,
    "!=": Rel.NE,
}


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.assume_labels: dict[str, _Token] = {}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col)

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            raise self.error(f"expected {text!r}, found {tok.text!r}" if tok.text else f"expected {text!r}")
        return self.advance()

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind != "eof"

    # -- grammar --

    def parse_program(self) -> Program:
        stmts = self.parse_statements(stop_at_brace=False)
        if self.peek().kind != "eof":
            raise self.error(f"unexpected {self.peek().text!r}")
        return Program(tuple(stmts))

    def parse_statements(self, stop_at_brace: bool) -> list[Stmt]:
        stmts: list[Stmt] = []
        while True:
            tok = self.peek()
            if tok.kind == "eof" or (stop_at_brace and tok.text == "}"):
                return stmts
            stmts.append(self.parse_statement())

    def parse_statement(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "name":
            return self.parse_assignment()
        if tok.kind == "kw":
            if tok.text == "if":
                return self.parse_if()
            if tok.text == "while":
                return self.parse_while()
            if tok.text == "assume":
                return self.parse_assume()
            if tok.text == "assert":
                return self.parse_assert()
            if tok.text == "skip":
                self.advance()
                self.expect(";")
                return SkipStmt()
        raise self.error(f"expected a statement, found {tok.text!r}" if tok.text else "expected a statement")

    def parse_assignment(self) -> Stmt:
        var = self.advance().text
        self.expect(":=")
        if self.peek().text == "input":
            self.advance()
            self.expect("(")
            self.expect(")")
            input_range = None
            if self.at("in"):
                self.advance()
                self.expect("[")
                lo = self.parse_int()
                self.expect(",")
                hi = self.parse_int()
                self.expect("]")
                if lo > hi:
                    raise self.error("empty input range")
                input_range = (lo, hi)
            self.expect(";")
            return InputStmt(var, input_range)
        expr = self.parse_linear()
        self.expect(";")
        return AssignStmt(var, expr)

    def parse_int(self) -> int:
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        tok = self.peek()
        if tok.kind != "number":
            raise self.error("expected an integer")
        self.advance()
        return sign * int(tok.text)

    def parse_linear(self) -> LinearExpr:
        constant = 0
        coefs: dict[str, int] = {}

        def add_term(sign: int) -> None:
            nonlocal constant
            tok = self.peek()
            if tok.kind == "number":
                self.advance()
                value = int(tok.text)
                if self.at("*"):
                    star = self.advance()
                    follow = self.peek()
                    if follow.kind == "name":
                        self.advance()
                        coefs[follow.text] = coefs.get(follow.text, 0) + sign * value
                    elif follow.kind == "number":
                        self.advance()
                        constant += sign * value * int(follow.text)
                    else:
                        raise self.error("expected a variable after '*'", star)
                else:
                    constant += sign * value
            elif tok.kind == "name":
                self.advance()
                coef = 1
                if self.at("*"):
                    self.advance()
                    follow = self.peek()
                    if follow.kind == "number":
                        self.advance()
                        coef = int(follow.text)
                    elif follow.kind == "name":
                        raise self.error("non-linear expression: variable * variable", follow)
                    else:
                        raise self.error("expected a constant after '*'")
                coefs[tok.text] = coefs.get(tok.text, 0) + sign * coef
            else:
                raise self.error("expected an expression term")

        if self.at("-"):
            self.advance()
            add_term(-1)
        else:
            add_term(1)
        while self.peek().text in ("+", "-"):
            sign = 1 if self.advance().text == "+" else -1
            add_term(sign)
        terms = tuple((c, v) for v, c in sorted(coefs.items()) if c != 0)
        return LinearExpr(constant, terms)

    def parse_operand(self) -> Operand:
        tok = self.peek()
        if tok.kind == "name":
            self.advance()
            return tok.text
        if tok.kind == "number" or tok.text == "-":
            return self.parse_int()
        raise self.error("expected a variable or constant")

    def parse_comparison(self, allow_ne: bool) -> Comparison:
        lhs = self.parse_operand()
        tok = self.peek()
        rel = _REL_TOKENS.get(tok.text)
        if rel is None:
            raise self.error("expected a comparison operator")
        if rel is Rel.NE and not allow_ne:
            raise self.error("operator != is not allowed here", tok)
        self.advance()
        rhs = self.parse_operand()
        return Comparison(lhs, rel, rhs)

    def parse_guard(self) -> Comparison:
        self.expect("(")
        cmp = self.parse_comparison(allow_ne=True)
        if self.peek().text in ("&&", "||"):
            raise self.error("guard conditions must be a single comparison")
        self.expect(")")
        return cmp

    def parse_if(self) -> IfStmt:
        self.advance()
        cond = self.parse_guard()
        then_body = self.parse_block()
        else_body: tuple[Stmt, ...] = ()
        if self.at("else"):
            self.advance()
            else_body = self.parse_block()
        return IfStmt(cond, then_body, else_body)

    def parse_while(self) -> WhileStmt:
        self.advance()
        cond = self.parse_guard()
        return WhileStmt(cond, self.parse_block())

    def parse_block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        stmts = self.parse_statements(stop_at_brace=True)
        self.expect("}")
        return tuple(stmts)

    def parse_assume(self) -> AssumeStmt:
        self.advance()
        label_tok = self.peek()
        if label_tok.kind != "name":
            raise self.error("expected an assumption label")
        self.advance()
        if label_tok.text in self.assume_labels:
            raise self.error(f"duplicate assume label {label_tok.text!r}", label_tok)
        self.assume_labels[label_tok.text] = label_tok
        self.expect(":")
        bounds = [self.parse_bound()]
        while self.at("&&"):
            self.advance()
            bounds.append(self.parse_bound())
        self.expect(";")
        return AssumeStmt(label_tok.text, AtomicConstraint(tuple(bounds)))

    def parse_bound(self) -> Bound:
        tok = self.peek()
        cmp = self.parse_comparison(allow_ne=False)
        cmp = normalize_comparison(cmp)
        if not (isinstance(cmp.lhs, str) and isinstance(cmp.rhs, int)):
            raise self.error("assume constraints must compare one variable with a constant", tok)
        return Bound(cmp.lhs, cmp.op, cmp.rhs)

    def parse_assert(self) -> AssertStmt:
        self.advance()
        expr = self.parse_assert_or()
        self.expect(";")
        return AssertStmt(expr)

    def parse_assert_or(self) -> AssertExpr:
        parts = [self.parse_assert_and()]
        while self.at("||"):
            self.advance()
            parts.append(self.parse_assert_and())
        return parts[0] if len(parts) == 1 else AssertOr(tuple(parts))

    def parse_assert_and(self) -> AssertExpr:
        parts = [self.parse_assert_atom()]
        while self.at("&&"):
            self.advance()
            parts.append(self.parse_assert_atom())
        return parts[0] if len(parts) == 1 else AssertAnd(tuple(parts))

    def parse_assert_atom(self) -> AssertExpr:
        if self.at("("):
            self.advance()
            expr = self.parse_assert_or()
            self.expect(")")
            return expr
        return self.parse_comparison(allow_ne=False)


def parse(source: str) -> Program:
    """Parse program text, raising ParseError with line/col on bad input."""
    return _Parser(_tokenize(source)).parse_program()


# --- CFG ---------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionId:
    """Identity of one labeled assume statement."""

    index: int  # ordinal among the program's assume statements
    label: str
    node_id: int


@dataclass(frozen=True)
class Entry:
    pass


@dataclass(frozen=True)
class Exit:
    pass


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: LinearExpr


@dataclass(frozen=True)
class Input:
    var: str
    input_range: tuple[int, int] | None = None


@dataclass(frozen=True)
class GuardFilter:
    test: Comparison


@dataclass(frozen=True)
class Assume:
    assumption: AssumptionId
    constraint: AtomicConstraint


@dataclass(frozen=True)
class Assert:
    test: AssertExpr


NodeOp = Union[Entry, Exit, Skip, Assign, Input, GuardFilter, Assume, Assert]


@dataclass(frozen=True)
class CfgNode:
    id: int
    op: NodeOp
    loop_head: bool = False

    def render(self) -> str:
        op = self.op
        if isinstance(op, Entry):
            return "entry"
        if isinstance(op, Exit):
            return "exit"
        if isinstance(op, Skip):
            return "skip"
        if isinstance(op, Assign):
            return f"assign({op.var} := {op.expr.render()})"
        if isinstance(op, Input):
            if op.input_range is not None:
                lo, hi = op.input_range
                return f"input({op.var} in [{lo},{hi}])"
            return f"input({op.var})"
        if isinstance(op, GuardFilter):
            return f"guard({op.test.render()})"
        if isinstance(op, Assume):
            return f"assume({op.assumption.label}: {op.constraint.render()})"
        return f"assert({render_assert(op.test)})"


class Cfg:
    """Immutable control-flow graph over `CfgNode`s.

    Node ids are assigned in source order with the entry node first and the
    exit node last. `assumptions` lists the program's assume statements in
    source order; the list is preserved verbatim by `restrict` so condition
    atoms stay comparable across restricted variants.
    """

    def __init__(
        self,
        nodes: tuple[CfgNode, ...],
        edges: frozenset[tuple[int, int]],
        entry: int,
        exit: int,
        assumptions: tuple[AssumptionId, ...],
        variables: tuple[str, ...],
    ):
        self.nodes = nodes
        self.edges = edges
        self.entry = entry
        self.exit = exit
        self.assumptions = assumptions
        self.variables = variables
        preds: dict[int, list[int]] = {n.id: [] for n in nodes}
        succs: dict[int, list[int]] = {n.id: [] for n in nodes}
        for src, dst in sorted(edges):
            preds[dst].append(src)
            succs[src].append(dst)
        self._preds = {v: tuple(sorted(ps)) for v, ps in preds.items()}
        self._succs = {v: tuple(sorted(ss)) for v, ss in succs.items()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cfg):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.edges == other.edges
            and self.entry == other.entry
            and self.exit == other.exit
            and self.assumptions == other.assumptions
            and self.variables == other.variables
        )

    def predecessors(self, v: int) -> tuple[int, ...]:
        if v not in self._preds:
            raise ValueError(f"unknown node id {v}")
        return self._preds[v]

    def successors(self, v: int) -> tuple[int, ...]:
        if v not in self._succs:
            raise ValueError(f"unknown node id {v}")
        return self._succs[v]

    def assert_nodes(self) -> tuple[CfgNode, ...]:
        return tuple(n for n in self.nodes if isinstance(n.op, Assert))


def predecessors(cfg: Cfg, v: int) -> tuple[int, ...]:
    """Syntactic predecessor set {v' | v' -> v}."""
    return cfg.predecessors(v)


class _CfgBuilder:
    def __init__(self) -> None:
        self.nodes: list[CfgNode] = []
        self.edges: set[tuple[int, int]] = set()
        self.assumptions: list[AssumptionId] = []

    def add(self, op: NodeOp, loop_head: bool = False) -> int:
        node = CfgNode(len(self.nodes), op, loop_head)
        self.nodes.append(node)
        return node.id

    def link(self, sources: Iterable[int], dst: int) -> None:
        for src in sources:
            self.edges.add((src, dst))

    def emit_block(self, stmts: Iterable[Stmt], frontier: list[int]) -> list[int]:
        for stmt in stmts:
            frontier = self.emit(stmt, frontier)
        return frontier

    def emit(self, stmt: Stmt, frontier: list[int]) -> list[int]:
        if isinstance(stmt, AssignStmt):
            v = self.add(Assign(stmt.var, stmt.expr))
        elif isinstance(stmt, InputStmt):
            v = self.add(Input(stmt.var, stmt.input_range))
        elif isinstance(stmt, AssumeStmt):
            node_id = len(self.nodes)
            aid = AssumptionId(len(self.assumptions), stmt.label, node_id)
            self.assumptions.append(aid)
            v = self.add(Assume(aid, stmt.constraint))
        elif isinstance(stmt, AssertStmt):
            v = self.add(Assert(stmt.test))
        elif isinstance(stmt, SkipStmt):
            v = self.add(Skip())
        elif isinstance(stmt, IfStmt):
            taken = normalize_comparison(stmt.cond)
            guard_true = self.add(GuardFilter(taken))
            guard_false = self.add(GuardFilter(negate_comparison(stmt.cond)))
            self.link(frontier, guard_true)
            self.link(frontier, guard_false)
            out_then = self.emit_block(stmt.then_body, [guard_true])
            out_else = self.emit_block(stmt.else_body, [guard_false])
            return out_then + out_else
        elif isinstance(stmt, WhileStmt):
            head = self.add(Skip(), loop_head=True)
            self.link(frontier, head)
            guard_body = self.add(GuardFilter(normalize_comparison(stmt.cond)))
            guard_exit = self.add(GuardFilter(negate_comparison(stmt.cond)))
            self.link([head], guard_body)
            self.link([head], guard_exit)
            back = self.emit_block(stmt.body, [guard_body])
            self.link(back, head)
            return [guard_exit]
        else:
            raise TypeError(f"unknown statement {stmt!r}")
        self.link(frontier, v)
        return [v]


def _collect_variables(nodes: Iterable[CfgNode]) -> tuple[str, ...]:
    out: set[str] = set()
    for node in nodes:
        op = node.op
        if isinstance(op, Assign):
            out.add(op.var)
            out.update(op.expr.variables())
        elif isinstance(op, Input):
            out.add(op.var)
        elif isinstance(op, GuardFilter):
            out.update(o for o in (op.test.lhs, op.test.rhs) if isinstance(o, str))
        elif isinstance(op, Assume):
            out.update(op.constraint.variables())
        elif isinstance(op, Assert):
            out.update(_assert_variables(op.test))
    return tuple(sorted(out))


def _assert_variables(expr: AssertExpr) -> set[str]:
    if isinstance(expr, Comparison):
        return {o for o in (expr.lhs, expr.rhs) if isinstance(o, str)}
    out: set[str] = set()
    for part in expr.parts:
        out |= _assert_variables(part)
    return out


def build_cfg(program: Program) -> Cfg:
    """Compile an AST into a CFG with entry first and exit last."""
    builder = _CfgBuilder()
    entry = builder.add(Entry())
    frontier = builder.emit_block(program.statements, [entry])
    exit_id = builder.add(Exit())
    builder.link(frontier, exit_id)
    nodes = tuple(builder.nodes)
    return Cfg(
        nodes=nodes,
        edges=frozenset(builder.edges),
        entry=entry,
        exit=exit_id,
        assumptions=tuple(builder.assumptions),
        variables=_collect_variables(nodes),
    )


def parse_cfg(source: str) -> Cfg:
    return build_cfg(parse(source))


def restrict(cfg: Cfg, accepted: int) -> Cfg:
    """Keep only the assume nodes whose bit is set; others become skips.

    Node ids, edges, and the assumption list (hence atom indexing) are
    preserved, so analysis results of restricted variants stay comparable.
    """
    n = len(cfg.assumptions)
    if accepted < 0 or accepted >> n:
        raise ValueError(f"assumption set {accepted:#x} outside the program's {n} assumptions")
    nodes = []
    for node in cfg.nodes:
        if isinstance(node.op, Assume) and not (accepted >> node.op.assumption.index) & 1:
            nodes.append(CfgNode(node.id, Skip(), node.loop_head))
        else:
            nodes.append(node)
    return Cfg(tuple(nodes), cfg.edges, cfg.entry, cfg.exit, cfg.assumptions, cfg.variables)


def dump_cfg(cfg: Cfg) -> str:
    """Stable one-record-per-node text rendering (id, kind, succs)."""
    lines = []
    for node in cfg.nodes:
        succs = ",".join(str(s) for s in cfg.successors(node.id))
        lines.append(f"id={node.id} kind={node.render()} succs=[{succs}]")
    return "\n".join(lines) + "\n"
