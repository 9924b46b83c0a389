"""Command-line interface.

Commands: analyze, synthesize, consistency, check-oracle, dump-cfg. Output
is deterministic text by default or JSON with --format json; documents
follow `DOCUMENT_SCHEMA`. Exit codes: 0 success, 1 usage/parse error,
2 analysis did not converge, 3 synthesis unknown, 4 synthesis impossible,
5 oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import consistency as consistency_mod
from . import synthesis as synthesis_mod
from .conditions import format_subset
from .engine import (
    AnalysisConfig,
    ParamAnalysisResult,
    WidthCapError,
    analyze_param,
    verify_equivalence,
    verify_soundness,
)
from .frontend import Cfg, ParseError, dump_cfg, parse_cfg

WIDTH_CAP_ENV = "PARAMAX_WIDTH_CAP"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_UNKNOWN = 3
EXIT_IMPOSSIBLE = 4
EXIT_MISMATCH = 5

# Published shape of every JSON document the CLI emits.
DOCUMENT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["program", "assumptions", "nodes", "meta"],
    "properties": {
        "program": {"type": "string"},
        "assumptions": {"type": "array", "items": {"type": "string"}},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind", "rules"],
                "properties": {
                    "id": {"type": "integer"},
                    "kind": {"type": "string"},
                    "rules": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["condition", "condition_sets", "state"],
                            "properties": {
                                "condition": {"type": "string"},
                                "condition_sets": {
                                    "type": "array",
                                    "items": {"type": "integer"},
                                },
                                "state": {
                                    "oneOf": [
                                        {"const": "bottom"},
                                        {
                                            "type": "object",
                                            "additionalProperties": {
                                                "type": "array",
                                                "minItems": 2,
                                                "maxItems": 2,
                                                "items": {
                                                    "oneOf": [
                                                        {"type": "integer"},
                                                        {"enum": ["-inf", "+inf"]},
                                                    ]
                                                },
                                            },
                                        },
                                    ]
                                },
                            },
                        },
                    },
                },
            },
        },
        "meta": {
            "type": "object",
            "required": ["iterations", "converged", "config"],
            "properties": {
                "iterations": {"type": "integer"},
                "converged": {"type": "boolean"},
                "config": {"type": "object"},
            },
        },
        "synthesis": {"type": "object"},
        "consistency": {"type": "object"},
        "oracle_reports": {"type": "array", "items": {"type": "object"}},
    },
}


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("source", help="path to a .pwl program")
    sub.add_argument("--format", choices=("text", "json"), default="text")
    sub.add_argument("--max-rules", type=int, default=None, metavar="N",
                     help="merge rules down to at most N per node")
    sub.add_argument("--widen", default="off", metavar="off|K",
                     help="widen loop heads from the K-th visit (default off)")
    sub.add_argument("--max-iters", type=int, default=1000, metavar="N")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paramax",
        description="Interval analysis parameterized by labeled program assumptions",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="per-node rule tables")
    _add_common_flags(analyze)

    synthesize = commands.add_parser(
        "synthesize", help="assumption subsets that prove every assertion"
    )
    _add_common_flags(synthesize)
    synthesize.add_argument("--verify-solutions", type=int, default=8, metavar="N",
                            help="re-prove up to N reported solutions (0 disables)")

    consistency = commands.add_parser(
        "consistency", help="bound the self-consistent assumption sets"
    )
    _add_common_flags(consistency)
    consistency.add_argument("--phi-table", action="store_true",
                             help="print the full operator table")

    oracle = commands.add_parser(
        "check-oracle", help="exhaustive brute-force verification sweeps"
    )
    _add_common_flags(oracle)
    oracle.add_argument("--theorem1", "--equivalence", dest="theorem1", action="store_true",
                        help="per-subset equality against fresh analyses")
    oracle.add_argument("--soundness", action="store_true",
                        help="concrete-state membership against enumerated executions")
    oracle.add_argument("--input-range", default="-8:8", metavar="LO:HI")
    oracle.add_argument("--max-steps", type=int, default=100_000, metavar="N")

    dump = commands.add_parser("dump-cfg", help="print the control-flow graph")
    dump.add_argument("source", help="path to a .pwl program")
    return parser


def _parse_widen(text: str) -> int | None:
    if text == "off":
        return None
    try:
        value = int(text)
    except ValueError:
        raise ValueError(f"--widen expects 'off' or a positive integer, got {text!r}")
    if value < 1:
        raise ValueError("--widen delay must be at least 1")
    return value


def _parse_range(text: str) -> tuple[int, int]:
    lo_text, sep, hi_text = text.rpartition(":")
    if not sep:
        raise ValueError(f"--input-range expects LO:HI, got {text!r}")
    try:
        lo, hi = int(lo_text), int(hi_text)
    except ValueError:
        raise ValueError(f"--input-range expects integers, got {text!r}")
    if lo > hi:
        raise ValueError("--input-range is empty")
    return lo, hi


def _make_config(args: argparse.Namespace) -> AnalysisConfig:
    cap = os.environ.get(WIDTH_CAP_ENV)
    extra = {}
    if cap is not None:
        try:
            extra["condition_width_cap"] = int(cap)
        except ValueError:
            raise ValueError(f"{WIDTH_CAP_ENV} must be an integer, got {cap!r}")
    return AnalysisConfig(
        max_iterations=args.max_iters,
        widening_delay=_parse_widen(args.widen),
        merge_budget=args.max_rules,
        **extra,
    )


def _load(path: str) -> tuple[str, Cfg]:
    with open(path, "r", encoding="utf-8") as handle:
        source = handle.read()
    return os.path.basename(path), parse_cfg(source)


def analysis_document(name: str, cfg: Cfg, result: ParamAnalysisResult) -> dict:
    return {
        "program": name,
        "assumptions": [a.label for a in cfg.assumptions],
        "nodes": [
            {
                "id": node.id,
                "kind": node.render(),
                "rules": result.states[node.id].to_json(),
            }
            for node in cfg.nodes
        ],
        "meta": {
            "iterations": result.iterations,
            "converged": result.converged,
            "config": result.config.to_json(),
        },
    }


def _render_analysis_text(name: str, cfg: Cfg, result: ParamAnalysisResult) -> str:
    lines = [f"program: {name}"]
    lines.append("assumptions: " + (", ".join(a.label for a in cfg.assumptions) or "(none)"))
    for node in cfg.nodes:
        lines.append(f"node {node.id} {node.render()}:")
        for rule in result.states[node.id].rules:
            lines.append(f"  {rule.render()}")
    lines.append(
        f"meta: iterations={result.iterations} converged={str(result.converged).lower()}"
    )
    return "\n".join(lines) + "\n"


def _emit(args: argparse.Namespace, document: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(document, indent=2))
    else:
        print(text, end="")


def _cmd_analyze(args: argparse.Namespace) -> int:
    name, cfg = _load(args.source)
    result = analyze_param(cfg, _make_config(args))
    _emit(args, analysis_document(name, cfg, result), _render_analysis_text(name, cfg, result))
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _format_subsets(subsets, cfg: Cfg, truncated: bool = False) -> str:
    rendered = ", ".join(format_subset(s, cfg.assumptions) for s in subsets)
    return f"[{rendered}]" + (" ... (truncated)" if truncated else "")


def _cmd_synthesize(args: argparse.Namespace) -> int:
    name, cfg = _load(args.source)
    config = _make_config(args)
    result = analyze_param(cfg, config)
    if not result.converged:
        print("analysis did not converge; try --widen", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    outcome = synthesis_mod.synthesize(result, cfg)

    document = analysis_document(name, cfg, result)
    document["synthesis"] = outcome.to_json()
    lines = [f"program: {name}", f"verdict: {outcome.verdict.value}"]
    from .conditions import render as render_condition

    lines.append(f"condition: {render_condition(outcome.condition)}")
    if outcome.verdict is synthesis_mod.SynthesisVerdict.SOLUTIONS:
        full = (1 << outcome.width)
        if not outcome.truncated and len(outcome.solutions) == full:
            lines.append("solutions: all subsets")
        else:
            lines.append(
                "solutions: " + _format_subsets(outcome.solutions, cfg, outcome.truncated)
            )
        lines.append("minimal: " + _format_subsets(outcome.minimal, cfg))
        if args.verify_solutions > 0:
            report = synthesis_mod.verify_solutions(
                cfg, outcome, config, limit=args.verify_solutions, program_name=name
            )
            document["oracle_reports"] = [report.to_json()]
            status = "ok" if report.passed else "FAILED"
            lines.append(
                f"verification: {status} ({report.subsets_checked} solutions re-proved)"
            )
    for node_id, rows in outcome.per_assertion.items():
        lines.append(f"assertion at node {node_id}:")
        for cond, verdict in rows:
            lines.append(f"  {render_condition(cond)} -> {verdict.value}")
    _emit(args, document, "\n".join(lines) + "\n")
    if outcome.verdict is synthesis_mod.SynthesisVerdict.SOLUTIONS:
        return EXIT_OK
    if outcome.verdict is synthesis_mod.SynthesisVerdict.UNKNOWN:
        return EXIT_UNKNOWN
    return EXIT_IMPOSSIBLE


def _cmd_consistency(args: argparse.Namespace) -> int:
    name, cfg = _load(args.source)
    result = analyze_param(cfg, _make_config(args))
    if not result.converged:
        print("analysis did not converge; try --widen", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    report = consistency_mod.consistency_report(
        result, cfg, include_phi_table=args.phi_table or None
    )
    document = analysis_document(name, cfg, result)
    document["consistency"] = report.to_json()
    lines = [f"program: {name}"]
    lines.append(f"core: {format_subset(report.core, cfg.assumptions)}")
    lines.append(f"envelope: {format_subset(report.envelope, cfg.assumptions)}")
    for label, membership in report.classification.items():
        lines.append(f"{label}: {membership.value}")
    if report.fixpoints is not None:
        lines.append("consistent-sets: " + _format_subsets(report.fixpoints, cfg))
    if args.phi_table and report.phi_table is not None:
        lines.append("phi-table:")
        for accepted, image in report.phi_table.items():
            lines.append(
                f"  {format_subset(accepted, cfg.assumptions)}"
                f" -> {format_subset(image, cfg.assumptions)}"
            )
    _emit(args, document, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_check_oracle(args: argparse.Namespace) -> int:
    name, cfg = _load(args.source)
    config = _make_config(args)
    input_range = _parse_range(args.input_range)
    run_equivalence = args.theorem1 or not (args.theorem1 or args.soundness)
    run_soundness = args.soundness or not (args.theorem1 or args.soundness)
    reports = []
    if run_equivalence:
        reports.append(verify_equivalence(cfg, config, program_name=name))
    if run_soundness:
        reports.append(
            verify_soundness(
                cfg,
                config,
                input_range=input_range,
                step_bound=args.max_steps,
                program_name=name,
            )
        )
    result = analyze_param(cfg, config)
    document = analysis_document(name, cfg, result)
    document["oracle_reports"] = [r.to_json() for r in reports]
    lines = [f"program: {name}"]
    for report in reports:
        status = "pass" if report.passed else f"FAIL ({len(report.mismatches)} mismatches)"
        extra = f", {len(report.skipped)} skipped" if report.skipped else ""
        extra += f", {len(report.partial)} partial" if report.partial else ""
        lines.append(
            f"{report.check}: {status} ({report.subsets_checked} subsets, mode={report.mode}{extra})"
        )
        for mismatch in report.mismatches[:10]:
            lines.append(f"  mismatch: {json.dumps(mismatch)}")
    _emit(args, document, "\n".join(lines) + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_MISMATCH


def _cmd_dump_cfg(args: argparse.Namespace) -> int:
    _, cfg = _load(args.source)
    print(dump_cfg(cfg), end="")
    return EXIT_OK


def _join_range_flag(argv: list[str]) -> list[str]:
    # argparse mistakes "-2:13" for a flag; fold the value into the option.
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--input-range" and i + 1 < len(argv):
            out.append(f"--input-range={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    argv = _join_range_flag(list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    handlers = {
        "analyze": _cmd_analyze,
        "synthesize": _cmd_synthesize,
        "consistency": _cmd_consistency,
        "check-oracle": _cmd_check_oracle,
        "dump-cfg": _cmd_dump_cfg,
    }
    try:
        return handlers[args.command](args)
    except ParseError as exc:
        print(f"{args.source}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WidthCapError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
