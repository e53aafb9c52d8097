"""Command-line front end.

    stickychase classify PROG
    stickychase chase PROG [--budget N] [--trace] [--dump-instance FILE]
    stickychase answer PROG [QUERY] --selection bot|rank|exists|oracle:FILE [--strict] [--resumptions N]
    stickychase rewrite PROG [QUERY] [--seed N]
    stickychase check-semantic PROG --selection ... [--budget N] [--strict]
    stickychase oracle-answer PROG [QUERY] [--budget N]

QUERY defaults to the first query written in PROG. Either path may be "-" for stdin.
Exit status: 0 success, 1 not in class (with --strict), 2 parse or configuration error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from typing import Sequence, TextIO

from .chase import check_s_stickiness, classic_chase
from .classes import SelectionFunction, classify, mark_variables, oracle, selection
from .errors import NotInClass, StickyChaseError
from .graphs import rank_table
from .magic import default_sips, magicd_plus, random_sips
from .model import ConjunctiveQuery, Program
from .parser import parse_positions, parse_program, parse_query, render_instance, render_positions, term_json
from .qa import AnswerSet, oracle_answers, qchase, strict_gate

FORMAT_VERSION = 1
EXIT_OK, EXIT_NOT_IN_CLASS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _color(stream: TextIO) -> bool:
    if os.environ.get("STICKYCHASE_COLOR", "").lower() in ("0", "no", "never", "off", "false"):
        return False
    return stream.isatty()


def _paint(text: str, ok: bool, on: bool) -> str:
    return f"\x1b[{32 if ok else 31}m{text}\x1b[0m" if on else text


def _emit(data: dict, out: TextIO) -> None:
    out.write(json.dumps({"format_version": FORMAT_VERSION, **data}, sort_keys=True, indent=2) + "\n")


def _load(args: argparse.Namespace) -> tuple[Program, ConjunctiveQuery | None]:
    if args.program == "-" and getattr(args, "query", None) == "-":
        raise UsageError("only one input may come from stdin")
    program = parse_program(_read(args.program), args.program)
    query = None
    if getattr(args, "query", None):
        query = parse_query(_read(args.query), args.query, program.schema)
    elif program.queries:
        query = program.queries[0]
    return program, query


def _need_query(query: ConjunctiveQuery | None) -> ConjunctiveQuery:
    if query is None:
        raise UsageError("no query given: pass a query file or put one in the program")
    return query


def _selection(spec: str) -> SelectionFunction:
    if spec.startswith("oracle:"):
        path = spec[len("oracle:"):]
        return oracle(parse_positions(_read(path), path))
    try:
        return selection(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _answer_lines(ans: AnswerSet) -> list[str]:
    if ans.boolean:
        return ["true" if ans.truth else "false"]
    return [", ".join(term_json(t) for t in row) for row in ans.sorted()]


def _answer_json(ans: AnswerSet) -> dict:
    if ans.boolean:
        return {"boolean": True, "answer": ans.truth}
    return {"boolean": False, "answers": [[term_json(t) for t in row] for row in ans.sorted()]}


def _trace(steps, err: TextIO) -> None:
    for st in steps:
        err.write(json.dumps(st.to_json(), sort_keys=True) + "\n")


def _dump(path: str | None, inst, fmt: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render_instance(inst, fmt) + "\n")


# -- verbs ----------------------------------------------------------------

def cmd_classify(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    program, _ = _load(args)
    report = classify(program)
    if args.format == "json":
        _emit({**report.to_json(), "ranks": rank_table(program.rules, program.positions()).to_json()}, out)
        return EXIT_OK
    on = _color(out)
    for name, ok in report.flags().items():
        out.write(f"{name:<7}{_paint('yes' if ok else 'no', ok, on)}\n")
    out.write("finite-rank positions: " + " ".join(render_positions(report.finite_rank)) + "\n")
    out.write("finite ∃-rank positions: " + " ".join(render_positions(report.finite_existential)) + "\n")
    marking = mark_variables(program.rules)
    for r in program.rules:
        out.write(f"  {r.id}: {marking.render(r)}\n")
    return EXIT_OK


def cmd_chase(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    program, _ = _load(args)
    res = classic_chase(program, args.budget if args.budget is not None else 1000)
    if args.trace:
        _trace(res.steps, err)
    _dump(args.dump_instance, res.instance, args.format)
    if args.format == "json":
        _emit({"terminated": res.terminated, "steps": len(res.steps), **json.loads(render_instance(res.instance, "json"))}, out)
    else:
        out.write(render_instance(res.instance) + "\n")
        if not res.terminated:
            err.write(f"budget of {len(res.steps)} steps exhausted; instance is a prefix of the chase\n")
    return EXIT_OK


def cmd_answer(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    program, query = _load(args)
    query = _need_query(query)
    sel = _selection(args.selection)
    if args.strict:
        strict_gate(program, sel)
    state = qchase(program, query, sel, args.resumptions, args.budget)
    if args.trace:
        _trace(state.steps, err)
    _dump(args.dump_instance, state.instance, args.format)
    ans = state.answers(query)
    if args.format == "json":
        _emit({"selection": str(sel), "resumptions": state.resumptions_done, "exhausted": state.exhausted, **_answer_json(ans)}, out)
    else:
        lines = _answer_lines(ans)
        out.write("".join(line + "\n" for line in lines))
    if state.exhausted:
        err.write("step budget exhausted; answers may be incomplete\n")
    return EXIT_OK


def cmd_rewrite(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    program, query = _load(args)
    query = _need_query(query)
    sips = default_sips if args.seed is None else random_sips(args.seed)
    mp, report = magicd_plus(program, query, sips)
    if args.trace:
        err.write("".join(line + "\n" for line in mp.trace))
    if args.format == "json":
        _emit({"rules": [str(r) for r in mp.rules], "seeds": [f"{a!r}." for a in mp.seeds], "query": str(mp.query), **report}, out)
    else:
        for a in mp.seeds:
            out.write(f"{a!r}.\n")
        for r in mp.rules:
            out.write(f"{r}\n")
        out.write(f"{mp.query}\n")
        closure = report["closure"]
        err.write(f"JWS input={closure['input_JWS']} output={closure['output_JWS']}\n")
    return EXIT_OK


def cmd_check_semantic(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    program, _ = _load(args)
    sel = _selection(args.selection)
    verdict = check_s_stickiness(program, sel, args.budget if args.budget is not None else 500)
    if args.format == "json":
        _emit({"selection": str(sel), **verdict.to_json()}, out)
    else:
        out.write(_paint(verdict.label, not verdict.violated, _color(out)) + "\n")
        for w in verdict.witnesses:
            out.write(f"  {w}\n")
    return EXIT_NOT_IN_CLASS if verdict.violated and args.strict else EXIT_OK


def cmd_oracle_answer(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    program, query = _load(args)
    query = _need_query(query)
    ans, terminated = oracle_answers(program, query, args.budget if args.budget is not None else 10000)
    if args.format == "json":
        _emit({"terminated": terminated, **_answer_json(ans)}, out)
    else:
        out.write("".join(line + "\n" for line in _answer_lines(ans)))
    if not terminated:
        err.write("classic chase did not terminate within the budget; answers are a lower bound\n")
    return EXIT_OK


# -- argument parsing -----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="stickychase", description="Chase-based query answering for Datalog+ programs.")
    sub = top.add_subparsers(dest="verb", required=True)

    def verb(name: str, fn, help: str, query: bool = False, sel: bool = False) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("program", help="program file, or - for stdin")
        if query:
            p.add_argument("query", nargs="?", help="query file, or - for stdin")
        if sel:
            p.add_argument("--selection", required=True, help="bot, rank, exists or oracle:FILE")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--trace", action="store_true", help="write chase steps to stderr")
        p.set_defaults(fn=fn)
        return p

    verb("classify", cmd_classify, "report WA, JA, Sticky, WS and JWS membership")

    p = verb("chase", cmd_chase, "run the bounded classic chase")
    p.add_argument("--budget", type=int, help="step budget (default 1000)")
    p.add_argument("--dump-instance", metavar="FILE")

    p = verb("answer", cmd_answer, "answer a query with the query-dependent chase", query=True, sel=True)
    p.add_argument("--budget", type=int, help="step budget (default unbounded)")
    p.add_argument("--resumptions", type=int, help="override the number of resumptions")
    p.add_argument("--strict", action="store_true", help="refuse programs shown to be outside the class")
    p.add_argument("--dump-instance", metavar="FILE")

    p = verb("rewrite", cmd_rewrite, "apply the MagicD+ rewriting", query=True)
    p.add_argument("--seed", type=int, help="use a random sips drawn with this seed")

    p = verb("check-semantic", cmd_check_semantic, "search the bounded chase for stickiness violations", sel=True)
    p.add_argument("--budget", type=int, help="step budget (default 500)")
    p.add_argument("--strict", action="store_true", help="exit 1 when a violation is found")

    p = verb("oracle-answer", cmd_oracle_answer, "answer a query on the bounded classic chase", query=True)
    p.add_argument("--budget", type=int, help="step budget (default 10000)")
    return top


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name in ("budget", "resumptions"):
        value = getattr(args, name, None)
        if value is not None and value < 0:
            err.write(f"stickychase: --{name} must be non-negative\n")
            return EXIT_USAGE
    try:
        return args.fn(args, out, err)
    except NotInClass as exc:
        err.write(f"stickychase: {exc}\n")
        for w in exc.witnesses:
            err.write(f"  {w}\n")
        return EXIT_NOT_IN_CLASS
    except (UsageError, StickyChaseError) as exc:
        err.write(f"stickychase: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
