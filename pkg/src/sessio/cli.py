"""Command-line front door: ``python -m sessio <command> ...``.

Exit codes: 0 accept / deadlock-free / ran, 1 reject / deadlock, 2 parse or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from sessio.apcp import check_apcp, render_constraints, render_priorities
from sessio.checker import check_acp, check_ap
from sessio.lastn.config import DEFAULT_MAX_STATES, explore_config, load_program, run_config
from sessio.lastn.parser import parse_term
from sessio.lastn.terms import show_fun_type
from sessio.lastn.typing import LastTypeError
from sessio.parser import ParseError, parse_context
from sessio.process import show
from sessio.reduction import DEFAULT_MAX_STEPS, explore, run
from sessio.source import load_process
from sessio.translation import trans_config
from sessio.types import show_type

OK, FAIL, USAGE = 0, 1, 2

CHECKERS = {"ap": check_ap, "acp": check_acp}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sessio", description="Session-typed process checking, reduction and translation.")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="type-check a process")
    c.add_argument("file")
    c.add_argument("--discipline", choices=["ap", "acp", "apcp"], default="ap")
    c.add_argument("--context", help="file of 'name : Type' entries (default: the file's header)")
    _apcp_flags(c)

    i = sub.add_parser("infer", help="infer priorities (APCP)")
    i.add_argument("file")
    i.add_argument("--context")
    _apcp_flags(i)

    r = sub.add_parser("run", help="reduce along one path")
    r.add_argument("file")
    r.add_argument("--steps", type=int, default=DEFAULT_MAX_STEPS)
    r.add_argument("--strategy", choices=["first", "random"], default="first")
    r.add_argument("--seed", type=int)

    e = sub.add_parser("explore", help="search all reachable states for deadlocks")
    e.add_argument("file")
    e.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)

    t = sub.add_parser("translate", help="translate a LAST^n program to a process")
    t.add_argument("file")
    t.add_argument("out", nargs="?")

    pl = sub.add_parser("pipeline", help="translate, check APCP and report a deadlock verdict")
    pl.add_argument("file")
    pl.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    _apcp_flags(pl)
    for cmd in (c, i, r, e, t, pl):
        cmd.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    return p


def _apcp_flags(p):
    p.add_argument("--emit-constraints", action="store_true")
    p.add_argument("--emit-priorities", action="store_true")


# -- helpers ----------------------------------------------------------------------

def _is_lastn(path: str) -> bool:
    return Path(path).suffix == ".lastn"


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from e


def _load(args):
    try:
        src = load_process(args.file)
    except OSError as e:
        raise UsageError(f"cannot read {args.file}: {e.strerror or e}") from e
    ctx = src.context
    if getattr(args, "context", None):
        ctx = parse_context(_read(args.context))
    return src.process, ctx


def _load_lastn(path: str):
    return load_program(parse_term(_read(path)))


def _seed(args) -> int:
    env = os.environ.get("SESSIO_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as e:
            raise UsageError(f"SESSIO_SEED must be an integer, got {env!r}") from e
    return args.seed if args.seed is not None else 0


def _apcp_payload(result, args) -> tuple[list, dict]:
    """Extra human lines and JSON fields requested by the emit flags."""
    lines, data = [], {}
    if args.emit_constraints:
        lines += ["constraints:", render_constraints(result.constraints)]
        data["constraints"] = render_constraints(result.constraints).splitlines()
    if args.emit_priorities and result.accepted:
        lines += ["priorities:", render_priorities(result)]
        data["priorities"] = {n: show_type(t) for n, t in sorted(result.annotated_context().items())}
        data["process"] = show(result.annotated_process())
    return lines, data


# -- commands -----------------------------------------------------------------------

def cmd_check(args):
    p, ctx = _load(args)
    if args.discipline == "apcp":
        result = check_apcp(p, ctx)
        verdict = result.verdict
        lines, data = _apcp_payload(result, args)
    else:
        verdict = CHECKERS[args.discipline](p, ctx)
        lines, data = [], {}
    return (OK if verdict.accepted else FAIL), [verdict.render(), *lines], {**verdict.to_json(), **data}


def cmd_infer(args):
    p, ctx = _load(args)
    result = check_apcp(p, ctx)
    args.emit_priorities = True
    lines, data = _apcp_payload(result, args)
    return (OK if result.accepted else FAIL), [result.verdict.render(), *lines], {**result.verdict.to_json(), **data}


def cmd_run(args):
    if args.steps < 0:
        raise UsageError("--steps must be non-negative")
    seed = _seed(args)
    if _is_lastn(args.file):
        c, _ = _load_lastn(args.file)
        trace = run_config(c, args.steps, args.strategy, seed)
        lines = [f"init: {c}"]
        for n, (label, d) in enumerate(trace, 1):
            lines += [f"step {n}: {label}", f"  {d}"]
        data = {"initial": str(c), "steps": [{"step": n, "kind": label, "state": str(d)}
                                             for n, (label, d) in enumerate(trace, 1)]}
        return OK, lines, data
    p, _ = _load(args)
    trace = run(p, args.steps, args.strategy, seed)
    return OK, [trace.render()], trace.to_json()


def cmd_explore(args):
    if args.max_states < 1:
        raise UsageError("--max-states must be at least 1")
    if _is_lastn(args.file):
        c, _ = _load_lastn(args.file)
        rep = explore_config(c, args.max_states)
        lines = [f"states: {rep.states}", f"finals: {len(rep.finals)}", f"deadlocked: {len(rep.stuck)}",
                 f"truncated: {str(rep.truncated).lower()}"]
        lines += [f"  stuck: {s}" for s in rep.stuck]
        return (OK if rep.deadlock_free else FAIL), lines, rep.to_json()
    p, _ = _load(args)
    rep = explore(p, args.max_states)
    data = rep.to_json()
    lines = [f"states: {rep.states_visited}", f"transitions: {rep.transitions}",
             f"terminals: {len(rep.terminals)}", f"deadlocked: {len(rep.deadlocked)}",
             f"truncated: {str(rep.truncated).lower()}"]
    lines += [f"  deadlocked: {k}" for k in data["deadlocked"]]
    return (OK if rep.deadlock_free else FAIL), lines, data


def _translation(path):
    c, t = _load_lastn(path)
    return c, t, trans_config(c)


def translation_text(path: str, tr, t) -> str:
    ctx = ", ".join(f"{n} : {show_type(a)}" for n, a in sorted(tr.context.items()))
    return "\n".join([
        f"-- translation of {Path(path).name} : {show_fun_type(t)}",
        f"-- result: {tr.result_name}",
        f"-- context: {ctx or '(closed)'}",
        show(tr.process),
        "",
    ])


def cmd_translate(args):
    _, t, tr = _translation(args.file)
    text = translation_text(args.file, tr, t)
    data = {"type": show_fun_type(t), "result": tr.result_name,
            "context": {n: show_type(a) for n, a in sorted(tr.context.items())}, "process": show(tr.process)}
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as e:
            raise UsageError(f"cannot write {args.out}: {e.strerror or e}") from e
        return OK, [f"wrote {args.out}"], data
    return OK, [text.rstrip("\n")], data


def cmd_pipeline(args):
    c, t, tr = _translation(args.file)
    result = check_apcp(tr.process, tr.context)
    rep = explore_config(c, args.max_states)
    if result.accepted and rep.deadlock_free:
        verdict, code = "DEADLOCK-FREE", OK
    elif result.accepted:
        verdict, code = "INCONSISTENT", FAIL  # would contradict deadlock freedom
    elif rep.stuck:
        verdict, code = "DEADLOCK", FAIL
    else:
        verdict, code = "NOT CERTIFIED", FAIL
    lines = [f"program : {show_fun_type(t)}", f"translation: {result.verdict.render()}",
             f"source: {rep.states} states, {len(rep.finals)} final, {len(rep.stuck)} stuck"
             + (", truncated" if rep.truncated else ""), f"verdict: {verdict}"]
    extra, data = _apcp_payload(result, args)
    data = {"type": show_fun_type(t), "apcp": result.verdict.to_json(), "source": rep.to_json(),
            "verdict": verdict, **data}
    return code, lines + extra, data


COMMANDS = {"check": cmd_check, "infer": cmd_infer, "run": cmd_run, "explore": cmd_explore,
            "translate": cmd_translate, "pipeline": cmd_pipeline}


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        code, lines, data = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=err)
        return USAGE
    except ParseError as e:
        print(f"parse error: {e}", file=err)
        return USAGE
    except LastTypeError as e:
        print(f"REJECT LAST: {e}", file=out)
        return FAIL
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False), file=out)
    else:
        print("\n".join(lines), file=out)
    return code


if __name__ == "__main__":
    sys.exit(main())
