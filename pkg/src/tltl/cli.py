"""Batch command-line front end.

Exit codes: 0 success or true, 1 false or counterexample found, 2 usage or
input error, 3 evaluation budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from . import arith as ar
from . import emit
from . import formula as fm
from . import kripke as kr
from . import reduction as rd
from . import stutter as st
from . import suites
from . import trace as tr
from .errors import BudgetExceeded, HorizonOverflow, TltlError
from .evaluator import EvalContext, check_classical, default_budget
from .team import Team, load_team, team_to_json

log = logging.getLogger("tltl")

EXIT_TRUE, EXIT_FALSE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_HORIZON_CAP = 100_000
GLOBAL_DEFAULTS = {"budget": None, "horizon_cap": DEFAULT_HORIZON_CAP, "seed": 0, "format": "plain", "verbose": False}


@dataclass(frozen=True)
class RunConfig:
    budget: int
    horizon_cap: int
    seed: int
    output: str

    def __post_init__(self):
        if self.budget < 1 or self.horizon_cap < 1:
            raise ValueError("budget and horizon cap must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit natural")


class Reporter:
    """Plain lines, or one JSON object per line."""

    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def emit(self, text: str, **fields) -> None:
        if self.fmt == "json-lines":
            self.stream.write(json.dumps({"text": text, **fields}, sort_keys=True) + "\n")
        else:
            self.stream.write(text + "\n")


# ---------------------------------------------------------------- input helpers

def read_formula(value: str) -> fm.Formula:
    """A formula string, or @path / an existing file path holding one."""
    if value.startswith("@") and os.path.isfile(value[1:]):
        value = Path(value[1:]).read_text(encoding="utf-8")
    elif os.path.isfile(value):
        value = Path(value).read_text(encoding="utf-8")
    return fm.parse(value)


def read_arith(path: str) -> ar.AFormula:
    return ar.parse_sexpr(Path(path).read_text(encoding="utf-8"))


def read_trace(value: str, alphabet: Sequence[str]) -> tr.LassoTrace:
    doc = json.loads(Path(value).read_text(encoding="utf-8") if os.path.isfile(value) else value)
    return tr.trace_from_json(doc, alphabet)


def guarded_team(path: str, cfg: RunConfig) -> Team:
    T = load_team(path)
    H = T.horizon().H
    if H > cfg.horizon_cap:
        raise HorizonOverflow(f"team horizon {H} exceeds the cap {cfg.horizon_cap}")
    return T


def verdict(rep: Reporter, value: bool) -> int:
    rep.emit("true" if value else "false", value=value)
    return EXIT_TRUE if value else EXIT_FALSE


# ---------------------------------------------------------------- commands

def cmd_parse(a, cfg: RunConfig, rep: Reporter) -> int:
    phi = read_formula(a.formula)
    if a.desugar:
        phi = fm.desugar(phi, neg_to_singleton=a.singleton_negation)
    rep.emit(fm.to_text(phi))
    if a.info:
        rep.emit(f"size={fm.size(phi)}", size=fm.size(phi))
        rep.emit(f"temporal_depth={fm.temporal_depth(phi)}", temporal_depth=fm.temporal_depth(phi))
        rep.emit(f"props={','.join(sorted(fm.props(phi)))}", props=sorted(fm.props(phi)))
        rep.emit(f"tilde_free={fm.is_tilde_free(phi)}", tilde_free=fm.is_tilde_free(phi))
    if a.fragment:
        ops = [c for c in a.fragment.split(",") if c]
        ok = fm.fragment_check(phi, ops, a.depth, lenient=a.lenient)
        rep.emit(f"fragment={ok}", fragment=ok)
        return EXIT_TRUE if ok else EXIT_FALSE
    return EXIT_TRUE


def cmd_check(a, cfg: RunConfig, rep: Reporter) -> int:
    T = guarded_team(a.team, cfg)
    ctx = EvalContext(T, budget=cfg.budget)
    code = verdict(rep, ctx.check(read_formula(a.formula)))
    if a.stats:
        for line in ctx.stats.as_lines():
            rep.emit(line)
    return code


def cmd_classical(a, cfg: RunConfig, rep: Reporter) -> int:
    phi = read_formula(a.formula)
    if a.team:
        T = load_team(a.team)
        traces, alphabet = list(T.traces), list(T.alphabet)
    else:
        alphabet = a.alphabet.split(",") if a.alphabet else sorted(fm.props(phi))
        traces = [read_trace(a.trace, alphabet)]
    values = [check_classical(t, phi, alphabet) for t in traces]
    for t, v in zip(traces, values):
        rep.emit(f"{tr.format_trace(t, alphabet)}: {'true' if v else 'false'}", value=v)
    return EXIT_TRUE if all(values) else EXIT_FALSE


def cmd_stutter(a, cfg: RunConfig, rep: Reporter) -> int:
    teams = [load_team(p) for p in a.team]
    if a.action == "canon":
        if len(teams) != 1:
            raise UsageError("stutter canon takes exactly one --team")
        rep.emit(json.dumps(team_to_json(st.canonical_stutter_free(teams[0])), sort_keys=True))
        return EXIT_TRUE
    if a.action == "positions":
        rep.emit(" ".join(map(str, st.stuttering_positions(teams[0]))))
        return EXIT_TRUE
    if len(teams) != 2:
        raise UsageError("stutter equiv takes exactly two --team options")
    return verdict(rep, st.stutter_equivalent(teams[0], teams[1]))


def cmd_kripke(a, cfg: RunConfig, rep: Reporter) -> int:
    K = kr.load_kripke(a.kripke)
    if a.action == "validate":
        diags = kr.validate(K)
        for d in diags:
            rep.emit(str(d), kind=d.kind, state=d.state)
        if not diags:
            rep.emit("ok")
        return EXIT_TRUE if not diags else EXIT_FALSE
    problems = kr.validate(K)
    if problems:
        raise TltlError("invalid structure: " + "; ".join(map(str, problems)))
    if a.action == "member":
        if not a.trace:
            raise UsageError("kripke member needs --trace")
        return verdict(rep, kr.trace_member(K, read_trace(a.trace, K.alphabet)))
    if a.action == "enumerate":
        traces = kr.enumerate_ulp_traces(K, a.max_prefix, a.max_loop)
        for line in sorted(tr.format_trace(t, K.alphabet) for t in traces):
            rep.emit(line)
        return EXIT_TRUE
    if a.action == "chi":
        K2, chi = kr.chi_formula(K)
        rep.emit(fm.to_text(chi))
        if a.out_kripke:
            Path(a.out_kripke).write_text(json.dumps(kr.kripke_to_json(K2), sort_keys=True) + "\n", encoding="utf-8")
        return EXIT_TRUE
    rep.emit(kr.countability_class(K))
    return EXIT_TRUE


def _emitter(a) -> Callable[[fm.Formula], ar.AFormula]:
    rho3 = a.action == "emit-rho3"
    wrapper = a.wrapper
    if wrapper == "mc":
        if not a.kripke:
            raise UsageError("--wrapper mc needs --kripke")
        K = kr.load_kripke(a.kripke)
        return (lambda phi: emit.emit_rho3_mc(phi, K)) if rho3 else (
            lambda phi: emit.emit_rho2_mc_ulp(phi, K, constant=a.constant))
    table = {
        ("none", True): emit.emit_rho3,
        ("sat", True): emit.emit_rho3_sat,
        ("finsat", True): emit.emit_rho3_finsat,
        ("none", False): emit.emit_rho2,
        ("sat", False): emit.emit_rho2_sat_ulc if a.constant else emit.emit_rho2_sat_ulp,
        ("finsat", False): lambda phi: emit.emit_rho2_finsat_ulp(phi, constant=a.constant),
    }
    return table[(wrapper, rho3)]


def cmd_arith(a, cfg: RunConfig, rep: Reporter) -> int:
    if a.action in ("emit-rho3", "emit-rho2"):
        if not a.formula:
            raise UsageError(f"{a.action} needs --formula")
        out = _emitter(a)(read_formula(a.formula))
        rep.emit(ar.pretty(out, decimal=a.decimal) if a.pretty else ar.to_sexpr(out, decimal=a.decimal))
        return EXIT_TRUE
    if not a.arith:
        raise UsageError(f"arith {a.action} needs --arith")
    f = read_arith(a.arith)
    if a.action == "shape-check":
        problems = ar.shape_violations(f)
        for p in problems:
            rep.emit(p)
        if not problems:
            rep.emit("ok")
        return EXIT_TRUE if not problems else EXIT_FALSE
    if a.action == "eval":
        return verdict(rep, ar.bounded_eval(f, a.bound, a.set_bound))
    out = ar.prenex(f) if a.action == "prenex" else ar.normalize_arity(f)
    rep.emit(ar.pretty(out, decimal=a.decimal) if a.pretty else ar.to_sexpr(out, decimal=a.decimal))
    return EXIT_TRUE


def cmd_reduce(a, cfg: RunConfig, rep: Reporter) -> int:
    if a.action == "mc2sat":
        if not (a.kripke and a.formula):
            raise UsageError("mc2sat needs --kripke and --formula")
        out = rd.mc2sat(read_formula(a.formula), kr.load_kripke(a.kripke), a.mode)
        rep.emit(fm.to_text(out))
        return EXIT_TRUE
    if not a.arith:
        raise UsageError(f"reduce {a.action} needs --arith")
    psi = read_arith(a.arith)
    if a.action == "arith2mc":
        K, phi, varmap = rd.arith_to_mc(psi)
        doc = json.dumps(kr.kripke_to_json(K), sort_keys=True)
        if a.out_kripke:
            Path(a.out_kripke).write_text(doc + "\n", encoding="utf-8")
        else:
            rep.emit(doc)
        for v, kind in varmap.items():
            rep.emit(f"# {v}: {kind}")
        rep.emit(fm.to_text(phi))
        return EXIT_TRUE
    psi = ar.prenex(psi)
    T = rd.build_bounded_universe(psi, a.bound)
    return verdict(rep, EvalContext(T, budget=cfg.budget).check(rd.translate_rho(psi)))


def cmd_props(a, cfg: RunConfig, rep: Reporter) -> int:
    if a.action == "list":
        for name in suites.SUITES:
            rep.emit(name)
        return EXIT_TRUE
    names = list(suites.SUITES) if a.suite == "all" else [a.suite]
    unknown = [n for n in names if n not in suites.SUITES]
    if unknown:
        raise UsageError(f"unknown suite {unknown[0]!r}; choose from {', '.join(suites.SUITES)} or all")
    code = EXIT_TRUE
    for name in names:
        kw = {"golden_dir": a.golden_dir} if name == "fragments" and a.golden_dir else {}
        result = suites.SUITES[name](cfg.seed, **kw)
        for line in result.lines:
            rep.emit(f"  {line}", suite=name)
        rep.emit(result.summary(), suite=name, passed=result.passed)
        if not result.passed:
            code = EXIT_FALSE
    return code


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    # global options are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=argparse.SUPPRESS,
                        help="evaluation budget (default: TLTL_BUDGET or 10^8)")
    common.add_argument("--horizon-cap", type=int, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("plain", "json-lines"), default=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="tltl", parents=[common],
                                description="LTL with synchronous team semantics and Boolean negation.")
    # no set_defaults here: the actions are shared with every subparser, so a
    # default set on them would overwrite values given before the subcommand
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, **kw) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], **kw)

    s = add("parse", help="parse and print a formula")
    s.add_argument("formula")
    s.add_argument("--desugar", action="store_true")
    s.add_argument("--singleton-negation", action="store_true", help="with --desugar, push ! onto atoms")
    s.add_argument("--info", action="store_true")
    s.add_argument("--fragment", help="comma-separated temporal operators, e.g. F,G")
    s.add_argument("--depth", type=int, default=2)
    s.add_argument("--lenient", action="store_true")
    s.set_defaults(run=cmd_parse)

    s = add("check", help="decide T |= phi")
    s.add_argument("--team", required=True)
    s.add_argument("--formula", required=True)
    s.add_argument("--stats", action="store_true")
    s.set_defaults(run=cmd_check)

    s = add("classical", help="classical truth of a pure LTL formula per trace")
    s.add_argument("--formula", required=True)
    s.add_argument("--team")
    s.add_argument("--trace", help="trace literal or file")
    s.add_argument("--alphabet", help="comma-separated, for --trace")
    s.set_defaults(run=cmd_classical)

    s = add("stutter", help="stutter-free forms and equivalence")
    s.add_argument("action", choices=("canon", "equiv", "positions"))
    s.add_argument("--team", action="append", required=True)
    s.set_defaults(run=cmd_stutter)

    s = add("kripke", help="structure utilities")
    s.add_argument("action", choices=("validate", "member", "enumerate", "chi", "countability"))
    s.add_argument("--kripke", required=True)
    s.add_argument("--trace")
    s.add_argument("--max-prefix", type=int, default=3)
    s.add_argument("--max-loop", type=int, default=3)
    s.add_argument("--out-kripke")
    s.set_defaults(run=cmd_kripke)

    s = add("arith", help="arithmetic formulas and emitters")
    s.add_argument("action", choices=("prenex", "normalize", "emit-rho3", "emit-rho2", "shape-check", "eval"))
    s.add_argument("--arith", help="s-expression file")
    s.add_argument("--formula", help="team formula for the emitters")
    s.add_argument("--wrapper", choices=("none", "sat", "finsat", "mc"), default="none")
    s.add_argument("--kripke")
    s.add_argument("--constant", action="store_true", help="ultimately constant variant of the (I,P) emitters")
    s.add_argument("--decimal", action="store_true")
    s.add_argument("--pretty", action="store_true")
    s.add_argument("--bound", type=int, default=4)
    s.add_argument("--set-bound", type=int, default=None)
    s.set_defaults(run=cmd_arith)

    s = add("reduce", help="reduction generators")
    s.add_argument("action", choices=("arith2mc", "mc2sat", "bounded-check"))
    s.add_argument("--arith")
    s.add_argument("--kripke")
    s.add_argument("--formula")
    s.add_argument("--mode", choices=rd.MODES, default="withX")
    s.add_argument("--bound", type=int, default=4)
    s.add_argument("--out-kripke")
    s.set_defaults(run=cmd_reduce)

    s = add("props", help="seeded property suites")
    s.add_argument("action", choices=("run", "list"))
    s.add_argument("--suite", default="all")
    s.add_argument("--golden-dir")
    s.set_defaults(run=cmd_props)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_TRUE if e.code == 0 else EXIT_USAGE
    for name, value in GLOBAL_DEFAULTS.items():
        if not hasattr(a, name):
            setattr(a, name, value)
    logging.basicConfig(level=logging.DEBUG if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig(a.budget if a.budget is not None else default_budget(), a.horizon_cap, a.seed, a.format)
        return a.run(a, cfg, Reporter(cfg.output))
    except BudgetExceeded as e:
        print(f"tltl: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, TltlError, OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"tltl: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
