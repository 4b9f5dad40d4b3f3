import json
import subprocess
import sys
from importlib.resources import files

import pytest

from tltl.cli import main

DATA = files("tltl") / "data"


def data(name):
    return str(DATA / name)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestCheck:
    def test_true_and_false(self, capsys):
        assert run(capsys, "check", "--team", data("motivating_team.json"), "--formula", "F p | F p") == (0, "true\n")
        assert run(capsys, "check", "--team", data("motivating_team.json"), "--formula", "F p") == (1, "false\n")

    def test_missing_file(self, capsys):
        assert run(capsys, "check", "--team", "/nonexistent.json", "--formula", "p")[0] == 2

    def test_parse_error(self, capsys):
        assert run(capsys, "check", "--team", data("motivating_team.json"), "--formula", "p &")[0] == 2

    def test_unknown_proposition(self, capsys):
        assert run(capsys, "check", "--team", data("motivating_team.json"), "--formula", "q")[0] == 2

    def test_budget(self, capsys):
        code, _ = run(capsys, "--budget", "3", "check", "--team", data("motivating_team.json"),
                      "--formula", "(F p | G p) | X p")
        assert code == 3

    def test_horizon_cap(self, capsys):
        code, _ = run(capsys, "check", "--horizon-cap", "2", "--team", data("motivating_team.json"), "--formula", "p")
        assert code == 2

    def test_json_lines(self, capsys):
        code, out = run(capsys, "check", "--format", "json-lines", "--team", data("motivating_team.json"),
                        "--formula", "F p | F p")
        assert code == 0 and json.loads(out) == {"text": "true", "value": True}

    def test_stats(self, capsys):
        code, out = run(capsys, "check", "--stats", "--team", data("motivating_team.json"), "--formula", "F p | F p")
        assert code == 0 and len(out.splitlines()) > 1


class TestOtherCommands:
    def test_parse(self, capsys):
        code, out = run(capsys, "parse", "G p", "--desugar")
        assert code == 0 and out.strip()
        code, out = run(capsys, "parse", "F G p", "--fragment", "F,G", "--depth", "1")
        assert code == 1 and "fragment=False" in out

    def test_parse_info(self, capsys):
        code, out = run(capsys, "parse", "F (p & ~q)", "--info")
        assert code == 0 and "temporal_depth=1" in out and "tilde_free=False" in out

    def test_classical(self, capsys):
        code, _ = run(capsys, "classical", "--formula", "F p", "--team", data("motivating_team.json"))
        assert code == 0
        trace = json.dumps({"prefix": [], "loop": [[]]})
        assert run(capsys, "classical", "--formula", "F p", "--trace", trace, "--alphabet", "p")[0] == 1

    def test_stutter(self, capsys):
        code, out = run(capsys, "stutter", "equiv", "--team", data("stutter_short.json"),
                        "--team", data("stutter_long.json"))
        assert code == 0 and out == "true\n"
        assert run(capsys, "stutter", "canon", "--team", data("stutter_long.json"))[0] == 0

    def test_kripke(self, capsys):
        assert run(capsys, "kripke", "validate", "--kripke", data("number_gadget.json"))[0] == 0
        code, out = run(capsys, "kripke", "countability", "--kripke", data("flip_flop.json"))
        assert code == 0 and "Uncountable" in out
        assert run(capsys, "kripke", "enumerate", "--kripke", data("flip_flop.json"),
                   "--max-prefix", "1", "--max-loop", "2")[0] == 0

    def test_arith(self, capsys):
        code, out = run(capsys, "arith", "eval", "--arith", data("less_than.sexp"), "--bound", "3")
        assert code == 0 and out == "true\n"
        assert run(capsys, "arith", "shape-check", "--arith", data("less_than.sexp"))[0] == 0
        code, out = run(capsys, "arith", "emit-rho3", "--formula", "p")
        assert code == 0 and "(ho a S1)" in out

    def test_reduce(self, capsys):
        assert run(capsys, "reduce", "bounded-check", "--arith", data("less_than.sexp"), "--bound", "3")[0] == 0
        code, out = run(capsys, "reduce", "mc2sat", "--kripke", data("flip_flop.json"),
                        "--formula", "F G q", "--mode", "xFree")
        assert code == 0 and "@hash" in out
        assert run(capsys, "reduce", "mc2sat", "--kripke", data("flip_flop.json"),
                   "--formula", "X q", "--mode", "xFree")[0] == 2

    def test_props_list(self, capsys):
        code, out = run(capsys, "props", "list")
        assert code == 0 and "stutter" in out

    def test_bad_subcommand(self, capsys):
        assert main(["frobnicate"]) == 2
        capsys.readouterr()


def test_same_seed_same_bytes(tmp_path):
    cmd = [sys.executable, "-m", "tltl.cli", "props", "run", "--suite", "downward", "--seed", "11"]
    outs = [subprocess.run(cmd, capture_output=True, text=True) for _ in range(2)]
    assert outs[0].returncode == outs[1].returncode == 0

    def strip_time(text):
        return [line for line in text.splitlines() if "elapsed" not in line]

    assert strip_time(outs[0].stdout) == strip_time(outs[1].stdout)
