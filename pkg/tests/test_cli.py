"""Command-line surface: parsing, reports, exit codes, determinism."""

import json
import math
import subprocess
import sys

import pytest

from rucgames.cli import main

SQRT2 = math.sqrt(2.0)

RUN_GAME = "0 1\n2 0\n"
ASYM = "0 2\n1 0\n"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSolve:
    def test_run_game_human_report(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        code, out, err = run(capsys, "solve", a, a)
        assert code == 0 and err == ""
        assert "branch: irreducible" in out
        assert "1.414213" in out
        assert "uniqueness: unique" in out

    def test_run_game_structured_report(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        code, out, _ = run(capsys, "solve", a, a, "--format", "structured")
        assert code == 0
        doc = json.loads(out)
        assert doc["schema_version"] == 1 and doc["command"] == "solve"
        eq = doc["equilibrium"]
        assert eq["branch"] == "irreducible"
        assert eq["max_value"]["value"] == pytest.approx(SQRT2, abs=1e-9)
        assert eq["max_strategy"][0] == pytest.approx(SQRT2 / (1 + SQRT2), abs=1e-9)

    def test_free_edge_reports_infinite_token(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", "0 1\n1 0\n")
        b = write(tmp_path, "b.txt", "0 0\n1 0\n")
        code, out, _ = run(capsys, "solve", a, b, "--format", "structured")
        assert code == 0
        eq = json.loads(out)["equilibrium"]
        assert eq["branch"] == "trivial-edge"
        assert eq["max_value"] == {"kind": "infinite", "value": "infinite"}
        assert eq["min_value"]["value"] == 0.0

    def test_single_scoreless_action_uses_zero_column(self, tmp_path, capsys):
        z = write(tmp_path, "z.txt", "0\n")
        code, out, _ = run(capsys, "solve", z, z)
        assert code == 0
        assert "branch: zero-column" in out

    def test_out_flag_writes_file(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        report = tmp_path / "report.json"
        code, out, _ = run(capsys, "solve", a, a, "--format", "structured",
                           "--out", str(report))
        assert code == 0 and out == ""
        assert json.loads(report.read_text())["command"] == "solve"

    def test_ragged_file_is_input_error(self, tmp_path, capsys):
        bad = write(tmp_path, "bad.txt", "0 1\n2\n")
        code, _, err = run(capsys, "solve", bad, bad)
        assert code == 2
        assert err.startswith("error[")

    def test_negative_entry_is_input_error(self, tmp_path, capsys):
        bad = write(tmp_path, "bad.txt", "0 1\n-2 0\n")
        code, _, err = run(capsys, "solve", bad, bad)
        assert code == 2
        assert "line 2" in err

    def test_mismatched_pair_is_input_error(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        b = write(tmp_path, "b.txt", "0 1 1\n1 0 1\n1 1 0\n")
        code, _, err = run(capsys, "solve", a, b)
        assert code == 2

    def test_missing_file_is_input_error(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        code, _, err = run(capsys, "solve", a, str(tmp_path / "nope.txt"))
        assert code == 2

    def test_underflowing_tail_is_numerical_error(self, tmp_path, capsys):
        rows = [
            "1 1 0 0",
            "0 1 1 0",
            "0 0 1 1e-200",
            "0 0 0 1",
        ]
        m = write(tmp_path, "m.txt", "\n".join(rows) + "\n")
        code, _, err = run(capsys, "solve", m, m)
        assert code == 3
        assert "error[TailUnderflow]" in err


class TestVerify:
    def test_solved_strategies_round_trip(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        code, out, _ = run(capsys, "solve", a, a, "--format", "structured")
        assert code == 0
        eq = json.loads(out)["equilibrium"]
        x = write(tmp_path, "x.txt", " ".join(repr(w) for w in eq["max_strategy"]))
        y = write(tmp_path, "y.txt", " ".join(repr(w) for w in eq["min_strategy"]))
        code, out, _ = run(capsys, "verify", a, a, x, y, "--format", "structured")
        assert code == 0
        doc = json.loads(out)
        assert doc["certified"] is True
        assert doc["certificate"]["eps"] <= 2e-10

    def test_uniform_pair_names_best_deviations(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", ASYM)
        u = write(tmp_path, "u.txt", "0.5 0.5")
        code, out, _ = run(capsys, "verify", a, a, u, u, "--format", "structured")
        assert code == 0
        doc = json.loads(out)
        assert doc["certificate"]["eps"] == pytest.approx(0.5, abs=1e-12)
        assert doc["best_deviation_max"] == {"action": 0, "payoff": pytest.approx(2.0)}
        assert doc["best_deviation_min"] == {"action": 0, "payoff": pytest.approx(1.0)}

    def test_short_sum_rejected_with_measured_total(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", ASYM)
        u = write(tmp_path, "u.txt", "0.5 0.5")
        bad = write(tmp_path, "bad.txt", "0.25 0.25")
        code, _, err = run(capsys, "verify", a, a, bad, u)
        assert code == 2
        assert "0.5" in err

    def test_partial_support_reports_unavailable(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", ASYM)
        u = write(tmp_path, "u.txt", "0.5 0.5")
        pure = write(tmp_path, "pure.txt", "1 0")
        code, out, _ = run(capsys, "verify", a, a, pure, u, "--format", "structured")
        assert code == 0
        doc = json.loads(out)
        assert doc["certified"] is False
        assert doc["reason"]["code"] == "NotFullSupport"


class TestSimulate:
    def test_equilibrium_agents_match_analytic(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        code, out, _ = run(
            capsys, "simulate", a, a, "--max-agent", "equilibrium",
            "--min-agent", "equilibrium", "--trials", "20000", "--seed", "11",
            "--format", "structured",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["backend"] in ("numba", "numpy")
        assert abs(doc["analytic"]["max"]["z_score"]) <= 4
        assert abs(doc["analytic"]["min"]["z_score"]) <= 4
        assert doc["empirical"]["max"]["trials"] == 20000

    def test_repeated_runs_are_byte_identical(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        outputs = []
        for run_index in range(2):
            path = tmp_path / f"report-{run_index}.json"
            code, _, _ = run(
                capsys, "simulate", a, a, "--trials", "5000", "--seed", "3",
                "--format", "structured", "--out", str(path),
            )
            assert code == 0
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]

    def test_pure_and_file_agent_specs(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        dist = write(tmp_path, "dist.txt", "0.25 0.75")
        code, out, _ = run(
            capsys, "simulate", a, a, "--max-agent", "pure:0",
            "--min-agent", f"file:{dist}", "--trials", "200", "--seed", "5",
            "--format", "structured",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["agents"]["max"] == "pure:0"
        assert doc["truncation_rate"] == 0.0

    def test_scripted_agents_fall_back_to_python_backend(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        code, out, _ = run(
            capsys, "simulate", a, a, "--max-agent", "copy-last",
            "--min-agent", "cycle", "--trials", "50", "--seed", "9",
            "--format", "structured",
        )
        assert code == 0
        assert json.loads(out)["backend"] == "python"

    def test_geometric_rule_spec(self, tmp_path, capsys):
        a = write(tmp_path, "a.txt", RUN_GAME)
        code, out, _ = run(
            capsys, "simulate", a, a, "--rule", "geometric:0.5",
            "--trials", "2000", "--seed", "13", "--format", "structured",
        )
        assert code == 0
        assert json.loads(out)["rule"] == {"kind": "geometric", "p": 0.5}

    @pytest.mark.parametrize(
        "flags",
        [
            ("--rule", "sometimes:2"),
            ("--rule", "geometric:0"),
            ("--trials", "0"),
            ("--max-agent", "pure:9"),
            ("--max-agent", "mystery"),
        ],
    )
    def test_bad_specs_exit_two(self, tmp_path, capsys, flags):
        a = write(tmp_path, "a.txt", RUN_GAME)
        code, _, err = run(capsys, "simulate", a, a, *flags)
        assert code == 2
        assert err.startswith("error[")


class TestHandcricket:
    def test_variant_two_standard_game(self, capsys):
        code, out, _ = run(capsys, "handcricket", "--variant", "2",
                           "1", "2", "3", "4", "5", "6", "--format", "structured")
        assert code == 0
        doc = json.loads(out)
        assert doc["value"] == 21.0
        assert doc["equilibrium"]["max_strategy"] == pytest.approx([1 / 7] * 7)

    def test_variant_one_bracket(self, capsys):
        code, out, _ = run(capsys, "handcricket", "--variant", "1", "1", "2",
                           "--format", "structured")
        assert code == 0
        doc = json.loads(out)
        lo, hi = doc["value_bracket"]
        assert lo <= SQRT2 <= hi
        assert "error_bounds" in doc
        assert doc["error_bounds"]["batter_value_factor"] <= 1.0

    def test_variant_one_equal_scores_collapse(self, capsys):
        code, out, _ = run(capsys, "handcricket", "--variant", "1", "2", "2",
                           "--format", "structured")
        assert code == 0
        doc = json.loads(out)
        assert doc["value_bracket"] == [2.0, 2.0]

    def test_variant_one_single_score_rejected(self, capsys):
        code, _, err = run(capsys, "handcricket", "--variant", "1", "4")
        assert code == 2
        assert "error[TooFewActions]" in err


class TestModuleEntry:
    def test_python_dash_m_invocation(self, tmp_path):
        a = tmp_path / "a.txt"
        a.write_text(RUN_GAME, encoding="utf-8")
        proc = subprocess.run(
            [sys.executable, "-m", "rucgames", "solve", str(a), str(a)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "branch: irreducible" in proc.stdout
