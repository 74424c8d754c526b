import json
from fractions import Fraction

import pytest

from rivershare import Geometric, evaluate, parse_problem
from rivershare.cli import main, parse_rule_text
from rivershare.data import format_decimal
from rivershare.rules import (
    AdditiveDelta,
    Beta,
    FullTransfer,
    Lambda,
    MultiGeometric,
    NoTransfer,
    Serial,
)

F = Fraction


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRuleGrammar:
    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ("no-transfer", NoTransfer()),
            ("full-transfer", FullTransfer()),
            ("serial", Serial()),
            ("geometric:1/2", Geometric(F(1, 2))),
            ("geometric:0.25", Geometric(F(1, 4))),
            ("multi:1/2,1/3,1", MultiGeometric((F(1, 2), F(1, 3), F(1)))),
            ("beta:2:1/2", Beta(2, F(1, 2))),
            ("delta:1/2,1/2,1", AdditiveDelta((F(1, 2), F(1, 2), F(1)))),
            ("lambda:3/4", Lambda(F(3, 4))),
        ],
    )
    def test_accepted(self, text, expected):
        assert parse_rule_text(text) == expected

    @pytest.mark.parametrize(
        "text",
        ["bogus", "geometric", "geometric:3/2", "beta:2", "multi:1/2,1/2", "lambda:-1"],
    )
    def test_rejected(self, text):
        import argparse

        with pytest.raises(argparse.ArgumentTypeError):
            parse_rule_text(text)


class TestAllocate:
    def test_half_retention_matches_published_column(self, capsys, nile_problem):
        code, out, _ = run(
            capsys, "allocate", "--rule", "geometric:1/2", "--problem", "nile"
        )
        assert code == 0
        for cell in ("8.40", "12.30", "14.95", "26.30", "20.98"):
            assert cell in out

    def test_json_exact_matches_engine(self, capsys, nile_problem):
        code, out, _ = run(
            capsys,
            "allocate",
            "--rule",
            "geometric:1/2",
            "--problem",
            "nile",
            "--format",
            "json",
        )
        doc = json.loads(out)
        expected = evaluate(Geometric(F(1, 2)), nile_problem)
        assert doc["columns"][0]["exact"] == [str(v) for v in expected.amounts]

    def test_text_is_half_up_of_json(self, capsys):
        _, text_out, _ = run(capsys, "allocate", "--rule", "serial")
        _, json_out, _ = run(
            capsys, "allocate", "--rule", "serial", "--format", "json"
        )
        column = json.loads(json_out)["columns"][0]
        for exact, rounded in zip(column["exact"], column["rounded"]):
            assert format_decimal(F(exact), 2) == rounded
            assert rounded in text_out


class TestCompare:
    def test_columns_in_flag_order(self, capsys):
        code, out, _ = run(
            capsys,
            "compare",
            "--rule",
            "no-transfer",
            "--rule",
            "serial",
            "--problem",
            "nile",
            "--format",
            "csv",
        )
        assert code == 0
        assert out.splitlines()[0] == "agent,e,no-transfer,serial"


class TestRationalize:
    def test_published_rounded_vector(self, capsys):
        code, out, _ = run(capsys, "rationalize", "--problem", "nile")
        assert code == 0
        for cell in ("0.26", "0.02", "0.01", "0.17"):
            assert cell in out

    def test_json_structure(self, capsys):
        code, out, _ = run(
            capsys, "rationalize", "--problem", "nile", "--format", "json"
        )
        doc = json.loads(out)
        assert doc["alpha_rounded"] == ["0.26", "0.02", "0.01", "0.17", "0.26", "1.00"]
        assert all(flag == "exact" for flag in doc["flags"])
        assert 0 <= doc["uniform_fit"]["gamma"] <= 1

    def test_raw_observation_is_a_domain_error(self, capsys):
        code, out, err = run(capsys, "rationalize", "--observed", "raw")
        assert code == 1
        assert out == ""
        assert "error:" in err


class TestAxiomCommands:
    def test_search_finds_witness_and_exits_zero(self, capsys):
        code, out, _ = run(
            capsys,
            "axioms-search",
            "--rule",
            "serial",
            "--axiom",
            "equal-sources",
            "--seed",
            "1",
        )
        assert code == 0
        assert "witness" in out

    def test_fail_on_witness_flips_exit(self, capsys):
        code, _, _ = run(
            capsys,
            "axioms-search",
            "--rule",
            "serial",
            "--axiom",
            "equal-sources",
            "--seed",
            "1",
            "--fail-on-witness",
        )
        assert code == 1

    def test_search_without_witness(self, capsys):
        code, out, _ = run(
            capsys,
            "axioms-search",
            "--rule",
            "geometric:1/3",
            "--axiom",
            "upstream-invariance",
            "--budget",
            "200",
            "--fail-on-witness",
        )
        assert code == 0
        assert "no witness" in out

    def test_search_json_is_deterministic(self, capsys):
        argv = (
            "axioms-search",
            "--rule",
            "serial",
            "--axiom",
            "equal-sources",
            "--seed",
            "7",
            "--format",
            "json",
        )
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert first == second
        doc = json.loads(first)
        assert doc["witness"] is not None
        assert doc["witness"]["lhs"] != doc["witness"]["rhs"]

    def test_check_on_fixed_problem(self, capsys, tmp_path):
        path = tmp_path / "line.csv"
        path.write_text(
            "id,name,successor,inflow\n1,a,2,12\n2,b,3,4\n3,c,4,0\n4,d,,10\n",
            encoding="utf-8",
        )
        code, out, _ = run(
            capsys,
            "axioms-check",
            "--rule",
            "serial",
            "--axiom",
            "partial-implementation-invariance",
            "--problem",
            str(path),
            "--budget",
            "100",
        )
        assert code == 0
        assert "no witness" in out

    def test_unknown_axiom_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["axioms-search", "--rule", "serial", "--axiom", "fairness"])
        assert exc.value.code == 2


class TestCharacterize:
    def test_member(self, capsys):
        code, out, _ = run(
            capsys, "characterize", "--rule", "serial", "--n", "5", "--budget", "100"
        )
        assert code == 0
        assert "1/5, 1/4, 1/3, 1/2, 1" in out

    def test_non_member_json(self, capsys):
        code, out, _ = run(
            capsys,
            "characterize",
            "--rule",
            "lambda:1/2",
            "--n",
            "4",
            "--format",
            "json",
        )
        doc = json.loads(out)
        assert doc["member"] is False
        assert "counterexample" in doc


class TestGenerate:
    def test_deterministic_and_parseable(self, capsys):
        _, first, _ = run(capsys, "generate", "--seed", "5", "--n", "4")
        _, second, _ = run(capsys, "generate", "--seed", "5", "--n", "4")
        assert first == second
        ds = parse_problem(first, "csv")
        assert ds.network.size == 4

    def test_json_output(self, capsys):
        _, out, _ = run(capsys, "generate", "--seed", "5", "--format", "json")
        ds = parse_problem(out, "json")
        assert 3 <= ds.network.size <= 8


class TestReproduceNile:
    def test_text_contains_flags(self, capsys):
        code, out, _ = run(capsys, "reproduce-nile")
        assert code == 0
        assert "MISMATCH" in out
        assert "derived 17.53" in out
        assert "printed 11.53" in out
        assert "derived 23.00" in out
        assert "derived 4, printed 2" in out

    def test_json_byte_identical_across_runs(self, capsys):
        _, first, _ = run(capsys, "reproduce-nile", "--format", "json")
        _, second, _ = run(capsys, "reproduce-nile", "--format", "json")
        assert first == second

    def test_json_statuses(self, capsys):
        _, out, _ = run(capsys, "reproduce-nile", "--format", "json")
        doc = json.loads(out)
        mismatches = {
            (c["column"], c["agent"])
            for c in doc["cells"]
            if c["status"] == "MISMATCH"
        }
        assert mismatches == {
            ("z", "Sudan"),
            ("serial", "Ethiopia"),
            ("recovered", "Sudan"),
        }


class TestUsageErrors:
    def test_bad_rule_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["allocate", "--rule", "nonsense"])
        assert exc.value.code == 2

    def test_missing_command_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unreadable_problem_is_domain_error(self, capsys):
        code, _, err = run(
            capsys, "allocate", "--rule", "serial", "--problem", "missing.csv"
        )
        assert code == 1
        assert "error:" in err
