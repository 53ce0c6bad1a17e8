"""Command-line interface: exit codes, reports, determinism."""

import json

import pytest

from logladder import cli


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- analyze -----------------------------------------------------------------------


def test_analyze_decisive_exit_zero(capsys):
    code, out, _ = run(capsys, ["analyze", "1/n^2"])
    assert code == 0
    assert "converges [raabe]" in out


def test_analyze_pinned_scale_hierarchy(capsys):
    code, out, _ = run(capsys, [
        "analyze", "(lnln(n))^p/(n*ln(n))", "--param", "p=-2", "--w", "ln",
    ])
    assert code == 0
    assert "converges [hierarchy]" in out


def test_analyze_expect_mismatch_exit_three(capsys):
    code, out, _ = run(capsys, ["analyze", "1/n", "--expect", "converges"])
    assert code == 3
    assert "diverges" in out


def test_analyze_expect_match_exit_zero(capsys):
    code, _, _ = run(capsys, ["analyze", "1/n", "--expect", "diverges"])
    assert code == 0


def test_analyze_inconclusive_exit_two(capsys):
    code, out, _ = run(capsys, [
        "analyze", "1/(n*ln(n)*lnln(n)*lnlnln(n)*lnlnlnln(n))",
        "--kmax", "3",
    ])
    assert code == 2
    assert "inconclusive" in out


def test_analyze_input_error_exit_one_names_stage(capsys):
    code, _, err = run(capsys, ["analyze", "1/n^q"])
    assert code == 1
    assert "error in" in err and "q" in err

    code, _, err = run(capsys, ["analyze", "1/((n)"])
    assert code == 1
    assert "error in" in err


def test_analyze_bad_param_value(capsys):
    code, _, err = run(capsys, ["analyze", "1/n^q", "--param", "q=abc"])
    assert code == 1
    assert "error in input parsing" in err


def test_analyze_json_schema(capsys):
    code, out, _ = run(capsys, [
        "analyze", "(ln(n))^t/n", "--param", "t=1/2", "--json",
    ])
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == "1"
    assert doc["sequence"] == "(ln(n))^t/n"
    assert doc["params"] == {"t": "1/2"}
    assert doc["scale"] == "auto"
    assert isinstance(doc["trace"], list) and doc["trace"]
    row = doc["trace"][0]
    for key in ("test", "w", "level", "statistic_value", "uncertainty",
                "decision", "rate"):
        assert key in row
    assert doc["final"]["decision"] == "diverges"
    assert doc["final"]["rate"]["template"] == "log-ratio-partial"
    assert isinstance(doc["warnings"], list)


def test_analyze_json_deterministic(capsys):
    argv = ["analyze", "1/(n*ln(n)*lnln(n))", "--json"]
    a = run(capsys, argv)
    b = run(capsys, argv)
    assert a == b
    assert a[0] == 0


def test_analyze_grid_override(capsys):
    code, out, _ = run(capsys, [
        "analyze", "1/n^2", "--grid", "geometric:101:10:12",
    ])
    assert code == 0
    assert "converges" in out


def test_analyze_bad_grid(capsys):
    code, _, err = run(capsys, ["analyze", "1/n^2", "--grid", "fancy:1"])
    assert code == 1
    assert "grid" in err


# -- sum ---------------------------------------------------------------------------


def test_sum_partial(capsys):
    code, out, _ = run(capsys, ["sum", "1/n^2", "10"])
    assert code == 0
    assert "1.54976773116654" in out


def test_sum_tail_json(capsys):
    code, out, _ = run(capsys, [
        "sum", "1/n^2", "1000000", "--tail-from", "10000", "--json",
    ])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "tail"
    assert doc["truncation_correction"] is not None
    assert doc["estimate"] == pytest.approx(1.00005e-4, rel=1e-3)


def test_sum_checkpoints_csv(capsys, tmp_path):
    out_csv = tmp_path / "s.csv"
    code, out, _ = run(capsys, [
        "sum", "1/(n*ln(n))", "100000",
        "--checkpoints", "10000", "100000", "--csv", str(out_csv),
    ])
    assert code == 0
    assert out_csv.read_text().startswith("N,partial_sum")


def test_sum_budget_exit_one(capsys):
    code, _, err = run(capsys, ["sum", "1/n", "1000000000"])
    assert code == 1
    assert "error in oracle summation" in err


# -- verify ------------------------------------------------------------------------


def test_verify_slow_log_pass(capsys):
    code, out, _ = run(capsys, ["verify", "1/(n*ln(n))"])
    assert code == 0
    assert "verification: pass" in out


def test_verify_precise_pass(capsys):
    code, out, _ = run(capsys, ["verify", "1/n^2"])
    assert code == 0
    assert "verification: pass" in out


def test_verify_unverifiable_at_scale(capsys):
    code, out, _ = run(capsys, ["verify", "1/(n*ln(n)*lnln(n))"])
    assert code == 0
    assert "unverifiable-at-scale" in out


def test_verify_fail_exit_three(capsys):
    code, out, _ = run(capsys, [
        "verify", "1/n^2", "--tolerance", "1e-12",
    ])
    assert code == 3
    assert "verification: fail" in out


def test_verify_json_tag(capsys):
    code, out, _ = run(capsys, [
        "verify", "1/(n*ln(n)*lnln(n))", "--json",
    ])
    assert code == 0
    doc = json.loads(out)
    assert doc["verification"]["tag"] == "unverifiable-at-scale"
    assert doc["verification"]["status"] == "insufficient-signal"


# -- examples ----------------------------------------------------------------------


def test_examples_runs_clean(capsys):
    code, out, _ = run(capsys, ["examples"])
    assert code == 0
    assert "triple-log-harmonic" in out
    assert "MISMATCH" not in out


def test_examples_subset(capsys):
    code, out, _ = run(capsys, ["examples", "--only", "inverse-square"])
    assert code == 0
    assert "inverse-square" in out
    assert "harmonic-log" not in out


def test_examples_unknown_entry(capsys):
    code, _, err = run(capsys, ["examples", "--only", "no-such"])
    assert code == 1


def test_examples_json(capsys):
    code, out, _ = run(capsys, ["examples", "--json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["mismatches"] == []
    ids = {e["id"] for e in doc["entries"]}
    assert "double-log-pinned-deep" in ids
