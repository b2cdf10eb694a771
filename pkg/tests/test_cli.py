import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from patkit import linalg
from patkit.cli import EXIT_COMPUTE, EXIT_OK, EXIT_USAGE, load_schema, main, parse_args


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.startswith("{") else out)


def strip_timing(report):
    return {k: v for k, v in report.items() if k != "timing"}


@pytest.fixture
def p1_file(tmp_path):
    f = tmp_path / "p1.pat"
    f.write_text("name: P1\n0\ny\n2*y\ny^2\n")
    return str(f)


class TestParseArgs:
    def test_classify(self, p1_file):
        cfg = parse_args(["classify", "--pattern", p1_file, "--degree-bound", "4"])
        assert cfg.command == "classify" and cfg.params["degree_bound"] == 4
        assert cfg.params["pattern"]["polys"] == ["0", "y", "2*y", "y^2"]

    def test_gowers(self):
        cfg = parse_args(["gowers", "--N", "101", "--s", "2", "--fn", "quadphase:1"])
        assert cfg.params["N"] == 101 and cfg.params["function"] == "quadphase:1"
        assert cfg.seed == 0 and cfg.format == "json"

    def test_non_prime_rejected(self, p1_file, capsys):
        with pytest.raises(SystemExit) as exc:
            parse_args(["transfer-gap", "--pattern", p1_file, "--N", "15"])
        assert exc.value.code == EXIT_USAGE
        assert "15 is not prime" in capsys.readouterr().err

    @pytest.mark.parametrize("argv", [
        ["nonsense"],
        ["classify", "--polys", "0,y", "--bogus"],
        ["classify", "--polys", "0,y^"],
        ["classify", "--polys", "y"],
        ["extremal", "--polys", "0,y", "--N", "9"],
        ["gowers", "--N", "7", "--s", "2", "--fn", "wibble"],
        ["gp-norm", "--N", "5", "--fn", "const", "--measure", "cube:1"],
        ["wtrick", "--P", "y^2", "--w", "1"],
    ])
    def test_usage_errors(self, argv, capsys):
        assert main(argv) == EXIT_USAGE
        capsys.readouterr()


class TestCommands:
    def test_classify_p1(self, p1_file, capsys):
        code, rep = run_cli(["classify", "--pattern", p1_file], capsys)
        assert code == EXIT_OK
        assert rep["result"]["homogeneous"] is False
        assert rep["config"]["pattern"]["source"] == p1_file

    def test_classify_p2(self, capsys):
        code, rep = run_cli(["classify", "--polys", "0,-y^2,y^2,y,y^3,y + y^3", "-k", "12"], capsys)
        assert code == EXIT_OK
        assert rep["result"]["homogeneous"] is True and rep["result"]["transferable"] is False

    def test_hensel(self, capsys):
        code, rep = run_cli(["hensel-check", "--Q", "2*y + 5*y^2", "--ref", "2*y", "--q", "25"], capsys)
        assert code == EXIT_OK and rep["result"]["equal"] is True

    def test_transfer_gap(self, capsys):
        argv = ["transfer-gap", "--polys", "0,-y^2,y^2,y,y^3,y + y^3", "--N", "11"]
        argv += [a for c in (-3, 1, 1, 1, 1, -1) for a in ("--fn", f"quadphase:{c}")]
        code, rep = run_cli(argv + ["--dual", "0"], capsys)
        assert code == EXIT_OK
        assert rep["result"]["gap"] > 0.9
        assert rep["result"]["dual"]["pairing"]["re"] == pytest.approx(
            rep["result"]["lambda_poly"]["re"] - rep["result"]["lambda_linear"]["re"], abs=1e-9)

    def test_transfer_gap_set(self, tmp_path, capsys):
        f = tmp_path / "A.txt"
        f.write_text("0\n1\n3\n")
        code, rep = run_cli(["transfer-gap", "--polys", "0,y,2*y", "--N", "7", "--set", str(f)], capsys)
        assert code == EXIT_OK
        assert rep["result"]["configurations"]["total"] == 3

    def test_gowers_interval(self, capsys):
        code, rep = run_cli(["gowers", "--N", "8", "--s", "2", "--fn", "const", "--interval"], capsys)
        assert code == EXIT_OK and rep["result"]["norm"] == pytest.approx(1)

    def test_gp_norm_exact(self, capsys):
        argv = ["gp-norm", "--N", "12", "--fn", "const", "--measure", "uniform:-12,12",
                "--measure", "uniform:-12,12", "--exact"]
        code, rep = run_cli(argv, capsys)
        assert code == EXIT_OK and rep["result"]["power"] == "139727/1171875"

    def test_wtrick(self, capsys):
        code, rep = run_cli(["wtrick", "--P", "y^2 - y^4", "--w", "3", "--N", "4096"], capsys)
        assert code == EXIT_OK
        res = rep["result"]
        assert res["W"] == "5038848" and res["hensel"]["equal"] is True
        assert res["operators"]["nu_mean"] is None

    def test_extremal(self, capsys):
        code, rep = run_cli(["extremal", "--polys", "0,y,2*y", "--N", "11"], capsys)
        assert code == EXIT_OK and rep["result"]["r"] == 4 and rep["result"]["exact"]
        code, rep = run_cli(["extremal", "--polys", "0,y,2*y", "--N", "11", "--greedy", "3"], capsys)
        assert rep["result"]["r"] <= 4 and not rep["result"]["exact"]

    def test_budget_error_is_exit_1(self, monkeypatch, capsys):
        monkeypatch.setenv("PATKIT_BUDGET", "1000")
        code, rep = run_cli(["gowers", "--N", "101", "--s", "3", "--fn", "const", "--method", "direct"], capsys)
        assert code == EXIT_COMPUTE
        assert rep["result"]["error_type"] == "BudgetExceeded"


ALL_RUNS = [
    ["classify", "--polys", "0,y,2*y,y^2"],
    ["transfer-gap", "--polys", "0,y,2*y,y^3,2*y^3", "--N", "31", "--fn", "randpm1:1"],
    ["transfer-gap", "--polys", "0,y,y^2", "--N", "11", "--method", "sampled", "--samples", "500"],
    ["gowers", "--N", "31", "--s", "3", "--fn", "randpm1:2"],
    ["gowers", "--N", "101", "--s", "4", "--fn", "quadphase:1", "--samples", "1000"],
    ["gp-norm", "--N", "6", "--fn", "randpm1:1", "--measure", "uniform:-2,2", "--measure", "point:1"],
    ["hensel-check", "--Q", "y^2", "--ref", "y", "--q", "12"],
    ["wtrick", "--P", "y - y^2", "--w", "2", "--N", "3000"],
    ["extremal", "--polys", "0,y^2", "--N", "13"],
    ["reproduce"],
    # a Fourier request for U^3 is reported as a usage error inside the envelope
    ["gowers", "--N", "101", "--s", "3", "--fn", "const", "--method", "fourier"],
]


class TestReports:
    @pytest.mark.parametrize("argv", ALL_RUNS, ids=lambda a: " ".join(a[:3]))
    def test_schema_valid_and_deterministic(self, argv, capsys):
        code, first = run_cli(argv, capsys)
        jsonschema.validate(first, load_schema(argv[0]))
        assert set(first["timing"]) == {"elapsed_seconds"}
        _, second = run_cli(argv, capsys)
        assert json.dumps(strip_timing(first), sort_keys=True) == json.dumps(strip_timing(second), sort_keys=True)

    def test_error_reports_validate(self, monkeypatch, capsys):
        monkeypatch.setenv("PATKIT_BUDGET", "100")
        code, rep = run_cli(["hensel-check", "--Q", "y", "--ref", "y", "--q", "1000003"], capsys)
        assert code == EXIT_COMPUTE
        jsonschema.validate(rep, load_schema("hensel-check"))

    @pytest.mark.parametrize("argv", [
        ["transfer-gap", "--polys", "0,y,2*y,y^3,2*y^3", "--N", "101", "--fn", "randpm1:4"],
        ["transfer-gap", "--polys", "0,y,y^2", "--N", "31", "--method", "sampled", "--samples", "3000",
         "--fn", "randpm1:4"],
    ])
    def test_independent_of_workers(self, argv, capsys):
        _, one = run_cli(argv + ["--workers", "1"], capsys)
        _, four = run_cli(argv + ["--workers", "4"], capsys)
        one["config"].pop("workers"), four["config"].pop("workers")
        assert strip_timing(one) == strip_timing(four)

    def test_csv(self, capsys):
        code, out = run_cli(["gowers", "--N", "7", "--s", "2", "--fn", "quadphase:1", "--format", "csv"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 1 and float(rows[0]["norm"]) == pytest.approx(7 ** -0.25)
        code, out = run_cli(["transfer-gap", "--polys", "0,y", "--N", "5", "--format", "csv"], capsys)
        row = next(csv.DictReader(io.StringIO(out)))
        assert {"gap", "lambda_poly.re", "lambda_poly.im", "N"} <= set(row)

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "out.json"
        target.write_text("old")
        assert main(["classify", "--polys", "0,y", "-o", str(target)]) == EXIT_OK
        assert capsys.readouterr().out == ""
        assert json.loads(target.read_text())["result"]["transferable"] is True
        assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


class TestReproduce:
    def test_all_pass(self, capsys):
        code, rep = run_cli(["reproduce"], capsys)
        assert code == EXIT_OK and rep["result"]["all_passed"]
        assert rep["result"]["failed"] == 0 and rep["result"]["passed"] >= 9

    def test_idempotent(self, capsys):
        _, a = run_cli(["reproduce"], capsys)
        _, b = run_cli(["reproduce"], capsys)
        assert json.dumps(strip_timing(a), sort_keys=True) == json.dumps(strip_timing(b), sort_keys=True)

    def test_corrupted_kernel_solver(self, monkeypatch, capsys):
        real = linalg.nullspace

        def corrupted(rows, ncols):
            basis = real(rows, ncols)
            return [[v[0] + 1] + v[1:] for v in basis]

        monkeypatch.setattr(linalg, "nullspace", corrupted)
        code, rep = run_cli(["reproduce"], capsys)
        assert code == EXIT_COMPUTE
        failed = {i["name"] for i in rep["result"]["items"] if not i["passed"]}
        assert any(n.startswith("(0, y, 2y, y^2)") or n.startswith("(0, -y^2") for n in failed)
        assert not any(n.startswith("smoothed cutoff") for n in failed)


def test_console_script_exit_codes(tmp_path):
    ok = subprocess.run([sys.executable, "-m", "patkit.cli", "classify", "--polys", "0,y"],
                        capture_output=True, text=True)
    assert ok.returncode == 0 and json.loads(ok.stdout)["command"] == "classify"
    bad = subprocess.run([sys.executable, "-m", "patkit.cli", "extremal", "--polys", "0,y", "--N", "15"],
                         capture_output=True, text=True)
    assert bad.returncode == 2 and "not prime" in bad.stderr
