import csv
import json
import os
import subprocess
import sys

from incred.cli import main
from incred.fixtures import fixture_path


def run(*argv):
    return main(list(argv))


def out_files(path):
    return sorted(p.name for p in path.iterdir())


class TestExitCodes:
    def test_certified_run_exits_zero(self, tmp_path):
        code = run("certify", "-i", fixture_path("example2"),
                   "-o", str(tmp_path))
        assert code == 0

    def test_violated_run_exits_one(self, tmp_path):
        code = run("certify", "-i", fixture_path("example2_baseline"),
                   "-o", str(tmp_path))
        assert code == 1

    def test_malformed_json_exits_two(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{", encoding="utf-8")
        assert run("certify", "-i", str(bad), "-o", str(tmp_path)) == 2

    def test_expression_syntax_error_exits_two(self, tmp_path):
        with open(fixture_path("example1"), "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        doc["F"]["pieces"][0]["value"] = ["{2*sgn(x1 - 1)"]
        bad = tmp_path / "bad_expr.json"
        bad.write_text(json.dumps(doc), encoding="utf-8")
        assert run("reduce", "-i", str(bad), "-o", str(tmp_path)) == 2

    def test_unknown_key_exits_three(self, tmp_path):
        with open(fixture_path("example1"), "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        doc["surprise"] = True
        bad = tmp_path / "bad_key.json"
        bad.write_text(json.dumps(doc), encoding="utf-8")
        assert run("reduce", "-i", str(bad), "-o", str(tmp_path)) == 3

    def test_missing_analysis_block_exits_three(self, tmp_path):
        code = run("certify", "-i", fixture_path("example1"),
                   "-o", str(tmp_path))
        assert code == 3

    def test_missing_file_exits_two(self, tmp_path):
        assert run("certify", "-i", str(tmp_path / "nope.json"),
                   "-o", str(tmp_path)) == 2

    def test_thread_cap_is_validated(self, tmp_path, monkeypatch):
        monkeypatch.setenv("INCRED_THREADS", "zero")
        assert run("certify", "-i", fixture_path("example2"),
                   "-o", str(tmp_path)) == 3
        monkeypatch.setenv("INCRED_THREADS", "2")
        assert run("certify", "-i", fixture_path("example2"),
                   "-o", str(tmp_path)) == 0


class TestReduce:
    def test_example1_table_contents(self, tmp_path):
        assert run("reduce", "-i", fixture_path("example1"),
                   "-o", str(tmp_path)) == 0
        with open(tmp_path / "reduction_table.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        by_x = {float(r["x1"]): r for r in rows}
        assert by_x[1.0]["Fred_lo1"] == "0.0"
        assert by_x[1.0]["empty_flag"] == "0"
        assert by_x[0.0]["empty_flag"] == "1"
        assert by_x[0.0]["Fred_lo1"] == ""
        assert by_x[-0.5]["Fred_lo1"] == by_x[-0.5]["F_lo1"] == "-2.0"

    def test_smooth_collection_gives_identity_table(self, tmp_path):
        assert run("reduce", "-i", fixture_path("trivial_zero"),
                   "-o", str(tmp_path)) == 0
        with open(tmp_path / "reduction_table.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        for r in rows:
            assert r["empty_flag"] == "0"
            assert r["Fred_lo1"] == r["F_lo1"]
            assert r["Fred_hi2"] == r["F_hi2"]

    def test_example3_table_matches_the_four_cases(self, tmp_path):
        assert run("reduce", "-i", fixture_path("example3"),
                   "-o", str(tmp_path)) == 0
        with open(tmp_path / "reduction_table.csv", newline="") as fh:
            rows = {(float(r["x1"]), float(r["x2"])): r
                    for r in csv.DictReader(fh)}
        edge = rows[(1.0, 0.0)]
        assert (edge["Fred_lo1"], edge["Fred_hi1"]) == ("0.0", "0.0")
        assert (edge["Fred_lo2"], edge["Fred_hi2"]) == ("-1.5", "-0.5")
        assert rows[(1.0, 1.0)]["empty_flag"] == "1"
        interior = next(r for (x1, x2), r in rows.items()
                        if 0.4 < x1 < 0.6 and 0.4 < x2 < 0.6)
        assert interior["Fred_lo1"] == interior["F_lo1"]


class TestDeriv:
    def test_writes_table(self, tmp_path):
        assert run("deriv", "-i", fixture_path("example1"),
                   "-o", str(tmp_path)) == 0
        with open(tmp_path / "derivatives.csv", newline="") as fh:
            rows = {float(r["x1"]): r for r in csv.DictReader(fh)}
        assert rows[0.0]["generalized"] == "-inf"
        assert rows[0.5]["baseline_lo"] == rows[0.5]["baseline_hi"]


class TestCertify:
    def test_reports_written(self, tmp_path):
        assert run("certify", "-i", fixture_path("example2"),
                   "-o", str(tmp_path)) == 0
        doc = json.loads((tmp_path / "certificate.json").read_text())
        assert doc["verdict"] == "CERTIFIED"
        assert "certified on grid" in doc["details"]["note"]
        text = (tmp_path / "certificate.txt").read_text()
        assert "CERTIFIED" in text

    def test_baseline_flag_matches_baseline_fixture(self, tmp_path):
        code = run("certify", "-i", fixture_path("example2"), "--baseline",
                   "-o", str(tmp_path))
        assert code == 1
        doc = json.loads((tmp_path / "certificate.json").read_text())
        assert doc["worst_margin"] == 2.0

    def test_grid_override(self, tmp_path):
        assert run("certify", "-i", fixture_path("example2"), "--grid", "11",
                   "-o", str(tmp_path)) == 0
        doc = json.loads((tmp_path / "certificate.json").read_text())
        assert doc["grid"]["axis_node_counts"] == [13, 13]

    def test_grid_file_override(self, tmp_path):
        gridfile = tmp_path / "grid.json"
        gridfile.write_text(json.dumps(
            {"grid": {"counts": [5, 5], "include": [[-1, 1], [-1, 1]]}}))
        assert run("certify", "-i", fixture_path("example2"),
                   "--grid-file", str(gridfile), "-o", str(tmp_path)) == 0

    def test_semidefinite_block(self, tmp_path):
        assert run("certify", "-i", fixture_path("example5"),
                   "-o", str(tmp_path)) == 0
        doc = json.loads((tmp_path / "certificate.json").read_text())
        assert doc["condition"] == "semidefinite-decrease"


class TestInvariance:
    def test_example3(self, tmp_path):
        assert run("invariance", "-i", fixture_path("example3"),
                   "-o", str(tmp_path)) == 0
        doc = json.loads((tmp_path / "invariance.json").read_text())
        verdicts = {tuple(c["point"]): c["is_equilibrium"]
                    for c in doc["candidates"]}
        assert verdicts[(0.0, 0.0)]
        assert not verdicts[(1.0, 0.0)]
        assert doc["semidefinite"]["verdict"] == "CERTIFIED"
        assert doc["e_node_count"] > 0


class TestMatrosov:
    def test_example6(self, tmp_path):
        assert run("matrosov", "-i", fixture_path("example6"),
                   "-o", str(tmp_path), "--verify-factor", "2") == 0
        doc = json.loads((tmp_path / "matrosov.json").read_text())
        assert doc["chain"]["verdict"] == "CERTIFIED"
        assert doc["constants"]["constants"] == [2.0]
        assert doc["constants"]["zeta"] >= 0.009
        assert doc["verification"]["verdict"] == "CERTIFIED"
        # informational screen; exit code ignores it
        assert doc["derivative_bounds"]["verdict"] == "VIOLATED"

    def test_broken_bound_exits_one(self, tmp_path):
        assert run("matrosov", "-i", fixture_path("example6_broken_y2"),
                   "-o", str(tmp_path)) == 1
        doc = json.loads((tmp_path / "matrosov.json").read_text())
        assert doc["chain"]["verdict"] == "VIOLATED"
        assert doc["constants"] is None


class TestSimulate:
    def test_example2_defaults(self, tmp_path):
        assert run("simulate", "-i", fixture_path("example2"),
                   "-o", str(tmp_path)) == 0
        doc = json.loads((tmp_path / "diagnostics.json").read_text())
        assert doc["checks_passed"]
        assert abs(doc["final_norm"] - 4.765e-3) <= 5e-4
        assert doc["membership"]["fraction"] <= 0.01
        with open(tmp_path / "trajectory.csv", newline="") as fh:
            header = fh.readline().strip()
        assert header == "t,x1,x2,q1,q2,V"

    def test_x0_flag_overrides(self, tmp_path):
        assert run("simulate", "-i", fixture_path("example2"),
                   "--x0", "2,0", "--T", "10", "-o", str(tmp_path)) == 0
        doc = json.loads((tmp_path / "diagnostics.json").read_text())
        assert doc["x0"] == [2.0, 0.0]

    def test_missing_x0_exits_three(self, tmp_path):
        assert run("simulate", "-i", fixture_path("example1"),
                   "-o", str(tmp_path)) == 3

    def test_failed_tail_check_exits_one(self, tmp_path):
        # zero field from an offset state never decays
        with open(fixture_path("trivial_zero"), "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        doc["certify"]["W_semidef"] = "x2*x2"
        fixture = tmp_path / "offset.json"
        fixture.write_text(json.dumps(doc), encoding="utf-8")
        assert run("simulate", "-i", str(fixture), "-o", str(tmp_path)) == 1


class TestValidateGradient:
    def test_trivial_system_passes(self, tmp_path):
        assert run("validate-gradient", "-i", fixture_path("trivial_zero"),
                   "-o", str(tmp_path), "--samples", "50") == 0
        doc = json.loads((tmp_path / "gradient_validation.json").read_text())
        assert doc["passed"] and len(doc["reports"]) > 0


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            assert run("certify", "-i", fixture_path("example2"),
                       "-o", str(out)) == 0
            assert run("simulate", "-i", fixture_path("example2"),
                       "--strategy", "random-extreme", "--seed", "5",
                       "-o", str(out)) == 0
            assert run("reduce", "-i", fixture_path("example3"),
                       "-o", str(out)) == 0
        for name in ("certificate.json", "certificate.txt",
                     "diagnostics.json", "trajectory.csv",
                     "reduction_table.csv", "reduction_table.txt"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_console_entry_point_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "incred.cli", "certify",
         "-i", fixture_path("trivial_zero"), "-o",
         os.path.join(os.environ.get("TMPDIR", "/tmp"), "incred_ep_test")],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "CERTIFIED" in proc.stdout
