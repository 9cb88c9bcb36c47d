import csv
import io
import json

import pytest

from gfdlab import cli
from gfdlab.cli import CSV_COLUMNS, Check, main, resolve_config


def run_json(capsys, *argv):
    code = main(list(argv) + ["--format", "json"])
    out = capsys.readouterr().out
    return code, json.loads(out) if out else None


def strip_env(report):
    return {k: v for k, v in report.items() if k != "environment"}


class TestExitCodes:
    def test_verify_passes(self, capsys):
        code, rep = run_json(capsys, "verify", "--preset", "spiral-bounded-sigma", "--samples", "2000", "--seed", "42")
        assert code == 0
        assert rep["summary"]["fail"] == 0 and rep["seed"] == 42

    def test_unknown_preset(self, capsys):
        assert main(["verify", "--preset", "nosuch"]) == 2
        assert "unknown preset" in capsys.readouterr().err

    def test_missing_preset(self, capsys):
        assert main(["norms"]) == 2

    def test_scan_without_threshold(self, capsys):
        assert main(["scan", "--preset", "triple-log"]) == 2

    def test_bad_number(self, capsys):
        assert main(["scan", "--preset", "cusp-lp-duality", "--q", "1.5,x"]) == 2

    def test_shallow_depth(self, capsys):
        assert main(["norms", "--preset", "power-log", "--depth", "4"]) == 2

    def test_failure_exit(self, capsys, monkeypatch):
        monkeypatch.setitem(cli.RUNNERS, "lemmas", lambda cfg: [Check("x", "fail", 1.0, 0.0, 1)])
        assert main(["lemmas"]) == 1

    def test_internal_error(self, capsys, monkeypatch):
        def boom(cfg):
            raise FloatingPointError("nan in kernel")

        monkeypatch.setitem(cli.RUNNERS, "lemmas", boom)
        assert main(["lemmas"]) == 3
        assert "internal error" in capsys.readouterr().err


class TestConfig:
    def test_file_and_flag_precedence(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# sweep\npreset = cusp-lp-duality\nq = 1.5, 2\nseed = 9\nlambda = 2,3\n")
        cfg = resolve_config(["scan", "--config", str(path), "--seed", "4"])
        assert cfg.preset == "cusp-lp-duality" and cfg.q == (1.5, 2.0)
        assert cfg.seed == 4 and cfg.lam == (2.0, 3.0)

    def test_unknown_key(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("colour = red\n")
        assert main(["lemmas", "--config", str(path)]) == 2

    def test_missing_file(self, tmp_path, capsys):
        assert main(["lemmas", "--config", str(tmp_path / "none.cfg")]) == 2


class TestReports:
    def test_schema(self, capsys):
        code, rep = run_json(capsys, "modulus", "--alpha", "0.5,1,2")
        assert code == 0
        assert rep["schema_version"] == 1 and rep["tool"]["name"] == "gfdlab"
        for row in rep["checks"]:
            assert {"name", "status", "value", "tolerance", "samples"} <= set(row)
        assert [r["status"] for r in rep["checks"]] == ["pass"] * 3

    def test_json_reproducible(self, capsys):
        argv = ("verify", "--preset", "cusp-lp-duality", "--samples", "1500", "--seed", "3")
        _, a = run_json(capsys, *argv)
        _, b = run_json(capsys, *argv)
        assert json.dumps(strip_env(a), sort_keys=True) == json.dumps(strip_env(b), sort_keys=True)

    def test_csv_columns(self, capsys):
        assert main(["modulus", "--format", "csv"]) == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert tuple(rows[0]) == tuple(CSV_COLUMNS) == ("check", "status", "value", "tolerance", "samples", "seconds")
        assert rows[1][1] == "pass"

    def test_table(self, capsys):
        assert main(["norms", "--preset", "triple-log", "--format", "table"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("gfdlab norms --preset triple-log") and "PASS" in out

    def test_out_file(self, tmp_path, capsys):
        path = tmp_path / "r.json"
        assert main(["modulus", "--out", str(path)]) == 0
        assert json.loads(path.read_text())["command"] == "modulus"
        assert capsys.readouterr().out == ""

    def test_power_log_blowup_unsupported(self, capsys):
        code, rep = run_json(capsys, "verify", "--preset", "power-log", "--alpha", "1", "--samples", "1000")
        assert code == 0
        blow = [r for r in rep["checks"] if r["name"].startswith("blowup")]
        assert blow and all(r["status"] == "unsupported" for r in blow)


class TestCommands:
    def test_lp_scan(self, capsys):
        code, rep = run_json(capsys, "scan", "--preset", "cusp-lp-duality", "--p", "2")
        assert code == 0
        verdicts = {r["name"]: r["detail"].get("verdict") for r in rep["checks"] if r["name"].startswith("q=")}
        assert verdicts == {"q=1.5": "convergent", "q=2": "convergent", "q=2.5": "divergent", "q=3": "divergent"}

    def test_spiral_bounded_sigma_norms(self, capsys):
        code, rep = run_json(capsys, "norms", "--preset", "spiral-bounded-sigma", "--samples", "5000")
        assert code == 0
        sup = next(r for r in rep["checks"] if r["name"] == "sigma_sup")
        assert sup["value"] == pytest.approx(9.0, rel=1e-12)

    def test_explore_only_reports(self, capsys):
        code, rep = run_json(capsys, "scan", "--preset", "triple-log", "--explore", "--p", "1,2", "--q", "1,2")
        assert code == 0
        assert rep["checks"] and all(r["status"] == "reported" for r in rep["checks"])
