import csv
import io
import json
import math
import subprocess
import sys

import pytest

from modelcr.cli import EXIT_EVAL, EXIT_FAIL, EXIT_OK, EXIT_USAGE, RunConfig, UsageError, config_from_args, main


def invoke(argv, capsys):
    status = main(argv)
    out, err = capsys.readouterr()
    return status, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestKernel:
    def test_unit_point_at_lambda_zero(self, capsys):
        status, out, _ = invoke(["kernel", "--k", "1", "--lambda", "0", "--point", "1,0,0"], capsys)
        assert status == EXIT_OK
        (row,) = rows(out)
        assert float(row["value_re"]) == pytest.approx(-1 / (4 * math.pi), rel=1e-12)
        assert float(row["value_im"]) == 0

    def test_closed_and_integral_agree(self, capsys):
        args = ["kernel", "--k", "1", "--lambda", "0.2,0.3", "--point", "0.7,-0.4,0.5", "--base", "0.1,0.2,-0.3",
                "--format", "json"]
        _, closed, _ = invoke(args + ["--method", "closed"], capsys)
        _, integral, _ = invoke(args + ["--method", "integral"], capsys)
        a, b = json.loads(closed)[0], json.loads(integral)[0]
        # the integral route differs from the closed form by the fixed normalisation ratio -2
        assert complex(b["value_re"], b["value_im"]) == pytest.approx(-2 * complex(a["value_re"], a["value_im"]), rel=1e-9)

    def test_grid_expands_in_order(self, capsys):
        status, out, _ = invoke(["kernel", "--grid", "0.5:1:2,0:0:1,-1:1:3"], capsys)
        assert status == EXIT_OK
        got = [(float(r["x1"]), float(r["t"])) for r in rows(out)]
        assert got == [(0.5, -1.0), (0.5, 0.0), (0.5, 1.0), (1.0, -1.0), (1.0, 0.0), (1.0, 1.0)]

    def test_thread_count_does_not_change_output(self, capsys, monkeypatch):
        args = ["kernel", "--k", "2", "--lambda", "0.3", "--grid", "0.3:1.2:4,0.1:0.1:1,-1:1:3"]
        monkeypatch.setenv("MODELCR_THREADS", "1")
        _, serial, _ = invoke(args, capsys)
        monkeypatch.setenv("MODELCR_THREADS", "4")
        _, parallel, _ = invoke(args, capsys)
        assert serial == parallel

    def test_bad_thread_count(self, capsys, monkeypatch):
        monkeypatch.setenv("MODELCR_THREADS", "zero")
        status, _, _ = invoke(["kernel", "--point", "1,0,0"], capsys)
        assert status == EXIT_USAGE

    def test_singular_row_reports_and_continues(self, capsys):
        status, out, _ = invoke(["kernel", "--point", "0,0,0", "--point", "1,0,0"], capsys)
        assert status == EXIT_EVAL
        bad, good = rows(out)
        assert bad["error"] and bad["value_re"] == ""
        assert float(good["value_re"]) == pytest.approx(-1 / (4 * math.pi))

    def test_closed_form_needs_k1(self, capsys):
        status, _, err = invoke(["kernel", "--k", "2", "--method", "closed", "--point", "1,0,0"], capsys)
        assert status == EXIT_USAGE
        assert "k = 1" in err


class TestSzego:
    def test_json_schema(self, capsys):
        status, out, _ = invoke(["szego", "--k", "2", "--point", "1,0,0", "--base", "0,0,1", "--format", "json"], capsys)
        assert status == EXIT_OK
        (rec,) = json.loads(out)
        assert set(rec) == {"inputs", "value_re", "value_im", "error_estimate"}
        assert set(rec["inputs"]) == {"x1", "x2", "t", "w1", "w2", "s"}


class TestGeodesic:
    def test_axis_lengths(self, capsys):
        t = 3.0
        status, out, _ = invoke(["geodesic", "--k", "1", "--x", "0,0", "--t", str(t), "--m-max", "4"], capsys)
        assert status == EXIT_OK
        got = [float(r["value_re"]) for r in rows(out)]
        assert got == pytest.approx([math.sqrt(m * math.pi * t) for m in range(1, 5)], rel=1e-12)

    def test_zero_height_is_segment(self, capsys):
        _, out, _ = invoke(["geodesic", "--k", "1", "--x", "0.6,0.8", "--t", "0"], capsys)
        first = rows(out)[0]
        assert float(first["value_re"]) == pytest.approx(1.0, abs=1e-10)

    def test_residual_column(self, capsys):
        _, out, _ = invoke(["geodesic", "--k", "1", "--x", "0.5,0.2", "--t", "4", "--m-max", "3"], capsys)
        assert all(float(r["error_estimate"]) < 1e-10 * 5 for r in rows(out))

    def test_k3_unsupported(self, capsys):
        status, _, _ = invoke(["geodesic", "--k", "3", "--x", "1,0", "--t", "1"], capsys)
        assert status == EXIT_USAGE


class TestUsage:
    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["kernel"],
            ["kernel", "--point", "1,0"],
            ["kernel", "--point", "a,b,c"],
            ["kernel", "--lambda", "1,2,3", "--point", "1,0,0"],
            ["kernel", "--grid", "0:1,0:1:2,0:1:2"],
            ["kernel", "--k", "0", "--point", "1,0,0"],
            ["verify", "--suite", "bogus"],
            ["teleport"],
        ],
    )
    def test_exit_64(self, argv, capsys):
        status, _, err = invoke(argv, capsys)
        assert status == EXIT_USAGE
        assert "usage" in err


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = config_from_args(["kernel", "--k", "2", "--lambda", "0.1,-0.2", "--point", "1,2,3", "--tol", "1e-9"])
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        again = config_from_args(["--config", str(path)])
        assert again == cfg
        assert again.lam == complex(0.1, -0.2)

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"command": "kernel", "k": 3, "points": [[1, 0, 0]]}))
        assert config_from_args(["--config", str(path), "kernel", "--k", "2"]).k == 2

    def test_unknown_key(self):
        with pytest.raises(UsageError):
            RunConfig.from_dict({"command": "kernel", "colour": "red"})

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "rows.csv"
        status, printed, _ = invoke(["kernel", "--point", "1,0,0", "--out", str(out)], capsys)
        assert status == EXIT_OK and printed == ""
        assert rows(out.read_text())[0]["x1"] == "1.0"


class TestVerify:
    def test_small_run_is_byte_identical(self, tmp_path, capsys):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for p in paths:
            invoke(["verify", "--suite", "size", "--seed", "7", "--scale", "0.01", "--format", "json", "--out", str(p)],
                   capsys)
        assert paths[0].read_bytes() == paths[1].read_bytes()
        payload = json.loads(paths[0].read_text())
        assert {"suite", "seed", "scale", "passed", "reports"} <= set(payload)

    def test_fail_exit_code(self, capsys):
        status, out, _ = invoke(["verify", "--suite", "size", "--seed", "7", "--scale", "0.1"], capsys)
        table = rows(out)
        assert status == (EXIT_OK if all(r["passed"] == "True" for r in table) else EXIT_FAIL)
        assert [r["name"] for r in table] == ["size_estimate_k1", "size_estimate_k2", "size_estimate_k3"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "modelcr", "kernel", "--point", "1,0,0"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("x1,x2,t")
