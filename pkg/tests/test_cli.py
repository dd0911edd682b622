"""Command-line surface: exit codes, file outputs, determinism."""

import csv
import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from angio import equilibrium_for, parse_scenario, stability_report
from angio.cli import main


def write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2))
    return str(path)


def model1_example(**over):
    cfg = {
        "model": "model1",
        "params": {"alpha": 1.0, "beta": 4.0, "gamma": 0.5, "delta": 1.0},
        "treatment": {
            "p": {"kind": "constant", "value": math.log(2.0)},
            "c": {"kind": "constant", "value": 0.5},
        },
        "delay": {"kind": "constant", "tau": 1.0},
        "history": {"kind": "equilibrium_offset", "x_scale": 1.1, "K_scale": 1.0},
        "t_span": [0.0, 200.0],
        "integrator": {"substeps_per_delay": 16},
    }
    cfg.update(over)
    return cfg


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSimulate:
    def test_equilibrium_start_stays_put(self, tmp_path):
        cfg = model1_example(history={"kind": "equilibrium_offset"},
                             t_span=[0.0, 20.0])
        scn = write_json(tmp_path / "eq.json", cfg)
        out = tmp_path / "eq.csv"
        assert main(["simulate", scn, "--out", str(out)]) == 0
        rows = read_rows(out)
        x_star = equilibrium_for(parse_scenario(cfg).params, math.log(2.0), 0.5).x_star
        assert all(abs(float(r["x"]) - x_star) < 1e-8 for r in rows)

    def test_perturbed_start_returns_to_equilibrium(self, tmp_path):
        scn = write_json(tmp_path / "near.json", model1_example())
        out = tmp_path / "near.csv"
        assert main(["simulate", scn, "--out", str(out)]) == 0
        last = read_rows(out)[-1]
        assert float(last["t"]) == 200.0
        assert abs(float(last["x"]) - 1.0) < 1e-4
        assert abs(float(last["K"]) - 2.0) < 1e-4

    def test_csv_shape_and_round_trip_floats(self, tmp_path):
        cfg = model1_example(t_span=[0.0, 5.0], output={"stride": 7})
        scn = write_json(tmp_path / "s.json", cfg)
        out = tmp_path / "s.csv"
        assert main(["simulate", scn, "--out", str(out)]) == 0
        with open(out, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        assert header == ["t", "x", "K", "p", "c"]
        # stride keeps every 7th knot plus the final one
        assert float(rows[-1][0]) == 5.0
        for cell in rows[3]:
            assert repr(float(cell)) == cell

    def test_stdout_default(self, tmp_path, capsys):
        cfg = model1_example(t_span=[0.0, 2.0], output={"stride": 50})
        scn = write_json(tmp_path / "s.json", cfg)
        assert main(["simulate", scn]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "t,x,K,p,c"
        assert len(lines) > 1

    def test_missing_field_names_it(self, tmp_path, capsys):
        cfg = model1_example()
        del cfg["params"]["alpha"]
        scn = write_json(tmp_path / "bad.json", cfg)
        assert main(["simulate", scn]) == 1
        assert "alpha" in capsys.readouterr().err

    def test_unreadable_file(self, tmp_path, capsys):
        assert main(["simulate", str(tmp_path / "missing.json")]) == 1
        assert "error" in capsys.readouterr().err

    def test_fault_keeps_partial_rows_and_exits_2(self, tmp_path, capsys):
        cfg = {
            "model": "model3",
            "params": {"alpha": 0.9, "beta": 1.0, "gamma": 0.1, "delta": 1.0,
                       "richards_m": 0.5},
            "treatment": {
                "p": {"kind": "constant", "value": 0.0},
                "c": {"kind": "constant", "value": 0.0},
            },
            "delay": {"kind": "constant", "tau": 4.0},
            "history": {"kind": "constant", "x": 100.0, "K": 1.0},
            "t_span": [0.0, 40.0],
            "integrator": {"substeps_per_delay": 4},
        }
        scn = write_json(tmp_path / "fault.json", cfg)
        out = tmp_path / "fault.csv"
        assert main(["simulate", scn, "--out", str(out)]) == 2
        err = capsys.readouterr().err
        assert "fault" in err and "t=" in err
        rows = read_rows(out)
        assert len(rows) >= 1
        assert float(rows[0]["x"]) == 100.0

    def test_figure_rendered_when_requested(self, tmp_path):
        cfg = model1_example(t_span=[0.0, 5.0])
        scn = write_json(tmp_path / "s.json", cfg)
        fig = tmp_path / "s.png"
        assert main(["simulate", scn, "--out", str(tmp_path / "s.csv"),
                     "--fig", str(fig)]) == 0
        assert fig.stat().st_size > 1000


class TestAnalyze:
    def test_report_matches_library(self, tmp_path, capsys):
        cfg = model1_example()
        scn = write_json(tmp_path / "s.json", cfg)
        assert main(["analyze", scn]) == 0
        got = json.loads(capsys.readouterr().out)
        want = stability_report(parse_scenario(cfg)).to_json_dict()
        assert got == want
        assert got["verdict"] == "CertifiedStable"

    def test_not_certified_is_still_exit_zero(self, tmp_path, capsys):
        cfg = model1_example(model="model2")
        cfg["params"] = {"alpha": 1.0, "beta": 2.4, "gamma": 0.2, "delta": 1.0}
        cfg["treatment"]["p"] = {"kind": "constant", "value": 0.0}
        cfg["treatment"]["c"] = {"kind": "constant", "value": 0.2}
        cfg["history"] = {"kind": "constant", "x": 1.0, "K": 1.0}
        scn = write_json(tmp_path / "s.json", cfg)
        assert main(["analyze", scn]) == 0
        got = json.loads(capsys.readouterr().out)
        assert got["verdict"] == "NotCertified"
        assert got["condition_values"]["excess_growth"] == pytest.approx(2.0)

    def test_no_equilibrium_verdict(self, tmp_path, capsys):
        cfg = model1_example(model="model2")
        cfg["params"] = {"alpha": 1.0, "beta": 0.7, "gamma": 0.5, "delta": 1.0}
        cfg["treatment"]["p"] = {"kind": "constant", "value": 0.0}
        cfg["treatment"]["c"] = {"kind": "constant", "value": 0.2}
        cfg["history"] = {"kind": "constant", "x": 1.0, "K": 1.0}
        scn = write_json(tmp_path / "s.json", cfg)
        assert main(["analyze", scn]) == 0
        assert json.loads(capsys.readouterr().out)["verdict"] == "NoEquilibrium"

    def test_output_file(self, tmp_path):
        scn = write_json(tmp_path / "s.json", model1_example())
        out = tmp_path / "report.json"
        assert main(["analyze", scn, "--out", str(out)]) == 0
        assert json.loads(out.read_text())["theorem"] == "model1_local_m_matrix"


def sweep_example():
    return {
        "base": {
            "model": "model1",
            "params": {"alpha": 1.0, "beta": 1.0, "gamma": 0.1, "delta": 1.0},
            "treatment": {
                "p": {"kind": "constant", "value": 0.0},
                "c": {"kind": "constant", "value": 0.1},
            },
            "delay": {"kind": "constant", "tau": 1.0},
            "t_span": [0.0, 60.0],
            "integrator": {"substeps_per_delay": 16},
        },
        "axes": {
            "params.beta": [0.15, 0.25],
            "delay.tau": [0.5, 1.0],
        },
    }


class TestSweep:
    def test_grid_rows_and_verdict_flip(self, tmp_path):
        grid = write_json(tmp_path / "g.json", sweep_example())
        out = tmp_path / "g.csv"
        assert main(["sweep", grid, "--out", str(out)]) == 0
        rows = read_rows(out)
        assert len(rows) == 4
        # existence threshold sits at beta = (gamma + c0) e^{p0/alpha} = 0.2
        by_beta = {}
        for r in rows:
            by_beta.setdefault(r["params.beta"], set()).add(r["verdict"])
        assert by_beta["0.15"] == {"NoEquilibrium"}
        assert by_beta["0.25"] == {"CertifiedStable"}
        for r in rows:
            if r["verdict"] == "NoEquilibrium":
                assert r["convergence_metric"] == "nan"
                assert r["converged"] == "false"

    def test_all_certified_grid_converges_at_default_horizon(self, tmp_path):
        cfg = sweep_example()
        del cfg["base"]["t_span"]  # use the default 500
        cfg["axes"] = {"params.beta": [2.0, 4.0], "delay.tau": [0.5, 1.0]}
        grid = write_json(tmp_path / "g.json", cfg)
        out = tmp_path / "g.csv"
        assert main(["sweep", grid, "--out", str(out)]) == 0
        rows = read_rows(out)
        assert len(rows) == 4
        assert all(r["verdict"] == "CertifiedStable" for r in rows)
        assert all(r["converged"] == "true" for r in rows)
        assert all(float(r["convergence_metric"]) < 1e-4 for r in rows)

    def test_reruns_and_parallel_runs_are_byte_identical(self, tmp_path):
        grid = write_json(tmp_path / "g.json", sweep_example())
        outs = [tmp_path / f"g{i}.csv" for i in range(3)]
        assert main(["sweep", grid, "--out", str(outs[0])]) == 0
        assert main(["sweep", grid, "--out", str(outs[1])]) == 0
        assert main(["sweep", grid, "--out", str(outs[2]), "--jobs", "2"]) == 0
        blobs = [o.read_bytes() for o in outs]
        assert blobs[0] == blobs[1] == blobs[2]

    def test_over_cap_is_input_error(self, tmp_path, capsys):
        cfg = sweep_example()
        cfg["cap"] = 3
        grid = write_json(tmp_path / "g.json", cfg)
        assert main(["sweep", grid]) == 1
        assert "cap" in capsys.readouterr().err

    def test_sweep_figure(self, tmp_path):
        grid = write_json(tmp_path / "g.json", sweep_example())
        fig = tmp_path / "g.png"
        assert main(["sweep", grid, "--out", str(tmp_path / "g.csv"),
                     "--fig", str(fig)]) == 0
        assert fig.stat().st_size > 1000


class TestPlot:
    def make_csv(self, tmp_path):
        scn = write_json(tmp_path / "s.json",
                         model1_example(t_span=[0.0, 10.0], output={"stride": 4}))
        out = tmp_path / "s.csv"
        assert main(["simulate", scn, "--out", str(out)]) == 0
        return out

    def test_svg_well_formed_with_two_series(self, tmp_path):
        src = self.make_csv(tmp_path)
        svg_path = tmp_path / "t.svg"
        assert main(["plot", str(src), "--out", str(svg_path)]) == 0
        root = ET.parse(svg_path).getroot()
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        assert len(polylines) == 2

    def test_byte_identical_reruns(self, tmp_path):
        src = self.make_csv(tmp_path)
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        assert main(["plot", str(src), "--out", str(a)]) == 0
        assert main(["plot", str(src), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_empty_data_is_input_error(self, tmp_path, capsys):
        bad = tmp_path / "empty.csv"
        bad.write_text("t,x,K,p,c\n")
        assert main(["plot", str(bad)]) == 1
        assert "no data" in capsys.readouterr().err

    def test_missing_column_is_input_error(self, tmp_path, capsys):
        bad = tmp_path / "cols.csv"
        bad.write_text("t,x\n0.0,1.0\n")
        assert main(["plot", str(bad)]) == 1
        assert "K" in capsys.readouterr().err

    def test_non_numeric_cell_is_input_error(self, tmp_path, capsys):
        bad = tmp_path / "text.csv"
        bad.write_text("t,x,K\n0.0,one,2.0\n")
        assert main(["plot", str(bad)]) == 1
        assert "non-numeric" in capsys.readouterr().err


class TestEntryPoint:
    def test_usage_error_is_exit_1(self, capsys):
        assert main(["simulate"]) == 1
        assert "scenario" in capsys.readouterr().err

    def test_help_is_exit_0(self, capsys):
        # argparse raises SystemExit(0) for --help; main translates it
        assert main(["--help"]) == 0
        assert "simulate" in capsys.readouterr().out

    def test_console_script_runs(self):
        proc = subprocess.run([sys.executable, "-m", "pytest", "--version"],
                              capture_output=True)
        assert proc.returncode == 0  # sanity: subprocesses work here
        proc = subprocess.run(["angio", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "simulate" in proc.stdout
