import json
import math

import numpy as np
import pytest

from recurkit import fileio
from recurkit.cli import dispatch
from recurkit.errors import NumericalError


def run(capsys, argv):
    status = dispatch(argv)
    captured = capsys.readouterr()
    return status, captured.out, captured.err


class TestUniversal:
    def test_table(self, capsys):
        status, out, _ = run(
            capsys, ["universal", "--xmin", "0.1", "--xmax", "10", "--points", "100"]
        )
        assert status == 0
        lines = out.strip().split("\n")
        assert lines[0] == "x,U"
        assert len(lines) == 101
        x, u = (float(v) for v in lines[10].split(","))
        assert x == pytest.approx(1.0, abs=1e-12)
        assert u == pytest.approx(2.4093, rel=1e-3)

    def test_to_file(self, capsys, tmp_path):
        out_file = tmp_path / "u.csv"
        status, out, _ = run(
            capsys,
            ["universal", "--xmin", "1", "--xmax", "2", "--points", "5",
             "--out", str(out_file)],
        )
        assert status == 0
        assert out == ""
        assert out_file.read_text().startswith("x,U\n")


class TestSynthAndStats:
    def test_synth_then_stats(self, capsys, tmp_path):
        spec_file = tmp_path / "s.json"
        status, _, _ = run(
            capsys, ["synth", "--d", "16", "--seed", "5", "--out", str(spec_file)]
        )
        assert status == 0
        parsed = fileio.parse_spectrum(spec_file.read_text())
        assert parsed.dim == 16

        status, out, _ = run(capsys, ["stats", "--spectrum", str(spec_file)])
        assert status == 0
        doc = json.loads(out)
        assert doc["stats"]["mean_fidelity"] == pytest.approx(1 / 16)
        assert len(doc["recurrence"]) == 4

    def test_synth_deterministic(self, capsys, tmp_path):
        f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, ["synth", "--d", "8", "--seed", "3", "--out", str(f1)])
        run(capsys, ["synth", "--d", "8", "--seed", "3", "--out", str(f2)])
        assert f1.read_text() == f2.read_text()


class TestScan:
    @pytest.fixture
    def two_level_file(self, tmp_path):
        path = tmp_path / "two.json"
        path.write_text(
            json.dumps({"energies": [0.0, 1.0], "weights": [0.5, 0.5]})
        )
        return path

    def test_two_level_count(self, capsys, two_level_file):
        horizon = 100 * 2 * math.pi
        status, out, _ = run(
            capsys,
            ["scan", "--spectrum", str(two_level_file), "--u", "0.5",
             "--T", str(horizon)],
        )
        assert status == 0
        doc = json.loads(out)
        assert doc["count"] == 200

    def test_csv_format(self, capsys, two_level_file, tmp_path):
        out_file = tmp_path / "roots.csv"
        horizon = 10 * 2 * math.pi
        status, _, _ = run(
            capsys,
            ["scan", "--spectrum", str(two_level_file), "--u", "0.5",
             "--T", str(horizon), "--format", "csv", "--out", str(out_file)],
        )
        assert status == 0
        lines = out_file.read_text().strip().split("\n")
        assert lines[0] == "index,t_root"
        assert len(lines) == 21

    def test_worker_env_deterministic(self, capsys, two_level_file, monkeypatch):
        outs = []
        for threads in ("1", "8"):
            monkeypatch.setenv("RTK_THREADS", threads)
            _, out, _ = run(
                capsys,
                ["scan", "--spectrum", str(two_level_file), "--u", "0.5",
                 "--T", str(50 * 2 * math.pi)],
            )
            outs.append(out)
        assert outs[0] == outs[1]

    def test_missing_file(self, capsys, tmp_path):
        status, _, err = run(
            capsys,
            ["scan", "--spectrum", str(tmp_path / "nope.json"), "--u", "0.5",
             "--T", "10"],
        )
        assert status == 1
        assert "error" in err


class TestModelCommands:
    def test_tam_quench(self, capsys, tmp_path):
        spec_file = tmp_path / "tam.json"
        status, out, _ = run(
            capsys,
            ["tam", "--L", "4", "--k1", "0", "--h1", "0.5", "--k2", "0",
             "--h2", "0.7", "--out", str(spec_file)],
        )
        assert status == 0
        s = fileio.parse_spectrum(spec_file.read_text())
        assert s.total_weight == pytest.approx(1.0, abs=1e-10)
        stats_doc = json.loads(out)
        assert 0 < stats_doc["stats"]["mean_fidelity"] <= 1

    def test_tfim_modes(self, capsys, tmp_path):
        modes_file = tmp_path / "modes.json"
        status, out, _ = run(
            capsys,
            ["tfim", "--L", "8", "--h1", "0.5", "--h2", "0.7",
             "--out", str(modes_file)],
        )
        assert status == 0
        m = fileio.parse_modeset(modes_file.read_text())
        assert m.count == 4
        doc = json.loads(out)
        assert doc["stats"]["mean_logF"] < 0
        assert doc["recurrence"][0]["u"] == 0.98

    def test_tam_size_cap_is_validation_error(self, capsys):
        status, _, err = run(
            capsys,
            ["tam", "--L", "14", "--k1", "0", "--h1", "0.5", "--k2", "0",
             "--h2", "0.7"],
        )
        assert status == 1


class TestSweep:
    def test_tfim_sweep_csv(self, capsys, tmp_path):
        out_file = tmp_path / "sweep.csv"
        status, _, _ = run(
            capsys,
            ["sweep", "--model", "tfim", "--h1-min", "0.8", "--h1-max", "1.2",
             "--steps", "41", "--dh", "0.03", "--u", "0.98", "--L", "12",
             "--out", str(out_file)],
        )
        assert status == 0
        lines = out_file.read_text().strip().split("\n")
        assert len(lines) == 42
        rows = [line.split(",") for line in lines[1:]]
        trs = [float(r[8]) for r in rows]
        h1s = [float(r[0]) for r in rows]
        # finite-size dip: the L=12 pseudo-critical point sits at 0.95
        assert h1s[int(np.argmin(trs))] == pytest.approx(0.95, abs=1e-9)


class TestTorus:
    def test_formula_only(self, capsys):
        status, out, _ = run(
            capsys, ["torus", "--omegas", "1", "--windows", str(math.pi)]
        )
        assert status == 0
        doc = json.loads(out)
        assert doc["analytic_TR"] == pytest.approx(math.pi, rel=1e-12)

    def test_with_simulation(self, capsys):
        status, out, _ = run(
            capsys,
            ["torus", "--omegas", "1", "--windows", str(math.pi), "--simulate",
             "--horizon", str(200 * 2 * math.pi), "--step", str(0.05 * math.pi)],
        )
        assert status == 0
        doc = json.loads(out)
        assert doc["empirical_TR"] == pytest.approx(math.pi, rel=0.02)

    def test_simulate_needs_horizon(self, capsys):
        status, _, _ = run(
            capsys, ["torus", "--omegas", "1", "--windows", "1", "--simulate"]
        )
        assert status == 1


class TestExitCodes:
    def test_unknown_flag(self, capsys):
        status, _, err = run(capsys, ["universal", "--bogus", "1"])
        assert status == 1
        assert "usage" in err

    def test_unknown_command(self, capsys):
        status, _, _ = run(capsys, ["frobnicate"])
        assert status == 1

    def test_no_command(self, capsys):
        status, _, _ = run(capsys, [])
        assert status == 1

    def test_numerical_failure_maps_to_two(self, capsys, monkeypatch):
        import recurkit.cli as cli

        def boom(args):
            raise NumericalError("synthetic failure")

        monkeypatch.setattr(cli, "_cmd_universal", boom)
        status, _, err = run(
            capsys, ["universal", "--xmin", "1", "--xmax", "2", "--points", "3"]
        )
        assert status == 2
        assert "numerical failure" in err
