import csv
import json
import math
from pathlib import Path

import pytest
from click.testing import CliRunner

from spinorbit.cli import cli
from spinorbit.datafiles import counts_to_csv, read_counts_csv
from spinorbit.experiments import ExperimentConfig, expected_counts

GOLDEN = Path(__file__).parent / "golden"

SMALL = """
theta_deg = [0, 45, 90, 135]
chi_deg = [{chis}]
pair_rate = 500.0
visibility = 0.9
seed = 11
"""


def run(*args):
    return CliRunner().invoke(cli, [str(a) for a in args])


def small_config(tmp_path, extra="", n=16):
    chis = ", ".join(repr(k * 90 / n) for k in range(n))
    path = tmp_path / "run.toml"
    path.write_text(SMALL.format(chis=chis) + extra)
    return path


def ideal_counts_file(tmp_path, visibility=1.0):
    cfg = ExperimentConfig(
        theta_list=tuple(k * math.pi / 4 for k in range(4)),
        chi_list=tuple(k * math.pi / 128 for k in range(64)),
        visibility=visibility,
    )
    path = tmp_path / "ideal.csv"
    path.write_text(counts_to_csv(expected_counts(cfg)))
    return path


class TestSimulate:
    def test_grid(self, tmp_path):
        res = run("simulate", "--config", small_config(tmp_path), "--out", tmp_path / "o")
        assert res.exit_code == 0, res.stderr
        recs = read_counts_csv(tmp_path / "o" / "counts.csv")
        assert len(recs) == 64
        assert all(isinstance(r.counts, int) for r in recs)
        manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
        assert manifest["seed"] == 11
        assert {e["path"] for e in manifest["outputs"]} == {"counts.csv", "config.toml"}

    def test_golden(self, tmp_path):
        res = run("simulate", "--config", small_config(tmp_path), "--out", tmp_path / "o")
        assert res.exit_code == 0
        assert (tmp_path / "o" / "counts.csv").read_text() == (GOLDEN / "simulate_seed11.csv").read_text()

    def test_seed_override(self, tmp_path):
        cfg = small_config(tmp_path)
        run("simulate", "--config", cfg, "--out", tmp_path / "a")
        run("simulate", "--config", cfg, "--seed", 12, "--out", tmp_path / "b")
        run("simulate", "--config", cfg, "--seed", 11, "--out", tmp_path / "c")
        a, b, c = ((tmp_path / d / "counts.csv").read_text() for d in "abc")
        assert a != b
        assert a == c

    def test_written_config_reruns(self, tmp_path):
        run("simulate", "--config", small_config(tmp_path), "--out", tmp_path / "a")
        run("simulate", "--config", tmp_path / "a" / "config.toml", "--out", tmp_path / "b")
        assert (tmp_path / "a" / "counts.csv").read_bytes() == (tmp_path / "b" / "counts.csv").read_bytes()

    def test_classical(self, tmp_path):
        cfg = small_config(tmp_path, 'mode = "Classical"\n')
        res = run("simulate", "--config", cfg, "--out", tmp_path / "o")
        assert res.exit_code == 0, res.stderr
        recs = read_counts_csv(tmp_path / "o" / "counts.csv")
        assert any(isinstance(r.counts, float) and not r.counts.is_integer() for r in recs)

    def test_unknown_key(self, tmp_path):
        res = run("simulate", "--config", small_config(tmp_path, "wavelength_nm = 810\n"), "--out", tmp_path / "o")
        assert res.exit_code == 2
        assert "wavelength_nm" in res.stderr

    def test_bad_value(self, tmp_path):
        res = run("simulate", "--config", small_config(tmp_path, "exposure_s = -1.0\n"), "--out", tmp_path / "o")
        assert res.exit_code == 2
        assert "exposure_s" in res.stderr


class TestChsh:
    def test_peak(self, tmp_path):
        res = run("chsh", ideal_counts_file(tmp_path), "--out", tmp_path / "r", "--format", "json")
        assert res.exit_code == 0, res.stderr
        rows = json.loads((tmp_path / "r" / "chsh_scan.json").read_text())["rows"]
        best = max(rows, key=lambda r: r["S"])
        assert best["S"] == pytest.approx(2 * math.sqrt(2), abs=1e-9)
        assert min(abs(best["chi_rad"] - c) for c in (math.pi / 16, 5 * math.pi / 16)) < 1e-12

    def test_single_chi_csv(self, tmp_path):
        res = run("chsh", ideal_counts_file(tmp_path, 0.9), "--chi-deg", 11.25, "--out", tmp_path / "r")
        assert res.exit_code == 0, res.stderr
        with open(tmp_path / "r" / "chsh_scan.csv") as fh:
            (row,) = list(csv.DictReader(fh))
        assert float(row["S"]) == pytest.approx(2.546, abs=1e-3)

    def test_empty_file(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        res = run("chsh", empty)
        assert res.exit_code == 3
        assert "empty" in res.stderr

    def test_missing_settings(self, tmp_path):
        path = tmp_path / "few.csv"
        path.write_text("theta_rad,chi_rad,counts,exposure_s\n0.0,0.0,10,1.0\n")
        res = run("chsh", path)
        assert res.exit_code == 3

    def test_missing_file(self, tmp_path):
        assert run("chsh", tmp_path / "absent.csv").exit_code == 3


def test_fringes(tmp_path):
    res = run("fringes", ideal_counts_file(tmp_path, 0.9), "--out", tmp_path / "f")
    assert res.exit_code == 0, res.stderr
    with open(tmp_path / "f" / "fringes.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert all(float(r["visibility"]) == pytest.approx(0.9, abs=1e-9) for r in rows)


def test_fringes_insufficient(tmp_path):
    path = tmp_path / "few.csv"
    path.write_text("theta_rad,chi_rad,counts,exposure_s\n0.0,0.0,10,1.0\n0.0,0.1,8,1.0\n")
    assert run("fringes", path).exit_code == 3


class TestRender:
    def test_default(self, tmp_path):
        res = run("render", "--out", tmp_path / "m", "--format", "both")
        assert res.exit_code == 0, res.stderr
        names = {p.name for p in (tmp_path / "m").iterdir()}
        assert len([n for n in names if n.endswith(".csv")]) == 5
        assert len([n for n in names if n.endswith(".png")]) == 5
        assert "manifest.json" in names

    def test_state_file(self, tmp_path):
        res = run("render", "--state", GOLDEN / "single_l0.txt", "--out", tmp_path / "m")
        assert res.exit_code == 0, res.stderr

    def test_bad_state_file(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("Q 0 1 0\n")
        assert run("render", "--state", bad, "--out", tmp_path / "m").exit_code == 3

    def test_zero_state(self, tmp_path):
        zero = tmp_path / "zero.txt"
        zero.write_text("L 0 0.0 0.0\n")
        assert run("render", "--state", zero, "--out", tmp_path / "m").exit_code == 4


def test_version():
    res = run("--version")
    assert res.exit_code == 0
    assert "0.1.0" in res.stdout
