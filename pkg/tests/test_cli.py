import os
import subprocess
import sys

import pytest

from qexlab import cli

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SRC = os.path.join(ROOT, "src")


def run_cli(args, cwd, env_extra=None):
    env = dict(os.environ)
    env["PYTHONPATH"] = SRC
    env.update(env_extra or {})
    return subprocess.run([sys.executable, "-m", "qexlab", *args],
                          cwd=cwd, env=env, capture_output=True, text=True)


class TestParsing:
    def test_rho_list_range(self):
        got = cli.parse_rho_list("2^-3..2^-5")
        assert got == [2.0 ** -3, 2.0 ** -4, 2.0 ** -5]

    def test_rho_list_commas(self):
        assert cli.parse_rho_list("0.125, 0.0625") == [0.125, 0.0625]
        assert cli.parse_rho_list("2^-6") == [2.0 ** -6]

    def test_rho_list_bad_range(self):
        with pytest.raises(cli.UsageError):
            cli.parse_rho_list("0.1..0.3")


class TestExitCodes:
    def test_usage_error_is_64(self, tmp_path):
        res = run_cli(["ratio", "--nonsense"], tmp_path)
        assert res.returncode == 64

    def test_missing_r_is_64(self, tmp_path):
        res = run_cli(["ratio", "--d", "2", "--r", "", "--rho", "0.1",
                       "--n", "100", "--out", "o"], tmp_path)
        assert res.returncode == 64

    def test_degenerate_is_2(self, tmp_path):
        # radii so thin that no estimate survives at tiny n
        res = run_cli(["ratio", "--d", "2", "--r", "0.001", "--rho", "0.0005",
                       "--n", "64", "--seed", "1", "--out", "o"], tmp_path)
        assert res.returncode == 2

    def test_ok_is_0(self, tmp_path):
        res = run_cli(["ratio", "--d", "2", "--r", "0.25", "--rho", "0.0625",
                       "--n", "20000", "--seed", "7", "--out", "o"], tmp_path)
        assert res.returncode == 0, res.stderr
        assert (tmp_path / "o" / "ratio.csv").exists()
        assert (tmp_path / "o" / "estimates.csv").exists()
        assert (tmp_path / "o" / "manifest.txt").exists()


class TestDeterminism:
    def test_byte_identical_reruns_and_workers(self, tmp_path):
        args = ["ratio", "--d", "2", "--r", "0.25", "--rho", "0.0625",
                "--n", "50000", "--seed", "9"]
        for name, extra in (("a", ["--workers", "1"]),
                            ("b", ["--workers", "1"]),
                            ("c", ["--workers", "3"])):
            res = run_cli(args + extra + ["--out", name], tmp_path)
            assert res.returncode == 0, res.stderr
        a = (tmp_path / "a" / "ratio.csv").read_bytes()
        b = (tmp_path / "b" / "ratio.csv").read_bytes()
        c = (tmp_path / "c" / "ratio.csv").read_bytes()
        assert a == b == c

    def test_random_frame_reproducible(self, tmp_path):
        args = ["ratio", "--d", "2", "--r", "0.25", "--rho", "0.0625",
                "--frame", "random", "--n", "20000", "--seed", "7"]
        for name in ("fa", "fb"):
            assert run_cli(args + ["--out", name], tmp_path).returncode == 0
        assert ((tmp_path / "fa" / "ratio.csv").read_bytes()
                == (tmp_path / "fb" / "ratio.csv").read_bytes())

    def test_sweep_bytes_across_workers(self, tmp_path):
        args = ["sweep", "--d", "2", "--family", "knapp", "--rho-list",
                "2^-4..2^-5", "--n", "40000", "--seed", "3", "--no-figures"]
        for name, w in (("w1", "1"), ("w4", "4")):
            res = run_cli(args + ["--workers", w, "--out", name], tmp_path)
            assert res.returncode == 0, res.stderr
        assert ((tmp_path / "w1" / "sweep_knapp_sphere_d2.csv").read_bytes()
                == (tmp_path / "w4" / "sweep_knapp_sphere_d2.csv").read_bytes())


class TestCommands:
    def test_env_seed_default(self, tmp_path):
        args = ["ratio", "--d", "2", "--r", "0.25", "--rho", "0.0625",
                "--n", "20000"]
        run_cli(args + ["--out", "e1"], tmp_path, {"QEX_SEED": "123"})
        run_cli(args + ["--out", "e2"], tmp_path, {"QEX_SEED": "123"})
        run_cli(args + ["--out", "e3"], tmp_path, {"QEX_SEED": "321"})
        e1 = (tmp_path / "e1" / "ratio.csv").read_bytes()
        e2 = (tmp_path / "e2" / "ratio.csv").read_bytes()
        e3 = (tmp_path / "e3" / "ratio.csv").read_bytes()
        assert e1 == e2 and e1 != e3

    def test_config_file_defaults(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[ratio]\nd = 2\nr = 0.25\nrho = 0.0625\nn = 20000\n")
        res = run_cli(["ratio", "--config", str(cfg), "--seed", "5",
                       "--out", "cfg"], tmp_path)
        assert res.returncode == 0, res.stderr
        text = (tmp_path / "cfg" / "ratio.csv").read_text()
        assert text.splitlines()[1].startswith("2,0.25,0.0625")

    def test_config_rejects_unknown_key(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[ratio]\nbogus = 1\n")
        res = run_cli(["ratio", "--config", str(cfg), "--out", "x"], tmp_path)
        assert res.returncode == 64

    def test_probe_writes_tables_and_figure(self, tmp_path):
        res = run_cli(["probe", "--rho-list", "2^-4..2^-5", "--n", "50000",
                       "--seed", "2", "--out", "p"], tmp_path)
        assert res.returncode == 0, res.stderr
        out = tmp_path / "p"
        assert (out / "decay_sphere.csv").read_text().splitlines()[0] == \
            "rho,ratio,overlap,fit_exponent"
        assert (out / "decay_parab.csv").exists()
        assert (out / "decay.png").exists()

    def test_sweep_parab_control(self, tmp_path):
        res = run_cli(["sweep", "--d", "3", "--family", "degenerate",
                       "--surface", "parab", "--rho-list", "2^-4..2^-5",
                       "--n", "40000", "--seed", "4", "--out", "sp"], tmp_path)
        assert res.returncode == 0, res.stderr
        assert (tmp_path / "sp" / "sweep_degenerate_parab_d3.csv").exists()

    def test_decompose_writes_partition(self, tmp_path):
        res = run_cli(["decompose", "--d", "2", "--r", "0.25", "--rho",
                       "0.015625", "--lam", "0.25", "--n", "100000",
                       "--seed", "6", "--out", "dc"], tmp_path)
        assert res.returncode == 0, res.stderr
        lines = (tmp_path / "dc" / "partition.csv").read_text().splitlines()
        assert lines[0] == "i,j,net_1,t,se"
        assert (tmp_path / "dc" / "partition.png").exists()

    def test_tower_command(self, tmp_path):
        res = run_cli(["tower", "--d", "2", "--kind", "knapp", "--rho",
                       "0.03125", "--seed", "3", "--out", "tw"], tmp_path)
        assert res.returncode == 0, res.stderr
        assert (tmp_path / "tw" / "tower_levels.csv").exists()
        assert (tmp_path / "tw" / "tower.png").exists()
