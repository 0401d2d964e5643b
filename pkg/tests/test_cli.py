import csv
import json

import pytest

from crossbar_rb import cli


@pytest.fixture(scope="module")
def cache(tmp_path_factory):
    return str(tmp_path_factory.mktemp("cache"))


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestField:
    def test_columns_and_values(self, tmp_path):
        assert run("field", "--out", tmp_path, "--x-points", 9) == 0
        rows = read_rows(tmp_path / "field.csv")
        assert list(rows[0]) == ["x_over_L", "Bx_over_B0", "Bz_over_B0", "method"]
        assert {r["method"] for r in rows} == {"sum", "two_wire", "closed"}
        at = lambda m, x: next(r for r in rows if r["method"] == m and float(r["x_over_L"]) == x)
        for x in (1.0, 3.0):
            closed = float(at("closed", x)["Bz_over_B0"])
            assert abs(closed) == pytest.approx(0.62601, abs=2e-5)  # polarity alternates with k
            assert float(at("two_wire", x)["Bz_over_B0"]) == pytest.approx(closed, rel=1e-12)
            # N = 100 truncation of the lattice sum
            assert float(at("sum", x)["Bz_over_B0"]) == pytest.approx(closed, rel=1e-2)
        assert abs(float(at("closed", 2.0)["Bx_over_B0"])) == pytest.approx(0.68257, abs=2e-5)
        sidecar = json.loads((tmp_path / "field.json").read_text())
        assert sidecar["config"]["cutoff"] == 100

    def test_byte_identical(self, tmp_path):
        assert run("field", "--out", tmp_path / "a") == 0
        assert run("field", "--out", tmp_path / "b") == 0
        assert (tmp_path / "a/field.csv").read_bytes() == (tmp_path / "b/field.csv").read_bytes()


class TestConfig:
    def test_unknown_key_in_file(self, tmp_path, capsys):
        conf = tmp_path / "run.cfg"
        conf.write_text("seed = 3\nbogus = 1\n")
        assert run("field", "--config", conf, "--out", tmp_path / "o") == 2
        assert "bogus" in capsys.readouterr().err
        assert not (tmp_path / "o").exists()

    @pytest.mark.parametrize("flag,value", [("--z0-over-L", "-1"), ("--n-avg", "0"), ("--scenario", "weird"),
                                            ("--kappa", "nan"), ("--seed", "x"), ("--projector", "Q")])
    def test_invalid_values(self, tmp_path, flag, value):
        assert run("irb", "--fast", flag, value, "--out", tmp_path) == 2

    def test_file_values_and_flag_override(self, tmp_path):
        conf = tmp_path / "run.cfg"
        conf.write_text("# comment\nx_points = 5\ncutoff = 10\n")
        assert run("field", "--config", conf, "--cutoff", 20, "--out", tmp_path) == 0
        cfg = json.loads((tmp_path / "field.json").read_text())["config"]
        assert cfg["x_points"] == 5 and cfg["cutoff"] == 20

    def test_partial_files_removed_on_failure(self, tmp_path, monkeypatch):
        def boom(self, name, payload):
            raise ValueError("simulated failure")
        monkeypatch.setattr(cli._Artifacts, "json", boom)
        assert run("field", "--out", tmp_path) == 2
        assert not (tmp_path / "field.csv").exists()

    def test_sidecar_reproduces_run(self, tmp_path, cache):
        args = ["irb", "--n-avg", 20, "--lengths", "1,4,16", "--seed", 7, "--cache-dir", cache]
        assert run(*args, "--out", tmp_path / "a") in (0, 3)
        sidecar = tmp_path / "a/irb_fit.json"
        assert run("irb", "--config", sidecar, "--out", tmp_path / "b") in (0, 3)
        for name in ("irb_reference_decay.csv", "irb_interleaved_decay.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestClifford:
    def test_generate_and_verify(self, tmp_path, capsys):
        path = tmp_path / "table.bin"
        assert run("clifford", "--generate", "--out", path) == 0
        assert path.exists()
        assert run("clifford", "--verify", path) == 0
        assert "11520 elements" in capsys.readouterr().out

    def test_needs_an_action(self):
        assert run("clifford") == 2


class TestProtocols:
    def test_rb_noiseless(self, tmp_path, cache):
        code = run("rb", "--noiseless", "--n-avg", 10, "--m-max", 50, "--cache-dir", cache, "--out", tmp_path)
        assert code == 0
        fit = json.loads((tmp_path / "rb_fit.json").read_text())
        assert fit["p"] == 1 and fit["degenerate"] and fit["protocol"] == "standard_rb"
        rows = read_rows(tmp_path / "rb_decay.csv")
        assert list(rows[0]) == ["m", "mean_fidelity", "std_err", "n"]
        assert all(float(r["mean_fidelity"]) == pytest.approx(1, abs=1e-10) for r in rows)

    def test_irb_monte_carlo_near_fast(self, tmp_path, cache):
        assert run("irb", "--fast", "--kappa", 0.05, "--out", tmp_path / "f") == 0
        code = run("irb", "--kappa", 0.05, "--n-avg", 300, "--cache-dir", cache, "--workers", 4,
                   "--out", tmp_path / "m")
        assert code == 0
        exact = json.loads((tmp_path / "f/irb_fit.json").read_text())
        mc = json.loads((tmp_path / "m/irb_fit.json").read_text())
        assert abs(mc["r_est"] - exact["r_est"]) <= 3 * mc["r_std_err"]

    def test_mirb_correlated_below_anticorrelated(self, tmp_path):
        r = {}
        for scenario in ("correlated", "anticorrelated"):
            out = tmp_path / scenario
            assert run("mirb", "--fast", "--projector", "T0", "--scenario", scenario,
                       "--kappa", 0.06, "--out", out) == 0
            r[scenario] = json.loads((out / "mirb_fit.json").read_text())["r_est"]
        assert r["correlated"] < r["anticorrelated"]

    def test_workers_do_not_change_output(self, tmp_path, cache):
        for w in (1, 3):
            assert run("mirb", "--n-avg", 30, "--m-max", 10, "--workers", w, "--cache-dir", cache,
                       "--out", tmp_path / str(w)) in (0, 3)
        for name in ("mirb_reference_decay.csv", "mirb_interleaved_decay.csv"):
            assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "3" / name).read_bytes()

    def test_sweep_outputs(self, tmp_path):
        assert run("sweep", "--kappa-points", 3, "--out", tmp_path) == 0
        rows = read_rows(tmp_path / "sweep.csv")
        assert len(rows) == 9
        zero = next(r for r in rows if float(r["kappa1"]) == 0 and float(r["kappa2"]) == 0)
        assert abs(float(zero["r_est"])) < 1e-12
        cuts = read_rows(tmp_path / "sweep_cuts.csv")
        assert len(cuts) == 5
