"""End-to-end tests of the command-line interface and its file formats."""

import json
import math

import pytest

from gwldp import cli
from gwldp.errors import ConvergenceError

BERN_F = '{"family": "bernoulli", "params": {"p": 0.5}}'
QUAD_F = '{"family": "explicit", "params": {"probs": [[0, 0.25], [2, 0.75]]}}'


def run(argv):
    return cli.main(argv)


class TestExtinction:
    def test_prints_minimal_root(self, capsys, tmp_path):
        code = run(["extinction", "--f", QUAD_F, "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out.strip()
        assert float(out) == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_subcritical_is_one(self, capsys, tmp_path):
        code = run(["extinction", "--f", BERN_F, "--out", str(tmp_path)])
        assert code == 0
        assert capsys.readouterr().out.strip() == "1"


class TestProgenyPmf:
    def test_csv_with_deficit_trailer(self, tmp_path, capsys):
        code = run(["progeny-pmf", "--f", BERN_F, "--k-max", "6",
                    "--out", str(tmp_path)])
        assert code == 0
        text = (tmp_path / "progeny_pmf.csv").read_text()
        lines = text.splitlines()
        assert lines[0] == "k,pi_k"
        assert lines[1] == "1,0.5"
        assert lines[2] == "2,0.25"
        assert lines[-1].startswith("# deficit=")
        deficit = float(lines[-1].split("=")[1])
        assert deficit == pytest.approx(sum(0.5 ** k for k in range(7, 1000)),
                                        abs=1e-12)

    def test_supercritical_exit_three(self, tmp_path, capsys):
        code = run(["progeny-pmf", "--f",
                    '{"family": "explicit", "params": {"probs": [[0, 0.2], [2, 0.8]]}}',
                    "--out", str(tmp_path)])
        assert code == 3


class TestRate:
    def test_zero_row_at_offspring_mean(self, tmp_path, capsys):
        code = run(["rate", "--f", BERN_F, "--grid", "0.1:0.9:5",
                    "--target", "offspring", "--out", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "rate.csv").read_text().splitlines()
        assert lines[0] == "x,value,argmax_theta,route"
        rows = {float(l.split(",")[0]): l.split(",") for l in lines[1:]}
        assert float(rows[0.5][1]) == pytest.approx(0.0, abs=1e-12)

    def test_progeny_routes_agree(self, tmp_path, capsys):
        values = {}
        for route in ("closed", "direct"):
            code = run(["rate", "--f", BERN_F, "--grid", "1.2:4:8",
                        "--target", "progeny", "--route", route,
                        "--out", str(tmp_path / route)])
            assert code == 0
            lines = (tmp_path / route / "rate.csv").read_text().splitlines()
            values[route] = [float(l.split(",")[1]) for l in lines[1:]]
            assert all(l.split(",")[3] == route for l in lines[1:])
        assert values["closed"] == pytest.approx(values["direct"], abs=1e-6)


class TestCompare:
    def test_columns_and_ordering(self, tmp_path, capsys):
        code = run(["compare", "--f", BERN_F, "--grid", "0:0.95:20",
                    "--out", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "compare.csv").read_text().splitlines()
        assert lines[0] == "x,J_random,J_diamond,I_f,leq_ok,strict"
        for line in lines[1:]:
            cells = line.split(",")
            assert cells[4] == "true"
            j_rand, j_diam = float(cells[1]), float(cells[2])
            assert j_rand <= j_diam + 1e-10


class TestSimulate:
    def scenario_file(self, tmp_path, trials=2000):
        scenario = {
            "f": {"family": "bernoulli", "params": {"p": 0.5}},
            "g": {"family": "explicit", "params": {"probs": [[1, 1.0]]}},
            "n_schedule": [5, 10],
            "trials": trials,
            "thresholds": [{"kind": "mean_ge", "level": 3.0},
                           {"kind": "mean_ge", "level": 50.0}],
            "master_seed": 31415,
        }
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(scenario))
        return path

    def test_emits_both_csvs(self, tmp_path, capsys):
        code = run(["simulate", "--config", str(self.scenario_file(tmp_path)),
                    "--out", str(tmp_path)])
        assert code == 0   # censored results are not failures
        rates = (tmp_path / "rates.csv").read_text().splitlines()
        assert rates[0] == ("n,threshold,hits,trials,rate_estimate,"
                            "ci_halfwidth,reference_rate,censored")
        assert len(rates) == 1 + 2 * 2
        impossible = [r for r in rates[1:] if "mean_ge:50" in r]
        assert all(r.endswith("true") for r in impossible)
        est = (tmp_path / "estimators.csv").read_text().splitlines()
        assert est[0] == "n,trial,est_ratio,est_meaninit"
        assert len(est) == 1 + 2 * 2000

    def test_seed_replay_byte_identical(self, tmp_path, capsys):
        cfg = self.scenario_file(tmp_path, trials=500)
        for sub in ("a", "b"):
            assert run(["simulate", "--config", str(cfg),
                        "--out", str(tmp_path / sub)]) == 0
        assert (tmp_path / "a" / "rates.csv").read_bytes() == \
            (tmp_path / "b" / "rates.csv").read_bytes()
        assert (tmp_path / "a" / "estimators.csv").read_bytes() == \
            (tmp_path / "b" / "estimators.csv").read_bytes()


class TestVerify:
    def test_fast_checks_pass(self, tmp_path, capsys):
        code = run(["verify", "--checks", "prop3_contraction,prop4_bracket,"
                    "corollary1,remark6", "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        for name in ("prop3_contraction", "prop4_bracket", "corollary1",
                     "remark6"):
            assert f"{name}: pass" in out
        report = (tmp_path / "verify.csv").read_text().splitlines()
        assert report[0] == "check,status,max_deviation,tolerance"
        assert len(report) == 5

    def test_unknown_check_rejected(self, tmp_path, capsys):
        assert run(["verify", "--checks", "prop99",
                    "--out", str(tmp_path)]) == 2


class TestConfigHandling:
    def test_bad_json_exit_two(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"command": "rate",')
        assert run(["rate", "--config", str(path)]) == 2
        assert "line" in capsys.readouterr().err

    def test_bad_grid_exit_two(self, tmp_path, capsys):
        assert run(["rate", "--f", BERN_F, "--grid", "0.9:0.1:5",
                    "--out", str(tmp_path)]) == 2

    def test_bad_family_exit_two(self, tmp_path, capsys):
        assert run(["rate", "--f", '{"family": "zeta", "params": {}}',
                    "--out", str(tmp_path)]) == 2

    def test_convergence_failure_exit_four(self, tmp_path, capsys, monkeypatch):
        def explode(cfg):
            raise ConvergenceError("synthetic")
        monkeypatch.setitem(cli._DISPATCH, "rate", explode)
        assert run(["rate", "--f", BERN_F, "--out", str(tmp_path)]) == 4

    def test_dump_config_round_trip(self, tmp_path, capsys):
        out_a = tmp_path / "a"
        code = run(["rate", "--f", BERN_F, "--grid", "0.1:0.9:7",
                    "--target", "offspring", "--out", str(out_a),
                    "--dump-config"])
        assert code == 0
        dumped = capsys.readouterr().out
        json_text = dumped[:dumped.rindex("}") + 1]
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json_text)
        out_b = tmp_path / "b"
        assert run(["rate", "--config", str(cfg_path), "--out", str(out_b)]) == 0
        assert (out_a / "rate.csv").read_bytes() == \
            (out_b / "rate.csv").read_bytes()


class TestCsvConventions:
    def test_lf_endings_and_digits(self, tmp_path, capsys):
        run(["rate", "--f", BERN_F, "--grid", "0:1:3",
             "--target", "offspring", "--out", str(tmp_path)])
        raw = (tmp_path / "rate.csv").read_bytes()
        assert b"\r" not in raw
        text = raw.decode()
        # boundary rows carry -log(1/2) at 12 significant digits
        assert "0.69314718056" in text
