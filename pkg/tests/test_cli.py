import csv
import json

import pytest

from divlab import __version__
from divlab.cli import (
    EXIT_BAND,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_RESONANCE,
    EXIT_SCHEDULE,
    main,
    parse_config,
)
from divlab.errors import ConfigError
from divlab.small_divisors import parse_multiplier


@pytest.fixture(autouse=True)
def _no_env(monkeypatch):
    monkeypatch.delenv("DIVLAB_OUT_DIR", raising=False)


def run(tmp_path, *args):
    return main([*args, "--out-dir", str(tmp_path)])


def load(path):
    return json.loads(path.read_text())


class TestParseConfig:
    def test_defaults(self):
        cfg = parse_config("majorant")
        assert cfg.params["R"] == 1.0 and cfg.seed == 0

    def test_empty_file_and_flags(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("")
        cfg = parse_config("majorant", f, {"R": "0.5", "order": "12", "seed": "3"})
        assert cfg.params["R"] == 0.5 and cfg.params["order"] == 12 and cfg.seed == 3

    def test_precedence(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[majorant]\nR = 0.25\nd = 2\n")
        cfg = parse_config("majorant", f, {"R": "0.75"})
        assert cfg.params["R"] == 0.75 and cfg.params["d"] == 2
        assert cfg.source["d"].endswith(":3")

    def test_sectionless_file(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("# comment\nR = 0.25\n[common]\nseed = 9\n")
        cfg = parse_config("majorant", f)
        assert cfg.params["R"] == 0.25 and cfg.seed == 9

    def test_duplicate_key(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[majorant]\nR = 1\nR = 2\n")
        with pytest.raises(ConfigError) as ei:
            parse_config("majorant", f)
        assert ei.value.key == "R" and ei.value.line == 3

    def test_duplicate_key_without_header(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("R = 1\nd = 2\nR = 2\n")
        with pytest.raises(ConfigError) as ei:
            parse_config("majorant", f)
        assert ei.value.key == "R" and ei.value.line == 3

    def test_unknown_key(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[majorant]\nR = 1\nbogus = 2\n")
        with pytest.raises(ConfigError) as ei:
            parse_config("majorant", f)
        assert ei.value.key == "bogus" and ei.value.line == 3
        assert "bogus" in str(ei.value)

    def test_unknown_section(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[majorant]\nR = 1\n\n[nope]\nx = 1\n")
        with pytest.raises(ConfigError) as ei:
            parse_config("majorant", f)
        assert ei.value.line == 4

    def test_type_mismatch(self, tmp_path):
        f = tmp_path / "c.ini"
        f.write_text("[majorant]\norder = many\n")
        with pytest.raises(ConfigError) as ei:
            parse_config("majorant", f)
        assert ei.value.key == "order" and ei.value.line == 2

    def test_missing_required(self):
        with pytest.raises(ConfigError) as ei:
            parse_config("eta")
        assert ei.value.key == "K"

    def test_env_overrides_out_dir(self):
        cfg = parse_config("majorant", None, {"out_dir": "a"}, env={"DIVLAB_OUT_DIR": "b"})
        assert cfg.out_dir == "b"

    def test_cf_golden_spec(self):
        cfg = parse_config("bruno", None, {"alpha": "cf:[0;1,1,1,1,1,1,1,1]"})
        m = parse_multiplier(cfg.params["alpha"])
        assert m.alpha == parse_multiplier("21/34").alpha

    def test_hash_ignores_out_dir(self):
        a = parse_config("majorant", None, {"out_dir": "x"})
        b = parse_config("majorant", None, {"out_dir": "y"})
        assert a.config_hash == b.config_hash
        assert a.config_hash != parse_config("majorant", None, {"R": "2"}).config_hash


class TestCommands:
    def test_linear_model_identity(self, tmp_path):
        assert run(tmp_path, "linearize", "--germ", "linear", "--order", "6") == EXIT_OK
        doc = load(tmp_path / "linearize.json")
        assert doc["tool"] == "divlab" and doc["version"] == __version__
        assert len(doc["config_hash"]) == 16
        assert doc["result"]["residual_v_max"] == 0

    def test_linearize_full_newton(self, tmp_path):
        code = run(tmp_path, "linearize", "--mode", "full", "--scheme", "newton", "--order", "6",
                   "--divisor-csv", "d.csv")
        assert code == EXIT_OK
        assert (tmp_path / "d.csv").exists()
        assert load(tmp_path / "linearize.json")["result"]["residual_order"] >= 6

    def test_linearize_series_files(self, tmp_path):
        from divlab.series_core import DomainSpec, FourierTaylorSeries

        dom = DomainSpec(1.0, 1.0, 5, 5)
        a = FourierTaylorSeries.from_terms(dom, {(1, 1): 0.01})
        (tmp_path / "a.json").write_text(a.to_json())
        code = run(tmp_path, "linearize", "--a", str(tmp_path / "a.json"), "--order", "5")
        assert code == EXIT_OK

    def test_band_overflow(self, tmp_path):
        from divlab.series_core import DomainSpec, FourierTaylorSeries

        dom = DomainSpec(1.0, 1.0, 5, 2)
        a = FourierTaylorSeries.from_terms(dom, {(1, 1): 0.01})
        (tmp_path / "a.json").write_text(a.to_json())
        assert run(tmp_path, "linearize", "--a", str(tmp_path / "a.json"), "--order", "5") == EXIT_BAND

    def test_schroeder_resonance(self, tmp_path):
        assert run(tmp_path, "schroeder", "--alpha", "root:1/3", "--order", "6") == EXIT_RESONANCE

    def test_schroeder_newton(self, tmp_path):
        assert run(tmp_path, "schroeder", "--order", "16", "--newton", "3") == EXIT_OK
        res = load(tmp_path / "schroeder.json")["result"]
        assert res["order"] == 16

    def test_divergence_scan(self, tmp_path):
        assert run(tmp_path, "divergence-scan", "--order", "40") == EXIT_OK
        rows = [r for r in csv.reader((tmp_path / "divergence.csv").open()) if r and not r[0].startswith("#")]
        assert rows[0] == ["alpha_label", "n", "abs_psi_n", "root_test"]
        labels = {r[0] for r in rows[1:]}
        assert labels == {"golden", "cf:[0;10,100,10000,100000000]"}

    def test_majorant(self, tmp_path):
        assert run(tmp_path, "majorant", "--order", "8") == EXIT_OK
        A = load(tmp_path / "A.json")["result"]["A"]
        assert A[2:8] == [1, 3, 12, 53, 251, 1245]

    def test_eta(self, tmp_path):
        (tmp_path / "K.csv").write_text("m,K\n" + "".join(f"{m},2\n" for m in range(2, 11)))
        assert run(tmp_path, "eta", "--K", str(tmp_path / "K.csv"), "--len", "10") == EXIT_OK
        rows = [r for r in csv.reader((tmp_path / "eta.csv").open()) if r and not r[0].startswith("#")]
        assert [float(r[2]) for r in rows[1:]] == [2.0 ** (m - 1) for m in range(1, 11)]

    def test_eta_short_file(self, tmp_path):
        (tmp_path / "K.csv").write_text("2,1\n3,1\n")
        assert run(tmp_path, "eta", "--K", str(tmp_path / "K.csv"), "--len", "10") == EXIT_CONFIG

    def test_bruno(self, tmp_path):
        assert run(tmp_path, "bruno", "--K", "8") == EXIT_OK

    def test_schedule(self, tmp_path):
        assert run(tmp_path, "schedule", "--find-l0") == EXIT_OK
        cert = load(tmp_path / "cert.json")["result"]
        assert cert["certificate"]["passed"]

    def test_schedule_divergent(self, tmp_path):
        assert run(tmp_path, "schedule", "--find-l0", "--dstar", "exp", "--lmax", "10") == EXIT_SCHEDULE

    def test_fischer_check(self, tmp_path):
        assert run(tmp_path, "fischer-check", "--cases", "10", "--L", "3") == EXIT_OK

    def test_divisors(self, tmp_path):
        assert run(tmp_path, "divisors", "--nmax", "4", "--jmax", "1") == EXIT_OK
        lines = (tmp_path / "divisors.csv").read_text().splitlines()
        assert "n,j,divisor" in lines

    def test_bad_flag_value(self, tmp_path, capsys):
        assert run(tmp_path, "majorant", "--order", "x") == EXIT_CONFIG
        assert "order" in capsys.readouterr().err

    def test_unknown_flag(self, tmp_path):
        assert run(tmp_path, "majorant", "--nonsense", "1") == EXIT_CONFIG

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            d.mkdir()
            assert run(d, "linearize", "--order", "6", "--seed", "4") == EXIT_OK
        assert (a / "linearize.json").read_bytes() == (b / "linearize.json").read_bytes()
