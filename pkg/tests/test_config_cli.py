import subprocess
import sys

import pytest

from csiregion.cli import run
from csiregion.config import RunConfig, SystemConfig, config_from_dict, load_config
from csiregion.errors import InvalidArgument

SMALL = """
[system]
velocity_kmh = 10.0

[sweep]
n_b = [0, 8]
max_density = 0.025
samples = 8
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(SMALL)
    return path


class TestConfig:
    def test_defaults(self):
        cfg = RunConfig()
        s = cfg.system
        assert (s.n_bs, s.k, s.carrier_freq, s.n_rank, s.delay) == (4, 4, 2.6e9, 2, 5)
        b = s.budget
        assert (b.sigma2_ul, b.sigma2_dl, b.sigma2_p, b.p_max_ul, b.p_tot_dl) == (0.1, 0.1, 0.1, 1.0, 1.0)
        assert s.coeff_variance == 1.0 and s.tau_max_us == 1.0
        assert cfg.samples == 200 and cfg.seed == 0

    def test_units_at_boundary(self):
        cfg = config_from_dict({"system": {"velocity_kmh": 36.0, "tau_max_us": 2.0}})
        prof = cfg.system.profile()
        assert prof.velocity == pytest.approx(10.0) and prof.max_delay_spread == pytest.approx(2e-6)

    def test_full_file(self, tmp_path):
        p = tmp_path / "c.toml"
        p.write_text('[system]\nn_bs = 2\nk = 3\ncarrier_freq_hz = 2e9\n[budget]\nsigma2_dl = 0.2\n'
                     '[feedback]\nmode = "successive"\nn_rank = 3\n[sweep]\nn_b = [0, 1]\nseed = 7\ndl_mode = "tdm"\n')
        cfg = load_config(p)
        assert (cfg.system.n_bs, cfg.system.k, cfg.system.carrier_freq) == (2, 3, 2e9)
        assert cfg.system.budget.sigma2_dl == 0.2 and cfg.system.feedback_mode == "successive"
        assert cfg.n_b_grid == (0.0, 1.0) and cfg.seed == 7 and cfg.system.dl_mode == "tdm"

    @pytest.mark.parametrize("data", [
        {"system": {"n_bs": 0}},
        {"system": {"bogus": 1}},
        {"nope": {}},
        {"budget": {"sigma2_ul": -1.0}},
        {"feedback": {"mode": "x"}},
        {"sweep": {"samples": 0}},
        {"sweep": {"n_b": []}},
    ])
    def test_invalid(self, data):
        with pytest.raises(InvalidArgument):
            config_from_dict(data)

    def test_missing_and_malformed_file(self, tmp_path):
        with pytest.raises(InvalidArgument):
            load_config(tmp_path / "missing.toml")
        bad = tmp_path / "bad.toml"
        bad.write_text("[system\n")
        with pytest.raises(InvalidArgument):
            load_config(bad)

    def test_system_validation(self):
        with pytest.raises(InvalidArgument):
            SystemConfig(dl_mode="both")


class TestCli:
    def test_help(self, capsys):
        assert run(["--help"]) == 0
        assert "usage" in capsys.readouterr().out

    def test_unknown_flag(self, capsys):
        assert run(["region", "--bogus"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert run(["region", "--config", str(tmp_path / "none.toml")]) == 2

    def test_bad_weight(self, small_config):
        assert run(["optimize", "--config", str(small_config), "--weight", "2"]) == 2

    def test_region_deterministic_and_config_untouched(self, small_config, tmp_path):
        before = small_config.read_bytes()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["region", "--config", str(small_config), "--out", str(a)]) == 0
        assert run(["region", "--config", str(small_config), "--out", str(b), "--threads", "3"]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert small_config.read_bytes() == before

    def test_seed_changes_output(self, small_config, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(["region", "--config", str(small_config), "--out", str(a), "--seed", "1"])
        run(["region", "--config", str(small_config), "--out", str(b), "--seed", "2"])
        assert a.read_bytes() != b.read_bytes()

    def test_lookup_reuse(self, small_config, tmp_path):
        lk, a, b = tmp_path / "lk.json", tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["lookup", "--config", str(small_config), "--out", str(lk)]) == 0
        assert run(["region", "--config", str(small_config), "--out", str(a)]) == 0
        assert run(["region", "--config", str(small_config), "--lookup", str(lk), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_lookup_mismatch(self, small_config, tmp_path):
        lk = tmp_path / "lk.json"
        run(["lookup", "--config", str(small_config), "--out", str(lk), "--velocity-kmh", "100"])
        assert run(["region", "--config", str(small_config), "--lookup", str(lk)]) == 2

    def test_rates_and_optimize(self, small_config, capsys):
        assert run(["rates", "--config", str(small_config), "--n-b", "8"]) == 0
        assert '"net_ul"' in capsys.readouterr().out
        assert run(["optimize", "--config", str(small_config), "--weight", "0", "--weight", "1",
                    "--format", "json"]) == 0
        assert '"weight": 1.0' in capsys.readouterr().out

    def test_region_json(self, small_config, capsys):
        assert run(["region", "--config", str(small_config), "--format", "json", "--feedback", "successive"]) == 0
        assert '"hull"' in capsys.readouterr().out

    def test_module_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "csiregion", "--help"], capture_output=True, text=True)
        assert out.returncode == 0 and "region" in out.stdout
