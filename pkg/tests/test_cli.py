"""Command-line entry points."""

import pytest

from afdm_sim import parse_csv
from afdm_sim.cli import main

TINY_CONFIG = """\
n_subcarriers = 32
alpha_max = 1
l_max = 1
paths = 2
snr_p_db = 40
snr_d_db = 10
pilot_counts = 1
iteration_counts = 1
trials = 2
seed = 5
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "sweep.cfg"
    path.write_text(TINY_CONFIG)
    return str(path)


class TestValidate:
    def test_reports_derived_values(self, config_path, capsys):
        assert main(["validate", "--config", config_path]) == 0
        out = capsys.readouterr().out
        assert "config OK" in out
        assert "guard width = 5" in out
        assert "c1 = 3/64" in out
        assert "max pilot count = 5" in out

    def test_missing_file(self, tmp_path, capsys):
        code = main(["validate", "--config", str(tmp_path / "absent.cfg")])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_invalid_config(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text(TINY_CONFIG.replace("paths = 2", "paths = 99"))
        assert main(["validate", "--config", str(path)]) == 2
        assert "error:" in capsys.readouterr().err


class TestRun:
    def test_end_to_end(self, config_path, tmp_path, capsys):
        out_path = tmp_path / "results.csv"
        code = main(["run", "--config", config_path, "--out", str(out_path)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "wrote 1 records" in stdout
        assert out_path.exists()
        assert (tmp_path / "results.csv.meta").exists()
        records = parse_csv(str(out_path))
        assert len(records) == 1
        assert records[0].trials == 2
        assert records[0].seed == 5

    def test_overrides(self, config_path, tmp_path):
        out_path = tmp_path / "results.csv"
        main([
            "run", "--config", config_path, "--out", str(out_path),
            "--seed", "77", "--trials", "3",
        ])
        record = parse_csv(str(out_path))[0]
        assert record.seed == 77
        assert record.trials == 3

    def test_rerun_is_deterministic(self, config_path, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        main(["run", "--config", config_path, "--out", str(first)])
        main(["run", "--config", config_path, "--out", str(second)])
        assert first.read_bytes() == second.read_bytes()

    def test_workers_flag(self, config_path, tmp_path):
        serial = tmp_path / "serial.csv"
        parallel = tmp_path / "parallel.csv"
        main(["run", "--config", config_path, "--out", str(serial)])
        main([
            "run", "--config", config_path, "--out", str(parallel),
            "--workers", "2",
        ])
        assert serial.read_bytes() == parallel.read_bytes()

    def test_bad_config_exits_nonzero(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("n_subcarriers = 32\n")
        code = main(["run", "--config", str(path), "--out", str(tmp_path / "o.csv")])
        assert code == 2
        assert "error:" in capsys.readouterr().err
