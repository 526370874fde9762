import subprocess
import sys
from pathlib import Path

import pytest

from dmtsim import ValidationError, analysis
from dmtsim.cli import ParseError, main, parse_config, parse_grid

FIG2 = Path(__file__).resolve().parents[1] / "demos" / "configs" / "fig2.ini"

SMALL = """\
[system]
M = 1
N = 1

[sweep]
snr_db = 0, 10, 20
trials = 2000

[rate]
mode = fixed
R = 1
"""


@pytest.fixture
def small(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL)
    return path


def test_parse_grid_forms():
    assert parse_grid("15:2.5:25") == [15.0, 17.5, 20.0, 22.5, 25.0]
    assert parse_grid("1, 2,3") == [1.0, 2.0, 3.0]
    with pytest.raises(ValueError):
        parse_grid("1:0:3")


def test_fig2_config_with_interferer_overrides():
    configs = [parse_config(FIG2, [f"system.interferers={k}"]).system for k in (1, 3, 6)]
    assert [c.num_interferers for c in configs] == [1, 3, 6]
    for c in configs:
        assert (c.M, c.N, c.xi, c.rate.bits) == (2, 4, 0.5, 5.0)
        assert c.snr_grid_db[0] == 15.0 and c.snr_grid_db[-1] == 40.0
        assert len(c.snr_grid_db) == 11


def test_rate_keys_are_case_sensitive(tmp_path):
    path = tmp_path / "s.ini"
    path.write_text(SMALL.replace("mode = fixed\nR = 1", "mode = scaling\nr = 0.5"))
    assert parse_config(path).system.rate.gain == 0.5


def test_validation_error_carries_line(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text(SMALL.replace("M = 1\nN = 1", "M = 2\nN = 1"))
    with pytest.raises(ValidationError, match=r"line 3: system.n: N must be ≥ M"):
        parse_config(path)


def test_parse_errors(tmp_path):
    path = tmp_path / "broken.ini"
    path.write_text("M = 1\n")
    with pytest.raises(ParseError):
        parse_config(path)
    with pytest.raises(ParseError):
        parse_config(tmp_path / "missing.ini")


def test_seed_defaults_to_zero_and_is_echoed(small, tmp_path):
    assert parse_config(small).system.seed == 0
    assert main(["sweep", "--config", str(small), "--out", str(tmp_path), "--workers", "1"]) == 0
    assert "# seed = 0" in (tmp_path / "outage.csv").read_text()
    assert "seed = 0" in (tmp_path / "summary.txt").read_text()


def test_sweep_outputs(small, tmp_path):
    code = main(["sweep", "--config", str(small), "--out", str(tmp_path), "--workers", "1"])
    assert code == 0
    lines = (tmp_path / "outage.csv").read_text().splitlines()
    assert lines[0].startswith("# dmtsim ")
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "snr_db,target_rate_bits,trials,outages,p_out,ci_low,ci_high,discarded"
    assert len(body) == 4
    p = [float(row.split(",")[4]) for row in body[1:]]
    assert p[0] >= p[1] >= p[2]
    summary = (tmp_path / "summary.txt").read_text()
    assert "theoretical_d = 1.000000" in summary
    assert "fit_window = [0.0001, 0.1]" in summary


def test_sweep_is_byte_identical(small, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["sweep", "--config", str(small), "--out", str(a), "--workers", "1"])
    main(["sweep", "--config", str(small), "--out", str(b), "--workers", "2"])
    assert (a / "outage.csv").read_bytes() == (b / "outage.csv").read_bytes()


def test_seed_flag_changes_output(small, tmp_path):
    main(["sweep", "--config", str(small), "--out", str(tmp_path / "a"), "--workers", "1"])
    main(["sweep", "--config", str(small), "--out", str(tmp_path / "b"), "--workers", "1", "--seed", "9"])
    assert (tmp_path / "a" / "outage.csv").read_text() != (tmp_path / "b" / "outage.csv").read_text()


def test_insufficient_points_is_a_warning(tmp_path, capsys):
    path = tmp_path / "rare.ini"
    path.write_text(SMALL.replace("snr_db = 0, 10, 20", "snr_db = 60, 70, 80").replace("2000", "1000"))
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 0
    assert "InsufficientPoints" in (tmp_path / "summary.txt").read_text()
    assert "InsufficientPoints" in capsys.readouterr().err


def test_config_error_exit_code(small, tmp_path):
    assert main(["sweep", "--config", str(small), "--out", str(tmp_path), "--set", "system.M=3"]) == 2
    assert main(["sweep", "--config", str(tmp_path / "nope.ini")]) == 2
    assert main(["sweep", "--config", str(small), "--set", "garbage"]) == 2


def test_run_invalid_exit_code(small, tmp_path, monkeypatch):
    def always_bad(batch):
        import numpy as np
        n = batch.H.shape[0]
        return np.full(n, np.nan), np.zeros(n, bool)

    monkeypatch.setattr(analysis, "mutual_information_batch", always_bad)
    assert main(["sweep", "--config", str(small), "--out", str(tmp_path), "--workers", "1"]) == 3


def _surface(tmp_path):
    assert main(["dmt-surface", "--config", str(FIG2), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "dmt_surface.csv").read_text().splitlines()
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "r,xi,d_mmse,d_p2p,d_ml"
    return [tuple(float(v) for v in row.split(",")) for row in body[1:]]


def test_dmt_surface(tmp_path):
    rows = _surface(tmp_path)
    assert len(rows) == 9 * 10
    table = {(r, xi): (d, p2p, ml) for r, xi, d, p2p, ml in rows}
    assert table[(0.0, 0.5)][0] == 1.5
    assert table[(0.0, 0.0)][2] == 8.0
    assert table[(1.0, 0.0)][2] == 3.0
    for (r, xi), (d, p2p, _) in table.items():
        if xi == 0:
            assert d == p2p
        if r / 2 >= 1 - xi:
            assert d == 0


def test_dmt_surface_bad_grid(tmp_path):
    assert main(["dmt-surface", "--config", str(FIG2), "--set", "surface.xi=0, 1.2"]) == 2


def _verify(args, capsys):
    code = main(["verify", "--config", str(FIG2), "--set", "verify.tail_samples=300000",
                 "--set", "verify.realizations=300", *args])
    return code, capsys.readouterr().out


def test_verify_passes_on_default_config(capsys):
    code, out = _verify([], capsys)
    assert code == 0, out
    assert out.count("PASS") == 7


def test_verify_detects_impossible_tolerance(capsys):
    code, out = _verify(["--set", "verify.woodbury_tol=1e-16"], capsys)
    assert code == 1
    assert "FAIL  woodbury_sinr" in out


def test_verify_skips_interference_checks_without_interferers(capsys):
    code, out = _verify(["--set", "system.interferers=0", "--set", "system.xi=0"], capsys)
    assert code == 0
    assert "SKIP  interference_whitening" in out


def test_console_script(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "dmtsim.cli", "dmt-surface", "--config", str(FIG2), "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "dmt_surface.csv").exists()
