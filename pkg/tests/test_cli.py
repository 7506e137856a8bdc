"""Command line interface: subcommands, overrides and exit codes."""

import pytest

from cosync import cli
from cosync.errors import LockstepError

from test_orchestrator import CONFIG
from test_profiles import SAMPLE

PROFILE = SAMPLE.replace("name = bench", "name = clitest").replace(
    "snr_threshold_db = 25", "snr_threshold_db = -500").replace(
    "[obstacles]", "[link ugv_uav]\ntx_power_dbm = 20\n"
    "path_loss_exponent = 2.0\nreference_loss_db = 47\n"
    "noise_floor_dbm = -92\nsnr_threshold_db = -500\nloss_steepness = 0.5\n"
    "bitrate_bps = 54e6\n\n[obstacles]")


@pytest.fixture()
def workdir(tmp_path):
    config = tmp_path / "demo.cfg"
    config.write_text(CONFIG.replace("distances = 40", "distances = 20, 40"))
    profile = tmp_path / "clitest.profile"
    profile.write_text(PROFILE)
    return tmp_path


def _args(workdir, *extra):
    return ["--config", str(workdir / "demo.cfg"),
            "--profile", str(workdir / "clitest.profile"), *extra]


def test_run_prints_one_line_per_distance(workdir, capsys):
    assert cli.main(["run", *_args(workdir)]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert len(lines) == 2
    assert lines[0].startswith("distance_m=20 channel=los transport=udp ")
    assert "loss=0 " in lines[0]
    assert "windows=3" in lines[0]


def test_run_writes_to_a_file(workdir):
    out = workdir / "run.txt"
    assert cli.main(["run", *_args(workdir), "--out", str(out)]) == 0
    assert out.read_text().endswith("\n")
    assert len(out.read_text().strip().split("\n")) == 2


def test_distance_and_transport_overrides(workdir, capsys):
    code = cli.main(["run", *_args(workdir), "--distances", "60",
                     "--transport", "tcp"])
    assert code == 0
    (line,) = capsys.readouterr().out.strip().split("\n")
    assert "distance_m=60" in line and "transport=tcp" in line


def test_seed_flag_beats_environment_and_config(workdir, capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "777")
    assert cli.main(["run", *_args(workdir), "--seed", "123"]) == 0
    assert "seed=123" in capsys.readouterr().out


def test_seed_environment_beats_config(workdir, capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "777")
    assert cli.main(["run", *_args(workdir)]) == 0
    assert "seed=777" in capsys.readouterr().out


def test_config_seed_is_the_default(workdir, capsys, monkeypatch):
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    assert cli.main(["run", *_args(workdir)]) == 0
    assert "seed=1" in capsys.readouterr().out  # scenario default


def test_garbled_seed_environment_is_a_usage_error(workdir, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "not-a-number")
    assert cli.main(["run", *_args(workdir)]) == 1


def test_grid_writes_the_csv_contract(workdir):
    out = workdir / "grid.csv"
    code = cli.main(["grid", *_args(workdir), "--seed-count", "2",
                     "--out", str(out)])
    assert code == 0
    lines = out.read_text().split("\n")
    assert lines[0] == ("distance_m,channel,transport,architecture,"
                        "pd_a_s,l_p_pct,windows,retransmissions")
    assert len(lines) == 6  # header + 2 distances x 2 channels + newline
    assert lines[-1] == ""


def test_grid_channel_flag_restricts_rows(workdir, capsys):
    code = cli.main(["grid", *_args(workdir), "--seed-count", "1",
                     "--channel", "los"])
    assert code == 0
    rows = capsys.readouterr().out.strip().split("\n")[1:]
    assert len(rows) == 2
    assert all(",los," in row for row in rows)


def test_grid_same_seed_is_byte_identical(workdir):
    first = workdir / "a.csv"
    second = workdir / "b.csv"
    for out in (first, second):
        assert cli.main(["grid", *_args(workdir), "--seed-count", "2",
                         "--seed", "9", "--out", str(out)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_compare_reports_both_architectures(workdir, capsys):
    code = cli.main(["compare", *_args(workdir), "--seed-count", "2",
                     "--distances", "40"])
    assert code == 0
    (line,) = capsys.readouterr().out.strip().split("\n")
    for key in ("masterless_loss=", "master_loss=", "loss_gap_pp=",
                "masterless_delay_s=", "master_delay_s=", "delay_ratio="):
        assert key in line


def test_missing_config_file_exits_one(workdir):
    assert cli.main(["run", "--config", str(workdir / "absent.cfg")]) == 1


def test_malformed_config_exits_one(workdir):
    bad = workdir / "bad.cfg"
    bad.write_text("[scenario]\nchannel = fog\n")
    assert cli.main(["run", "--config", str(bad)]) == 1


def test_usage_errors_exit_one(workdir):
    assert cli.main(["run"]) == 1  # --config is required
    assert cli.main(["run", *_args(workdir), "--no-such-flag"]) == 1
    assert cli.main([]) == 1


def test_internal_failures_exit_two(workdir, monkeypatch):
    def explode(*_args, **_kwargs):
        raise LockstepError("clock divergence (injected)")

    monkeypatch.setattr(cli, "run_scenario", explode)
    assert cli.main(["run", *_args(workdir)]) == 2


def test_calibrate_requires_paired_targets(workdir):
    code = cli.main(["calibrate",
                     "--config", str(workdir / "demo.cfg"),
                     "--targets", "a.csv", "--targets", "b.csv"])
    assert code == 1
