import csv
import io

import pytest

from rfeh_diversity.cli import ANALYTIC_COLUMNS, ROOT_COLUMNS, SWEEP_COLUMNS, main
from rfeh_diversity.combining import CombinerKind
from rfeh_diversity.config import ConfigError, loads, parse_power, reference_config, reference_config_text


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def small_cfg(tmp_path):
    text = reference_config_text().replace("trials = 1000000", "trials = 2000")
    path = tmp_path / "small.cfg"
    path.write_text(text, encoding="utf-8")
    return path


def test_parse_power_units():
    assert parse_power("0.5 mW") == pytest.approx(5e-4)
    assert parse_power("2W") == 2.0
    assert parse_power("3 uW") == pytest.approx(3e-6)
    with pytest.raises(ConfigError):
        parse_power("0.5")
    assert parse_power("0.5", allow_bare=True) == 0.5
    with pytest.raises(ConfigError):
        parse_power("1 dBm")


def test_reference_config_encodes_experiment():
    cfg = reference_config()
    assert cfg.path_loss == 1e-3 and cfg.efficiency == 1.0
    assert cfg.antennas == (2, 8)
    assert cfg.profiles[CombinerKind.MRC].beta == pytest.approx(2e-3)
    assert cfg.profiles[CombinerKind.EGC].beta == pytest.approx(1e-3)
    assert cfg.profiles[CombinerKind.SC].beta == 0
    assert cfg.profiles[CombinerKind.MRC].summation_power == pytest.approx(1e-3)
    assert cfg.profiles[CombinerKind.MRC].branch_power == pytest.approx(0.5e-3)
    assert len(cfg.grid) == 31 and cfg.grid[0] == 0.0 and cfg.grid[-1] == 3.0
    assert cfg.grid[3] == 0.3


def test_dump_config_round_trip(small_cfg):
    code, out, _ = run("sweep", "--config", str(small_cfg), "--seed", "99", "--dump-config")
    assert code == 0
    cfg = loads(out)
    assert cfg.seed == 99 and cfg.trials == 2000
    assert loads(cfg.dump()) == cfg
    assert cfg == reference_config().with_overrides(seed=99, trials=2000)


def test_config_errors():
    with pytest.raises(ConfigError):
        loads("[experiment]\nbogus = 1\n")
    with pytest.raises(ConfigError):
        loads("[experiment]\ntechniques = SC\n[SC]\nbranch_power = 0.5\n")
    with pytest.raises(ConfigError):
        loads("[experiment]\ntechniques = SC\n")
    with pytest.raises(ConfigError):
        loads("no section\n")


def test_sweep_row_count_and_header(small_cfg):
    code, out, err = run("sweep", "--config", str(small_cfg))
    assert code == 0
    assert out.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    rows = rows_of(out)
    assert len(rows) == 2 * 3 * 31
    assert "seed=2017" in err and "digest=" in err
    assert "\r" not in out


def test_sweep_deterministic(small_cfg, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("sweep", "--config", str(small_cfg), "--out", str(a))[0] == 0
    assert run("sweep", "--config", str(small_cfg), "--out", str(b), "--workers", "3")[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_mrc_boundary_row():
    code, out, _ = run("sweep", "--trials", "1000000")
    assert code == 0
    row = next(r for r in rows_of(out) if r["technique"] == "MRC" and r["K"] == "2" and r["P_t_W"] == "2.0")
    se = float(row["ci95_W"]) / 1.959963984540054
    assert abs(float(row["mean_net_W"])) < 3 * se
    assert float(row["analytic_net_W"]) == pytest.approx(0, abs=1e-15)


def test_sweep_pretty(small_cfg):
    code, out, _ = run("sweep", "--config", str(small_cfg), "--format", "pretty")
    assert code == 0 and "harvested" in out.splitlines()[0]


def test_boundary_command():
    code, out, _ = run("boundary", "EGC", "-K", "2", "--bracket", "0.1", "3")
    assert code == 0
    assert "1.68030 W" in out
    row = rows_of(out.split("\n", 1)[1])[0]
    assert list(row) == ROOT_COLUMNS
    assert float(row["P_t_root_W"]) == pytest.approx(1.680297, abs=1e-6)
    code, out, _ = run("boundary", "SC", "-K", "2", "--bracket", "0.01", "3")
    assert "0.333333 W" in out


def test_boundary_no_crossing():
    code, _, err = run("boundary", "MRC", "-K", "2", "--bracket", "0.1", "1")
    assert code == 2
    assert "no zero crossing in bracket" in err


def test_crossover_command():
    code, out, _ = run("crossover", "SC", "MRC", "-K", "8", "--bracket", "0.1", "3")
    assert code == 0 and "1.23056 W" in out
    code, out, _ = run("crossover", "SC", "EGC", "-K", "8", "--bracket", "0.1", "3")
    assert code == 0 and "1.45505 W" in out
    code, _, err = run("crossover", "SC", "MRC", "-K", "2", "--bracket", "0.1", "3")
    assert code == 2 and "no zero crossing" in err


def test_crossover_monte_carlo(tmp_path):
    out_path = tmp_path / "x.csv"
    code, out, _ = run("crossover", "SC", "MRC", "-K", "8", "--bracket", "0.1", "3", "--mode", "mc",
                       "--trials", "200000", "--out", str(out_path))
    assert code == 0
    row = rows_of(out_path.read_text())[0]
    assert row["mode"] == "mc"
    assert float(row["P_t_root_W"]) == pytest.approx(1.2306, abs=0.05)


def parse_line(out, label):
    line = next(l for l in out.splitlines() if l.startswith(label))
    return float(line[len(label):].split()[0])


def test_optimize_schwarz_case():
    code, out, _ = run("optimize", "--h", "3,4j")
    assert code == 0
    assert parse_line(out, "gap to exact") < 1e-6
    assert parse_line(out, "objective (opt)") == pytest.approx(25.0)


def test_optimize_shutdown():
    code, out, _ = run("optimize", "--h", "0.1,0.1j", "--beta", "1", "--fixed-power", "0.25")
    assert code == 0
    assert parse_line(out, "objective (opt)") == pytest.approx(-0.25, rel=1e-9)
    assert parse_line(out, "P_w optimizer") < 1e-6


def test_optimize_budget_four():
    code, out, _ = run("optimize", "--h", "1,0", "--budget", "4", "--efficiency", "0.5", "--transmit-power", "2",
                       "--beta", "0.1", "--fixed-power", "0.3")
    assert code == 0
    # 4 eta P_t - 4 beta - P_d
    assert parse_line(out, "objective (opt)") == pytest.approx(4 * 1.0 - 0.4 - 0.3)
    assert "[2.00000000" in next(l for l in out.splitlines() if l.startswith("|w| optimizer"))


def test_optimize_sampled_channel():
    code, out, _ = run("optimize", "-K", "4", "--transmit-power", "2", "--beta", "1mW")
    assert code == 0 and parse_line(out, "gap to exact") < 1e-9


def test_optimize_needs_channel():
    assert run("optimize")[0] == 2


def test_analytic_command(tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text(reference_config_text().replace("antennas = 2, 8", "antennas = 1, 2")
                   .replace("p_t_min = 0 W", "p_t_min = 1 W").replace("p_t_max = 3 W", "p_t_max = 2 W")
                   .replace("p_t_step = 0.1 W", "p_t_step = 1 W"))
    code, out, _ = run("analytic", "--config", str(cfg))
    assert code == 0
    assert out.splitlines()[0] == ",".join(ANALYTIC_COLUMNS)
    rows = rows_of(out)
    mrc2 = [float(r["analytic_harvested_W"]) for r in rows if r["technique"] == "MRC" and r["K"] == "2"]
    assert mrc2 == pytest.approx([2e-3, 4e-3])
    sc1 = [r["analytic_harvested_W"] for r in rows if r["technique"] == "SC" and r["K"] == "1"]
    mrc1 = [r["analytic_harvested_W"] for r in rows if r["technique"] == "MRC" and r["K"] == "1"]
    assert sc1 == mrc1


def test_empty_techniques_is_config_error(tmp_path):
    cfg = tmp_path / "e.cfg"
    cfg.write_text(reference_config_text().replace("techniques = SC, EGC, MRC", "techniques ="))
    code, _, err = run("analytic", "--config", str(cfg))
    assert code == 2 and "techniques" in err


def test_io_failure_exit_code(tmp_path):
    code, _, _ = run("analytic", "--out", str(tmp_path / "missing" / "dir" / "x.csv"))
    assert code == 1
    assert run("analytic", "--config", str(tmp_path / "nope.cfg"))[0] == 1


def test_usage_error_exit_code():
    assert run("frobnicate")[0] == 2
    assert run("boundary", "ZF", "--bracket", "0.1", "3")[0] == 2
