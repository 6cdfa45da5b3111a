import subprocess
import sys

import pytest

from manet_dri import experiment
from manet_dri.cli import main
from manet_dri.config import ScenarioConfig, SweepSpec
from manet_dri.experiment import CSV_HEADER, MatrixError, emit_csv, emit_plotdata, plan, run_matrix

SMALL = ScenarioConfig(duration=70, node_count=10, area_width=500, area_height=500, flow_count=3,
                       warmup=5, flow_stagger=5, v_max=10, sample_interval=30)
SMALL_CFG = ("duration = 70\nnode_count = 10\narea = 500x500\nflow_count = 3\nwarmup = 5\n"
             "flow_stagger = 5\nv_max = 10\nsample_interval = 30\n")


def test_plan_size_and_order():
    tasks = plan(SweepSpec("connections", (5, 10, 15, 20, 25, 29), 5))
    assert len(tasks) == 90
    assert len({(t.variant, t.axis_value) for t in tasks}) == 18
    assert [t.variant for t in tasks[:30]] == ["aodv"] * 30
    assert [t.config.seed for t in tasks[:5]] == [1, 2, 3, 4, 5]
    # only behaviour and detection vary between variants
    a = {t.config.replace(protocol="aodv") for t in tasks if t.axis_value == 15 and t.config.seed == 1}
    assert len(a) == 1


@pytest.fixture(scope="module")
def conn_rows():
    return run_matrix(SweepSpec("connections", (2, 4), 2, SMALL))


def test_matrix_rows(conn_rows):
    assert [(r.variant, r.axis_value, r.reps) for r in conn_rows] == [
        ("aodv", 2, 2), ("aodv", 4, 2), ("aodv-attack", 2, 2), ("aodv-attack", 4, 2),
        ("aodv-dri", 2, 2), ("aodv-dri", 4, 2)]
    for r in conn_rows:
        assert all(m.conserved() for m in r.runs)


def test_csv_shape(conn_rows, tmp_path):
    p = emit_csv(conn_rows, tmp_path / "s.csv")
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[0] == ("variant,axis,axis_value,reps,sent_mean,delivered_mean,pdr_mean,pdr_sd,"
                        "false_rreps_mean,false_rreps_sd,poisoned_mean,blacklist_size_mean,"
                        "detection_time_mean,rreq,rrep,rerr,frq,frp,alarm")
    assert len(lines) == len(conn_rows) + 1
    assert all(len(ln.split(",")) == len(CSV_HEADER) for ln in lines)


def test_eighteen_rows_nineteen_lines(conn_rows, tmp_path):
    rows = (conn_rows * 3)[:18]
    assert len(emit_csv(rows, tmp_path / "s.csv").read_text().splitlines()) == 19


def test_absent_pdr_is_empty_field(tmp_path):
    rows = run_matrix(SMALL.replace(flow_count=0, duration=10), ("aodv",))
    line = emit_csv(rows, tmp_path / "s.csv").read_text().splitlines()[1].split(",")
    assert line[CSV_HEADER.index("pdr_mean")] == "" and line[CSV_HEADER.index("sent_mean")] == "0"


def test_empty_rows_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "s.csv")


def test_unwritable_path(conn_rows, tmp_path):
    with pytest.raises(OSError):
        emit_csv(conn_rows, tmp_path / "missing" / "s.csv")


def test_plotdata_connections(conn_rows, tmp_path):
    files = sorted(p.name for p in emit_plotdata(conn_rows, tmp_path))
    assert files == ["fig7.dat", "fig9.dat"]
    fig9 = (tmp_path / "fig9.dat").read_text().splitlines()
    assert fig9[0].split()[1:3] == ["connections", "aodv_mean"]
    for ln in fig9[1:]:
        cells = ln.split()
        assert len(cells) == 7 and float(cells[1]) == 0.0 and float(cells[2]) == 0.0


def test_plotdata_speed(tmp_path):
    rows = run_matrix(SweepSpec("speed", (10.0,), 1, SMALL), ("aodv",))
    assert rows[0].stats["pdr"][1] == 0.0
    assert sorted(p.name for p in emit_plotdata(rows, tmp_path)) == ["fig10.dat", "fig8.dat"]


def test_run_failure_names_the_run(monkeypatch):
    def boom(cfg, trace=None):
        if cfg.seed == 2:
            raise RuntimeError("kaput")
        return real(cfg, trace)

    real = experiment.run_scenario
    monkeypatch.setattr(experiment, "run_scenario", boom)
    with pytest.raises(MatrixError) as exc:
        run_matrix(SweepSpec("connections", (2,), 2, SMALL), ("aodv",))
    assert exc.value.key == ("aodv", 2, 2)


def _cli(tmp_path, name, *extra):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL_CFG)
    out = tmp_path / name
    rc = main(["--config", str(cfg), "--out", str(out), *extra])
    return rc, out


def test_cli_sweep_outputs(tmp_path, capsys):
    rc, out = _cli(tmp_path, "a", "--sweep", "speed", "--reps", "1", "--per-run", "--trace")
    assert rc == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["fig10.dat", "fig8.dat", "runs.csv", "runs.log", "summary.csv", "traces"]
    log = (out / "runs.log").read_text().splitlines()
    assert len(log) == 12 and all("seed=1" in ln and "conservation=ok" in ln for ln in log)
    assert len(list((out / "traces").iterdir())) == 12
    assert capsys.readouterr().out.splitlines()[0] == ",".join(CSV_HEADER)


def test_cli_rerun_is_byte_identical(tmp_path):
    rc1, a = _cli(tmp_path, "a", "--protocol", "aodv-dri", "--reps", "2", "--per-run", "--trace")
    rc2, b = _cli(tmp_path, "b", "--protocol", "aodv-dri", "--reps", "2", "--per-run", "--trace",
                  "--jobs", "2")
    assert rc1 == rc2 == 0
    for name in ("summary.csv", "runs.csv", "runs.log"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ta = sorted((a / "traces").iterdir())
    tb = sorted((b / "traces").iterdir())
    assert [p.name for p in ta] == [p.name for p in tb]
    assert all(x.read_bytes() == y.read_bytes() for x, y in zip(ta, tb))


def test_cli_per_run_rows_rederive_means(tmp_path):
    import csv

    rc, out = _cli(tmp_path, "a", "--protocol", "aodv", "--reps", "3", "--per-run")
    assert rc == 0
    runs = list(csv.DictReader(open(out / "runs.csv")))
    summary = next(csv.DictReader(open(out / "summary.csv")))
    pdrs = [float(r["pdr"]) for r in runs]
    assert float(summary["pdr_mean"]) == pytest.approx(sum(pdrs) / 3, rel=1e-5)
    assert [r["seed"] for r in runs] == ["1", "2", "3"]


@pytest.mark.parametrize("argv", [["--protocol", "dsr"], ["--reps", "0"], ["--config", "/nope.cfg"],
                                  ["--jobs", "-1"]])
def test_cli_config_errors(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 1
    assert "config error" in capsys.readouterr().err


def test_cli_bad_config_value(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("v_min = 0\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_cli_run_failure(tmp_path, monkeypatch):
    def boom(cfg, trace=None):
        raise RuntimeError("kaput")

    monkeypatch.setattr(experiment, "run_scenario", boom)
    rc, _ = _cli(tmp_path, "a", "--protocol", "aodv")
    assert rc == 2


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL_CFG)
    res = subprocess.run([sys.executable, "-m", "manet_dri", "--config", str(cfg), "--protocol",
                          "aodv", "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("variant,axis")
