import csv
import json

import pytest

from stochwave.cli import EXIT_CONFIG, EXIT_OK, EXIT_UNSTABLE, fmt, main, resolve, run
from stochwave.config import CATALOG, ConfigError, build_config, load_config, parse_config


def test_table_preset_expansion():
    cfg = load_config("preset: test1-linear-table\n")
    assert (cfg.problem, cfg.delta, cfg.N, cfg.P, cfg.k) == ("test1", 0.01, 2, 4, 1)
    assert cfg.mesh_sizes == (0.5, 0.25, 0.125, 0.0625)
    assert (cfg.dt, cfg.T) == (1.5625e-5, 1.5625e-3)
    assert cfg.flux == "minus_plus"


def test_defaults_filled_and_recorded():
    cfg = resolve(parse_config("problem: test1\nk: 2\nP: 1\nmesh_sizes: [0.5]\nsteps: 10\n"))
    assert cfg.dt == pytest.approx(0.1 * 0.5 / 5 / 1.0, rel=1e-2)
    assert cfg.T == pytest.approx(10 * cfg.dt)
    assert cfg.y_nodes == 6 and cfg.quad_nodes == 4
    for key in ("dt", "T", "y_nodes", "quad_nodes", "flux", "boundary", "csv"):
        assert key in cfg.filled_defaults


@pytest.mark.parametrize("text,field", [
    ("problem: test1\ndelta: -0.1\nT: 1", "delta"),
    ("problem: test1\nT: 1\nmesh_sizes: []", "mesh_sizes"),
    ("problem: test1\nT: 1\nk: 0", "k"),
    ("problem: test1\nT: 0.001\ndt: 0.01", "T"),
    ("problem: test3\nT: 1", "problem"),
    ("problem: test1\nT: 1\nflux: upwind", "flux"),
    ("problem: test1\nT: 1\ncolour: red", "unknown keys"),
    ("preset: nope", "preset"),
    ("problem: test1", "T"),
    ("problem: test1\nT: 1\nP: 4\ny_nodes: 3", "y_nodes"),
    ("- a\n- b", "mapping"),
    ("problem: [unclosed", "parse"),
])
def test_validation_errors(text, field):
    with pytest.raises(ConfigError, match=field):
        parse_config(text)


def test_load_from_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("preset: test2-cubic-table\nmesh_sizes: [0.5, 0.25]\n")
    cfg = load_config(path)
    assert cfg.problem == "test2" and cfg.k == 3 and cfg.mesh_sizes == (0.5, 0.25)
    assert load_config(str(path)) == cfg
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_catalog_entries_valid():
    for name in CATALOG:
        build_config({"preset": name})


def test_fmt():
    assert fmt(None) == ""
    assert fmt(3) == "3"
    assert fmt(True) == "true"
    assert fmt(1.658067e-3) == "1.658067000e-03"


def _small(tmp_path, **extra):
    doc = dict(problem="test1", delta=0.01, P=1, k=1, mesh_sizes=[0.5, 0.25], dt=1e-3, T=5e-3,
               output_dir=str(tmp_path))
    doc.update(extra)
    return build_config(doc)


def test_convergence_run_outputs(tmp_path):
    status, manifest = run(_small(tmp_path))
    assert status == EXIT_OK
    rows = list(csv.reader(open(tmp_path / "convergence.csv", newline="")))
    assert rows[0] == ["h", "e_u", "order_u", "e_qx", "order_qx", "e_qy", "order_qy"]
    assert len(rows) == 3 and rows[1][2] == ""
    assert 1.0 < float(rows[2][2]) < 3.0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["status"] == "ok"
    for key in man["config"]["filled_defaults"]:
        assert man["config"][key] is not None or key in ("steps", "preset")
    assert man["provenance"].startswith("stochwave-")
    assert man["timings"]["total_seconds"] > 0


def test_reproducible_bytes(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    run(_small(a))
    run(_small(b))
    run(_small(c, workers=2))
    data = (a / "convergence.csv").read_bytes()
    assert data == (b / "convergence.csv").read_bytes() == (c / "convergence.csv").read_bytes()


def test_energy_run(tmp_path):
    cfg = build_config({"preset": "energy-homogeneous", "steps": 200, "output_dir": str(tmp_path)})
    status, manifest = run(cfg)
    assert status == EXIT_OK
    assert manifest["summary"]["drift"] <= 1e-10
    header = (tmp_path / "energy.csv").read_text().splitlines()[0]
    assert header == "n,t,E_fully,E_alt,E_semi"


def test_other_experiments_run(tmp_path):
    for exp, extra in [("gpc_sweep", dict(gpc_orders=[0, 1])),
                       ("long_time", dict(stride=2)),
                       ("perturbation", dict(eps=[1e-3, 5e-4], stride=2))]:
        cfg = _small(tmp_path / exp, experiment=exp, mesh_sizes=[0.5], **extra)
        status, manifest = run(cfg)
        assert status == EXIT_OK, exp
        assert (tmp_path / exp / f"{exp}.csv").exists()


def test_cli_main(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("problem: test1\nP: 1\nk: 1\nmesh_sizes: [0.5]\ndt: 0.001\nT: 0.003\n")
    assert main([str(cfg), "--out", str(tmp_path / "o"), "--workers", "1"]) == EXIT_OK
    assert (tmp_path / "o" / "convergence.csv").exists()
    assert main(["--preset", "nope"]) == EXIT_CONFIG
    assert main([]) == EXIT_CONFIG
    assert main(["--list-presets"]) == EXIT_OK
    assert "test1-linear-table" in capsys.readouterr().out


def test_cli_reports_instability(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("problem: test1\nP: 0\nk: 1\nmesh_sizes: [0.125]\ndt: 1.0\nT: 400\n")
    assert main([str(cfg), "--out", str(tmp_path)]) == EXIT_UNSTABLE
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["status"] == "unstable" and "stability" in man["error"]
