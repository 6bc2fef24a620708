"""Command-line runner: config in, CSV table and JSON manifest out."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import subprocess
import sys
import time
from math import comb
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .coefficients import build_preset
from .config import CATALOG, ConfigError, RunConfig, build_config, read_document
from .diagnostics import (ErrorReport, build_case, detect_plateau, energy_trace,
                          linear_scaling_ratios, long_time_error, perturbation_study, simulate)
from .ldg import FluxConvention
from .leapfrog import InstabilityError, suggest_dt

log = logging.getLogger("stochwave")

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_IO = 0, 2, 3, 4


def fmt(x) -> str:
    """Deterministic CSV number format: scientific, 10 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9e}"


def _case(cfg: RunConfig, h: float, P: int | None = None):
    preset = build_preset(cfg.problem, cfg.delta)
    P = cfg.P if P is None else P
    return build_case(preset, P, cfg.k, h, FluxConvention.parse(cfg.flux), cfg.boundary,
                      cfg.y_nodes, cfg.quad_nodes)


def resolve(cfg: RunConfig) -> RunConfig:
    """Fill every value left open: time step (stability bound on the finest
    mesh), final time, quadrature sizes and the CSV name."""
    changes: dict[str, Any] = {}
    if cfg.y_nodes is None:
        top = max(cfg.gpc_orders) if cfg.experiment == "gpc_sweep" else cfg.P
        changes["y_nodes"] = top + 5
    if cfg.quad_nodes is None:
        changes["quad_nodes"] = cfg.k + 2
    if cfg.csv is None:
        changes["csv"] = cfg.csv_name
    if cfg.dt is None:
        case = _case(replace(cfg, **changes), min(cfg.mesh_sizes))
        changes["dt"] = suggest_dt(case.coeff, cfg.dt_safety)
    dt = changes.get("dt", cfg.dt)
    if cfg.T is None:
        changes["T"] = cfg.steps * dt
    elif cfg.T < dt:
        raise ConfigError(f"T: must be >= dt, got T={cfg.T} dt={dt}")
    filled = tuple(sorted(set(cfg.filled_defaults) | set(changes)))
    return replace(cfg, **changes, filled_defaults=filled)


def _level(args) -> np.ndarray:
    """Worker job: errors for one (mesh size, gPC degree) pair."""
    cfg, h, P = args
    case = _case(cfg, h, P)
    return simulate(case, cfg.dt, cfg.T, area_normalized=cfg.error_norm == "rms").max_errors


def _map(cfg: RunConfig, jobs: list) -> list:
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(jobs))) as pool:
            return list(pool.map(_level, jobs))
    return [_level(j) for j in jobs]


def run_convergence(cfg: RunConfig):
    hs = sorted(cfg.mesh_sizes, reverse=True)
    errs = np.array(_map(cfg, [(cfg, h, cfg.P) for h in hs]))
    report = ErrorReport(tuple(hs), tuple(errs[:, 0]), tuple(errs[:, 1]), tuple(errs[:, 2]))
    header = ["h", "e_u", "order_u", "e_qx", "order_qx", "e_qy", "order_qy"]
    rows = [[r[c] for c in header] for r in report.rows()]
    last = report.rows()[-1]
    summary = {"finest_order_u": last["order_u"], "finest_order_qx": last["order_qx"],
               "finest_order_qy": last["order_qy"]}
    return header, rows, summary


def run_gpc_sweep(cfg: RunConfig):
    h = cfg.mesh_sizes[0]
    errs = _map(cfg, [(cfg, h, P) for P in cfg.gpc_orders])
    e_u = [float(e[0]) for e in errs]
    start = detect_plateau(e_u)
    plateau_P = None if start is None else cfg.gpc_orders[start]
    header = ["P", "M", "e_u", "ratio", "plateau"]
    rows = []
    for i, (P, e) in enumerate(zip(cfg.gpc_orders, e_u)):
        ratio = e / e_u[i - 1] if i > 0 and e_u[i - 1] > 0 else None
        rows.append([P, comb(cfg.N + P, cfg.N), e, ratio, plateau_P is not None and P >= plateau_P])
    return header, rows, {"plateau_start_P": plateau_P}


def run_energy(cfg: RunConfig):
    case = _case(cfg, cfg.mesh_sizes[0])
    n_steps = int(round(cfg.T / cfg.dt))
    trace = energy_trace(case, cfg.dt, n_steps)
    header = ["n", "t", "E_fully", "E_alt", "E_semi"]
    rows = [[r.n, r.n * cfg.dt, r.E_fully, r.E_alt, r.E_semi] for r in trace.records]
    return header, rows, {"drift": trace.drift, "identity_error": trace.identity_error}


def run_long_time(cfg: RunConfig):
    case = _case(cfg, cfg.mesh_sizes[0])
    series = long_time_error(case, cfg.dt, cfg.T, cfg.stride)
    header = ["t", "e_u", "e_u_over_t_plus_1"]
    rows = [[t, e, e / (t + 1)] for t, e in zip(series.times, series.e_u)]
    return header, rows, {"growth": series.growth, "envelope_exponent": series.envelope_exponent}


def run_perturbation(cfg: RunConfig):
    case = _case(cfg, cfg.mesh_sizes[0])
    runs = perturbation_study(case, cfg.eps, cfg.dt, cfg.T, cfg.stride)
    header = ["eps", "t", "D", "D_over_t_plus_1"]
    rows = [[r.eps, t, d, d / (t + 1)] for r in runs for t, d in zip(r.times, r.D)]
    summary = {"growth": {fmt(r.eps): r.growth for r in runs},
               "slope": {fmt(r.eps): r.slope for r in runs},
               "linear_scaling_ratios": linear_scaling_ratios(runs)}
    return header, rows, summary


RUNNERS = {"convergence": run_convergence, "gpc_sweep": run_gpc_sweep, "energy": run_energy,
           "long_time": run_long_time, "perturbation": run_perturbation}


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def provenance(cfg: RunConfig) -> str:
    """Package version, config digest and (when available) the source commit."""
    blob = json.dumps(_jsonable(cfg.to_dict()), sort_keys=True).encode()
    digest = hashlib.sha256(blob).hexdigest()[:16]
    commit = "unknown"
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True,
                             text=True, timeout=5, cwd=Path(__file__).resolve().parent)
        if out.returncode == 0:
            commit = out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"stochwave-{__version__}+g{commit}.cfg{digest}"


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute the configured experiment and write its artifacts.

    Returns the exit status and the manifest.
    """
    t0 = time.perf_counter()
    manifest: dict[str, Any] = {"version": __version__}
    try:
        cfg = resolve(cfg)
        manifest["config"] = cfg.to_dict()
        manifest["provenance"] = provenance(cfg)
        log.info("running %s (%s) dt=%g T=%g", cfg.experiment, cfg.problem, cfg.dt, cfg.T)
        header, rows, summary = RUNNERS[cfg.experiment](cfg)
        status, manifest["status"] = EXIT_OK, "ok"
        manifest["summary"] = summary
    except InstabilityError as exc:
        log.error("%s", exc)
        status, manifest["status"], manifest["error"] = EXIT_UNSTABLE, "unstable", str(exc)
        header, rows = None, None
    manifest["timings"] = {"total_seconds": time.perf_counter() - t0}
    try:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if header is not None:
            write_csv(out / cfg.csv_name, header, rows)
            manifest["csv"] = str(out / cfg.csv_name)
        with open(out / cfg.manifest, "w") as fh:
            json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
    except OSError as exc:
        log.error("could not write results: %s", exc)
        return EXIT_IO, manifest
    return status, manifest


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stochwave",
                                description="Stochastic Galerkin LDG solver for the random wave equation.")
    p.add_argument("config", nargs="?", help="YAML config file")
    p.add_argument("--preset", help="catalog entry to use (overrides the config's preset)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, help="process pool size")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (-vv for debug)")
    p.add_argument("--list-presets", action="store_true", help="print the catalog and exit")
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.list_presets:
        for name, entry in CATALOG.items():
            print(f"{name}: {json.dumps(entry)}")
        return EXIT_OK
    try:
        doc = read_document(Path(args.config)) if args.config is not None else {}
        if args.preset is not None:
            doc["preset"] = args.preset
        if not doc:
            raise ConfigError("give a config file or --preset")
        if args.out is not None:
            doc["output_dir"] = args.out
        if args.workers is not None:
            doc["workers"] = args.workers
        cfg = build_config(doc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status, manifest = run(cfg)
    if status == EXIT_OK:
        print(json.dumps(_jsonable(manifest.get("summary", {})), sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
