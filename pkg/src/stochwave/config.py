"""Run configuration: YAML documents, a catalog of named experiments, validation.

A config document is a mapping. Every key is optional except that a problem
must be determined, either directly (``problem``) or through ``preset``, which
names a catalog entry whose values the remaining keys override.

Keys
----
preset        catalog entry used as the base (see ``CATALOG``)
experiment    convergence | gpc_sweep | energy | long_time | perturbation
problem       test1 | test2
delta         noise magnitude, 0 <= delta < 1
N             number of random inputs (the problems use 2)
P             total gPC degree (M = binomial(N+P, N) modes)
k             DG polynomial degree
mesh_sizes    list of mesh sizes h (convergence); the first entry is used otherwise
dt            time step; null means "suggest from the stability bound"
dt_safety     safety factor of the suggested step
T             final time
steps         number of steps, an alternative to T (T = steps * dt)
flux          minus_plus | plus_minus
boundary      exact | homogeneous
y_nodes       Gauss nodes per random dimension (default P + 5)
quad_nodes    Gauss nodes per direction in a cell (default k + 2)
error_norm    rms (divide by the domain area) | l2
gpc_orders    list of P values (gpc_sweep)
stride        error / distance sampling stride in steps (long_time, perturbation)
eps           perturbation levels added to a^2 (perturbation)
output_dir    directory for the CSV and manifest
csv           CSV file name (default <experiment>.csv)
manifest      manifest file name (default manifest.json)
workers       process pool size for independent levels
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

EXPERIMENTS = ("convergence", "gpc_sweep", "energy", "long_time", "perturbation")
TABLE_H = [0.5, 0.25, 0.125, 0.0625]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


CATALOG: dict[str, dict[str, Any]] = {
    "test1-linear-table": dict(experiment="convergence", problem="test1", delta=0.01, P=4, k=1,
                               mesh_sizes=TABLE_H, dt=1.5625e-5, T=1.5625e-3),
    "test1-cubic-table": dict(experiment="convergence", problem="test1", delta=0.001, P=4, k=3,
                              mesh_sizes=TABLE_H, dt=1.5625e-5, T=1.5625e-3),
    "test2-linear-table": dict(experiment="convergence", problem="test2", delta=0.01, P=4, k=1,
                               mesh_sizes=TABLE_H, dt=1.5625e-5, T=1.5625e-3),
    "test2-cubic-table": dict(experiment="convergence", problem="test2", delta=0.001, P=4, k=3,
                              mesh_sizes=TABLE_H, dt=2.5e-8, T=2.5e-6),
    "test1-gpc-sweep": dict(experiment="gpc_sweep", problem="test1", delta=0.01, k=3,
                            mesh_sizes=[0.125], gpc_orders=[0, 1, 2, 3, 4, 5],
                            dt=1.5625e-5, T=1.5625e-3),
    "test2-gpc-sweep": dict(experiment="gpc_sweep", problem="test2", delta=0.01, k=3,
                            mesh_sizes=[0.125], gpc_orders=[0, 1, 2, 3, 4, 5],
                            dt=2.5e-8, T=2.5e-6),
    "test1-long-time": dict(experiment="long_time", problem="test1", delta=1e-2, P=1, k=1,
                            mesh_sizes=[0.25], dt=6.25e-5, T=5.0, stride=400),
    "test1-long-time-small-noise": dict(experiment="long_time", problem="test1", delta=1e-6, P=1,
                                        k=1, mesh_sizes=[0.25], dt=6.25e-5, T=5.0, stride=400),
    "test2-long-time": dict(experiment="long_time", problem="test2", delta=1e-2, P=1, k=1,
                            mesh_sizes=[0.25], dt=6.25e-5, T=5.0, stride=400),
    "test2-long-time-small-noise": dict(experiment="long_time", problem="test2", delta=1e-6, P=1,
                                        k=1, mesh_sizes=[0.25], dt=6.25e-5, T=5.0, stride=400),
    "energy-homogeneous": dict(experiment="energy", problem="test1", delta=0.0, P=4, k=1,
                               mesh_sizes=[0.25], boundary="homogeneous", dt=None, steps=1000),
    "perturbation": dict(experiment="perturbation", problem="test1", delta=0.01, P=2, k=1,
                         mesh_sizes=[0.25], dt=None, T=2.0, stride=5,
                         eps=[1e-3, 5e-4, 2.5e-4]),
}


@dataclass(frozen=True)
class RunConfig:
    problem: str
    experiment: str = "convergence"
    preset: str | None = None
    delta: float = 0.01
    N: int = 2
    P: int = 4
    k: int = 1
    mesh_sizes: tuple[float, ...] = tuple(TABLE_H)
    dt: float | None = None
    dt_safety: float = 0.1
    T: float | None = None
    steps: int | None = None
    flux: str = "minus_plus"
    boundary: str = "exact"
    y_nodes: int | None = None
    quad_nodes: int | None = None
    error_norm: str = "rms"
    gpc_orders: tuple[int, ...] = (0, 1, 2, 3, 4, 5)
    stride: int = 1
    eps: tuple[float, ...] = (1e-3, 5e-4, 2.5e-4)
    output_dir: str = "results"
    csv: str | None = None
    manifest: str = "manifest.json"
    workers: int = 1
    filled_defaults: tuple[str, ...] = field(default=(), compare=False)

    @property
    def csv_name(self) -> str:
        return self.csv or f"{self.experiment}.csv"

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        for key in ("mesh_sizes", "gpc_orders", "eps", "filled_defaults"):
            d[key] = list(d[key])
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig) if f.name != "filled_defaults"}


def _num(name: str, value, kind=float, positive=True, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    value = kind(value)
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        raise ConfigError(f"{name}: must be {'>= 0' if allow_zero else '> 0'}, got {value}")
    return value


def _num_list(name: str, value, kind=float, allow_zero=False) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) == 0:
        raise ConfigError(f"{name}: expected a nonempty list")
    return tuple(_num(f"{name}[{i}]", v, kind, allow_zero=allow_zero) for i, v in enumerate(value))


def build_config(doc: dict[str, Any]) -> RunConfig:
    """Validate a mapping (catalog entry merged with overrides) into a RunConfig."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    doc = dict(doc)
    preset = doc.get("preset")
    if preset is not None:
        if preset not in CATALOG:
            raise ConfigError(f"preset: unknown entry {preset!r}; choose from {sorted(CATALOG)}")
        doc = {**CATALOG[preset], **doc}
    unknown = sorted(set(doc) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    if "problem" not in doc:
        raise ConfigError("problem: required (or give a preset)")

    v: dict[str, Any] = {}
    v["preset"] = preset
    if doc["problem"] not in ("test1", "test2"):
        raise ConfigError(f"problem: must be 'test1' or 'test2', got {doc['problem']!r}")
    v["problem"] = doc["problem"]
    exp = doc.get("experiment", "convergence")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {exp!r}")
    v["experiment"] = exp
    if "delta" in doc:
        v["delta"] = _num("delta", doc["delta"], allow_zero=True)
        if v["delta"] >= 1:
            raise ConfigError("delta: must be < 1")
    if "N" in doc:
        v["N"] = _num("N", doc["N"], int)
        if v["N"] != 2:
            raise ConfigError("N: the built-in problems have exactly 2 random inputs")
    if "P" in doc:
        v["P"] = _num("P", doc["P"], int, allow_zero=True)
    if "k" in doc:
        v["k"] = _num("k", doc["k"], int)
    if "mesh_sizes" in doc:
        v["mesh_sizes"] = _num_list("mesh_sizes", doc["mesh_sizes"])
    for key in ("dt", "T"):
        if doc.get(key) is not None:
            v[key] = _num(key, doc[key])
        elif key in doc:
            v[key] = None
    if doc.get("steps") is not None:
        v["steps"] = _num("steps", doc["steps"], int)
    if "dt_safety" in doc:
        v["dt_safety"] = _num("dt_safety", doc["dt_safety"])
    if "flux" in doc:
        if doc["flux"] not in ("minus_plus", "plus_minus"):
            raise ConfigError(f"flux: must be minus_plus or plus_minus, got {doc['flux']!r}")
        v["flux"] = doc["flux"]
    if "boundary" in doc:
        if doc["boundary"] not in ("exact", "homogeneous"):
            raise ConfigError(f"boundary: must be exact or homogeneous, got {doc['boundary']!r}")
        v["boundary"] = doc["boundary"]
    if "error_norm" in doc:
        if doc["error_norm"] not in ("rms", "l2"):
            raise ConfigError(f"error_norm: must be rms or l2, got {doc['error_norm']!r}")
        v["error_norm"] = doc["error_norm"]
    for key in ("y_nodes", "quad_nodes"):
        if doc.get(key) is not None:
            v[key] = _num(key, doc[key], int)
    if "gpc_orders" in doc:
        v["gpc_orders"] = tuple(sorted(_num_list("gpc_orders", doc["gpc_orders"], int, True)))
    if "stride" in doc:
        v["stride"] = _num("stride", doc["stride"], int)
    if "eps" in doc:
        v["eps"] = _num_list("eps", doc["eps"])
    if "workers" in doc:
        v["workers"] = _num("workers", doc["workers"], int)
    for key in ("output_dir", "csv", "manifest"):
        if doc.get(key) is not None:
            if not isinstance(doc[key], str) or not doc[key]:
                raise ConfigError(f"{key}: expected a nonempty string")
            v[key] = doc[key]

    if v.get("T") is not None and v.get("steps") is not None:
        raise ConfigError("T and steps are mutually exclusive")
    if v.get("T") is None and v.get("steps") is None:
        raise ConfigError("T: required (or give steps)")
    if v.get("T") is not None and v.get("dt") is not None and v["T"] < v["dt"]:
        raise ConfigError(f"T: must be >= dt, got T={v['T']} dt={v['dt']}")
    P = v.get("P", RunConfig.P)
    if v.get("y_nodes") is not None and v["y_nodes"] < P + 1:
        raise ConfigError(f"y_nodes: need at least P+1 = {P + 1}")
    if exp == "gpc_sweep" and v.get("y_nodes") is not None:
        if v["y_nodes"] < max(v.get("gpc_orders", RunConfig.gpc_orders)) + 1:
            raise ConfigError("y_nodes: need at least max(gpc_orders)+1")
    k = v.get("k", RunConfig.k)
    if v.get("quad_nodes") is not None and v["quad_nodes"] < k + 1:
        raise ConfigError(f"quad_nodes: need at least k+1 = {k + 1}")

    filled = tuple(sorted(name for name in _FIELDS if name not in v and name != "preset"))
    return RunConfig(**v, filled_defaults=filled)


def _parse(text: str) -> dict[str, Any]:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse config: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    return doc


def read_document(path: Path) -> dict[str, Any]:
    """Raw mapping from a YAML file, before catalog merging and validation."""
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return _parse(path.read_text())


def parse_config(text: str) -> RunConfig:
    return build_config(_parse(text))


def load_config(source: str | Path) -> RunConfig:
    """Load from a file path, or parse ``source`` itself when it is not an existing file."""
    if isinstance(source, Path):
        return build_config(read_document(source))
    try:
        is_file = "\n" not in source and Path(source).is_file()
    except OSError:
        is_file = False
    if is_file:
        return build_config(read_document(Path(source)))
    return parse_config(source)
