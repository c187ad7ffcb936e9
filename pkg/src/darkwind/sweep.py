"""Deterministic parameter sweeps over (coupling, disorder) grids.

A sweep is described by a JSON config (see README for the schema), runs
its grid cells as independent pure tasks keyed by derived seeds, and
writes one CSV per experiment plus a JSON metadata sidecar.  Numeric CSV
content is byte-identical for identical configs regardless of worker
count: every cell re-derives its disorder from
``derive_seed(base_seed, i, j, r)`` and rows are emitted in row-major
grid order by a single writer.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytics, dynamics, lindblad, topology
from .model import DIMER, TRIMER, DisorderSpec, ModelSpec
from .seeds import absorb

EXPERIMENTS = ("coherence", "dos", "winding", "phase-diagram", "boundary", "tau", "validate")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PHYSICS = 2
EXIT_NUMERICAL = 3

_MODEL_AXES = ("j1", "j2", "j3", "j", "eps_a", "eps_b", "eps_c", "gamma")
_DISORDER_AXES = ("mu1", "mu2", "mu3", "mu_j", "mu_diag")


class ConfigError(ValueError):
    """Malformed sweep configuration (exit code 1)."""


class PhysicsError(ValueError):
    """Physically invalid experiment input (exit code 2)."""


@dataclass(frozen=True)
class Axis:
    name: str
    values: np.ndarray


@dataclass
class SweepConfig:
    experiment: str
    model: ModelSpec
    disorder: DisorderSpec
    axes: list[Axis] = field(default_factory=list)
    realizations: int = 1
    times: np.ndarray | None = None
    trunc_l: int | None = None
    mu_map: dict[str, float] | None = None
    tau_window: tuple[float, float] | None = None
    dos_bins: tuple = (60, 60, None, None)
    out: str | None = None
    raw: dict = field(default_factory=dict)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def load_config(path, experiment: str | None = None) -> SweepConfig:
    """Parse and validate a sweep config file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw, experiment)


def parse_config(raw: dict, experiment: str | None = None) -> SweepConfig:
    _require(isinstance(raw, dict), "config must be a JSON object")
    exp = raw.get("experiment", experiment)
    _require(exp is not None, "no experiment given (config key 'experiment' or CLI)")
    if experiment is not None and raw.get("experiment") not in (None, experiment):
        raise ConfigError(f"config experiment {raw['experiment']!r} != CLI {experiment!r}")
    _require(exp in EXPERIMENTS, f"unknown experiment {exp!r}")

    try:
        model = ModelSpec(**raw.get("model", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad model block: {exc}") from exc
    try:
        disorder = DisorderSpec(**raw.get("disorder", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad disorder block: {exc}") from exc

    axes = []
    for block in raw.get("grid", []):
        _require(isinstance(block, dict) and "name" in block, "grid axis needs a name")
        name = block["name"]
        valid = _MODEL_AXES + _DISORDER_AXES + ("mu",)
        _require(name in valid, f"unknown grid parameter {name!r} (one of {valid})")
        if "values" in block:
            values = np.asarray(block["values"], dtype=float)
        else:
            _require(all(k in block for k in ("min", "max", "count")),
                     f"axis {name!r} needs min/max/count or values")
            _require(int(block["count"]) >= 1, "axis count must be >= 1")
            values = np.linspace(block["min"], block["max"], int(block["count"]))
        _require(values.size >= 1, f"axis {name!r} is empty")
        axes.append(Axis(name=name, values=values))
    _require(len(axes) <= 2, "at most 2 grid axes supported")

    realizations = int(raw.get("realizations", 1))
    _require(realizations >= 1, "realizations must be >= 1")

    times = None
    tblock = raw.get("times")
    if tblock is not None:
        if "values" in tblock:
            times = np.asarray(tblock["values"], dtype=float)
        else:
            _require("t_max" in tblock, "times needs t_max or values")
            count = int(tblock.get("count", 400))
            if tblock.get("kind", "default") == "linear":
                times = np.linspace(0.0, float(tblock["t_max"]), count)
            else:
                times = dynamics.default_times(model.gamma, float(tblock["t_max"]), count)

    mu_map = raw.get("mu_map")
    if mu_map is not None:
        _require(isinstance(mu_map, dict) and mu_map, "mu_map must be a non-empty object")
        for key in mu_map:
            _require(key in _DISORDER_AXES, f"mu_map key {key!r} is not a disorder field")

    tau_window = raw.get("tau_window")
    if tau_window is not None:
        _require(len(tau_window) == 2 and tau_window[0] < tau_window[1],
                 "tau_window must be [t0, t1] with t0 < t1")
        tau_window = (float(tau_window[0]), float(tau_window[1]))

    dosb = raw.get("dos", {})
    dos_bins = (int(dosb.get("re_bins", 60)), int(dosb.get("im_bins", 60)),
                dosb.get("re_range"), dosb.get("im_range"))

    trunc_l = raw.get("trunc_l")
    return SweepConfig(experiment=exp, model=model, disorder=disorder, axes=axes,
                       realizations=realizations, times=times,
                       trunc_l=None if trunc_l is None else int(trunc_l),
                       mu_map=mu_map, tau_window=tau_window, dos_bins=dos_bins,
                       out=raw.get("out"), raw=raw)


def default_mu_map(model: ModelSpec) -> dict[str, float]:
    """Isotropic disorder on the families the winding number tolerates."""
    if model.kind == DIMER:
        return {"mu1": 1.0, "mu2": 1.0}
    return {"mu_j": 1.0, "mu2": 1.0, "mu3": 1.0}


def _cell_specs(cfg: SweepConfig, values: dict[str, float]) -> tuple[ModelSpec, DisorderSpec]:
    """Apply axis values to the base model/disorder specs."""
    mrep, drep = {}, {}
    for name, val in values.items():
        if name == "mu":
            for fam, coeff in (cfg.mu_map or default_mu_map(cfg.model)).items():
                drep[fam] = coeff * val
        elif name in _MODEL_AXES:
            mrep[name] = val
        else:
            drep[name] = val
    model = dataclasses.replace(cfg.model, **mrep) if mrep else cfg.model
    disorder = dataclasses.replace(cfg.disorder, **drep) if drep else cfg.disorder
    return model, disorder


def _check_physics(cfg: SweepConfig) -> None:
    if cfg.experiment in ("winding", "phase-diagram"):
        sweeps = {ax.name for ax in cfg.axes}
        mu_families = set((cfg.mu_map or default_mu_map(cfg.model))) if "mu" in sweeps else set()
        if cfg.disorder.mu_diag > 0 or "mu_diag" in sweeps or "mu_diag" in mu_families:
            raise PhysicsError("winding experiments reject on-site (diagonal) disorder")
        if cfg.model.kind == TRIMER and (
                cfg.disorder.mu1 > 0 or "mu1" in sweeps or "mu1" in mu_families):
            raise PhysicsError("trimer winding experiments reject disorder on j1")
    if cfg.experiment in ("winding", "phase-diagram", "boundary"):
        if not cfg.model.whole_cells:
            raise PhysicsError("winding requires a whole number of unit cells")
    if cfg.experiment == "phase-diagram":
        if len(cfg.axes) != 2 or cfg.axes[1].name != "mu":
            raise PhysicsError("phase-diagram needs axes [coupling, mu]")
    if cfg.experiment == "boundary":
        if len(cfg.axes) != 1 or cfg.axes[0].name != "mu":
            raise PhysicsError("boundary needs a single 'mu' axis")
    if cfg.experiment in ("coherence", "tau") and cfg.times is None:
        raise PhysicsError(f"{cfg.experiment} experiment needs a times block")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".17g")


def config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _grid_shape(cfg: SweepConfig) -> tuple[int, int]:
    n1 = len(cfg.axes[0].values) if cfg.axes else 1
    n2 = len(cfg.axes[1].values) if len(cfg.axes) > 1 else 1
    return n1, n2


def _cells(cfg: SweepConfig):
    n1, n2 = _grid_shape(cfg)
    for i in range(n1):
        for j in range(n2):
            values = {}
            if cfg.axes:
                values[cfg.axes[0].name] = float(cfg.axes[0].values[i])
            if len(cfg.axes) > 1:
                values[cfg.axes[1].name] = float(cfg.axes[1].values[j])
            yield i, j, values


def _map_cells(cfg: SweepConfig, worker, workers: int):
    """Evaluate ``worker(i, j, values)`` over all cells, any execution order,
    results returned as a row-major dict."""
    cells = list(_cells(cfg))
    results = {}
    if workers <= 1:
        for i, j, values in cells:
            results[(i, j)] = worker(i, j, values)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {pool.submit(worker, i, j, values): (i, j) for i, j, values in cells}
            for fut, key in futs.items():
                results[key] = fut.result()
    return results


# --- experiment drivers -------------------------------------------------

def _run_winding(cfg: SweepConfig, workers: int):
    def worker(i, j, values):
        model, disorder = _cell_specs(cfg, values)
        disorder = dataclasses.replace(
            disorder, base_seed=absorb(absorb(cfg.disorder.base_seed, i), j))
        try:
            avg = topology.winding_mean(model, disorder, cfg.realizations, cfg.trunc_l)
            return {"w_mean": avg.mean, "w_stderr": avg.stderr, "flagged": avg.flagged_count}
        except (np.linalg.LinAlgError, ArithmeticError):
            return {"w_mean": math.nan, "w_stderr": math.nan, "flagged": -1}

    results = _map_cells(cfg, worker, workers)
    header = [ax.name for ax in cfg.axes] + ["w_mean", "w_stderr", "flagged"]
    rows = []
    for i, j, values in _cells(cfg):
        r = results[(i, j)]
        rows.append([_fmt(v) for v in values.values()]
                    + [_fmt(r["w_mean"]), _fmt(r["w_stderr"]), str(r["flagged"])])
    flagged = sum(1 for r in results.values() if r["flagged"] < 0)
    return header, rows, flagged


def _contour_rows(cfg: SweepConfig, mu_values):
    model = cfg.model
    mu_map = cfg.mu_map or default_mu_map(model)
    if model.kind == DIMER:
        fam = {"mu1": 0.0, "mu2": 0.0} | {k: v for k, v in mu_map.items() if k in ("mu1", "mu2")}
        contour = analytics.phase_boundary_dimer(
            model.j2, lambda mu: (fam["mu1"] * mu, fam["mu2"] * mu), mu_values)
        header = ["mu", "critical"]
        rows = [[_fmt(mu), _fmt(c)] for mu, c in zip(contour.mu_values, contour.critical)]
    else:
        fam = {"mu_j": 0.0, "mu2": 0.0, "mu3": 0.0} | {
            k: v for k, v in mu_map.items() if k in ("mu_j", "mu2", "mu3")}
        def mmap(mu):
            return (fam["mu_j"] * mu, fam["mu2"] * mu, fam["mu3"] * mu)
        plus = analytics.phase_boundary_trimer(model.j2, model.j3, mmap, mu_values, +1)
        minus = analytics.phase_boundary_trimer(model.j2, model.j3, mmap, mu_values, -1)
        header = ["mu", "critical_plus", "critical_minus"]
        rows = [[_fmt(mu), _fmt(p), _fmt(m)]
                for mu, p, m in zip(mu_values, plus.critical, minus.critical)]
    return header, rows


def _run_boundary(cfg: SweepConfig, workers: int):
    header, rows = _contour_rows(cfg, cfg.axes[0].values)
    return header, rows, 0


def _asymptote(model: ModelSpec, disorder: DisorderSpec, times: np.ndarray) -> np.ndarray:
    """Analytic long-time prediction per time point, NaN when unavailable."""
    bond_mus = (disorder.mu1, disorder.mu2, disorder.mu3, disorder.mu_j)
    if disorder.mu_diag > 0:
        return np.full(len(times), math.nan)
    if model.kind == DIMER:
        pred = analytics.asymptotic_coherence_dimer(
            model.j1, model.j2, disorder.mu1, disorder.mu2)
        value = pred.value if pred.within_validity else math.nan
        return np.full(len(times), value)
    if any(mu > 0 for mu in bond_mus) or model.j3 == 0 or model.eps_a != model.eps_b:
        return np.full(len(times), math.nan)
    n = model.n_sites
    n_exact = n if n % 3 == 2 else n - 1 - (n % 3)
    ds = analytics.trimer_dark_states(dataclasses.replace(model, n_sites=n_exact))
    return analytics.asymptotic_coherence_trimer(times, model.j1, ds.a2_plus, ds.a2_minus)


def _run_coherence(cfg: SweepConfig, workers: int):
    def worker(i, j, values):
        model, disorder = _cell_specs(cfg, values)
        disorder = dataclasses.replace(
            disorder, base_seed=absorb(absorb(cfg.disorder.base_seed, i), j))
        try:
            trace = dynamics.coherence_mean(model, disorder, cfg.realizations, cfg.times)
            asym = _asymptote(model, disorder, cfg.times)
            return {"trace": trace, "asym": asym, "flagged": 0}
        except (np.linalg.LinAlgError, ArithmeticError):
            return {"trace": None, "asym": None, "flagged": 1}

    results = _map_cells(cfg, worker, workers)
    header = [ax.name for ax in cfg.axes] + ["t", "c_mean", "c_stderr", "c_asymptote", "flagged"]
    rows = []
    flagged = 0
    for i, j, values in _cells(cfg):
        r = results[(i, j)]
        prefix = [_fmt(v) for v in values.values()]
        if r["flagged"]:
            flagged += 1
            rows.append(prefix + ["nan", "nan", "nan", "nan", "1"])
            continue
        tr, asym = r["trace"], r["asym"]
        for k, t in enumerate(tr.times):
            rows.append(prefix + [_fmt(t), _fmt(tr.mean[k]), _fmt(tr.stderr[k]),
                                  _fmt(asym[k]), "0"])
    return header, rows, flagged


def _run_dos(cfg: SweepConfig, workers: int):
    if cfg.axes:
        raise PhysicsError("dos experiment takes no grid axes")
    re_bins, im_bins, re_range, im_range = cfg.dos_bins
    rb = np.linspace(*re_range, re_bins + 1) if re_range else re_bins
    ib = np.linspace(*im_range, im_bins + 1) if im_range else im_bins
    hist = dynamics.complex_dos(cfg.model, cfg.disorder, cfg.realizations, rb, ib)
    rc = 0.5 * (hist.re_edges[:-1] + hist.re_edges[1:])
    ic = 0.5 * (hist.im_edges[:-1] + hist.im_edges[1:])
    header = ["re_center", "im_center", "count"]
    rows = []
    for a, re_c in enumerate(rc):
        for b, im_c in enumerate(ic):
            rows.append([_fmt(re_c), _fmt(im_c), str(int(hist.counts[a, b]))])
    extra_meta = {"re_edges": hist.re_edges.tolist(), "im_edges": hist.im_edges.tolist(),
                  "realizations": hist.realizations, "overflow": hist.overflow,
                  "skipped": hist.skipped}
    return header, rows, (1 if hist.skipped else 0), extra_meta


def _run_tau(cfg: SweepConfig, workers: int):
    t0, t1 = cfg.tau_window or (20.0, float(cfg.times[-1]))

    def worker(i, j, values):
        model, disorder = _cell_specs(cfg, values)
        disorder = dataclasses.replace(
            disorder, base_seed=absorb(absorb(cfg.disorder.base_seed, i), j))
        try:
            trace = dynamics.coherence_mean(model, disorder, cfg.realizations, cfg.times)
            tau = dynamics.coherence_time_tau(trace.mean, trace.times, t0, t1)
            return {"tau": tau, "flagged": 0}
        except dynamics.NoFiniteCoherenceTime:
            return {"tau": math.inf, "flagged": 1}
        except (np.linalg.LinAlgError, ArithmeticError):
            return {"tau": math.nan, "flagged": 1}

    results = _map_cells(cfg, worker, workers)
    header = [ax.name for ax in cfg.axes] + ["tau", "flagged"]
    rows = []
    for i, j, values in _cells(cfg):
        r = results[(i, j)]
        rows.append([_fmt(v) for v in values.values()]
                    + [("inf" if math.isinf(r["tau"]) else _fmt(r["tau"])), str(r["flagged"])])
    flagged = sum(r["flagged"] for r in results.values())
    return header, rows, flagged


def _run_validate(cfg: SweepConfig, workers: int):
    checks = []

    def check(name, value, threshold):
        checks.append((name, value, threshold, value < threshold))

    dimer = ModelSpec(kind=DIMER, n_sites=4, j1=0.5, j2=1.0, gamma=0.5)
    trimer = ModelSpec(kind=TRIMER, n_sites=6, j1=1.0, j2=2.0, j3=3.0, j=1.0, gamma=0.5)
    times = np.linspace(0.0, 20.0, 81)
    for label, spec in (("dimer_n4", dimer), ("trimer_n6", trimer)):
        rep = lindblad.evolve_and_compare(spec, times)
        check(f"oracle_deviation_{label}", rep.max_deviation, 1e-8)
        check(f"trace_error_{label}", rep.max_trace_error, 1e-8)
        check(f"negativity_{label}", -rep.min_eigenvalue, 1e-8)

    spec = ModelSpec(kind=DIMER, n_sites=20, j1=0.7, j2=1.0, gamma=0.5)
    t = np.linspace(0.0, 30.0, 61)
    c = dynamics.coherence_trace(dynamics.build_hamiltonian(spec), t)
    check("contractivity", float(c.max()) - 1.0, 1e-9)

    u, s = topology.polar_unitary(np.random.default_rng(5).normal(size=(40, 40)))
    check("polar_unitarity", float(np.abs(u.conj().T @ u - np.eye(40)).max()), 1e-8)

    header = ["check", "value", "threshold", "status"]
    rows = [[name, _fmt(v), _fmt(thr), "pass" if ok else "FAIL"]
            for name, v, thr, ok in checks]
    failed = sum(1 for *_, ok in checks if not ok)
    return header, rows, failed


# --- top-level runner ---------------------------------------------------

def run(cfg: SweepConfig, out_prefix: str | None = None, workers: int = 1) -> int:
    """Execute a sweep and write ``<prefix>.csv`` (+ sidecars).

    Returns the process exit code (0 ok, 3 when any cell was flagged).
    """
    _check_physics(cfg)
    prefix = out_prefix or cfg.out or cfg.experiment
    start = time.time()

    extra_meta: dict = {}
    driver = {
        "winding": _run_winding,
        "coherence": _run_coherence,
        "boundary": _run_boundary,
        "tau": _run_tau,
        "validate": _run_validate,
    }.get(cfg.experiment)
    if cfg.experiment == "dos":
        header, rows, flagged, extra_meta = _run_dos(cfg, workers)
    elif cfg.experiment == "phase-diagram":
        header, rows, flagged = _run_winding(cfg, workers)
        c_header, c_rows = _contour_rows(cfg, cfg.axes[1].values)
        _write_csv(f"{prefix}.contour.csv", c_header, c_rows)
    else:
        header, rows, flagged = driver(cfg, workers)

    _write_csv(f"{prefix}.csv", header, rows)
    meta = {
        "experiment": cfg.experiment,
        "config_sha256": config_hash(cfg.raw),
        "base_seed": cfg.disorder.base_seed,
        "grid_shape": list(_grid_shape(cfg)),
        "realizations": cfg.realizations,
        "flagged_cells": flagged,
        "workers": workers,
        "wall_time_s": round(time.time() - start, 3),
        "generator": "darkwind 0.1.0",
    }
    meta.update(extra_meta)
    with open(f"{prefix}.meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_NUMERICAL if flagged else EXIT_OK


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
