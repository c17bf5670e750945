"""Configuration-driven runs, self-contained run records and plot tables.

A run directory holds

``config.yaml``     normalized configuration (re-runnable as is)
``trace.csv``       one row per iteration or generation (row 0 = start)
``field.csv`` or ``best_vector.csv``
``summary.json``    scalars, status, wall clock and library version
``series.npz``      exact arrays behind every plot table

Physical inputs use laboratory units: fs, cm^-1, V/cm.
"""

from __future__ import annotations

import copy
import json
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .gradient_flow import GradientFlowOptimizer
from .msde import MixedStrategyDE, SearchSpace
from .objectives import (ShaperProblem, SurrogateParams, evaluate_surrogate_ratio, evaluate_tpa,
                         negative_sphere, rb_transfer_problem)
from .pulse import fit_quadratic_phase
from .tables import write_table
from .units import UNITS

__all__ = [
    "ConfigError",
    "RunFailed",
    "RunConfig",
    "RunRecord",
    "load_config",
    "normalize_config",
    "run",
    "run_sweep",
    "emit_plot_data",
    "PROBLEM_KINDS",
    "OPTIMIZER_KINDS",
]

PROBLEM_KINDS = ("rb-transfer", "tpa", "surrogate-ratio", "sphere")
OPTIMIZER_KINDS = ("gradient-flow", "msde")

_PROBLEM_DEFAULTS = {
    "rb-transfer": {"target_level": 2, "horizon_fs": 200.0, "time_step_fs": None,
                    "n_time": None, "n_freq": 512},
    "tpa": {"n_pixels": 640, "group_size": 8, "phase_box": [0.0, 2.0 * math.pi],
            "half_width": 4.0},
    "surrogate-ratio": {"n_pixels": 640, "group_size": 8, "phase_box": [0.0, 2.0 * math.pi],
                        "half_width": 4.0,
                        "surrogate": {"base": 2.0, "a": 0.2, "b": 1.0, "harmonic": 1,
                                      "seed": 2024}},
    "sphere": {"dimension": 10, "bounds": [-5.0, 5.0]},
}

_OPTIMIZER_DEFAULTS = {
    "gradient-flow": {"sigma_cm": 5000.0, "max_iter": 200, "tol": 1e-4, "stall_tol": 1e-10,
                      "stall_window": 10, "initial_phase_step": 0.05, "step_growth": 1.5,
                      "min_step": 1e-12, "restore_tol": 1e-6, "feasibility_tol": 1e-3,
                      "constrained": True, "seed": None},
    "msde": {"pop_size": 30, "max_generations": 1000, "seed": 0, "K": 0.5, "F_mean": 0.5,
             "F_std": 0.3, "CR_mean": 0.5, "CR_std": 0.1},
}

_POSITIVE = {"horizon_fs", "time_step_fs", "sigma_cm", "tol", "initial_phase_step", "step_growth",
             "min_step", "restore_tol", "feasibility_tol", "half_width", "F_std", "CR_std"}
_COUNTS = {"n_time": 2, "n_freq": 2, "max_iter": 0, "stall_window": 1, "n_pixels": 1,
           "group_size": 1, "dimension": 1, "pop_size": 6, "max_generations": 0}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class RunFailed(RuntimeError):
    """Optimization aborted; the partial record was written."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


_PI_EXPR = re.compile(r"^\s*([0-9.]*)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$")


def _number(value):
    """Float from a number or a string such as ``"2pi"``, ``"pi/4"``, ``"1e-4"``."""
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_EXPR.match(value.lower())
        if m:
            k = float(m.group(1)) if m.group(1) else 1.0
            d = float(m.group(2)) if m.group(2) else 1.0
            return k * math.pi / d
        return float(value)
    raise ValueError(f"expected a number, got {value!r}")


def _check_section(name, given, defaults, errors):
    out = copy.deepcopy(defaults)
    for key, val in (given or {}).items():
        if key == "kind":
            continue
        if key not in defaults:
            errors.append(f"{name}: unknown key '{key}'")
            continue
        if isinstance(defaults[key], dict):
            if not isinstance(val, dict):
                errors.append(f"{name}.{key}: expected a mapping")
                continue
            out[key] = _check_section(f"{name}.{key}", val, defaults[key], errors)
        else:
            out[key] = val
    # coerce and range-check
    for key, val in list(out.items()):
        if val is None or isinstance(val, dict):
            continue
        where = f"{name}.{key}"
        try:
            if key in ("phase_box", "bounds"):
                if not isinstance(val, (list, tuple)) or len(val) != 2:
                    raise ValueError("expected [low, high]")
                lo, hi = _number(val[0]), _number(val[1])
                if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
                    raise ValueError(f"invalid interval [{lo}, {hi}]")
                out[key] = [lo, hi]
            elif key == "constrained":
                if not isinstance(val, bool):
                    raise ValueError("expected true or false")
            elif key in _COUNTS or key in ("target_level", "seed", "harmonic"):
                if isinstance(val, bool) or not float(val).is_integer():
                    raise ValueError(f"expected an integer, got {val!r}")
                out[key] = int(val)
                if key in _COUNTS and out[key] < _COUNTS[key]:
                    raise ValueError(f"must be >= {_COUNTS[key]}")
            else:
                out[key] = _number(val)
                if not math.isfinite(out[key]):
                    raise ValueError("must be finite")
                if key in _POSITIVE and out[key] <= 0:
                    raise ValueError("must be positive")
        except (TypeError, ValueError) as exc:
            errors.append(f"{where}: {exc}")
    return out


def normalize_config(raw: dict) -> dict:
    """Fill defaults, coerce values and validate; raises :class:`ConfigError`.

    All problems are collected before raising, so nothing runs from an
    invalid configuration.
    """
    errors = []
    if not isinstance(raw, dict):
        raise ConfigError(["configuration must be a mapping"])
    for key in raw:
        if key not in ("name", "problem", "optimizer", "output_dir", "sweep"):
            errors.append(f"unknown top-level key '{key}'")
    prob = raw.get("problem")
    opt = raw.get("optimizer")
    if not isinstance(prob, dict):
        errors.append("problem: missing section")
        prob = {}
    if not isinstance(opt, dict):
        errors.append("optimizer: missing section")
        opt = {}
    pkind = prob.get("kind")
    okind = opt.get("kind")
    if pkind not in PROBLEM_KINDS:
        errors.append(f"problem.kind: expected one of {', '.join(PROBLEM_KINDS)}, got {pkind!r}")
    if okind not in OPTIMIZER_KINDS:
        errors.append(f"optimizer.kind: expected one of {', '.join(OPTIMIZER_KINDS)}, got {okind!r}")
    out = {"name": str(raw.get("name", "run")), "output_dir": str(raw.get("output_dir", "runs"))}
    if pkind in PROBLEM_KINDS:
        out["problem"] = {"kind": pkind, **_check_section("problem", prob, _PROBLEM_DEFAULTS[pkind], errors)}
    if okind in OPTIMIZER_KINDS:
        out["optimizer"] = {"kind": okind, **_check_section("optimizer", opt, _OPTIMIZER_DEFAULTS[okind], errors)}
    if pkind in PROBLEM_KINDS and okind in OPTIMIZER_KINDS:
        if okind == "gradient-flow" and pkind != "rb-transfer":
            errors.append(f"optimizer.kind: gradient-flow needs a differentiable model, not '{pkind}'")
        if okind == "msde" and pkind == "rb-transfer":
            errors.append("optimizer.kind: msde is wired to black-box problems (tpa, surrogate-ratio, sphere)")
        p = out["problem"]
        if pkind == "rb-transfer":
            if p["target_level"] not in (1, 2, 3):
                errors.append(f"problem.target_level: must be 1, 2 or 3, got {p['target_level']}")
            if p["n_time"] is not None and p["time_step_fs"] is not None:
                errors.append("problem: give n_time or time_step_fs, not both")
        if pkind in ("tpa", "surrogate-ratio") and p["n_pixels"] % p["group_size"]:
            errors.append("problem.n_pixels: must be a multiple of group_size")
    sweep = raw.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or "parameter" not in sweep or "values" not in sweep:
            errors.append("sweep: expected a mapping with 'parameter' and 'values'")
        elif not isinstance(sweep["values"], list) or not sweep["values"]:
            errors.append("sweep.values: expected a non-empty list")
        else:
            path = str(sweep["parameter"]).split(".")
            if len(path) != 2 or path[0] not in ("problem", "optimizer"):
                errors.append("sweep.parameter: expected 'problem.<key>' or 'optimizer.<key>'")
            else:
                out["sweep"] = {"parameter": str(sweep["parameter"]), "values": list(sweep["values"])}
                for k, v in enumerate(sweep["values"]):
                    trial = copy.deepcopy(raw)
                    trial.pop("sweep")
                    trial.setdefault(path[0], {})[path[1]] = v
                    try:
                        normalize_config(trial)
                    except ConfigError as exc:
                        errors.extend(f"sweep.values[{k}]: {e}" for e in exc.errors)
    if errors:
        raise ConfigError(errors)
    return out


def load_config(path) -> dict:
    """Read and normalize a YAML configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f"cannot parse {path}: {exc}"]) from exc
    return normalize_config(raw if raw is not None else {})


@dataclass
class RunConfig:
    """Validated run configuration (see :func:`normalize_config`)."""

    data: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        return cls(normalize_config(raw))

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls(load_config(path))

    @property
    def name(self) -> str:
        return self.data["name"]

    def with_overrides(self, seed=None, output_dir=None) -> "RunConfig":
        d = copy.deepcopy(self.data)
        if seed is not None:
            d["optimizer"]["seed"] = int(seed)
        if output_dir is not None:
            d["output_dir"] = str(output_dir)
        return RunConfig(normalize_config(d))


@dataclass
class RunRecord:
    """Everything a run produced.

    Attributes
    ----------
    config : dict
        Normalized configuration snapshot.
    trace_columns : list of str
        Column names (with units) of ``trace``.
    trace : ndarray
        One row per iteration or generation; row 0 is the starting point.
    final : dict
        Final field or best vector as named columns.
    summary : dict
    series : dict
        Plot-ready tables, ``{kind: {column: array}}``.
    wall_clock : float
    version : str
    status : str
        ``"ok"`` or ``"failed"``.
    directory : Path or None
    """

    config: dict
    trace_columns: list
    trace: np.ndarray
    final: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    version: str = __version__
    status: str = "ok"
    directory: Path | None = None

    @property
    def n_iterations(self) -> int:
        return max(0, len(self.trace) - 1)

    def save(self, directory) -> Path:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "config.yaml", "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.config, fh, sort_keys=False)
        tr = np.asarray(self.trace, dtype=float).reshape(-1, len(self.trace_columns))
        write_table(d / "trace.csv", {c: tr[:, k] for k, c in enumerate(self.trace_columns)})
        if self.final:
            fname = "field.csv" if self.config["optimizer"]["kind"] == "gradient-flow" else "best_vector.csv"
            write_table(d / fname, self.final)
        summary = {"status": self.status, "version": self.version,
                   "wall_clock_s": self.wall_clock, "n_iterations": self.n_iterations,
                   **self.summary}
        with open(d / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
        flat = {"trace": tr, "trace_columns": np.array(self.trace_columns)}
        for kind, cols in self.series.items():
            flat[f"series::{kind}::__columns__"] = np.array(list(cols))
            for c, v in cols.items():
                flat[f"series::{kind}::{c}"] = np.asarray(v)
        for c, v in self.final.items():
            flat[f"final::{c}"] = np.asarray(v)
        np.savez(d / "series.npz", **flat)
        self.directory = d
        return d

    @classmethod
    def load(cls, directory) -> "RunRecord":
        d = Path(directory)
        if not (d / "series.npz").exists():
            raise FileNotFoundError(f"{d} is not a run directory (series.npz missing)")
        with open(d / "config.yaml", encoding="utf-8") as fh:
            config = yaml.safe_load(fh)
        with open(d / "summary.json", encoding="utf-8") as fh:
            summary = json.load(fh)
        z = np.load(d / "series.npz")
        series, final = {}, {}
        for key in z.files:
            if key.startswith("series::") and key.endswith("::__columns__"):
                kind = key.split("::")[1]
                series[kind] = {str(c): z[f"series::{kind}::{c}"] for c in z[key]}
            elif key.startswith("final::"):
                final[key[len("final::"):]] = z[key]
        status = summary.pop("status", "ok")
        version = summary.pop("version", "")
        wall = summary.pop("wall_clock_s", 0.0)
        summary.pop("n_iterations", None)
        return cls(config, [str(c) for c in z["trace_columns"]], z["trace"], final, summary,
                   series, wall, version, status, d)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


def _finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


_GF_COLUMNS = ["iteration", "objective_J", "edge_residual_t0_rel", "edge_residual_tT_rel",
               "step_size", "ascent_c0_d", "orthogonality_c1_d", "orthogonality_c2_d",
               "trials", "regularized"]


def _gf_row(h):
    r = list(h.residuals) + [math.nan] * (2 - len(h.residuals))
    o = list(h.orthogonality) + [math.nan] * (2 - len(h.orthogonality))
    return [h.iteration, h.objective, r[0], r[1], h.step_size, h.ascent, o[0], o[1],
            h.trials, float(h.regularized)]


def _populations_series(result):
    cols = {"t_fs": result.times}
    for k in range(result.populations.shape[1]):
        cols[f"p{k + 1}"] = result.populations[:, k]
    return cols


def _run_gradient_flow(cfg: dict, rows: list):
    p, o = cfg["problem"], cfg["optimizer"]
    problem = rb_transfer_problem(p["target_level"], p["horizon_fs"], n_time=p["n_time"],
                                  time_step=p["time_step_fs"], n_freq=p["n_freq"])
    est = GradientFlowOptimizer(
        sigma=o["sigma_cm"], max_iter=o["max_iter"], tol=o["tol"], stall_tol=o["stall_tol"],
        stall_window=o["stall_window"], initial_phase_step=o["initial_phase_step"],
        step_growth=o["step_growth"], min_step=o["min_step"], restore_tol=o["restore_tol"],
        feasibility_tol=o["feasibility_tol"], constrained=o["constrained"])
    est.fit(problem, callback=lambda h: rows.append(_gf_row(h)))
    state = est.state_
    fld = state.field
    tl = problem.base_field
    res_opt = problem.propagate(fld.phase)
    res_tl = problem.propagate(tl.phase)
    e_opt = UNITS.field_from_internal(res_opt.field_samples)
    e_tl = UNITS.field_from_internal(res_tl.field_samples)
    fit = fit_quadratic_phase(fld)
    omega_cm = UNITS.angular_frequency_to_wavenumber(fld.omega)
    fitted = fit.constant_shift + fit.beta0 * (fld.omega - fit.omega_c) ** 2 if fit.beta0 else \
        np.full(fld.omega.size, fit.constant_shift)
    final = {"omega_rad_per_fs": fld.omega,
             "amplitude_v_per_cm_per_rad_per_fs": UNITS.field_from_internal(fld.amplitude),
             "phase_rad": fld.phase}
    hist = state.history
    summary = {
        "final_objective": state.objective,
        "initial_objective": hist[0].objective,
        "iterations": state.iteration,
        "converged": state.converged,
        "stop_reason": state.reason,
        "max_edge_ratio": max(h.edge_ratio for h in hist),
        "max_orthogonality": max((max(h.orthogonality, default=0.0) for h in hist[1:]), default=0.0),
        "min_ascent": _finite_or_none(min((h.ascent for h in hist[1:]), default=math.nan)),
        "monotone": bool(np.all(np.diff([h.objective for h in hist]) >= 0)),
        "final_populations": res_opt.populations[-1].tolist(),
        "chirp_fit": {"beta0_fs2": fit.beta0, "omega_c_cm": _finite_or_none(fit.omega_c_wavenumber()),
                      "constant_shift_rad": fit.constant_shift, "r_squared": fit.r_squared},
    }
    series = {
        "populations": _populations_series(res_opt),
        "populations_tl": _populations_series(res_tl),
        "objective": {"iteration": [h.iteration for h in hist],
                      "objective_J": [h.objective for h in hist]},
        "phase": {"omega_per_cm": omega_cm, "amplitude_rel": fld.amplitude / fld.amplitude.max(),
                  "phase_rad": fld.phase, "chirp_fit_rad": fitted},
        "field": {"t_fs": res_opt.times, "field_v_per_cm": e_opt, "field_tl_v_per_cm": e_tl},
    }
    return final, summary, series


def _black_box(cfg: dict):
    p = cfg["problem"]
    kind = p["kind"]
    if kind == "sphere":
        lo, hi = p["bounds"]
        return negative_sphere, SearchSpace.box(p["dimension"], lo, hi), None
    sp = p.get("surrogate", {})
    shaper = ShaperProblem(p["n_pixels"], p["group_size"], tuple(p["phase_box"]), p["half_width"],
                           SurrogateParams(**sp) if sp else None)
    if kind == "tpa":
        return (lambda X: evaluate_tpa(shaper, X)), SearchSpace(*shaper.bounds), shaper
    return (lambda X: evaluate_surrogate_ratio(shaper, X)), SearchSpace(*shaper.bounds), shaper


def _run_msde(cfg: dict, rows: list):
    o = cfg["optimizer"]
    objective, space, shaper = _black_box(cfg)
    est = MixedStrategyDE(pop_size=o["pop_size"], max_generations=o["max_generations"],
                          random_state=o["seed"], K=o["K"], F_mean=o["F_mean"], F_std=o["F_std"],
                          CR_mean=o["CR_mean"], CR_std=o["CR_std"], vectorized=True)
    est.fit(objective, space,
            callback=lambda r: rows.append([r.generation, r.best, r.average, *r.best_vector]))
    res = est.result_
    summary = {"best_fitness": res.best_fitness, "generations": len(res.trace) - 1,
               "evaluations": res.evaluations, "dimension": space.dimension}
    if shaper is not None:
        summary["flat_phase_tpa"] = shaper.flat_tpa
        if cfg["problem"]["kind"] == "tpa":
            summary["best_over_flat"] = res.best_fitness / shaper.flat_tpa
    idx = np.arange(1, space.dimension + 1)
    final = {"index": idx, "value": res.best_vector}
    series = {"fitness": {"generation": [r.generation for r in res.trace],
                          "best_fitness": res.best_trace(), "average_fitness": res.average_trace()},
              "best_vector": {"index": idx, "value": res.best_vector}}
    return final, summary, series


def _trace_columns(cfg: dict, dimension: int | None = None):
    if cfg["optimizer"]["kind"] == "gradient-flow":
        return list(_GF_COLUMNS)
    return ["generation", "best_fitness", "average_fitness"] + [f"best_x{k:03d}" for k in range(1, dimension + 1)]


def _dimension(cfg: dict) -> int | None:
    p = cfg["problem"]
    if p["kind"] == "sphere":
        return p["dimension"]
    if p["kind"] in ("tpa", "surrogate-ratio"):
        return p["n_pixels"] // p["group_size"]
    return None


def run(config, out_dir=None, write: bool = True) -> RunRecord:
    """Execute one configured optimization and write its record.

    Parameters
    ----------
    config : RunConfig or dict
    out_dir : path, optional
        Run directory; defaults to ``<output_dir>/<name>``.
    write : bool
        Persist the record.

    Raises
    ------
    ConfigError
        Before anything runs, if the configuration is invalid.
    RunFailed
        If the optimization aborts; the partial record is written first.
    """
    cfg = config.data if isinstance(config, RunConfig) else normalize_config(config)
    cfg = copy.deepcopy(cfg)
    cfg.pop("sweep", None)
    directory = Path(out_dir) if out_dir is not None else Path(cfg["output_dir"]) / cfg["name"]
    columns = _trace_columns(cfg, _dimension(cfg))
    rows: list = []
    t0 = time.perf_counter()
    try:
        if cfg["optimizer"]["kind"] == "gradient-flow":
            final, summary, series = _run_gradient_flow(cfg, rows)
        else:
            final, summary, series = _run_msde(cfg, rows)
    except Exception as exc:
        rec = RunRecord(cfg, columns, np.array(rows, dtype=float).reshape(-1, len(columns)),
                        summary={"error": f"{type(exc).__name__}: {exc}"},
                        wall_clock=time.perf_counter() - t0, status="failed")
        if write:
            rec.save(directory)
        raise RunFailed(f"{type(exc).__name__}: {exc}", rec) from exc
    rec = RunRecord(cfg, columns, np.array(rows, dtype=float).reshape(-1, len(columns)), final,
                    summary, series, time.perf_counter() - t0)
    if write:
        rec.save(directory)
    return rec


def _sweep_label(value) -> str:
    text = json.dumps(value, default=str)
    return re.sub(r"[^A-Za-z0-9.]+", "_", text).strip("_")


def _sweep_member(args):
    cfg, directory = args
    return run(RunConfig(cfg), directory)


def run_sweep(config, out_dir=None, jobs: int = 1) -> list:
    """Run every value of the configured sweep; each run gets its own directory.

    Returns the records in sweep order and writes ``sweep.csv`` (index and
    headline metric) next to the run directories.
    """
    cfg = config.data if isinstance(config, RunConfig) else normalize_config(config)
    if "sweep" not in cfg:
        raise ConfigError(["sweep: section missing"])
    section, key = cfg["sweep"]["parameter"].split(".")
    base_dir = Path(out_dir) if out_dir is not None else Path(cfg["output_dir"]) / cfg["name"]
    members = []
    for k, value in enumerate(cfg["sweep"]["values"]):
        c = copy.deepcopy(cfg)
        c.pop("sweep")
        c[section][key] = value
        c["name"] = f"{cfg['name']}_{k:02d}"
        c = normalize_config(c)
        members.append((c, base_dir / f"{k:02d}_{_sweep_label(value)}"))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_sweep_member, members))
    else:
        records = [_sweep_member(m) for m in members]
    metric = "final_objective" if cfg["optimizer"]["kind"] == "gradient-flow" else "best_fitness"
    write_table(base_dir / "sweep.csv", {"sweep_index": np.arange(len(records)),
                                         metric: [r.summary[metric] for r in records]})
    with open(base_dir / "sweep.json", "w", encoding="utf-8") as fh:
        json.dump({"parameter": cfg["sweep"]["parameter"],
                   "values": [m[0][section][key] for m in members],
                   "directories": [str(m[1]) for m in members],
                   metric: [r.summary[metric] for r in records]}, fh, indent=2, default=str)
    return records


def emit_plot_data(record: RunRecord, kind: str, out_dir) -> list:
    """Write plot tables for ``kind`` (or ``"all"``) into ``out_dir``.

    Raises
    ------
    KeyError
        If the record has no series of that name.
    """
    kinds = list(record.series) if kind == "all" else [kind]
    paths = []
    for k in kinds:
        if k not in record.series:
            available = ", ".join(sorted(record.series)) or "none"
            raise KeyError(f"record has no '{k}' series (available: {available})")
        paths.append(write_table(Path(out_dir) / f"{k}.csv", record.series[k]))
    return paths
