"""Experiment configurations, presets and reports.

An experiment synthesises data from an exponential model (or reads it from a
signal file), adds noise at each requested SNR, runs one of the fixed-point
solvers per trial and records frequency and reconstruction errors.  Reports
are deterministic: the same configuration and base seed give byte-identical
CSV files.  Wall-clock timings are written to a separate file for that reason.
"""

from __future__ import annotations

import copy
import json
import logging
import math
import time
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import io
from .errors import ConfigError, DataFileError, InvalidInputError, InvalidParameterError
from .estimation import (
    ExpModel,
    InterpSpec,
    RankDeficiencyWarning,
    add_noise,
    build_interp,
    cycles_to_zeta,
    esprit_1d,
    extract_freqs_1d,
    extract_freqs_nd,
    fit_coeffs,
    synthesize,
    table_4exp_model,
    zeta_to_cycles,
)
from .solver import (
    FIXED_RANK,
    FIXED_TAU,
    SolverConfig,
    min_admissible_q,
    solve_basic,
    solve_unequal,
    solve_weighted,
)
from .structure import StructureMap, build_grids, general_domain_map, hankel_map, lift

log = logging.getLogger(__name__)

EXPERIMENTS = ("denoise-equispaced", "weighted", "missing-data", "unequal-1d", "curve-2d", "snr-sweep")
EQUISPACED = ("denoise-equispaced", "weighted", "missing-data", "snr-sweep")
WEIGHT_KINDS = ("uniform", "triangular", "mask", "gap", "custom")

# the 20 observed samples of the missing-data scenario, 1-based
MISSING_DATA_INDICES = (22, 32, 34, 40, 91, 92, 99, 112, 119, 123, 127, 146, 152, 165, 170, 174, 175, 190, 241, 244)

_SOLVER_FIELDS = {f.name for f in fields(SolverConfig)}
_TOP_FIELDS = {
    "experiment",
    "model",
    "freq_units",
    "data",
    "grid",
    "noise",
    "solver",
    "weights",
    "output",
    "plot",
}


def _model_terms(model: ExpModel, units: str) -> list[dict]:
    if units == "cycles":
        model = ExpModel(model.coeffs, zeta_to_cycles(model.zetas))
    return model.to_list()


def _curve_model() -> ExpModel:
    # two damped plane waves; exponents in cycles per unit length
    nu = np.array([[2.5 + 0.06j, -1.5 - 0.05j], [-3.1 - 0.03j, 2.2 + 0.04j]])
    return ExpModel(np.array([1.0, 0.8 - 0.6j]), cycles_to_zeta(nu))


def _unequal_model() -> ExpModel:
    return ExpModel(np.array([1.0, 0.7 + 0.2j]), np.array([-0.2 + 2j * np.pi * 1.0, 0.1 - 2j * np.pi * 2.0]))


def _preset(name: str) -> dict:
    four = _model_terms(table_4exp_model(), "natural")
    grid_257 = {"nodes": 257, "interval": [-0.5, 0.5]}
    if name == "denoise-equispaced":
        return {
            "experiment": name,
            "model": four,
            "grid": grid_257,
            "noise": {"snr_db": ["inf"], "trials": 1, "seed": 0},
            "solver": {"mode": FIXED_RANK, "K": 4, "q": 2.0},
            "weights": {"kind": "triangular"},
        }
    if name == "weighted":
        return {
            "experiment": name,
            "model": four,
            "grid": grid_257,
            "noise": {"snr_db": [10.0], "trials": 5, "seed": 0},
            "solver": {"mode": FIXED_RANK, "K": 4, "q": 2.0, "rel_tol": 1e-6},
            "weights": {"kind": "uniform", "value": "auto"},
        }
    if name == "missing-data":
        return {
            "experiment": name,
            "model": four,
            "grid": grid_257,
            "noise": {"snr_db": ["inf"], "trials": 1, "seed": 0},
            "solver": {"mode": FIXED_RANK, "K": 4, "q": 2.0, "continuation": True},
            "weights": {"kind": "mask", "indices": list(MISSING_DATA_INDICES), "index_base": 1, "value": "auto"},
        }
    if name == "unequal-1d":
        return {
            "experiment": name,
            "model": _model_terms(_unequal_model(), "natural"),
            "grid": {"nodes": 65, "interval": [0.0, 1.0], "samples": 80, "sample_seed": 7, "kernel": "cubic"},
            "noise": {"snr_db": ["inf"], "trials": 1, "seed": 0},
            "solver": {"mode": FIXED_RANK, "K": 2, "q": 2.0, "continuation": True},
            "weights": {"kind": "uniform", "value": "auto"},
        }
    if name == "curve-2d":
        return {
            "experiment": name,
            "model": _model_terms(_curve_model(), "cycles"),
            "freq_units": "cycles",
            "grid": {"spacing": 1 / 64, "xi_shape": [8, 8], "samples": 2000, "kernel": "cubic", "curve": "wave"},
            "noise": {"snr_db": [5.0], "trials": 20, "seed": 0},
            "solver": {"mode": FIXED_RANK, "K": 2, "q": 2.0, "continuation": True},
            "weights": {"kind": "uniform", "value": "auto"},
        }
    if name == "snr-sweep":
        return {
            "experiment": name,
            "model": four,
            "grid": grid_257,
            "noise": {"snr_db": [0.0, 5.0, 10.0, 15.0, 20.0], "trials": 50, "seed": 0},
            "solver": {"mode": FIXED_RANK, "K": 4, "q": 2.0, "rel_tol": 1e-6},
            "weights": {"kind": "uniform", "value": "auto"},
        }
    raise ConfigError("experiment", f"unknown preset {name!r}; choose from {', '.join(EXPERIMENTS)}")


def preset_config(name: str) -> dict:
    """Configuration dictionary of a named preset (a fresh copy)."""
    return copy.deepcopy(_preset(name))


def _snr(v, where: str) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise ConfigError(where, f"expected a number or 'inf', got {v!r}")
    if v is None:
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(where, f"expected a number, got {v!r}")
    if math.isnan(v):
        raise ConfigError(where, "NaN is not a valid SNR")
    return float(v)


def _int(d: dict, key: str, where: str, default=None, minimum: int | None = None) -> int:
    v = d.get(key, default)
    if v is None or isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"{where}.{key}", f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where}.{key}", f"must be at least {minimum}, got {v}")
    return int(v)


def _num(d: dict, key: str, where: str, default=None) -> float:
    v = d.get(key, default)
    if v is None or isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key}", f"expected a finite number, got {v!r}")
    return float(v)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment configuration; see the README for the JSON schema."""

    experiment: str
    model: ExpModel | None
    freq_units: str
    data: Path | None
    grid: dict
    snr_db: tuple[float, ...]
    trials: int
    seed: int
    solver: SolverConfig
    weights: dict
    output: Path | None = None
    plot: bool = True
    source: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config", "top level must be a JSON object")
        unknown = sorted(set(d) - _TOP_FIELDS)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
        exp = d.get("experiment")
        if exp not in EXPERIMENTS:
            raise ConfigError("experiment", f"must be one of {', '.join(EXPERIMENTS)}, got {exp!r}")
        units = d.get("freq_units", "natural")
        if units not in ("natural", "cycles"):
            raise ConfigError("freq_units", f"must be 'natural' or 'cycles', got {units!r}")

        model = None
        if d.get("model") is not None:
            try:
                model = ExpModel.from_list(d["model"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("model", f"invalid term list ({exc})") from None
            if units == "cycles":
                model = ExpModel(model.coeffs, cycles_to_zeta(model.zetas))
        data = None
        if d.get("data") is not None:
            data = Path(d["data"])
            if not data.is_absolute():
                data = base_dir / data
            if not data.exists():
                raise ConfigError("data", f"file {data} does not exist")
        if model is None and data is None:
            raise ConfigError("model", "either a model or a data file is required")

        grid = dict(d.get("grid") or {})
        _check_grid(exp, grid)
        if model is not None and model.dim != (2 if exp == "curve-2d" else 1) and data is None:
            raise ConfigError("model", f"{exp} needs a model of dimension {2 if exp == 'curve-2d' else 1}")

        noise = d.get("noise") or {}
        if not isinstance(noise, dict):
            raise ConfigError("noise", "must be an object")
        snrs = noise.get("snr_db", ["inf"])
        if not isinstance(snrs, list) or not snrs:
            raise ConfigError("noise.snr_db", "must be a non-empty list")
        snr_db = tuple(_snr(v, f"noise.snr_db[{i}]") for i, v in enumerate(snrs))
        trials = _int(noise, "trials", "noise", 1, minimum=1)
        seed = _int(noise, "seed", "noise", 0, minimum=0)

        solver_d = dict(d.get("solver") or {})
        bad = sorted(set(solver_d) - _SOLVER_FIELDS)
        if bad:
            raise ConfigError(f"solver.{bad[0]}", "unknown field")
        if "tau" not in solver_d and "K" not in solver_d:
            if model is None:
                raise ConfigError("solver.K", "required when no model is given")
            solver_d["K"] = model.K
        solver_d.setdefault("mode", FIXED_TAU if "tau" in solver_d and "K" not in solver_d else FIXED_RANK)
        try:
            solver = SolverConfig(**solver_d)
        except (InvalidParameterError, TypeError) as exc:
            raise ConfigError("solver", str(exc)) from None

        weights = dict(d.get("weights") or {"kind": "triangular" if exp == "denoise-equispaced" else "uniform"})
        _check_weights(exp, weights, base_dir)

        output = d.get("output")
        if output is not None:
            output = Path(output)
            output = output if output.is_absolute() else base_dir / output
        plot = d.get("plot", True)
        if not isinstance(plot, bool):
            raise ConfigError("plot", f"expected true or false, got {plot!r}")
        return cls(exp, model, units, data, grid, snr_db, trials, seed, solver, weights, output, plot, copy.deepcopy(d))

    def to_dict(self) -> dict:
        """Normalised configuration, suitable for echoing next to a report."""
        out = {
            "experiment": self.experiment,
            "freq_units": self.freq_units,
            "grid": self.grid,
            "noise": {
                "snr_db": [v if math.isfinite(v) else "inf" for v in self.snr_db],
                "trials": self.trials,
                "seed": self.seed,
            },
            "solver": {f.name: getattr(self.solver, f.name) for f in fields(SolverConfig)},
            "weights": self.weights,
            "plot": self.plot,
        }
        if self.model is not None:
            out["model"] = _model_terms(self.model, self.freq_units)
        if self.data is not None:
            out["data"] = str(self.data)
        return out


def _check_grid(exp: str, grid: dict):
    if exp in EQUISPACED:
        n = _int(grid, "nodes", "grid", 257, minimum=3)
        iv = grid.get("interval", [-0.5, 0.5])
        if not (isinstance(iv, list) and len(iv) == 2 and all(isinstance(v, (int, float)) for v in iv) and iv[0] < iv[1]):
            raise ConfigError("grid.interval", f"expected [low, high] with low < high, got {iv!r}")
        grid.setdefault("nodes", n)
        grid.setdefault("interval", iv)
    elif exp == "unequal-1d":
        _int(grid, "nodes", "grid", None, minimum=5)
        iv = grid.get("interval", [0.0, 1.0])
        if not (isinstance(iv, list) and len(iv) == 2 and iv[0] < iv[1]):
            raise ConfigError("grid.interval", f"expected [low, high] with low < high, got {iv!r}")
        grid.setdefault("interval", iv)
        grid.setdefault("samples", 80)
        _int(grid, "samples", "grid", minimum=1)
        grid.setdefault("sample_seed", 0)
        _int(grid, "sample_seed", "grid", minimum=0)
        grid.setdefault("kernel", "cubic")
    else:
        if _num(grid, "spacing", "grid", 1 / 64) <= 0:
            raise ConfigError("grid.spacing", "must be positive")
        grid.setdefault("spacing", 1 / 64)
        xs = grid.setdefault("xi_shape", [8, 8])
        if not (isinstance(xs, list) and len(xs) == 2 and all(isinstance(v, int) and v >= 2 for v in xs)):
            raise ConfigError("grid.xi_shape", f"expected two integers >= 2, got {xs!r}")
        grid.setdefault("samples", 2000)
        _int(grid, "samples", "grid", minimum=1)
        grid.setdefault("kernel", "cubic")
        if grid.setdefault("curve", "wave") != "wave":
            raise ConfigError("grid.curve", "only the built-in 'wave' curve is available; use 'data' for other point sets")
    if exp in ("unequal-1d", "curve-2d"):
        if grid["kernel"] not in ("linear", "cubic"):
            raise ConfigError("grid.kernel", f"must be 'linear' or 'cubic', got {grid['kernel']!r}")


def _check_weights(exp: str, w: dict, base_dir: Path):
    kind = w.get("kind")
    if kind not in WEIGHT_KINDS:
        raise ConfigError("weights.kind", f"must be one of {', '.join(WEIGHT_KINDS)}, got {kind!r}")
    value = w.setdefault("value", "auto")
    if value != "auto" and (isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0):
        raise ConfigError("weights.value", f"expected 'auto' or a positive number, got {value!r}")
    if kind in ("triangular", "mask", "gap") and exp not in EQUISPACED:
        raise ConfigError("weights.kind", f"{kind!r} weights need equally spaced data")
    if kind == "mask":
        idx = w.get("indices")
        if not isinstance(idx, list) or not idx or not all(isinstance(i, int) and not isinstance(i, bool) for i in idx):
            raise ConfigError("weights.indices", "expected a non-empty list of integers")
        base = w.setdefault("index_base", 1)
        if base not in (0, 1):
            raise ConfigError("weights.index_base", f"must be 0 or 1, got {base!r}")
    if kind == "gap":
        iv = w.get("interval")
        if not (isinstance(iv, list) and len(iv) == 2 and iv[0] < iv[1]):
            raise ConfigError("weights.interval", f"expected [low, high], got {iv!r}")
        _int(w, "keep", "weights", None, minimum=1)
    if kind == "custom":
        if not isinstance(w.get("path"), str):
            raise ConfigError("weights.path", "expected a file name")
        p = Path(w["path"])
        if not (p if p.is_absolute() else base_dir / p).exists():
            raise ConfigError("weights.path", f"file {p} does not exist")
        w["path"] = str(p if p.is_absolute() else base_dir / p)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path}:{exc.lineno}: {exc.msg}") from None
    return ExperimentConfig.from_dict(d, base_dir=path.parent)


# ---------------------------------------------------------------- weights


def gap_indices(x: np.ndarray, interval, keep: int) -> np.ndarray:
    """Indices of ``keep`` nodes outside ``interval``, spread evenly over the candidates."""
    outside = np.flatnonzero((x < interval[0]) | (x > interval[1]))
    if keep > len(outside):
        raise ConfigError("weights.keep", f"only {len(outside)} nodes lie outside the gap, asked for {keep}")
    pick = np.round(np.linspace(0, len(outside) - 1, keep)).astype(int)
    return outside[pick]


def _read_custom_weights(path, n: int) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                vals.append(float(line.split(",")[0]))
            except ValueError as exc:
                raise DataFileError(f"{path}:{lineno}: {exc}") from None
    if len(vals) != n:
        raise ConfigError("weights.path", f"{path} holds {len(vals)} weights, expected {n}")
    return np.array(vals)


def equispaced_weights(w: dict, beta: np.ndarray, x: np.ndarray, q: float) -> np.ndarray:
    """Per-node weights ``mu`` for equally spaced data.

    ``auto`` values pick the largest admissible weight: ``q beta`` on observed
    nodes for triangular, mask and gap weights, and ``q min(beta)`` for uniform.
    """
    n = len(beta)
    kind = w["kind"]
    if kind == "custom":
        mu = _read_custom_weights(w["path"], n)
        if np.any(mu < 0) or not np.all(np.isfinite(mu)):
            raise ConfigError("weights.path", "weights must be finite and nonnegative")
        return mu
    if kind == "uniform":
        return np.full(n, q * beta.min() if w["value"] == "auto" else float(w["value"]))
    full = q * beta if w["value"] == "auto" else np.full(n, float(w["value"]))
    if kind == "triangular":
        return full
    if kind == "mask":
        idx = np.asarray(w["indices"]) - w["index_base"]
        if np.any(idx < 0) or np.any(idx >= n):
            raise ConfigError("weights.indices", f"indices must lie in [{w['index_base']}, {n - 1 + w['index_base']}]")
    else:
        idx = gap_indices(x, w["interval"], w["keep"])
    mu = np.zeros(n)
    mu[idx] = full[idx]
    return mu


# ---------------------------------------------------------------- metrics


def match_frequencies(est, true) -> tuple[np.ndarray, np.ndarray]:
    """Per-term errors after optimal assignment on ``max_axis |zeta_est - zeta_true|``.

    Returns ``(errors, order)``: ``errors[k]`` belongs to true term ``k`` (NaN
    when unmatched) and ``order[k]`` is the matched estimate index or -1.
    """
    est = np.asarray(est, dtype=complex).reshape(len(est), -1)
    true = np.asarray(true, dtype=complex).reshape(len(true), -1)
    errors = np.full(len(true), np.nan)
    order = np.full(len(true), -1)
    if len(est) == 0:
        return errors, order
    cost = np.abs(est[:, None, :] - true[None, :, :]).max(axis=2)
    rows, cols = linear_sum_assignment(cost)
    errors[cols] = cost[rows, cols]
    order[cols] = rows
    return errors, order


@dataclass
class Report:
    """Per-trial rows plus per-SNR aggregates."""

    experiment: str
    K: int
    trials: list[dict]
    aggregates: list[dict]
    timings: list[dict] = field(default_factory=list)
    artifacts: dict = field(default_factory=dict, repr=False)

    def trial_columns(self) -> list[str]:
        cols = ["trial", "seed", "snr_db", "converged", "certified", "iterations", "final_tau", "margin"]
        cols += [f"freq_err_{k + 1}" for k in range(self.K)]
        cols += ["freq_err_max", "coeff_err_max", "recon_err_max", "recon_err_rel_l2"]
        if any("esprit_freq_err_max" in r for r in self.trials):
            cols += ["esprit_freq_err_max", "esprit_minus_fp", "esprit_minus_fp_normalized"]
        return cols

    def aggregate_columns(self) -> list[str]:
        cols = ["snr_db", "n_trials", "n_converged", "n_certified"]
        for m in AGG_METRICS:
            cols += [f"{m}_median", f"{m}_mean", f"{m}_std"]
        return cols


AGG_METRICS = ("freq_err_max", "recon_err_max", "iterations")


def aggregate(trials: list[dict]) -> list[dict]:
    """Median, mean and standard deviation of the main metrics for each SNR, in order of appearance."""
    out = []
    snrs = list(dict.fromkeys(r["snr_db"] for r in trials))
    for snr in snrs:
        rows = [r for r in trials if r["snr_db"] == snr]
        agg = {
            "snr_db": snr,
            "n_trials": len(rows),
            "n_converged": sum(bool(r["converged"]) for r in rows),
            "n_certified": sum(bool(r["certified"]) for r in rows),
        }
        for m in AGG_METRICS:
            vals = np.array([r[m] for r in rows if r.get(m) is not None], dtype=float)
            vals = vals[np.isfinite(vals)]
            if len(vals):
                agg[f"{m}_median"] = float(np.median(vals))
                agg[f"{m}_mean"] = float(np.mean(vals))
                agg[f"{m}_std"] = float(np.std(vals))
        out.append(agg)
    return out


# ---------------------------------------------------------------- scenarios


@dataclass
class _Problem:
    """Noise-free setup shared by all trials."""

    points: np.ndarray  # sample locations
    clean: np.ndarray | None  # noise-free samples, when a model is known
    given: np.ndarray | None  # samples read from a file
    nodes: np.ndarray  # coordinates of the generator entries
    truth_nodes: np.ndarray | None
    spacing: np.ndarray
    smap: StructureMap
    observed: np.ndarray  # boolean mask over samples
    solve: object = None


def wave_curve(samples: int) -> np.ndarray:
    """The built-in sampling curve in the unit square."""
    t = np.linspace(0.0, 1.0, samples)
    return np.stack([0.1 + 0.8 * t, 0.5 + 0.3 * np.sin(2 * np.pi * t) * (1 - 0.3 * t)], axis=1)


def _load_data(cfg: ExperimentConfig, dim: int):
    pts, vals = io.load_signal(cfg.data)
    if pts.shape[1] != dim:
        raise ConfigError("data", f"{cfg.experiment} needs {dim}-D points, file has {pts.shape[1]}")
    if len(vals) == 0:
        raise ConfigError("data", f"{cfg.data} holds no samples")
    return pts, vals


def _equispaced_problem(cfg: ExperimentConfig) -> _Problem:
    g = cfg.grid
    if cfg.data is not None:
        pts, given = _load_data(cfg, 1)
        x = pts[:, 0]
        n = len(x)
        h = (x[-1] - x[0]) / (n - 1) if n > 1 else 1.0
        if n < 3 or not np.allclose(np.diff(x), h, rtol=1e-9, atol=1e-12 * abs(h)):
            raise ConfigError("data", "samples must be equally spaced with at least 3 nodes")
    else:
        n = g["nodes"]
        x = np.linspace(g["interval"][0], g["interval"][1], n)
        h = (g["interval"][1] - g["interval"][0]) / (n - 1)
        given = None
    rows = (n + 1) // 2
    smap = hankel_map(rows, n + 1 - rows)
    clean = synthesize(cfg.model, x) if cfg.model is not None else None
    beta = smap.beta.astype(float)
    mu = equispaced_weights(cfg.weights, beta, x, cfg.solver.q)
    prob = _Problem(x[:, None], clean, given, x[:, None], clean, np.array([h]), smap, mu > 0)
    frobenius = cfg.weights["kind"] == "triangular" and cfg.weights["value"] == "auto"

    def solve(f):
        if frobenius:
            return solve_basic(lift(smap, f), smap, cfg.solver)
        return solve_weighted(np.where(mu > 0, f, 0), mu, smap, cfg.solver)

    prob.solve = solve
    return prob


def _unequal_problem(cfg: ExperimentConfig) -> _Problem:
    g = cfg.grid
    lo, hi = g["interval"]
    n = g["nodes"]
    h = (hi - lo) / (n - 1)
    if cfg.data is not None:
        pts, given = _load_data(cfg, 1)
        X = pts[:, 0]
        if X.min() < lo or X.max() > hi:
            raise ConfigError("grid.interval", "sample points fall outside the grid interval")
    else:
        X = np.sort(np.random.default_rng(g["sample_seed"]).uniform(lo, hi, g["samples"]))
        given = None
    rows = (n + 1) // 2
    smap = hankel_map(rows, n + 1 - rows)
    nodes = lo + h * np.arange(n)
    interp = build_interp(InterpSpec(np.arange(n), h, X, lo, g["kernel"]))
    mu = _sample_weights(cfg, interp, smap, len(X))
    clean = synthesize(cfg.model, X) if cfg.model is not None else None
    truth_nodes = synthesize(cfg.model, nodes) if cfg.model is not None else None
    prob = _Problem(X[:, None], clean, given, nodes[:, None], truth_nodes, np.array([h]), smap, mu > 0)
    prob.solve = lambda f: solve_unequal(f, X, mu, smap, interp, cfg.solver)
    return prob


def _sample_weights(cfg: ExperimentConfig, interp, smap: StructureMap, J: int) -> np.ndarray:
    w = cfg.weights
    if w["kind"] == "custom":
        return _read_custom_weights(w["path"], J)
    if w["value"] != "auto":
        return np.full(J, float(w["value"]))
    # largest constant weight the iteration admits
    return np.full(J, cfg.solver.q / min_admissible_q(interp, np.ones(J), smap))


def _curve_problem(cfg: ExperimentConfig) -> _Problem:
    g = cfg.grid
    h = float(g["spacing"])
    if cfg.data is not None:
        X, given = _load_data(cfg, 2)
    else:
        X = wave_curve(g["samples"])
        given = None
    xi_shape = np.array(g["xi_shape"])
    upsilon, xi = build_grids(X, h, xi_shape)
    # centre the block so that Omega surrounds the curve
    smap = general_domain_map(xi - xi_shape // 2, upsilon)
    interp = build_interp(InterpSpec.on_structure(smap, h, X, kernel=g["kernel"]))
    mu = _sample_weights(cfg, interp, smap, len(X))
    nodes = smap.omega_points * h
    clean = synthesize(cfg.model, X) if cfg.model is not None else None
    truth_nodes = synthesize(cfg.model, nodes) if cfg.model is not None else None
    prob = _Problem(X, clean, given, nodes, truth_nodes, np.array([h, h]), smap, mu > 0)
    prob.solve = lambda f: solve_unequal(f, X, mu, smap, interp, cfg.solver)
    return prob


def build_problem(cfg: ExperimentConfig) -> _Problem:
    if cfg.experiment in EQUISPACED:
        return _equispaced_problem(cfg)
    if cfg.experiment == "unequal-1d":
        return _unequal_problem(cfg)
    return _curve_problem(cfg)


def _units(z: np.ndarray, units: str) -> np.ndarray:
    return zeta_to_cycles(z) if units == "cycles" else z


def _run_trial(cfg: ExperimentConfig, prob: _Problem, snr: float, seed: int, index: int) -> tuple[dict, dict]:
    base = prob.given if prob.given is not None else prob.clean
    f = add_noise(base, snr, seed)
    res = prob.solve(f)
    K = cfg.solver.K if cfg.solver.K is not None else (cfg.model.K if cfg.model is not None else res.rank)
    row = {
        "trial": index,
        "seed": seed,
        "snr_db": snr,
        "converged": res.converged,
        "certified": res.certified,
        "iterations": res.iterations,
        "final_tau": res.final_tau,
        "margin": res.margin,
    }
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RankDeficiencyWarning)
        try:
            if prob.smap.dim == 1:
                z = extract_freqs_1d(res.generator, K, prob.spacing[0])[:, None]
            else:
                z = extract_freqs_nd(res.A_star, prob.smap, K, prob.spacing)
        except (InvalidInputError, InvalidParameterError) as exc:
            log.warning("trial %d: frequency extraction failed: %s", index, exc)
            z = np.zeros((0, prob.smap.dim), dtype=complex)
    if caught:
        row["notes"] = str(caught[0].message)
    est = None
    if len(z):
        obs = prob.observed
        fit = fit_coeffs(z, prob.points[obs], f[obs])
        est = ExpModel(fit.coeffs, z)
    if cfg.model is not None:
        errs, order = match_frequencies(_units(z, cfg.freq_units), _units(cfg.model.zetas, cfg.freq_units))
        for k, e in enumerate(errs):
            row[f"freq_err_{k + 1}"] = float(e)
        row["freq_err_max"] = float(np.max(errs))
        if est is not None:
            c_err = [abs(est.coeffs[o] - c) if o >= 0 else np.nan for o, c in zip(order, cfg.model.coeffs)]
            row["coeff_err_max"] = float(np.max(c_err))
        truth = prob.truth_nodes
        diff = res.generator - truth
        row["recon_err_max"] = float(np.max(np.abs(diff)))
        row["recon_err_rel_l2"] = float(np.linalg.norm(diff) / np.linalg.norm(truth))
        if cfg.experiment in ("denoise-equispaced", "weighted", "snr-sweep"):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RankDeficiencyWarning)
                ze = esprit_1d(f, K, prob.spacing[0])[:, None]
            ee, _ = match_frequencies(_units(ze, cfg.freq_units), _units(cfg.model.zetas, cfg.freq_units))
            row["esprit_freq_err_max"] = float(np.max(ee))
            row["esprit_minus_fp"] = row["esprit_freq_err_max"] - row["freq_err_max"]
    detail = {"samples": f, "result": res, "estimate": est}
    return row, detail


def run_experiment(cfg: ExperimentConfig, out_dir=None, progress=None) -> Report:
    """Run every (SNR, trial) pair; writes files when an output directory is given."""
    prob = build_problem(cfg)
    trials, timings, details = [], [], []
    index = 0
    for snr in cfg.snr_db:
        for _ in range(cfg.trials):
            seed = cfg.seed + index
            t0 = time.perf_counter()
            row, detail = _run_trial(cfg, prob, snr, seed, index)
            timings.append({"trial": index, "runtime_s": time.perf_counter() - t0})
            trials.append(row)
            details.append(detail)
            if progress is not None:
                progress(row)
            index += 1
    diffs = [r["esprit_minus_fp"] for r in trials if "esprit_minus_fp" in r]
    if diffs:
        scale = max(abs(v) for v in diffs if math.isfinite(v)) if any(math.isfinite(v) for v in diffs) else 0.0
        for r in trials:
            if "esprit_minus_fp" in r:
                r["esprit_minus_fp_normalized"] = r["esprit_minus_fp"] / scale if scale > 0 else 0.0
    K = cfg.solver.K if cfg.solver.K is not None else (cfg.model.K if cfg.model is not None else 1)
    report = Report(cfg.experiment, K, trials, aggregate(trials), timings, {"problem": prob, "details": details})
    out_dir = out_dir if out_dir is not None else cfg.output
    if out_dir is not None:
        save_report(report, cfg, out_dir)
    return report


def save_report(report: Report, cfg: ExperimentConfig, out_dir) -> dict:
    """Write the report, config echo, per-trial reconstructions and (optionally) figures."""
    out = Path(out_dir)
    (out / "reconstructions").mkdir(parents=True, exist_ok=True)
    files = {}
    files["report"] = out / "report.csv"
    io.write_table(files["report"], report.trial_columns(), report.trials)
    files["summary"] = out / "summary.csv"
    io.write_table(files["summary"], report.aggregate_columns(), report.aggregates)
    files["timings"] = out / "timings.csv"
    io.write_table(files["timings"], ["trial", "runtime_s"], report.timings)
    files["config"] = out / "config.json"
    io.write_json(files["config"], cfg.to_dict())
    prob = report.artifacts.get("problem")
    estimates = []
    for row, detail in zip(report.trials, report.artifacts.get("details", [])):
        io.save_signal(out / "reconstructions" / f"trial_{row['trial']:04d}.csv", prob.nodes, detail["result"].generator)
        est = detail["estimate"]
        terms = _model_terms(est, cfg.freq_units) if est is not None else []
        estimates.append({"trial": row["trial"], "terms": terms})
    files["estimates"] = out / "estimates.json"
    io.write_json(files["estimates"], {"freq_units": cfg.freq_units, "trials": estimates})
    if cfg.plot:
        try:
            from . import plotting
        except ImportError:
            log.warning("matplotlib is not installed; skipping figures")
        else:
            files.update(plotting.report_figures(report, cfg, out / "figures"))
    return files
