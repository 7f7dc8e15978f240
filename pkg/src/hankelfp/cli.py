"""Command-line interface.

    hankelfp denoise signal.csv --rank 4 --out results/
    hankelfp fit samples.csv --spacing 0.015625 --rank 2 --out results/
    hankelfp experiment run config.json --out results/
    hankelfp experiment preset missing-data --out results/

Exit codes: 0 on success, 1 for configuration or parameter errors, 2 for
file errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, io
from .errors import ConfigError, DataFileError, InvalidInputError, InvalidParameterError, PreconditionError
from .estimation import ExpModel, InterpSpec, build_interp, extract_freqs_1d, extract_freqs_nd, fit_coeffs, synthesize
from .experiments import EXPERIMENTS, ExperimentConfig, load_config, preset_config, run_experiment
from .solver import FIXED_RANK, FIXED_TAU, SolverConfig, min_admissible_q, solve_basic, solve_unequal
from .structure import build_grids, general_domain_map, hankel_map, lift

log = logging.getLogger("hankelfp")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--tau", type=float, help="penalty level (fixed-tau mode)")
    p.add_argument("--rank", type=int, help="target number of exponentials (fixed-rank mode)")
    p.add_argument("--q", type=float, help="conjugate exponent, q > 1 (default 2)")
    p.add_argument("--max-iter", type=int, help="iteration limit (default 5000)")
    p.add_argument("--tol", type=float, help="relative stopping tolerance (default 1e-10)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hankelfp", description="Fixed-point rank-penalised Hankel approximation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("denoise", help="structured low-rank approximation of an equally spaced 1-D signal")
    p.add_argument("input", type=Path, help="CSV with columns x_1, re, im")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--units", choices=("natural", "cycles"), default="natural")
    p.add_argument("--seed", type=int, default=0, help="accepted for symmetry; denoising is deterministic")
    _solver_flags(p)

    p = sub.add_parser("fit", help="fit exponentials to samples at arbitrary points (1-D or d-D)")
    p.add_argument("input", type=Path, help="CSV with columns x_1..x_d, re, im")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--spacing", type=float, required=True, help="grid spacing of the generator")
    p.add_argument("--xi", type=int, nargs="+", default=[8], help="block size per axis (one value is broadcast)")
    p.add_argument("--kernel", choices=("linear", "cubic"), default="cubic")
    p.add_argument("--units", choices=("natural", "cycles"), default="natural")
    p.add_argument("--no-continuation", action="store_true", help="solve for the target rank directly")
    p.add_argument("--seed", type=int, default=0, help="accepted for symmetry; fitting is deterministic")
    _solver_flags(p)

    p = sub.add_parser("experiment", help="run a configured or preset experiment")
    esub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, helptext in (("run", "run a JSON configuration"), ("preset", "run a named preset")):
        e = esub.add_parser(name, help=helptext)
        if name == "run":
            e.add_argument("config", type=Path)
        else:
            e.add_argument("name", choices=EXPERIMENTS)
            e.add_argument("--dump", action="store_true", help="print the preset configuration and exit")
        e.add_argument("--out", type=Path, help="output directory (overrides the config)")
        e.add_argument("--seed", type=int, help="base seed (overrides the config)")
        e.add_argument("--trials", type=int, help="trials per SNR (overrides the config)")
        e.add_argument("--no-plot", action="store_true", help="skip figures")
        _solver_flags(e)
    return parser


def _solver_from_args(args, defaults: dict | None = None) -> SolverConfig:
    d = dict(defaults or {})
    if args.tau is not None:
        d["tau"] = args.tau
        if args.rank is None:
            d.pop("K", None)
            d["mode"] = FIXED_TAU
    if args.rank is not None:
        d["K"] = args.rank
        d["mode"] = FIXED_RANK
    if args.q is not None:
        d["q"] = args.q
    if args.max_iter is not None:
        d["max_iter"] = args.max_iter
    if args.tol is not None:
        d["rel_tol"] = args.tol
    if "tau" not in d and "K" not in d:
        raise ConfigError("--rank", "give --rank or --tau")
    return SolverConfig(**d)


def _model_json(model: ExpModel, units: str) -> list[dict]:
    if units == "cycles":
        model = ExpModel(model.coeffs, model.zetas / (2j * np.pi))
    return model.to_list()


def _summary(res) -> dict:
    return {
        "iterations": res.iterations,
        "converged": bool(res.converged),
        "certified": bool(res.certified),
        "margin": res.margin,
        "final_tau": res.final_tau,
        "objective": res.objective_value,
        "rank": res.rank,
        "convexity": res.convexity,
        "notes": res.notes,
    }


def cmd_denoise(args) -> int:
    pts, f = io.load_signal(args.input)
    if pts.shape[1] != 1:
        raise DataFileError(f"{args.input}: denoise expects 1-D points, found {pts.shape[1]} columns")
    n = len(f)
    if n < 3:
        raise DataFileError(f"{args.input}: need at least 3 samples, found {n}")
    x = pts[:, 0]
    h = (x[-1] - x[0]) / (n - 1)
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=1e-12 * abs(h)):
        raise DataFileError(f"{args.input}: points are not equally spaced; use 'fit' instead")
    cfg = _solver_from_args(args)
    rows = (n + 1) // 2
    smap = hankel_map(rows, n + 1 - rows)
    res = solve_basic(lift(smap, f), smap, cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    io.save_signal(args.out / "denoised.csv", x, res.generator)
    summary = _summary(res)
    K = cfg.K if cfg.mode == FIXED_RANK else res.rank
    if K >= 1 and n >= 2 * K + 1:
        z = extract_freqs_1d(res.generator, K, h)
        fit = fit_coeffs(z[:, None], x, f)
        model = ExpModel(fit.coeffs, z)
        io.write_json(args.out / "model.json", _model_json(model, args.units))
        summary["fit_residual"] = fit.residual
        summary["ill_conditioned"] = fit.ill_conditioned
    io.write_json(args.out / "summary.json", summary)
    print(
        f"denoise: {res.iterations} iterations, converged={res.converged}, certified={res.certified}, "
        f"rank={res.rank}, tau={res.final_tau:.6g}"
    )
    return EXIT_OK


def cmd_fit(args) -> int:
    pts, f = io.load_signal(args.input)
    if len(f) == 0:
        raise DataFileError(f"{args.input}: no samples")
    if args.spacing <= 0:
        raise ConfigError("--spacing", "must be positive")
    d = pts.shape[1]
    xi_shape = np.broadcast_to(np.asarray(args.xi), (d,)) if len(args.xi) in (1, d) else None
    if xi_shape is None:
        raise ConfigError("--xi", f"give one value or {d} values")
    if np.any(xi_shape < 2):
        raise ConfigError("--xi", "block sizes must be at least 2")
    defaults = {"continuation": not args.no_continuation}
    cfg = _solver_from_args(args, defaults)
    if cfg.mode != FIXED_RANK:
        raise ConfigError("--rank", "fit needs a target rank")
    upsilon, xi = build_grids(pts, args.spacing, xi_shape)
    smap = general_domain_map(xi - xi_shape // 2, upsilon)
    interp = build_interp(InterpSpec.on_structure(smap, args.spacing, pts, kernel=args.kernel))
    J = len(f)
    mu = np.full(J, cfg.q / min_admissible_q(interp, np.ones(J), smap))
    res = solve_unequal(f, pts, mu, smap, interp, cfg)
    z = extract_freqs_nd(res.A_star, smap, cfg.K, args.spacing)
    fit = fit_coeffs(z, pts, f)
    model = ExpModel(fit.coeffs, z)
    args.out.mkdir(parents=True, exist_ok=True)
    io.write_json(args.out / "model.json", _model_json(model, args.units))
    io.save_signal(args.out / "reconstruction.csv", pts, synthesize(model, pts))
    summary = _summary(res) | {"fit_residual": fit.residual, "ill_conditioned": fit.ill_conditioned}
    io.write_json(args.out / "summary.json", summary)
    print(f"fit: {len(z)} terms, {res.iterations} iterations, converged={res.converged}, residual={fit.residual:.6g}")
    return EXIT_OK


def _apply_overrides(d: dict, args) -> dict:
    d = dict(d)
    noise = dict(d.get("noise") or {})
    if args.seed is not None:
        noise["seed"] = args.seed
    if args.trials is not None:
        noise["trials"] = args.trials
    d["noise"] = noise
    solver = dict(d.get("solver") or {})
    if args.tau is not None:
        solver["tau"] = args.tau
        if args.rank is None:
            solver.pop("K", None)
            solver["mode"] = FIXED_TAU
    if args.rank is not None:
        solver["K"] = args.rank
        solver["mode"] = FIXED_RANK
    for flag, key in ((args.q, "q"), (args.max_iter, "max_iter"), (args.tol, "rel_tol")):
        if flag is not None:
            solver[key] = flag
    d["solver"] = solver
    if args.out is not None:
        d["output"] = str(args.out.resolve())
    if args.no_plot:
        d["plot"] = False
    return d


def _print_row(row: dict):
    snr = row["snr_db"]
    fe = row.get("freq_err_max")
    fe_s = f"{fe:.3e}" if fe is not None and math.isfinite(fe) else "n/a"
    print(
        f"trial {row['trial']:4d}  snr={snr:>6}  iters={row['iterations']:5d}  "
        f"converged={row['converged']!s:5}  certified={row['certified']!s:5}  freq_err={fe_s}",
        flush=True,
    )


def cmd_experiment(args) -> int:
    if args.action == "preset":
        d = preset_config(args.name)
        if args.dump:
            print(json.dumps(d, indent=2))
            return EXIT_OK
        base = Path.cwd()
    else:
        try:
            d = json.loads(args.config.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{args.config}:{exc.lineno}: {exc.msg}") from None
        base = args.config.parent
    d = _apply_overrides(d, args)
    if d.get("output") is None:
        raise ConfigError("output", "no output directory; pass --out or set 'output'")
    cfg = ExperimentConfig.from_dict(d, base_dir=base)
    report = run_experiment(cfg, progress=_print_row)
    for agg in report.aggregates:
        med = agg.get("freq_err_max_median")
        med_s = f"{med:.3e}" if med is not None else "n/a"
        print(f"snr={agg['snr_db']}: {agg['n_trials']} trials, {agg['n_converged']} converged, median freq error {med_s}")
    print(f"report written to {cfg.output}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"denoise": cmd_denoise, "fit": cmd_fit, "experiment": cmd_experiment}
    try:
        return handlers[args.command](args)
    except DataFileError as exc:
        print(f"hankelfp: file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"hankelfp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, InvalidParameterError, InvalidInputError, PreconditionError) as exc:
        print(f"hankelfp: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
