"""Command-line experiment runner.

Subcommands: ``simulate``, ``limit``, ``residual``, ``regime``, ``hfunc``,
``tailtest``, ``dissipation``.  Every file-producing command writes CSV with
a ``# schema=1`` comment line and a declared header, plus a
``<out>.manifest.json`` sidecar echoing the resolved configuration, its
content hash, the seed, and the written files.  Outputs are byte-identical
for a fixed seed, for any worker count.

Options may come from a flat JSON config file (``--config``); explicit
flags override file values, which override built-in defaults.  Exit codes:
0 success, 1 validation error, 2 numerical-budget failure (quadrature
tolerance not met, or an event budget truncated the run).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from .analysis import (
    DampedStable,
    ExperimentConfig,
    QuadratureError,
    dissipation_probe,
    hill_k,
    hill_tail_index,
    ks_critical_value,
    ks_two_sample,
    limit_ensemble,
    monte_carlo_ensemble,
    residual_ensemble,
    response_second_difference,
)
from .dynamics import SystemParams, solve_exact
from .limits import (
    RegimeError,
    limit_filtered_sum,
    limit_log_signs,
    limit_power_gaps,
)
from .noise import (
    LimitKind,
    TruncatedStableFamily,
    classify_regime,
    sample_jump_events,
)

SCHEMA_LINE = "# schema=1"


# ---------------------------------------------------------------------------
# option plumbing

_COMMON = {
    "alpha": (float, 1.2, "stability index of the jump measure"),
    "beta": (float, 0.0, "friction exponent"),
    "c": (float, 1.0, "tail constant of the jump measure"),
    "ell": (float, None, "truncation level; omit for the ell(eps)=eps schedule"),
    "eps": (str, "1e-2", "noise scale, or comma list for sweep commands"),
    "t": (float, None, "evaluation time (default: horizon)"),
    "horizon": (float, 1.0, "time horizon of each path"),
    "paths": (int, None, "Monte Carlo sample count"),
    "seed": (int, 0, "master seed"),
    "x0": (float, 0.0, "initial position"),
    "v0": (float, 0.0, "initial velocity"),
    "out": (str, None, "output CSV path"),
    "config": (str, None, "flat JSON config file; flags override"),
    "workers": (int, 1, "thread count for ensembles"),
    "event-budget": (float, None, "cap on expected sampled events per eps"),
    "grid-points": (int, 201, "number of time grid points"),
    "quad-tol": (float, 1e-8, "absolute quadrature tolerance"),
    "vmin": (float, 1e-3, "smallest velocity on the curve grid"),
    "vmax": (float, 2.0, "largest velocity on the curve grid"),
    "npoints": (int, 200, "number of curve points"),
    "r-level": (float, 1.0, "running-sup exceedance level"),
    "delta": (float, 0.1, "fixed-time exceedance level"),
}

_COMMANDS = {
    "simulate": ["alpha", "beta", "c", "ell", "eps", "t", "horizon", "seed",
                 "x0", "v0", "out", "config", "grid-points"],
    "limit": ["alpha", "beta", "c", "ell", "eps", "t", "horizon", "seed",
              "x0", "v0", "out", "config", "grid-points"],
    "residual": ["alpha", "beta", "c", "ell", "eps", "t", "horizon", "paths",
                 "seed", "x0", "v0", "out", "config", "workers", "event-budget"],
    "regime": ["alpha", "beta", "config"],
    "hfunc": ["alpha", "beta", "out", "config", "quad-tol", "vmin", "vmax",
              "npoints"],
    "tailtest": ["alpha", "beta", "c", "ell", "eps", "t", "horizon", "paths",
                 "seed", "x0", "v0", "out", "config", "workers", "event-budget"],
    "dissipation": ["alpha", "beta", "c", "ell", "eps", "t", "horizon", "paths",
                    "seed", "x0", "v0", "out", "config", "workers",
                    "event-budget", "r-level", "delta"],
}

_DEFAULT_PATHS = {"residual": 200, "tailtest": 10000, "dissipation": 2000}
_DEFAULT_OUT = {
    "simulate": "simulate.csv",
    "limit": "limit.csv",
    "residual": "residual.csv",
    "hfunc": "hfunc.csv",
    "tailtest": "tailtest.csv",
    "dissipation": "dissipation.csv",
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the CLI contract wants a
    # single-line diagnostic and status 1 for any validation problem
    def error(self, message):
        raise ValueError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="levylangevin",
        description="simulate and verify the small-noise jump-driven Langevin system",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for command, names in _COMMANDS.items():
        p = sub.add_parser(command)
        for name in names:
            typ, _, help_text = _COMMON[name]
            p.add_argument(f"--{name}", type=typ, default=None, help=help_text)
    return parser


def _resolve(args: argparse.Namespace, command: str) -> dict:
    """Merge explicit flags over config-file values over defaults."""
    file_values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_values = json.load(fh)
        if not isinstance(file_values, dict):
            raise ValueError("config file must contain a flat JSON object")
    resolved = {}
    for name in _COMMANDS[command]:
        typ, default, _ = _COMMON[name]
        if name == "paths" and default is None:
            default = _DEFAULT_PATHS.get(command)
        key = name.replace("-", "_")
        cli_value = getattr(args, key)
        if cli_value is not None:
            resolved[key] = cli_value
        elif key in file_values and file_values[key] is not None:
            resolved[key] = typ(file_values[key])
        else:
            resolved[key] = default
    resolved.pop("config", None)
    return resolved


def _eps_list(value: str) -> list[float]:
    out = [float(tok) for tok in str(value).split(",") if tok.strip()]
    if not out:
        raise ValueError("--eps must contain at least one value")
    return out


def _family(opt: dict) -> TruncatedStableFamily:
    return TruncatedStableFamily(alpha=opt["alpha"], c=opt["c"], ell=opt["ell"])


# ---------------------------------------------------------------------------
# output helpers


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path: str, header, rows) -> int:
    n = 0
    with open(path, "w", newline="\n") as fh:
        fh.write(SCHEMA_LINE + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
            n += 1
    return n


def emit_plot_data(curve, path: str, header=("x", "y")) -> int:
    """Write one (x, y) curve as a two-column CSV (header-only if empty)."""
    x, y = curve
    return write_csv(path, header, zip(x, y))


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(command: str, opt: dict, outputs: list[tuple[str, int]],
                   wall: float, n_paths: int) -> str:
    """Sidecar describing the run; written next to the first output file."""
    canonical = json.dumps({"command": command, "config": opt}, sort_keys=True)
    manifest = {
        "schema": 1,
        "command": command,
        "config": opt,
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest(),
        "master_seed": opt.get("seed"),
        "outputs": [
            {"path": path, "rows": rows, "sha256": _sha256_file(path)}
            for path, rows in outputs
        ],
        "wall_seconds": wall,
        "path_count": n_paths,
    }
    sidecar = outputs[0][0] + ".manifest.json"
    with open(sidecar, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return sidecar


# ---------------------------------------------------------------------------
# subcommands


def _single_eps(opt: dict) -> float:
    values = _eps_list(opt["eps"])
    if len(values) != 1:
        raise ValueError("this command takes a single --eps value")
    return values[0]


def _time_grid(opt: dict, horizon: float) -> np.ndarray:
    t_end = opt["t"] if opt["t"] is not None else horizon
    if not (0.0 < t_end <= horizon):
        raise ValueError("--t must lie in (0, horizon]")
    return np.linspace(0.0, t_end, opt["grid_points"])


def _cmd_simulate(opt: dict) -> int:
    start = time.perf_counter()
    eps = _single_eps(opt)
    model = _family(opt).model_for(eps)
    params = SystemParams(opt["beta"], eps, opt["x0"], opt["v0"])
    noise = sample_jump_events(model, opt["horizon"], opt["seed"])
    grid = _time_grid(opt, opt["horizon"])
    traj = solve_exact(noise, params, grid)
    rows = write_csv(opt["out"], ("t", "X", "V"), zip(traj.t_grid, traj.X, traj.V))
    write_manifest("simulate", opt, [(opt["out"], rows)], time.perf_counter() - start, 1)
    return 0


def _cmd_limit(opt: dict) -> int:
    start = time.perf_counter()
    eps = _single_eps(opt)
    model = _family(opt).model_for(eps)
    noise = sample_jump_events(model, opt["horizon"], opt["seed"])
    grid = _time_grid(opt, opt["horizon"])
    beta = opt["beta"]
    if beta < 2.0:
        values = limit_filtered_sum(noise, opt["x0"], opt["v0"], beta, grid).values
    elif beta == 2.0:
        values = limit_log_signs(noise, opt["v0"], grid).values
    else:
        values = np.array([limit_power_gaps(noise, opt["v0"], beta, t) for t in grid])
    rows = write_csv(opt["out"], ("t", "X_limit"), zip(grid, values))
    write_manifest("limit", opt, [(opt["out"], rows)], time.perf_counter() - start, 1)
    return 0


def _experiment(opt: dict, eps_grid: list[float]) -> ExperimentConfig:
    t_end = opt["t"] if opt["t"] is not None else opt["horizon"]
    return ExperimentConfig(
        family=_family(opt),
        params=SystemParams(opt["beta"], 1.0, opt["x0"], opt["v0"]),
        eps_grid=tuple(eps_grid),
        horizon=opt["horizon"],
        eval_times=(t_end,),
        n_paths=opt["paths"],
        master_seed=opt["seed"],
        event_budget=opt.get("event_budget"),
    )


def _cmd_residual(opt: dict) -> int:
    start = time.perf_counter()
    config = _experiment(opt, _eps_list(opt["eps"]))
    results = residual_ensemble(config, workers=opt["workers"])
    table = [
        (eps, float(np.median(np.abs(r))), float(np.quantile(np.abs(r), 0.9)))
        for eps, r in results
    ]
    rows = write_csv(
        opt["out"], ("eps", "abs_residual_median", "abs_residual_p90"), table
    )
    n_run = min(r.size for _, r in results)
    write_manifest("residual", opt, [(opt["out"], rows)],
                   time.perf_counter() - start, n_run)
    if n_run < config.n_paths:
        print(
            f"event budget truncated the run: {n_run} of {config.n_paths} paths",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_regime(opt: dict) -> int:
    report = classify_regime(opt["alpha"], opt["beta"])
    parts = [report.limit_kind.value, report.regularity.value]
    if report.limit_kind is LimitKind.NON_GAUSSIAN_FILTER and opt["alpha"] > 0:
        parts.append(f"alpha_X={opt['alpha'] / (2.0 - opt['beta']):g}")
    print(" ".join(parts))
    return 0


def _cmd_hfunc(opt: dict) -> int:
    start = time.perf_counter()
    measure = DampedStable(alpha=opt["alpha"])
    if not (0.0 < opt["vmin"] < opt["vmax"]):
        raise ValueError("curve grid requires 0 < vmin < vmax")
    grid = np.geomspace(opt["vmin"], opt["vmax"], opt["npoints"])
    values = [
        response_second_difference(v, opt["beta"], measure, opt["quad_tol"])
        for v in grid
    ]
    rows = emit_plot_data((grid, values), opt["out"], header=("v", "H"))
    write_manifest("hfunc", opt, [(opt["out"], rows)], time.perf_counter() - start, 0)
    return 0


def _cmd_tailtest(opt: dict) -> int:
    start = time.perf_counter()
    eps = _single_eps(opt)
    config = _experiment(opt, [eps])
    sample = monte_carlo_ensemble(config, workers=opt["workers"])[0]
    # independent noise draws for the limit-law sample
    limit_config = ExperimentConfig(
        family=config.family,
        params=config.params,
        eps_grid=config.eps_grid,
        horizon=config.horizon,
        eval_times=config.eval_times,
        n_paths=config.n_paths,
        master_seed=config.master_seed + 1_000_003,
        event_budget=config.event_budget,
    )
    _, limit_values = limit_ensemble(limit_config, workers=opt["workers"])[0]
    n = sample.values.size
    k = hill_k(n)
    hill = hill_tail_index(sample.values, k)
    ks = ks_two_sample(sample.values, limit_values)
    in_regime = opt["alpha"] + 2.0 * opt["beta"] < 4.0
    target = opt["alpha"] / (2.0 - opt["beta"]) if in_regime else math.nan
    table = [(eps, n, k, hill, target, ks,
              ks_critical_value(n, limit_values.size))]
    rows = write_csv(
        opt["out"],
        ("eps", "n_paths", "hill_k", "hill_index", "alpha_x_target",
         "ks_stat", "ks_critical_1pct"),
        table,
    )
    write_manifest("tailtest", opt, [(opt["out"], rows)],
                   time.perf_counter() - start, n)
    if sample.truncated or limit_values.size < config.n_paths:
        print(
            f"event budget truncated the run: {n} of {config.n_paths} paths",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_dissipation(opt: dict) -> int:
    start = time.perf_counter()
    config = _experiment(opt, _eps_list(opt["eps"]))
    probe = dissipation_probe(config, opt["r_level"], opt["delta"],
                              workers=opt["workers"])
    table = [
        (r.eps, r.p_sup_exceed, r.se_sup, r.p_abs_exceed, r.se_abs, r.n_paths)
        for r in probe
    ]
    rows = write_csv(
        opt["out"],
        ("eps", "p_sup_exceed", "se_sup", "p_abs_exceed", "se_abs", "n_paths"),
        table,
    )
    n_run = min(r.n_paths for r in probe)
    write_manifest("dissipation", opt, [(opt["out"], rows)],
                   time.perf_counter() - start, n_run)
    if n_run < config.n_paths:
        print(
            f"event budget truncated the run: {n_run} of {config.n_paths} paths",
            file=sys.stderr,
        )
        return 2
    return 0


_RUNNERS = {
    "simulate": _cmd_simulate,
    "limit": _cmd_limit,
    "residual": _cmd_residual,
    "regime": _cmd_regime,
    "hfunc": _cmd_hfunc,
    "tailtest": _cmd_tailtest,
    "dissipation": _cmd_dissipation,
}


def run_command(argv) -> int:
    """Parse and run one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        opt = _resolve(args, args.command)
        if args.command in _DEFAULT_OUT and opt.get("out") is None:
            opt["out"] = _DEFAULT_OUT[args.command]
        return _RUNNERS[args.command](opt)
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RegimeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
