"""Command-line front end: experiment orchestration from JSON configs.

Subcommands: simulate, solve, sweep-convexity, sweep-snr, verify.
A single config file carries sections model, sim, garbling, cost, solve,
sweep; commands read the sections they need.  Artifacts (CSV/JSON, plus
report figures) land in --out-dir and are byte-identical across reruns of
the same config and seed.

Exit codes: 0 ok, 2 config error, 3 simulation error, 4 cost-model error,
5 verification failure.  Every error path prints one "ERR: ..." line.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .costs import CostModelError, cost_from_json_dict
from .dynamics import (
    SimConfig,
    SimulationError,
    residual_curve,
    simulate_exit,
    stats_from_outcomes,
    write_outcomes_csv,
)
from .model import GarblingPolicy, InvalidModelError, ModelParams
from .solver import solve_sender, sweep_convexity, sweep_snr
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_COST_MODEL = 4
EXIT_VERIFY = 5

_RESIDUAL_GRID_POINTS = 50


class ConfigError(ValueError):
    """Config file missing, malformed, or failing validation."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep every CLI error machine-parseable
        print(f"ERR: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _require(cfg: dict, section: str) -> dict:
    if section not in cfg:
        raise ConfigError(f"config missing required section {section!r}")
    if not isinstance(cfg[section], dict):
        raise ConfigError(f"config section {section!r} must be an object")
    return cfg[section]


def _model(cfg: dict) -> ModelParams:
    return ModelParams.from_json_dict(_require(cfg, "model"))


def _sim(cfg: dict, seed_override: int | None) -> tuple[SimConfig, float, float]:
    section = dict(_require(cfg, "sim"))
    try:
        lower = float(section.pop("lower"))
        upper = float(section.pop("upper"))
    except KeyError as exc:
        raise ConfigError(f"sim section missing boundary key {exc}") from exc
    sim = SimConfig.from_json_dict(section)
    if seed_override is not None:
        sim = dataclasses.replace(sim, seed=seed_override)
    return sim, lower, upper


def _garbling(cfg: dict) -> GarblingPolicy:
    if "garbling" not in cfg:
        return GarblingPolicy.none()
    return GarblingPolicy.from_json_dict(_require(cfg, "garbling"))


def _solver_options(cfg: dict, seed_override: int | None) -> tuple[int, SimConfig | None]:
    section = cfg.get("solve", {})
    if not isinstance(section, dict):
        raise ConfigError("config section 'solve' must be an object")
    grid_n = int(section.get("grid_n", 48))
    mc_cfg = None
    if "mc" in section:
        mc_cfg = SimConfig.from_json_dict(section["mc"])
        if seed_override is not None:
            mc_cfg = dataclasses.replace(mc_cfg, seed=seed_override)
    return grid_n, mc_cfg


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    params = _model(cfg)
    sim, lower, upper = _sim(cfg, args.seed_override)
    garbling = _garbling(cfg)
    out = _out_dir(args)

    outcomes = simulate_exit(params, lower, upper, garbling, sim, n_workers=args.workers)
    stats = stats_from_outcomes(outcomes, upper)
    grid = np.linspace(0.0, float(np.max(stats.samples)), _RESIDUAL_GRID_POINTS)
    residual = residual_curve(stats, grid)

    write_outcomes_csv(outcomes, out / "paths.csv")
    _write_json(
        {
            "n_paths": sim.n_paths,
            "n_censored": sim.n_paths - len(outcomes),
            "mean_tau": stats.mean,
            "std_err": stats.std_err,
            "upper_hit_fraction": stats.upper_hit_fraction,
            "residual_t": grid.tolist(),
            "residual": residual.tolist(),
        },
        out / "summary.json",
    )
    if not args.no_figures:
        from . import figures

        figures.save_exit_time_report(
            stats.samples,
            [o.terminal_belief for o in outcomes],
            upper,
            grid,
            residual,
            out / "exit_report.png",
        )
    print(f"wrote {out / 'paths.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _load_config(args.config)
    params = _model(cfg)
    cost = cost_from_json_dict(_require(cfg, "cost"))
    grid_n, mc_cfg = _solver_options(cfg, args.seed_override)

    result = solve_sender(cost, params, grid_n=grid_n, cfg=mc_cfg)
    out = _out_dir(args)
    _write_json(result.to_json_dict(), out / "solve_result.json")
    if not args.no_figures:
        from . import figures

        figures.save_objective_trace(
            result.trace, result.lower_star, result.objective, out / "objective_trace.png"
        )
    print(f"wrote {out / 'solve_result.json'}")
    return EXIT_OK


def _write_sweep_csv(rows, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sweep_param,p_star,lower_star,objective,cost_at_opt\n")
        for param, res in rows:
            fh.write(
                f"{param:.17g},{res.p_star:.17g},{res.lower_star:.17g},"
                f"{res.objective:.17g},{res.cost_at_opt:.17g}\n"
            )


def _cmd_sweep(args, kind: str) -> int:
    cfg = _load_config(args.config)
    params = _model(cfg)
    cost = cost_from_json_dict(_require(cfg, "cost"))
    grid_n, mc_cfg = _solver_options(cfg, args.seed_override)
    sweep_section = _require(cfg, "sweep")
    out = _out_dir(args)

    if kind == "convexity":
        if "weights" not in sweep_section:
            raise ConfigError("sweep section needs 'weights' for sweep-convexity")
        rows = sweep_convexity(cost, sweep_section["weights"], params, grid_n=grid_n, cfg=mc_cfg)
        csv_path, fig_path, xlabel, log_x = (
            out / "sweep_convexity.csv", out / "sweep_convexity.png",
            "extra quadratic weight", True,
        )
    else:
        if "kappas" not in sweep_section:
            raise ConfigError("sweep section needs 'kappas' for sweep-snr")
        rows = sweep_snr(cost, sweep_section["kappas"], params, grid_n=grid_n, cfg=mc_cfg)
        csv_path, fig_path, xlabel, log_x = (
            out / "sweep_snr.csv", out / "sweep_snr.png", "signal-to-noise ratio", False,
        )

    _write_sweep_csv(rows, csv_path)
    if not args.no_figures:
        from . import figures

        figures.save_sweep([p for p, _ in rows], [r for _, r in rows], xlabel, fig_path, log_x)
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"ERR: unknown verify suite {args.suite!r}; "
              f"choose from {', '.join(sorted(SUITES))}", file=sys.stderr)
        return EXIT_CONFIG
    results = run_suite(args.suite)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    _write_json(
        {
            "suite": args.suite,
            "passed": not failed,
            "checks": [
                {"name": r.name, "passed": r.passed, "detail": r.detail} for r in results
            ],
        },
        _out_dir(args) / f"verify_{args.suite}.json",
    )
    if failed:
        print(f"ERR: {len(failed)} of {len(results)} checks failed in suite "
              f"{args.suite}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"suite {args.suite}: all {len(results)} checks passed")
    return EXIT_OK


def _add_common(sub: argparse.ArgumentParser, with_workers: bool = False) -> None:
    sub.add_argument("--config", required=True, help="JSON experiment config")
    sub.add_argument("--out-dir", default="out", help="artifact directory (default ./out)")
    sub.add_argument("--seed-override", type=lambda s: int(s, 0), default=None,
                     help="replace the seed from the config")
    sub.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    if with_workers:
        sub.add_argument("--workers", type=int, default=1,
                         help="worker threads (output is identical for any count)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="persuasim",
                     description="Belief-diffusion simulation and optimal-stopping "
                                 "persuasion solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate boundary exits of the belief process")
    _add_common(p_sim, with_workers=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_solve = sub.add_parser("solve", help="solve the sender's give-up-belief problem")
    _add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_swc = sub.add_parser("sweep-convexity", help="re-solve under quadratic cost increments")
    _add_common(p_swc)
    p_swc.set_defaults(func=lambda a: _cmd_sweep(a, "convexity"))

    p_sws = sub.add_parser("sweep-snr", help="re-solve across signal-to-noise ratios")
    _add_common(p_sws)
    p_sws.set_defaults(func=lambda a: _cmd_sweep(a, "snr"))

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument("suite", help="one of: " + ", ".join(sorted(SUITES)))
    p_ver.add_argument("--out-dir", default="out", help="where to write the check report")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidModelError) as exc:
        print(f"ERR: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"ERR: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except CostModelError as exc:
        print(f"ERR: {exc}", file=sys.stderr)
        return EXIT_COST_MODEL


if __name__ == "__main__":
    sys.exit(main())
