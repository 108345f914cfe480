"""Batch front end: ``sweep``, ``boundary``, ``crossover``, ``optimize``, ``analytic``.

Exit codes: 0 success, 1 internal or I/O failure, 2 user or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import __version__
from .channel import ChannelConfig, ChannelRealization, sample_channel
from .combining import CombinerKind, P2ConvergenceError, P2Problem, solve_p2, weights_mrc
from .config import ConfigError, load, parse_power, reference_config
from .simulation import (
    CrossoverQuery,
    Mode,
    NoSignChangeError,
    analytic_mean_powers,
    find_crossover,
    find_no_harvesting_boundary,
    run_sweep,
)

SWEEP_COLUMNS = [
    "technique", "K", "P_t_W", "mean_harvested_W", "mean_net_W", "ci95_W",
    "analytic_harvested_W", "analytic_net_W", "trials", "seed",
]
ROOT_COLUMNS = ["query", "technique_a", "technique_b", "K", "mode", "P_t_root_W", "residual_W"]
ANALYTIC_COLUMNS = ["technique", "K", "P_t_W", "analytic_harvested_W", "analytic_net_W"]


class UsageError(Exception):
    pass


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None, stdout) -> None:
    if out is None:
        stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _power_arg(text: str) -> float:
    try:
        return parse_power(text, allow_bare=True)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _complex_list(text: str) -> np.ndarray:
    try:
        return np.array([complex(v.strip().replace(" ", "")) for v in text.split(",") if v.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse channel list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="experiment file (default: bundled reference experiment)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--out", metavar="PATH", help="write CSV output here instead of stdout")
    common.add_argument("--mode", choices=["analytic", "mc"], default="analytic")
    common.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo trials")
    common.add_argument("--dump-config", action="store_true", help="print the effective configuration and exit")

    parser = argparse.ArgumentParser(prog="rfeh-diversity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="Monte Carlo sweep over transmit power")
    p.add_argument("--format", choices=["csv", "pretty"])

    bracket_help = "transmit power bracket, e.g. 0.1 3 or 100mW 3W"
    p = sub.add_parser("boundary", parents=[common], help="no-harvesting boundary of one technique")
    p.add_argument("technique")
    p.add_argument("--antennas", "-K", type=int)
    p.add_argument("--bracket", nargs=2, type=_power_arg, metavar=("LOW", "HIGH"), help=bracket_help)

    p = sub.add_parser("crossover", parents=[common], help="transmit power where two techniques tie")
    p.add_argument("technique_a")
    p.add_argument("technique_b")
    p.add_argument("--antennas", "-K", type=int)
    p.add_argument("--bracket", nargs=2, type=_power_arg, metavar=("LOW", "HIGH"), help=bracket_help)

    p = sub.add_parser("optimize", parents=[common], help="solve the budget-constrained weight problem")
    p.add_argument("--h", type=_complex_list, help="channel coefficients, e.g. '3,4j'")
    p.add_argument("--antennas", "-K", type=int, help="sample a Rayleigh channel with K branches instead")
    p.add_argument("--trial", type=int, default=0, help="trial index of the sampled channel")
    p.add_argument("--efficiency", type=float, default=1.0)
    p.add_argument("--transmit-power", type=_power_arg, default=1.0)
    p.add_argument("--beta", type=_power_arg, default=0.0)
    p.add_argument("--fixed-power", type=_power_arg, default=0.0)
    p.add_argument("--budget", type=float, default=1.0)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--max-iterations", type=int, default=100_000)

    sub.add_parser("analytic", parents=[common], help="closed-form mean curves as CSV")
    return parser


def _run_config(args):
    cfg = load(args.config) if args.config else reference_config()
    try:
        return cfg.with_overrides(seed=args.seed, trials=args.trials, output=args.out, format=getattr(args, "format", None))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _antennas(args, cfg) -> int:
    return args.antennas if args.antennas is not None else cfg.antennas[0]


def cmd_sweep(args, cfg, stdout, stderr) -> int:
    print(f"seed={cfg.seed} digest={cfg.digest()} version={__version__} trials={cfg.trials}", file=stderr)
    results = [run_sweep(cfg.experiment(k), workers=args.workers) for k in cfg.antennas]
    rows = [r for res in results for r in res.rows]
    if cfg.format == "pretty":
        lines = [f"{'tech':>5} {'K':>3} {'P_t [W]':>8} {'harvested [mW]':>15} {'net [mW]':>10} {'+/-95% [mW]':>12} {'analytic net':>13}"]
        for r in rows:
            lines.append(
                f"{r.technique.value:>5} {r.num_antennas:>3} {r.transmit_power:>8.3f} {1e3 * r.mean_harvested:>15.5f} "
                f"{1e3 * r.mean_net:>10.5f} {1e3 * r.ci_halfwidth_95:>12.5f} {1e3 * r.analytic_mean_net:>13.5f}"
            )
        _emit("\n".join(lines) + "\n", cfg.output, stdout)
        return 0
    body = [
        [r.technique.value, r.num_antennas, _num(r.transmit_power), _num(r.mean_harvested), _num(r.mean_net),
         _num(r.ci_halfwidth_95), _num(r.analytic_mean_harvested), _num(r.analytic_mean_net), r.trials_used, r.seed]
        for r in rows
    ]
    _emit(_csv_text(SWEEP_COLUMNS, body), cfg.output, stdout)
    return 0


def _root_report(query, a, b, k, result, cfg, stdout):
    print(f"P_t_root = {result.root:#.6g} W  (bracket [{result.lower:#.6g}, {result.upper:#.6g}] W, mode {result.mode.value})", file=stdout)
    row = [query, a.value, "" if b is None else b.value, k, result.mode.value, _num(result.root), _num(result.residual)]
    _emit(_csv_text(ROOT_COLUMNS, [row]), cfg.output, stdout)


def cmd_boundary(args, cfg, stdout, stderr) -> int:
    kind = CombinerKind.parse(args.technique)
    k = _antennas(args, cfg)
    spec = cfg.experiment(k)
    res = find_no_harvesting_boundary(kind, spec, Mode.parse(args.mode), args.bracket, workers=args.workers)
    _root_report("boundary", kind, None, k, res, cfg, stdout)
    return 0


def cmd_crossover(args, cfg, stdout, stderr) -> int:
    k = _antennas(args, cfg)
    spec = cfg.experiment(k)
    bracket = args.bracket if args.bracket is not None else (spec.transmit_powers[0], spec.transmit_powers[-1])
    query = CrossoverQuery(args.technique_a, args.technique_b, bracket, args.mode)
    try:
        res = find_crossover(query, spec, workers=args.workers)
    except NoSignChangeError:
        raise NoSignChangeError(
            f"no zero crossing in bracket: one of {query.technique_a.value}/{query.technique_b.value} "
            f"dominates on [{bracket[0]:g}, {bracket[1]:g}] W"
        ) from None
    _root_report("crossover", query.technique_a, query.technique_b, k, res, cfg, stdout)
    return 0


def cmd_optimize(args, cfg, stdout, stderr) -> int:
    if args.h is not None:
        channel = ChannelRealization(args.h)
    elif args.antennas is not None:
        channel = sample_channel(ChannelConfig(args.antennas, cfg.path_loss), cfg.seed, args.trial)
    else:
        raise UsageError("optimize needs --h or --antennas")
    problem = P2Problem(channel, args.efficiency, args.transmit_power, args.beta, args.fixed_power, args.budget)
    sol = solve_p2(problem, args.tolerance, args.max_iterations)
    mrc = np.sqrt(args.budget) * weights_mrc(channel).weights
    mrc_obj = problem.objective(mrc)
    analytic = problem.analytic_optimum()
    fmt = lambda w: "[" + ", ".join(f"{z.real:+.8g}{z.imag:+.8g}j" for z in w) + "]"  # noqa: E731
    print(f"channel            {fmt(channel.coefficients)}", file=stdout)
    print(f"optimizer weights  {fmt(sol.weights.weights)}", file=stdout)
    print(f"|w| optimizer      {np.array2string(np.abs(sol.weights.weights), precision=8)}", file=stdout)
    print(f"scaled MRC weights {fmt(mrc)}", file=stdout)
    print(f"P_w optimizer      {sol.weights.power:.10g}", file=stdout)
    print(f"objective (opt)    {sol.objective:.10g} W", file=stdout)
    print(f"objective (MRC)    {mrc_obj:.10g} W", file=stdout)
    print(f"objective (exact)  {analytic:.10g} W", file=stdout)
    print(f"gap to exact       {abs(sol.objective - analytic):.3e} W", file=stdout)
    print(f"iterations         {sol.iterations}", file=stdout)
    return 0


def cmd_analytic(args, cfg, stdout, stderr) -> int:
    body = []
    for k in cfg.antennas:
        for kind in cfg.techniques:
            for pt in cfg.grid:
                h, n = analytic_mean_powers(kind, k, cfg.path_loss, cfg.efficiency, pt, cfg.profiles[kind])
                body.append([kind.value, k, _num(pt), _num(h), _num(n)])
    _emit(_csv_text(ANALYTIC_COLUMNS, body), cfg.output, stdout)
    return 0


COMMANDS = {
    "sweep": cmd_sweep,
    "boundary": cmd_boundary,
    "crossover": cmd_crossover,
    "optimize": cmd_optimize,
    "analytic": cmd_analytic,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _run_config(args)
        if args.dump_config:
            stdout.write(cfg.dump())
            return 0
        return COMMANDS[args.command](args, cfg, stdout, stderr)
    except (ConfigError, NoSignChangeError, UsageError, P2ConvergenceError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
