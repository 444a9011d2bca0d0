"""Command-line entry point.

    vmacsim simulate --scenario partition --k 2 --n 4 --snr-db 10 --seed 7
    vmacsim figure fig3 --trials 200 --seed 42 --out results --plot
    vmacsim optimal-bl --k 25 --n 50 --snr-db 10

Tables go to ``<out>/<name>.csv`` (and ``<name>.svg`` with ``--plot``), or
to stdout when ``--out`` is omitted.  Exit status is 0 on success, 1 on a
usage error and 2 when a numerical routine fails to converge.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .errors import MCVarianceTooHigh, NonConvergence
from .experiments import (
    BL_COLUMNS,
    DEFAULT_LOADS,
    DEFAULT_SNRS,
    DEFAULT_TRIALS,
    ExperimentSpec,
    ResultTable,
    SweepPoint,
    asymptotic_table,
    bl_sweep,
    fig2_convergence,
    fig3_bl_sweep,
    fig4_optimal_bl,
    fig5_fig6_load_sweep,
    load_to_k,
    simulate_table,
)
from .asymptotic import AsymptoticConfig, omega_inf, optimal_bl, solve_beta_star
from .report import Series, render_csv, write_csv, write_svg_plot
from .simulator import SCENARIOS

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")

# flags that only steer where or how fast results are produced
_NON_CANONICAL = {"out", "config", "plot", "workers", "command", "figure"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2^64), got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--scenario", choices=SCENARIOS)
    common.add_argument("--k", type=_positive_int, help="number of transmitters")
    common.add_argument("--n", type=_positive_int, help="number of channels")
    common.add_argument("--snr-db", type=float, help="10 log10(p_max / noise variance)")
    common.add_argument("--bl", type=_positive_int, help="bandwidth cap L (omit for none)")
    common.add_argument("--trials", type=_positive_int)
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--out", help="output directory (default: CSV on stdout)")
    common.add_argument("--config", help="file of 'flag = value' lines; command-line flags win")
    common.add_argument("--plot", action="store_true", help="write an SVG plot next to the CSV")
    common.add_argument("--mc-samples", type=_positive_int)
    common.add_argument("--quad-tol", type=_positive_float)
    common.add_argument("--budget", choices=("accessible", "total"), default="accessible",
                        help="per-transmitter power budget: p_max per accessible channel or per channel")
    common.add_argument("--loads", type=_float_list, help="comma-separated K/N values")
    common.add_argument("--snr-list", type=_float_list, help="comma-separated SNRs in dB")
    common.add_argument("--n-list", type=_int_list, help="comma-separated channel counts")
    common.add_argument("--trial", type=int, default=0, help="trial index for simulate")
    common.add_argument("--workers", type=_positive_int, default=1)

    parser = _Parser(prog="vmacsim", description="Water-filling over a vector multiple access channel "
                                                  "with optional bandwidth limiting.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("simulate", parents=[common], help="one seeded trial, per-transmitter outcome")
    sub.add_parser("asymptotic", parents=[common], help="large-system water levels and rates")
    sub.add_parser("sweep", parents=[common], help="Monte Carlo NSE across bandwidth caps")
    fig = sub.add_parser("figure", parents=[common], help="replicate one of the figure studies")
    fig.add_argument("figure", choices=FIGURES)
    sub.add_parser("optimal-bl", parents=[common], help="analytic optimal cap for the partition regime")
    return parser


# -- config file ----------------------------------------------------------------

def read_config(path: str) -> list[str]:
    """Argument tokens for a file of ``key = value`` lines.

    Keys are flag names with or without leading dashes (``snr_db`` and
    ``snr-db`` both work).  ``plot = true`` sets the switch.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror or exc}") from None
    tokens = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: {path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.lstrip("-").replace("_", "-")
        value = value.strip("'\"")
        if flag in ("--config", "--out"):
            raise UsageError(f"--config: {path}:{lineno}: {flag} is only accepted on the command line")
        if flag == "--plot":
            if value.lower() in ("true", "yes", "1"):
                tokens.append(flag)
            elif value.lower() not in ("false", "no", "0"):
                raise UsageError(f"--config: {path}:{lineno}: plot must be true or false")
            continue
        tokens += [flag, value]
    return tokens


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        extra = read_config(args.config)
        at = argv.index(args.command) + 1
        args = parser.parse_args([*argv[:at], *extra, *argv[at:]])
    return args


# -- dispatch -------------------------------------------------------------------

def _asym(args) -> dict:
    d = {}
    if args.mc_samples is not None:
        d["mc_samples"] = args.mc_samples
    if args.quad_tol is not None:
        d["quad_rel_tol"] = args.quad_tol
    return d


def _pick(value, default):
    return default if value is None else value


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"{args.command}: --{name.replace('_', '-')} is required")


def canonical_command(args) -> str:
    parts = ["vmacsim", args.command]
    if args.command == "figure":
        parts.append(args.figure)
    for key in sorted(vars(args)):
        value = getattr(args, key)
        if key in _NON_CANONICAL or value is None:
            continue
        if key == "trial" and args.command != "simulate":
            continue
        if key == "seed" and args.command in ("asymptotic", "optimal-bl"):
            continue
        if isinstance(value, tuple):
            value = ",".join(format(v, "g") if isinstance(v, float) else str(v) for v in value)
        parts += [f"--{key.replace('_', '-')}", str(value)]
    return " ".join(parts)


def _simulate(args):
    _require(args, "scenario", "k", "n", "snr_db")
    point = SweepPoint(args.scenario, args.k, args.n, args.snr_db, args.bl, args.budget)
    table = simulate_table(point, args.seed, args.trial)
    return "simulate", table, [Series("k", "rate_per_channel_k", label="rate per channel"),
                               Series("k", "phi_k", label="spectral efficiency")]


def _asymptotic(args):
    _require(args, "snr_db")
    table = asymptotic_table(args.snr_db, _pick(args.k, 5), args.n, _asym(args))
    return "asymptotic", table, [Series("k", "value", where={"statistic": "sharing_rate_per_channel"},
                                        label="sharing rate per channel")]


def _sweep(args):
    _require(args, "n", "snr_db")
    if args.k is None and args.loads is None:
        raise UsageError("sweep: give --k or --loads")
    ks = [load_to_k(x, args.n) for x in args.loads] if args.loads else [args.k]
    scenarios = (args.scenario,) if args.scenario else SCENARIOS
    trials = _pick(args.trials, DEFAULT_TRIALS)
    caps = None if args.bl is None else (args.bl,)
    spec = ExperimentSpec("sweep", scenarios, args.n, (args.snr_db,), tuple(k / args.n for k in ks),
                          caps, trials=trials, master_seed=args.seed, budget=args.budget)
    table = ResultTable(BL_COLUMNS, [], spec.provenance())
    for scenario in scenarios:
        for k in ks:
            table.rows += bl_sweep((scenario,), k, args.n, args.snr_db, trials, args.seed, caps,
                                   args.workers, args.budget)
    return "sweep", table, [Series("L", "mean", ("scenario", "K"), {"statistic": "nse"}, "NSE")]


def _figure(args):
    trials = _pick(args.trials, DEFAULT_TRIALS)
    name = args.figure
    if name == "fig2":
        table = fig2_convergence(_pick(args.snr_db, 20.0), _pick(args.k, 2), _pick(args.n_list, (10, 25, 50)),
                                 trials, args.seed, args.workers, _asym(args))
        series = [Series("N", "sim_mean", ("k",), label="simulated"),
                  Series("N", "asymptotic", ("k",), label="large-system")]
    elif name == "fig3":
        scenarios = (args.scenario,) if args.scenario else SCENARIOS
        table = fig3_bl_sweep(_pick(args.n, 50), _pick(args.snr_db, 10.0), _pick(args.loads, (0.2, 0.5, 0.8)),
                              trials, args.seed, scenarios, args.workers)
        series = [Series("L", "mean", ("scenario", "K"), {"statistic": "nse"}, "NSE")]
    elif name == "fig4":
        table = fig4_optimal_bl(_pick(args.n, 50), _pick(args.snr_db, 10.0), _pick(args.loads, DEFAULT_LOADS),
                                trials, args.seed, args.workers, _asym(args))
        series = [Series("load", "mean", where={"statistic": "empirical_L"}, label="empirical best L"),
                  Series("load", "mean", where={"statistic": "analytic_L"}, label="analytic L")]
    else:
        snrs = args.snr_list or ((args.snr_db,) if args.snr_db is not None else DEFAULT_SNRS)
        scenario = "partition" if name == "fig5" else "sharing"
        table = fig5_fig6_load_sweep(_pick(args.n, 50), snrs, _pick(args.loads, DEFAULT_LOADS), trials,
                                     args.seed, scenario, args.workers, _asym(args))
        series = [Series("load", "mean", ("snr_db",), {"statistic": "nse_bl"}, "with BL"),
                  Series("load", "mean", ("snr_db",), {"statistic": "nse_no_bl"}, "without BL")]
    return name, table, series


def _optimal_bl(args):
    _require(args, "k", "n", "snr_db")
    cfg = AsymptoticConfig.from_snr_db(args.snr_db, args.k, **_asym(args))
    beta = solve_beta_star(cfg.noise_variance, cfg.p_max, rel_tol=cfg.quad_rel_tol, cutoff=cfg.tail_cutoff)
    omega = omega_inf(beta, cfg.noise_variance)
    prov = {"experiment": "optimal-bl", "num_transmitters": args.k, "num_channels": args.n,
            "snr_db": args.snr_db, "version": __version__}
    table = ResultTable(("statistic", "value"), [
        ("L_star", optimal_bl(args.k, args.n, omega)),
        ("omega_inf", omega),
        ("beta_star", beta),
    ], prov)
    return "optimal_bl", table, None


HANDLERS = {
    "simulate": _simulate,
    "asymptotic": _asymptotic,
    "sweep": _sweep,
    "figure": _figure,
    "optimal-bl": _optimal_bl,
}


def _prepare_out(args) -> Path | None:
    if args.plot and not args.out:
        raise UsageError("--plot: needs --out to know where to write the SVG")
    if args.plot and args.command == "optimal-bl":
        raise UsageError("--plot: optimal-bl produces no plottable table")
    if not args.out:
        return None
    out = Path(args.out)
    if out.exists() and not out.is_dir():
        raise UsageError(f"--out: {out} exists and is not a directory")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"--out: cannot create {out}: {exc.strerror or exc}") from None
    if not os.access(out, os.W_OK):
        raise UsageError(f"--out: {out} is not writable")
    return out


def run(args) -> int:
    out = _prepare_out(args)
    try:
        name, table, series = HANDLERS[args.command](args)
    except ValueError as exc:
        raise UsageError(f"{args.command}: {exc}") from None
    table.provenance["command"] = canonical_command(args)
    if out is None:
        sys.stdout.write(render_csv(table))
        return 0
    csv_path = write_csv(table, out / f"{name}.csv")
    print(csv_path)
    if args.plot and series:
        print(write_svg_plot(table, series, out / f"{name}.svg", title=name))
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return run(parse_args(argv))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NonConvergence, MCVarianceTooHigh) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
