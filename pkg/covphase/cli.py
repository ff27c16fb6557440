"""
Command line front end. Every subcommand maps onto one library operation and emits a table,
JSON or CSV, always headed by the fully resolved run configuration.

Exit codes: 0 on success, 2 on invalid arguments, 1 on numerical failure or failed verification.
"""
import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from logging import getLogger

import numpy as np
import pandas as pd

from covphase import energy, finite_opt, io, mathieu, prolate, simulate, uncertainty, verify
from covphase.core import ErrorFunction, IndexSet, PhaseState, risk
from covphase.utils import NumericalError, parse_number_list

logger = getLogger(__name__)

PROGRAM = "covphase"
FORMATS = ("table", "json", "csv")
SIGNIFICANT_DIGITS = 12
FLOAT_FORMAT = f"%.{SIGNIFICANT_DIGITS}g"
SHARED_KEYS = ("format", "output", "config", "seed", "verbose", "jobs", "subcommand", "handler")

DEFAULT_N_VALUES = "1,2,5,10,20,50,100,200"
DEFAULT_T_VALUES = "2,3,4,5,6,7,8"
# Checked after the config file is merged so that it can supply them.
REQUIRED_FLAGS = {"dpss": ("N", "T"), "mathieu-a0": ("q",), "gamma": ("s",), "kappa": ("E",)}


class UsageError(ValueError):
    "Invalid command line."


class CovphaseParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """
    Resolved configuration of one run, echoed at the top of every output.

    Attributes
    ----------
    subcommand : str
        The subcommand name.
    parameters : dict
        Subcommand parameters after merging the config file and flags.
    output_format : str
        "table", "json" or "csv".
    output_path : str | None
        File to write to, stdout if None.
    seed : int | None
        Generator seed.
    """

    subcommand: str
    parameters: dict = field(default_factory=dict)
    output_format: str = "table"
    output_path: str | None = None
    seed: int | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        parameters = {key: value for key, value in vars(args).items() if key not in SHARED_KEYS}
        return cls(args.subcommand, parameters, args.format, args.output, args.seed)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Output:
    "Scalar summary plus an optional table."

    summary: dict = field(default_factory=dict)
    table: pd.DataFrame | None = None
    exit_code: int = 0
    lines: list[str] | None = None  # Replaces the table in human-readable output.


def _round(value):
    # Machine formats carry 12 significant digits; non-finite floats become null.
    if isinstance(value, dict):
        return {key: _round(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            return None
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    return value


def _format_scalar(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def render(config: RunConfig, output: Output) -> str:
    """
    Render an output in the configured format.

    Parameters
    ----------
    config : RunConfig
        Run configuration, echoed in the header.
    output : Output
        Summary and table.

    Returns
    -------
    text : str
        LF-terminated text.
    """
    config_line = json.dumps(_round(config.to_dict()))
    if config.output_format == "json":
        result = dict(_round(output.summary))
        if output.table is not None:
            result["table"] = _round(output.table.to_dict(orient="records"))
        return json.dumps({"config": _round(config.to_dict()), "result": result}, indent=2) + "\n"
    if config.output_format == "csv":
        lines = [f"# config: {config_line}"]
        if output.table is None:
            body = pd.DataFrame([output.summary])
        else:
            lines += [f"# {key}={_format_scalar(value)}" for key, value in output.summary.items()]
            body = output.table
        return "\n".join(lines) + "\n" + body.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    lines = [f"# config: {config_line}"]
    lines += [f"{key}: {_format_scalar(value)}" for key, value in output.summary.items()]
    if output.lines is not None:
        lines += output.lines
    elif output.table is not None:
        lines.append(output.table.to_string(index=False, float_format=lambda x: f"{x:.{SIGNIFICANT_DIGITS}g}"))
    return "\n".join(lines) + "\n"


def _error_function(args: argparse.Namespace) -> ErrorFunction:
    if args.loss == "sin":
        return ErrorFunction.sin_loss()
    if args.loss == "interval":
        if args.T is None or args.N is None:
            raise UsageError("--loss interval needs --T and --N.")
        return ErrorFunction.interval_loss(args.T, args.N)
    if args.coeffs is None:
        raise UsageError("--loss custom needs --coeffs.")
    return ErrorFunction.custom(parse_number_list(args.coeffs))


def _coefficient_table(state: PhaseState) -> pd.DataFrame:
    return pd.DataFrame({"index": state.indices, "re": state.coeffs.real, "im": state.coeffs.imag})


def _index_set(args: argparse.Namespace) -> IndexSet:
    if args.n is not None:
        if args.lo is not None or args.hi is not None:
            raise UsageError("Give either --n or --lo/--hi, not both.")
        return IndexSet(0, args.n)
    if args.lo is None or args.hi is None:
        raise UsageError("Give --n or both --lo and --hi.")
    return IndexSet(args.lo, args.hi)


def run_finite_opt(args: argparse.Namespace) -> Output:
    index_set = _index_set(args)
    err = _error_function(args)
    optimum = finite_opt.min_risk_state(index_set, err)
    summary = {
        "lo": index_set.lo,
        "hi": index_set.hi,
        "size": len(index_set),
        "loss": err.kind,
        "risk": optimum.risk,
        "eigen_residual": optimum.eigen_residual,
        "gap": optimum.gap,
    }
    if err.kind == "sin":
        summary["closed_form"] = finite_opt.tridiagonal_min_risk(len(index_set) - 1)
        summary["quoted_closed_form"] = finite_opt.quoted_min_risk(len(index_set) - 1)
    if args.save_state:
        io.save_state(args.save_state, optimum.state)
    return Output(summary, _coefficient_table(optimum.state))


def run_heisenberg(args: argparse.Namespace) -> Output:
    n_values = [int(n) for n in parse_number_list(args.n_values)]
    table = finite_opt.heisenberg_table(n_values, n_jobs=args.jobs)
    return Output({"limit": np.pi**2 / 2}, table)


def run_prolate(args: argparse.Namespace) -> Output:
    T_values = parse_number_list(args.T_values)
    return Output({"quad_order": args.quad_order}, prolate.prolate_curve(T_values, args.quad_order, n_jobs=args.jobs))


def run_dpss(args: argparse.Namespace) -> Output:
    state = prolate.dpss_state(args.N, args.T)
    _, ratio = prolate.dpss_reference(args.N, args.T)
    summary = {
        "N": args.N,
        "T": args.T,
        "success_probability": prolate.interval_success_prob(state, args.T, args.N),
        "multitaper_ratio": ratio,
        "lambda_T": prolate.prolate_spectrum(args.T, refine=False).top_eigenvalue,
    }
    return Output(summary, _coefficient_table(state))


def run_mathieu_a0(args: argparse.Namespace) -> Output:
    return Output(table=mathieu.a0_table(parse_number_list(args.q), n_jobs=args.jobs))


def run_gamma(args: argparse.Namespace) -> Output:
    s_values = parse_number_list(args.s)
    table = pd.DataFrame(
        {
            "s": s_values,
            "gamma": [energy.gamma(s) for s in s_values],
            "gamma_variational": [energy.gamma_variational(s) for s in s_values],
            "asymptote": [energy.gamma_asymptotic(s) for s in s_values],
        }
    )
    return Output(table=table)


def run_kappa(args: argparse.Namespace) -> Output:
    E_values = parse_number_list(args.E)
    table = energy.kappa_curve(E_values, n_jobs=args.jobs)
    if args.primal:
        table["kappa_primal"] = [energy.kappa_primal(E) for E in E_values]
    return Output(table=table)


def energy_grid(emin: float, emax: float, points: int, spacing: str) -> np.ndarray:
    """
    Grid of energy bounds for sweeps.

    Parameters
    ----------
    emin : float
        Smallest value, > 0.
    emax : float
        Largest value, >= emin.
    points : int
        Number of points, >= 1.
    spacing : str
        "log" (geometric) or "linear".

    Returns
    -------
    grid : np.ndarray
    """
    if not 0 < emin <= emax:
        raise UsageError(f"Need 0 < emin <= emax, got emin={emin}, emax={emax}.")
    if points < 1:
        raise UsageError(f"--points must be at least 1, got {points}.")
    if spacing == "log":
        return np.geomspace(emin, emax, points)
    return np.linspace(emin, emax, points)


def run_tradeoff(args: argparse.Namespace) -> Output:
    grid = energy_grid(args.emin, args.emax, args.points, args.spacing)
    return Output(table=uncertainty.tradeoff_curve(grid, n_jobs=args.jobs))


def run_simulate(args: argparse.Namespace) -> Output:
    if args.state_file:
        state = io.load_state(args.state_file)
    else:
        state = finite_opt.sine_window_state(IndexSet(0, args.n))
    err = _error_function(args)
    seed = 0 if args.seed is None else args.seed
    run = simulate.sample_estimates(state, args.theta, args.samples, seed)
    mean, stderr = simulate.empirical_risk(run, err)
    if args.save_run:
        io.save_sample_run(args.save_run, run)
    summary = {
        "seed": seed,
        "theta_true": args.theta,
        "n_samples": run.n_samples,
        "loss": err.kind,
        "empirical_risk": mean,
        "stderr": stderr,
        "analytic_risk": risk(state, err),
    }
    return Output(summary)


def run_verify(args: argparse.Namespace) -> Output:
    tolerances = verify.parse_tolerances(args.tolerance)
    results = verify.run_checks(args.level, tolerances)
    failures = sum(result.status == "FAIL" for result in results)
    table = pd.DataFrame([result.as_row() for result in results])
    lines = [
        f"{result.status} {result.name}: {result.message} (tol {result.tolerance:g}, {result.seconds:.2f}s)"
        for result in results
    ]
    summary = {"level": args.level, "checks": len(results), "failures": failures}
    return Output(summary, table, exit_code=1 if failures else 0, lines=lines)


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=FORMATS, default="table", help="Output format.")
    parser.add_argument("--output", default=None, help="Write to this file instead of stdout.")
    parser.add_argument("--config", default=None, help="File of key=value lines; flags take precedence.")
    parser.add_argument("--seed", type=int, default=None, help="Generator seed.")
    parser.add_argument("--jobs", type=int, default=1, help="joblib workers for sweeps.")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level.")


def _add_loss(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--loss", choices=("sin", "interval", "custom"), default="sin")
    parser.add_argument("--T", type=float, default=None, help="Interval window numerator.")
    parser.add_argument("--N", type=int, default=None, help="Interval window denominator.")
    parser.add_argument("--coeffs", default=None, help="Comma separated cosine coefficients r_0, r_1, ...")


def build_parser() -> tuple[CovphaseParser, dict[str, CovphaseParser]]:
    parser = CovphaseParser(prog=PROGRAM, description="Optimal states and error bounds for U(1) phase estimation.")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    commands = {}

    sub = subparsers.add_parser("finite-opt", help="Minimum-risk state on a finite index set.")
    sub.add_argument("--n", type=int, default=None, help="Index set {0, ..., n}.")
    sub.add_argument("--lo", type=int, default=None)
    sub.add_argument("--hi", type=int, default=None)
    _add_loss(sub)
    sub.add_argument("--save-state", default=None, help="Save the optimal state as JSON.")
    sub.set_defaults(handler=run_finite_opt)
    commands["finite-opt"] = sub

    sub = subparsers.add_parser("heisenberg", help="n^2 scaled minimum sin-loss risk.")
    sub.add_argument("--n-values", default=DEFAULT_N_VALUES)
    sub.set_defaults(handler=run_heisenberg)
    commands["heisenberg"] = sub

    sub = subparsers.add_parser("prolate", help="lambda(T) by Nystrom and by its large-T expansion.")
    sub.add_argument("--T-values", default=DEFAULT_T_VALUES)
    sub.add_argument("--quad-order", type=int, default=prolate.DEFAULT_QUAD_ORDER)
    sub.set_defaults(handler=run_prolate)
    commands["prolate"] = sub

    sub = subparsers.add_parser("dpss", help="Best finite state for the interval loss.")
    sub.add_argument("--N", type=int, default=None)
    sub.add_argument("--T", type=float, default=None)
    sub.set_defaults(handler=run_dpss)
    commands["dpss"] = sub

    sub = subparsers.add_parser("mathieu-a0", help="Ground Mathieu characteristic value.")
    sub.add_argument("--q", default=None, help="One or more comma separated values.")
    sub.set_defaults(handler=run_mathieu_a0)
    commands["mathieu-a0"] = sub

    sub = subparsers.add_parser("gamma", help="Ground energy of 1 - cos Q + s P^2.")
    sub.add_argument("--s", default=None, help="One or more comma separated values.")
    sub.set_defaults(handler=run_gamma)
    commands["gamma"] = sub

    sub = subparsers.add_parser("kappa", help="Minimum sin-loss risk under an energy bound.")
    sub.add_argument("--E", default=None, help="One or more comma separated values.")
    sub.add_argument("--primal", action="store_true", help="Add the primal oracle column.")
    sub.set_defaults(handler=run_kappa)
    commands["kappa"] = sub

    sub = subparsers.add_parser("tradeoff", help="Position/momentum uncertainty trade-off curve.")
    sub.add_argument("--emin", type=float, default=1.0)
    sub.add_argument("--emax", type=float, default=100.0)
    sub.add_argument("--points", type=int, default=50)
    sub.add_argument("--spacing", choices=("log", "linear"), default="log")
    sub.set_defaults(handler=run_tradeoff)
    commands["tradeoff"] = sub

    sub = subparsers.add_parser("simulate", help="Monte Carlo estimate of a risk.")
    sub.add_argument("--state-file", default=None, help="State JSON; default is the sine window on {0, ..., n}.")
    sub.add_argument("--n", type=int, default=9)
    sub.add_argument("--theta", type=float, default=0.0)
    sub.add_argument("--samples", type=int, default=100_000)
    sub.add_argument("--save-run", default=None, help="Save the run record (JSON) and samples.")
    _add_loss(sub)
    sub.set_defaults(handler=run_simulate)
    commands["simulate"] = sub

    sub = subparsers.add_parser("verify", help="Run the acceptance checks.")
    sub.add_argument("--level", choices=verify.LEVELS, default=verify.FAST)
    sub.add_argument("--tolerance", action="append", default=None, help="NAME=VALUE override, repeatable.")
    sub.set_defaults(handler=run_verify)
    commands["verify"] = sub

    for sub in commands.values():
        _add_shared(sub)
    return parser, commands


def read_config_file(path: str) -> dict[str, str]:
    """
    Read key=value lines; blank lines and lines starting with # are skipped.
    Keys use the flag spelling with or without leading dashes.
    """
    config = {}
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{number}: expected key=value, got '{line}'.")
            config[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return config


def _apply_config_file(args: argparse.Namespace, argv: list[str], parser, commands) -> argparse.Namespace:
    sub = commands[args.subcommand]
    actions = {action.dest: action for action in sub._actions if action.dest not in SHARED_KEYS + ("help",)}
    defaults = {}
    for key, value in read_config_file(args.config).items():
        if key not in actions:
            raise UsageError(f"Unknown key '{key}' in {args.config} for {args.subcommand}.")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes")
        elif isinstance(action, argparse._AppendAction):
            defaults[key] = [item.strip() for item in value.split(";") if item.strip()]
        else:
            defaults[key] = action.type(value) if action.type else value
            if action.choices is not None and defaults[key] not in action.choices:
                raise UsageError(f"Invalid value '{value}' for '{key}' in {args.config}.")
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _check_required(args: argparse.Namespace) -> None:
    missing = [f"--{dest}" for dest in REQUIRED_FLAGS.get(args.subcommand, ()) if getattr(args, dest) is None]
    if missing:
        raise UsageError(f"the following arguments are required: {', '.join(missing)}")


def run(argv: list[str] | None = None) -> int:
    """
    Execute one command line.

    Parameters
    ----------
    argv : list[str], optional
        Arguments without the program name.
        Default None, sys.argv[1:]

    Returns
    -------
    exit_code : int
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser, commands = build_parser()
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config_file(args, argv, parser, commands)
        _check_required(args)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
        config = RunConfig.from_args(args)
        output = args.handler(args)
        text = render(config, output)
        if config.output_path:
            with open(config.output_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        else:
            sys.stdout.write(text)
        return output.exit_code
    except NumericalError as exc:
        _report("numerical-failure", exc)
        return 1
    except (ValueError, TypeError, FileNotFoundError) as exc:
        _report("invalid-argument", exc)
        return 2


def _report(kind: str, exc: Exception) -> None:
    reason = " ".join(str(exc).split())
    print(f"{PROGRAM}: error={kind} reason={reason}", file=sys.stderr)


def main() -> None:
    sys.exit(run())
