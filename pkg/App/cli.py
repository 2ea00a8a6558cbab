import argparse
import logging
import os
import sys
from typing import List, Optional, Sequence

from App.asymptotics.homogeneous import limits, profile_table
from App.asymptotics.planner import plan_from_step, plan_single_observation
from App.bounds.engine import evidence_bounds, simple_bounds
from App.bounds.extremal import extremal_table
from App.errors import (
    CausaBoundError,
    ConfigError,
    DomainError,
    InfeasibleError,
    NullEventError,
    PreconditionError,
    StructuralError,
    UnsupportedError,
)
from App.models.chain import Decomposition, EvidencePattern
from App.models.counterfactual import xi_bounds
from App.models.transition import TransitionMatrix
from App.oracle.sharpness import SharpnessOracle, SlackAssignment
from App.oracle.simulation import ChainSimulator, empirical_causation_rate, empirical_pc, markov_check
from App.reports import CausationReport
from utils.configHandler import (
    DEFAULT_CONFIG,
    ConfigHandler,
    RunConfig,
    RunConfigHandler,
    build_run_config,
    parse_float_list,
)
from utils.logger import LoggerHandler

SEED_ENV = "CAUSABOUND_SEED"
ERROR_PREFIX = "causabound-error"
USAGE_ERRORS = (ConfigError, StructuralError, PreconditionError, DomainError)
INFEASIBILITY_ERRORS = (InfeasibleError, NullEventError, UnsupportedError)
DEFAULT_COMPARE_TAUS = "0.1,0.2,0.3,0.4,0.5"
DEFAULT_COMPARE_RHOS = "-0.4,-0.2,0,0.2,0.4"


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigError instead of exiting, so usage errors share the exit-code map."""

    def error(self, message):
        raise ConfigError(message)


def _add_target(sub: argparse.ArgumentParser, chain: bool = True) -> None:
    sub.add_argument("--config", help="run config file (key = value lines)")
    sub.add_argument("--tau", type=float)
    sub.add_argument("--rho", type=float)
    sub.add_argument("--p0", type=float, help="Pr(Y=1 | X<-0)")
    sub.add_argument("--p1", type=float, help="Pr(Y=1 | X<-1)")
    if chain:
        sub.add_argument("--step", action="append", help="one step as tau,rho; repeat for a chain")
        sub.add_argument("--homogeneous-n", type=int)
        sub.add_argument("--evidence", help="pattern over {0,1,?} for X, M1, ..., Y")
        sub.add_argument("--xy", help="observed X and Y as two bits, mediators unobserved")
    sub.add_argument("--output", help="also write the table to this file name")
    sub.add_argument("--output-dir")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="causabound", description="Bounds on the probability of causation through mediators")
    parser.add_argument("--settings", default=DEFAULT_CONFIG, help="application config.ini")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    bounds = commands.add_parser("bounds", help="bounds for a law, a chain and an evidence pattern")
    _add_target(bounds)

    extremal = commands.add_parser("extremal", help="largest and smallest achievable bounds")
    _add_target(extremal, chain=False)

    profile = commands.add_parser("profile", help="homogeneous-chain bounds for n = 1..n_max")
    _add_target(profile, chain=False)
    profile.add_argument("--n-max", type=int)

    limit = commands.add_parser("limits", help="bounds as the number of mediators grows without limit")
    _add_target(limit, chain=False)

    plan = commands.add_parser("plan", help="which single mediator to observe")
    _add_target(plan, chain=False)
    plan.add_argument("--step-tau", type=float)
    plan.add_argument("--step-rho", type=float)
    plan.add_argument("--n", type=int, required=True)

    oracle = commands.add_parser("oracle", help="brute-force sharpness check and Monte Carlo simulation")
    _add_target(oracle)
    oracle.add_argument("--interior-samples", type=int)
    oracle.add_argument("--seed", type=int)
    oracle.add_argument("--simulate", action="store_true")
    oracle.add_argument("--samples", type=int)
    oracle.add_argument("--slack", help="per-step slacks as a comma list; default the middle of each range")
    oracle.add_argument("--workers", type=int, default=1)

    compare = commands.add_parser("compare", help="bounds under different side information")
    compare.add_argument("--tau-values", default=DEFAULT_COMPARE_TAUS)
    compare.add_argument("--rho-values", default=DEFAULT_COMPARE_RHOS)
    compare.add_argument("--output")
    compare.add_argument("--output-dir")

    figures = commands.add_parser("figures", help="band charts against n and the comparison chart")
    figures.add_argument("--config")
    figures.add_argument("--tau", type=float)
    figures.add_argument("--rho", help="comma list of rho values")
    figures.add_argument("--n-max", type=int)
    figures.add_argument("--tau-values", default=DEFAULT_COMPARE_TAUS)
    figures.add_argument("--rho-values", default=DEFAULT_COMPARE_RHOS)
    figures.add_argument("--output-dir")
    return parser


TARGET_KEYS = ("tau", "rho", "p1_given_do0", "p1_given_do1")
# flags whose values are comma lists that may start with a minus sign
LIST_FLAGS = ("--step", "--rho", "--slack", "--tau-values", "--rho-values")


def join_list_values(argv: Sequence[str]) -> List[str]:
    """Rewrites `--rho -0.4,0` as `--rho=-0.4,0`; argparse would read the value as a flag."""
    joined: List[str] = []
    tokens = list(argv)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token in LIST_FLAGS and i + 1 < len(tokens) and tokens[i + 1].startswith("-") \
                and not tokens[i + 1].startswith("--"):
            joined.append(f"{token}={tokens[i + 1]}")
            i += 2
            continue
        joined.append(token)
        i += 1
    return joined


def _run_config(args: argparse.Namespace) -> RunConfig:
    values = RunConfigHandler(args.config).get_values() if getattr(args, "config", None) else {}
    flags = {
        "tau": getattr(args, "tau", None),
        "rho": getattr(args, "rho", None),
        "p1_given_do0": getattr(args, "p0", None),
        "p1_given_do1": getattr(args, "p1", None),
        "step": getattr(args, "step", None),
        "homogeneous_n": getattr(args, "homogeneous_n", None),
        "evidence": getattr(args, "evidence", None),
        "xy": getattr(args, "xy", None),
        "seed": getattr(args, "seed", None),
        "output_dir": getattr(args, "output_dir", None),
        "n_max": getattr(args, "n_max", None),
    }
    if any(flags[key] is not None for key in TARGET_KEYS):
        for key in TARGET_KEYS:
            values.pop(key, None)
    if flags["step"] is not None or flags["homogeneous_n"] is not None:
        values.pop("step", None)
        values.pop("homogeneous_n", None)
    if flags["evidence"] is not None or flags["xy"] is not None:
        values.pop("evidence", None)
        values.pop("xy", None)
    values.update({key: value for key, value in flags.items() if value is not None})
    return build_run_config(values, source=args.config or "arguments")


def resolve_seed(config: RunConfig, settings: ConfigHandler) -> int:
    if config.seed is not None:
        return config.seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from exc
    return settings.get_seed()


def _emit(report: CausationReport, text: str, name: Optional[str]) -> None:
    sys.stdout.write(text)
    if name:
        report.write_text(name, text)


def _chain(config: RunConfig) -> Decomposition:
    D = config.decomposition()
    return D if D is not None else Decomposition((config.target,))


def _pattern(config: RunConfig, D: Decomposition) -> EvidencePattern:
    E = config.pattern()
    return E if E is not None else EvidencePattern.unobserved(D.n, 1, 1)


def _cmd_bounds(args, config: RunConfig, settings, report, logger) -> int:
    D = _chain(config)
    E = _pattern(config, D)
    if D.n == 1:
        result = simple_bounds(D.steps[0], E.x, E.y)
    else:
        result = evidence_bounds(D, E)
    sys.stdout.write(f"{result.method.value} {report.helper.format_number(result.lo)} "
                     f"{report.helper.format_number(result.hi)} {str(result.identified).lower()}\n")
    if args.output:
        report.write_bounds(result, args.output)
    return 0


def _cmd_extremal(args, config, settings, report, logger) -> int:
    _emit(report, report.extremal_text(extremal_table(config.target)), args.output)
    return 0


def _cmd_profile(args, config, settings, report, logger) -> int:
    n_max = config.n_max or settings.get_figure_n_max()
    _emit(report, report.profile_text(profile_table(config.target, n_max)), args.output)
    return 0


def _cmd_limits(args, config, settings, report, logger) -> int:
    result = limits(config.target)
    fmt = report.helper.format_number
    line = " ".join(f"{name}={fmt(getattr(result, name))}" for name in ("uLB", "uUB", "oLB", "oUB", "mLB", "mUB"))
    sys.stdout.write(f"{line} degenerate={str(result.degenerate).lower()}\n")
    return 0


def _cmd_plan(args, config, settings, report, logger) -> int:
    if args.step_tau is not None or args.step_rho is not None:
        if args.step_tau is None or args.step_rho is None:
            raise ConfigError("--step-tau and --step-rho must be given together")
        table = plan_from_step(TransitionMatrix(args.step_tau, args.step_rho), args.n)
    else:
        table = plan_single_observation(config.target, args.n)
    _emit(report, report.plan_text(table), args.output)
    fmt = report.helper.format_number
    best = table.row(table.best_k[0])
    sys.stdout.write(f"argmax k={','.join(str(k) for k in table.best_k)} LB_if_one={fmt(best.LB_if_one)} "
                     f"no_observation_LB={fmt(table.no_observation_lb)}\n")
    return 0


def _slack(args, D: Decomposition) -> SlackAssignment:
    if args.slack:
        return SlackAssignment(tuple(parse_float_list(args.slack)))
    return SlackAssignment(tuple((xi_bounds(s).lo + xi_bounds(s).hi) / 2.0 for s in D.steps))


def _cmd_oracle(args, config, settings, report, logger) -> int:
    D = _chain(config)
    E = _pattern(config, D)
    seed = resolve_seed(config, settings)
    interior = args.interior_samples if args.interior_samples is not None else settings.get_interior_samples()
    oracle = SharpnessOracle(logger=logger, interior_samples=interior, tolerance=settings.get_sharpness_tolerance())
    result = oracle.check(D, E, seed=seed)
    fmt = report.helper.format_number
    sys.stdout.write(f"sharpness {'pass' if result.passed else 'fail'} bounds={result.bounds} "
                     f"endpoints=[{fmt(result.endpoint_min)}, {fmt(result.endpoint_max)}] "
                     f"interior_violations={result.interior_violations}\n")

    if args.simulate:
        samples = args.samples if args.samples is not None else settings.get_samples()
        simulator = ChainSimulator(logger=logger, block_size=settings.get_block_size(), workers=args.workers)
        outcome = simulator.simulate(D, _slack(args, D), samples, seed, settings.get_exposure_prob())
        pc = empirical_pc(outcome, E)
        rate = empirical_causation_rate(outcome)
        check = markov_check(outcome, settings.get_significance(), logger=logger)
        sys.stdout.write(f"empirical_pc={fmt(pc.value)} se={fmt(pc.standard_error)} support={pc.support} "
                         f"causation_rate={fmt(rate.value)} se={fmt(rate.standard_error)}\n")
        sys.stdout.write(f"markov {'pass' if check.passed else 'reject'}"
                         f"{' inconclusive' if check.inconclusive else ''} tests={len(check.tests)}\n")
    return 0


def _cmd_compare(args, config, settings, report, logger) -> int:
    rows = report.comparison_rows(parse_float_list(args.tau_values), parse_float_list(args.rho_values))
    _emit(report, report.compare_text(rows), args.output)
    return 0


def _cmd_figures(args, config, settings, report, logger) -> int:
    values = RunConfigHandler(args.config).get_values() if args.config else {}
    tau = args.tau if args.tau is not None else float(values.get("tau", settings.get_figure_tau()))
    if args.rho is not None:
        rho_values = parse_float_list(args.rho)
    elif "rho_values" in values:
        rho_values = parse_float_list(values["rho_values"])
    else:
        rho_values = settings.get_figure_rho_values()
    n_max = args.n_max or int(values.get("n_max", settings.get_figure_n_max()))

    paths = report.write_figure1(tau, rho_values, n_max)
    paths += report.write_figure2(parse_float_list(args.tau_values), parse_float_list(args.rho_values))
    for path in paths:
        sys.stdout.write(path + "\n")
    return 0


COMMANDS = {
    "bounds": _cmd_bounds,
    "extremal": _cmd_extremal,
    "profile": _cmd_profile,
    "limits": _cmd_limits,
    "plan": _cmd_plan,
    "oracle": _cmd_oracle,
    "compare": _cmd_compare,
    "figures": _cmd_figures,
}
NEEDS_TARGET = ("bounds", "extremal", "profile", "limits", "oracle")


def _fail(exc: Exception, code: int, logger: Optional[logging.Logger]) -> int:
    line = f"{ERROR_PREFIX}: {type(exc).__name__}: {exc}"
    sys.stderr.write(line + "\n")
    if logger is not None:
        logger.error(line)
    return code


def run(argv: Sequence[str]) -> int:
    """Parses argv, runs one subcommand and returns the exit code: 0 ok, 2 usage or config, 3 infeasible."""
    logger = None
    try:
        args = build_parser().parse_args(join_list_values(argv))
        settings = ConfigHandler(args.settings)
        logger = LoggerHandler(config_data=settings).get_logger()
        logger.info(f"Starting {args.command}")

        config = None
        step_pair = args.command == "plan" and (args.step_tau is not None or args.step_rho is not None)
        if args.command in NEEDS_TARGET or (args.command == "plan" and not step_pair):
            config = _run_config(args)
        output_dir = getattr(args, "output_dir", None) or (config.output_dir if config else None)
        report = CausationReport(logger=logger, config_data=settings, output_dir=output_dir)

        code = COMMANDS[args.command](args, config, settings, report, logger)
        logger.info(f"Finished {args.command}")
        return code
    except USAGE_ERRORS as exc:
        return _fail(exc, 2, logger)
    except INFEASIBILITY_ERRORS as exc:
        return _fail(exc, 3, logger)
    except OSError as exc:
        # unreadable settings or an unwritable output directory
        return _fail(exc, 2, logger)


def main(argv: Optional[List[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)
