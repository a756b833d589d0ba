'''
Command-line surface: `gcapacity <command> [flags]`.

Commands
--------
capacity         closed-form c({B_T ∈ A}) for a set given as JSON
verify           three-way verification of the two-point capacity
demo-nonqc       tent sequence Ê[h_n(B_T)] against c({B_T = x0})
pde-solve        G-heat equation from a named payoff
mc               Monte Carlo under one control strategy
hitting-density  exit-time density table and its integral identities

Exit codes: 0 success, 1 failed check, 2 invalid input, 3 numerical failure.
'''
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..analysis.borel_set import parse_set_json
from ..analysis.capacity import CapacityParams, capacity_report
from ..analysis.special_fn import (SeriesConfig, exit_probability_quadrature, hitting_density,
                                   hitting_time_mass, two_barrier_series)
from ..errors import NumericalError, ValidationError
from ..pde.gheat_pde import GridConfig, g_expectation_1step, parse_payoff, solve
from ..simulation.control_mc import (McConfig, Strategy, StrategyKind, simulate_hitting_probability,
                                     simulate_payoff)
from ..utils import load_json
from .report import RunReport
from .verifier import (DEFAULT_K_LIST, DEFAULT_N_LIST, DEFAULT_TENT_LIST,
                       NonQuasiContinuityDemo, ThreeWayVerifier)

logger = logging.getLogger(__name__)

EXIT_INVALID_INPUT = 2
EXIT_NUMERICAL = 3

# radius around 0 covered by the grid of `mc --pde-bound`
PDE_BOUND_SUPPORT = 2.0

DEFAULT_SETS_FILE = Path("./data/example_sets.json")


def _number_list(kind):
    """argparse type for comma-separated lists such as "1,10,100"."""
    def parse(text):
        try:
            return tuple(kind(token) for token in text.split(",") if token.strip())
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {text!r}") from e
    return parse


def _params(args) -> CapacityParams:
    return CapacityParams(sigma_bar=args.sigma_bar, sigma_under=args.sigma_under,
                          horizon_T=args.T, series=SeriesConfig(tol=args.tol))


def _mc_config(args) -> McConfig:
    return McConfig(n_paths=args.paths, dt=args.dt_mc, seed=args.seed,
                    bridge_correction=args.bridge, max_workers=args.workers)


def _load_set(args):
    """The set from --set (inline JSON), --set-file or --set-name."""
    if args.set is not None:
        try:
            document = json.loads(args.set)
        except json.JSONDecodeError as e:
            raise ValidationError(f"--set is not valid JSON: {e}") from e
    elif args.set_file is not None:
        document = load_json(args.set_file)
    elif args.set_name is not None:
        sets = load_json(args.sets_file)
        if args.set_name not in sets:
            raise ValidationError(f"Unknown set '{args.set_name}', expected one of {sorted(sets)}")
        document = sets[args.set_name]
    else:
        raise ValidationError("Give the set with --set, --set-file or --set-name")
    return parse_set_json(document)


def cmd_capacity(args) -> RunReport:
    """Classification, ρ values, capacity and truncation index of a set."""
    spec = _load_set(args)
    p = _params(args)
    result = capacity_report(spec, p)

    report = RunReport(command="capacity",
                       inputs={"set": repr(spec), "sigma_bar": p.sigma_bar, "T": p.horizon_T,
                               "tol": p.series.tol})
    report.outputs.update(result.to_dict())
    if result.empty_set:
        report.notes.append("warning: A is empty; capacity 0 by convention")
    return report


def cmd_verify(args) -> RunReport:
    verifier = ThreeWayVerifier(
        b=args.b, l=args.l, params=_params(args), dx=args.dx, dt=args.dt,
        half_width=args.half_width, n_list=args.n_list, k_list=args.k_list,
        mc_config=_mc_config(args),
        max_workers=args.workers, verbose=args.verbose,
    )
    return verifier.run()


def cmd_demo_nonqc(args) -> RunReport:
    demo = NonQuasiContinuityDemo(x0=args.x0, params=_params(args), n_list=args.n_list,
                                  dx=args.dx, dt=args.dt, max_workers=args.workers,
                                  verbose=args.verbose)
    return demo.run()


def cmd_pde_solve(args) -> RunReport:
    """Solves the G-heat equation from a named payoff; CSV output dumps the grid."""
    p = _params(args)
    payoff = parse_payoff(args.payoff)
    boundary_values = tuple(args.boundary_values) if args.boundary_values else None
    options = {"dt": args.dt, "boundary": args.boundary, "boundary_values": boundary_values}
    if args.half_width is None:
        g = GridConfig.padded(args.support_radius, p, args.T, dx=args.dx, **options)
    else:
        g = GridConfig.symmetric(args.half_width, args.dx, **options)

    solution = solve(payoff, args.T, p, g)
    report = RunReport(command="pde-solve",
                       inputs={"payoff": args.payoff, "sigma_bar": p.sigma_bar,
                               "sigma_under": p.sigma_under, "T": args.T,
                               "domain": [g.x_min, g.x_max], "dx": g.dx,
                               "boundary": g.boundary})
    report.outputs["u_T_0"] = solution.value_at(0.0)
    report.outputs["dt"] = solution.dt
    report.outputs.update(solution.summary())
    report.table = solution.table()
    return report


def _parse_strategy(text: str) -> Strategy:
    name, _, raw = text.partition(":")
    try:
        values = [float(token) for token in raw.split(",")] if raw else []
        if name == "constant" and len(values) == 1:
            return Strategy.constant(values[0])
        if name in ("bang-bang", "bang_bang_barrier") and len(values) == 2:
            return Strategy.bang_bang_barrier(*values)
    except ValueError:
        pass
    raise ValidationError(f"Bad strategy {text!r}; use 'constant:sigma' or 'bang-bang:b,l'")


def cmd_mc(args) -> RunReport:
    """Monte Carlo under one strategy; the bang-bang hitting probability is checked against the series."""
    p, cfg = _params(args), _mc_config(args)
    strategy = _parse_strategy(args.strategy)
    report = RunReport(command="mc", inputs={"strategy": strategy.to_dict(), "payoff": args.payoff,
                                             "sigma_bar": p.sigma_bar, "T": p.horizon_T,
                                             "paths": cfg.n_paths, "dt_mc": cfg.dt,
                                             "seed": cfg.seed, "bridge": cfg.bridge_correction})

    if args.payoff is None:
        if strategy.kind is not StrategyKind.BANG_BANG_BARRIER:
            raise ValidationError("A constant strategy needs --payoff")
        estimate = simulate_hitting_probability(strategy.b, strategy.l, p, cfg)
        series = two_barrier_series(strategy.b, strategy.l, p.horizon_T, p.sigma_bar, p.series)
        report.outputs["series"] = series
        report.add_check("mc_vs_series", estimate.mean, series,
                         3.0 * estimate.std_error + args.allowance,
                         oracle="closed-form two-point series (3 std errors + dt allowance)")
    else:
        payoff = parse_payoff(args.payoff)
        estimate = simulate_payoff(strategy, payoff, p.horizon_T, p, cfg)
        if args.pde_bound:
            g = GridConfig.padded(PDE_BOUND_SUPPORT, p, p.horizon_T, dx=args.dx, dt=args.dt)
            upper = g_expectation_1step(payoff, 0.0, p.horizon_T, p, g)
            report.outputs["pde_value"] = upper
            report.add_flag("mc_below_pde",
                            estimate.mean <= upper + 3.0 * estimate.std_error + args.allowance,
                            oracle="G-expectation bounds every single strategy",
                            observed=estimate.mean)

    report.outputs["estimate"] = estimate.to_record()
    if estimate.coarse_step:
        report.notes.append("warning: Monte Carlo step is coarse for these barriers")
    return report


def cmd_hitting_density(args) -> RunReport:
    """Density table on (0, t] plus the integral and total-mass identities."""
    p = _params(args)
    t = args.T
    s = np.linspace(t / args.points, t, args.points)
    density = hitting_density(s, args.x, args.b, args.l, p.sigma_bar, p.series)

    report = RunReport(command="hitting-density",
                       inputs={"x": args.x, "b": args.b, "l": args.l, "sigma_bar": p.sigma_bar,
                               "t": t, "points": args.points})
    integral = exit_probability_quadrature(t, args.x, args.b, args.l, p.sigma_bar, p.series)
    report.outputs["integral"] = integral
    report.outputs["max_density"] = float(np.max(density))

    if args.x == 0:
        series = two_barrier_series(args.b, args.l, t, p.sigma_bar, p.series)
        report.add_check("integral_vs_series", integral, series, args.check_tol,
                         oracle="closed-form two-point series")
    mass = hitting_time_mass(args.x, args.b, args.l, p.sigma_bar, p.series)
    report.outputs["total_mass"] = mass
    report.add_check("total_mass", mass, 1.0, args.check_tol,
                     oracle="exit time is finite almost surely")
    report.table = {"s": s, "density": density}
    return report


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sigma-bar", type=float, default=1.0, help="upper volatility")
    common.add_argument("--sigma-under", type=float, default=0.0, help="lower volatility")
    common.add_argument("--T", type=float, default=1.0, help="time horizon")
    common.add_argument("--tol", type=float, default=1e-12, help="series truncation tolerance")
    common.add_argument("--output", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", type=Path, default=None, help="write the output to FILE")
    common.add_argument("--workers", type=int, default=None, help="worker threads")
    level = common.add_mutually_exclusive_group()
    level.add_argument("--verbose", action="store_true")
    level.add_argument("--quiet", action="store_true")
    return common


def _grid_flags(parser: argparse.ArgumentParser, dx: float):
    parser.add_argument("--dx", type=float, default=dx, help="spatial step of the PDE grid")
    parser.add_argument("--dt", type=float, default=None,
                        help="time step of the PDE grid (default: the stability limit)")


def _mc_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--paths", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=20_240_917)
    parser.add_argument("--dt-mc", type=float, default=1e-4)
    parser.add_argument("--bridge", action=argparse.BooleanOptionalAction, default=True)


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="gcapacity",
                                     description="G-capacities under volatility uncertainty.")
    commands = parser.add_subparsers(dest="command", required=True)

    capacity = commands.add_parser("capacity", parents=[common],
                                   help="closed-form capacity of a set")
    source = capacity.add_mutually_exclusive_group()
    source.add_argument("--set", default=None, help="set as inline JSON")
    source.add_argument("--set-file", type=Path, default=None)
    source.add_argument("--set-name", default=None, help="named set from --sets-file")
    capacity.add_argument("--sets-file", type=Path, default=DEFAULT_SETS_FILE)
    capacity.set_defaults(handler=cmd_capacity)

    verify = commands.add_parser("verify", parents=[common], help="three-way verification")
    verify.add_argument("--b", type=float, default=-1.0)
    verify.add_argument("--l", type=float, default=1.0)
    _grid_flags(verify, dx=5e-3)
    verify.add_argument("--half-width", type=float, default=8.0)
    verify.add_argument("--n-list", type=_number_list(int), default=DEFAULT_N_LIST)
    verify.add_argument("--k-list", type=_number_list(float), default=DEFAULT_K_LIST)
    _mc_flags(verify)
    verify.set_defaults(handler=cmd_verify)

    demo = commands.add_parser("demo-nonqc", parents=[common], help="non-quasi-continuity demo")
    demo.add_argument("--x0", type=float, default=1.0)
    demo.add_argument("--n-list", type=_number_list(int), default=DEFAULT_TENT_LIST)
    _grid_flags(demo, dx=5e-3)
    demo.set_defaults(handler=cmd_demo_nonqc)

    pde = commands.add_parser("pde-solve", parents=[common], help="solve the G-heat equation")
    pde.add_argument("--payoff", default="square-cap:25",
                     help="constant:c, neg-abs, square-cap:c, clip:c, tent:x0,n or ramp:b,l,k")
    _grid_flags(pde, dx=1e-2)
    pde.add_argument("--half-width", type=float, default=None)
    pde.add_argument("--support-radius", type=float, default=5.0)
    pde.add_argument("--boundary", choices=("dirichlet_initial", "dirichlet_fixed"),
                     default="dirichlet_initial")
    pde.add_argument("--boundary-values", type=float, nargs=2, default=None)
    pde.set_defaults(handler=cmd_pde_solve)

    mc = commands.add_parser("mc", parents=[common], help="Monte Carlo under one strategy")
    mc.add_argument("--strategy", default="bang-bang:-1,1",
                    help="constant:sigma or bang-bang:b,l")
    mc.add_argument("--payoff", default=None, help="named payoff of X_T")
    mc.add_argument("--pde-bound", action="store_true",
                    help="check the estimate against the PDE G-expectation")
    mc.add_argument("--allowance", type=float, default=2e-3)
    _grid_flags(mc, dx=1e-2)
    _mc_flags(mc)
    mc.set_defaults(handler=cmd_mc)

    density = commands.add_parser("hitting-density", parents=[common],
                                  help="exit-time density and its integral")
    density.add_argument("--b", type=float, default=-1.0)
    density.add_argument("--l", type=float, default=1.0)
    density.add_argument("--x", type=float, default=0.0)
    density.add_argument("--points", type=int, default=50)
    density.add_argument("--check-tol", type=float, default=1e-8)
    density.set_defaults(handler=cmd_hitting_density)

    return parser


def _emit(report: RunReport, args):
    if args.output == "json":
        text = report.to_json(args.out)
    elif args.output == "csv":
        text = report.to_csv(args.out)
    else:
        text = report.render()
        if args.out is not None:
            args.out.write_text(text + "\n", encoding="utf-8")
    print(text)


def main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        report = args.handler(args)
    except ValidationError as e:
        logger.error("invalid input: %s", e)
        return EXIT_INVALID_INPUT
    except NumericalError as e:
        logger.error("numerical failure: %s", e)
        return EXIT_NUMERICAL

    _emit(report, args)
    if not report.passed:
        logger.error("failed checks: %s", ", ".join(report.failed_checks))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
