#!/usr/bin/env python3
"""
CovertLink - Command Line Interface
Covert photon budgets, QRE sweeps, Taylor-coefficient fits, link simulations and the selfcheck suite
"""

import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import colorlog
import numpy as np

from src.numerics.constellations import (
    Constellation,
    WillieSpec,
    default_u_grid,
    qre_sweep,
    quartic_coefficient_fit,
)
from src.numerics.covertlimits import ChannelParams, covertness_report
from src.numerics.errors import CovertLinkError, InvalidParameterError
from src.reports.base_reporter import build_document
from src.reports.reporter_factory import ReporterFactory
from src.simulation.linksim import SCALING_COLUMNS, run_experiment, scaling_slope, srl_scaling_sweep
from src.simulation.sim_config import SimConfig, load_sim_config
from src.utils.color_logger import ColorLogger
from src.utils.helpers import get_version_info

logger = logging.getLogger("covertlink")

SWEEP_CLI_COLUMNS = ['u', 'qre_exact_nats', 'qre_leading_nats', 'ratio', 'dim_used']


def configure_logging(verbose: bool = False):
    """colorlog handler on stderr; documents on stdout stay clean"""
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(colorlog.ColoredFormatter(
        '%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s',
        log_colors={
            'DEBUG': 'cyan',
            'INFO': 'green',
            'WARNING': 'yellow',
            'ERROR': 'red',
            'CRITICAL': 'bold_red',
        }))
    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)


# Flag types: argparse turns the ValueError into a usage error naming the flag

def positive_float(text: str) -> float:
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return value


def non_negative_float(text: str) -> float:
    value = float(text)
    if not (value >= 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def open_unit_interval(text: str) -> float:
    value = float(text)
    if not (0 < value < 1):
        raise argparse.ArgumentTypeError(f"must lie strictly inside (0, 1), got {text}")
    return value


def unit_interval(text: str) -> float:
    value = float(text)
    if not (0 <= value <= 1):
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def count(text: str) -> int:
    """Positive integer, also written as 1e6"""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"must be an integer, got {text}")
    if not math.isfinite(value) or value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return int(value)


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def count_list(text: str) -> List[int]:
    return [count(item.strip()) for item in text.split(',') if item.strip()]


def float_list(text: str) -> List[float]:
    return [positive_float(item.strip()) for item in text.split(',') if item.strip()]


class CovertLinkCLI:
    """Command-line interface for CovertLink"""

    def __init__(self, console: Optional[ColorLogger] = None):
        self.install_dir = Path(__file__).parent
        self.console = console or ColorLogger()

    def cmd_budget(self, args) -> Dict[str, Any]:
        params = ChannelParams(eta=args.eta, nbar_B=args.nbar_b)
        report = covertness_report(params, args.n, args.delta_qre, nbar_S=args.nbar_s)
        return build_document('budget', result=report)

    def cmd_qre_sweep(self, args) -> Dict[str, Any]:
        if args.points < 1:
            raise InvalidParameterError("--points must be at least 1")
        if not args.u_min < args.u_max:
            raise InvalidParameterError(f"--u-min ({args.u_min}) must be below --u-max ({args.u_max})")
        spec = WillieSpec(ChannelParams(eta=args.eta, nbar_B=args.nbar_b),
                          Constellation.preset(args.constellation, 1.0), tau=args.tau)
        grid = np.geomspace(args.u_max, args.u_min, args.points) if args.points > 1 else np.array([args.u_min])

        table = qre_sweep(spec, grid)
        table.columns = SWEEP_CLI_COLUMNS
        return build_document('qre-sweep', rows=table.to_dict(orient='records'), columns=SWEEP_CLI_COLUMNS)

    def cmd_fit_coeff(self, args) -> Dict[str, Any]:
        spec = WillieSpec.for_nT(args.constellation, args.nt, tau=args.tau)
        fit = quartic_coefficient_fit(spec, args.u_grid or default_u_grid(args.nt))
        closed = fit['closed_form']
        fit['constellation'] = args.constellation
        fit['nT'] = args.nt
        fit['tau'] = args.tau
        fit['relative_error'] = fit['c4'] / closed - 1.0 if closed else None
        return build_document('fit-coeff', result=fit)

    @staticmethod
    def _requested_modes(args) -> int:
        """simulate takes --n; scaling validates against the smallest n of its grid"""
        if getattr(args, 'n_grid', None):
            return min(args.n_grid)
        return getattr(args, 'n', None) or 1

    def _sim_config(self, args) -> SimConfig:
        if args.config:
            config = load_sim_config(args.config)
        else:
            required = {'--eta': args.eta, '--nbar-b': args.nbar_b, '--delta-qre': args.delta_qre,
                        '--nbar-s': args.nbar_s}
            missing = [flag for flag, value in required.items() if value is None]
            if missing:
                raise InvalidParameterError(f"Without --config these flags are required: {', '.join(missing)}")
            config = SimConfig(
                channel=ChannelParams(eta=args.eta, nbar_B=args.nbar_b),
                n_modes=self._requested_modes(args),
                delta_qre=args.delta_qre,
                nbar_S_per_selected_mode=args.nbar_s,
                constellation=Constellation.preset(args.constellation, 1.0),
                tau_override=args.tau_override,
            )

        overrides = {}
        for flag, field_name in (('seed', 'master_seed'), ('trials', 'trials'), ('workers', 'workers')):
            value = getattr(args, flag, None)
            if value is not None:
                overrides[field_name] = value
        if getattr(args, 'n', None) and args.config and args.command == 'simulate':
            overrides['n_modes'] = args.n
        return dataclasses.replace(config, **overrides) if overrides else config

    def cmd_simulate(self, args) -> Dict[str, Any]:
        if not args.config and args.n is None:
            raise InvalidParameterError("Without --config the --n flag is required")
        result = run_experiment(self._sim_config(args))
        return build_document('simulate', result=result.to_dict(include_trials=args.include_trials))

    def cmd_scaling(self, args) -> Dict[str, Any]:
        config = self._sim_config(args)
        table = srl_scaling_sweep(config, args.n_grid)
        rows = table.to_dict(orient='records')
        slope = scaling_slope(table) if len(rows) > 1 and (table['m_bits'] > 0).all() else None
        result = {'slope': slope, 'config': config.to_dict()}
        return build_document('scaling', result=result, rows=rows, columns=SCALING_COLUMNS)

    def cmd_selfcheck(self, args, reporter):
        from src.automation.selfcheck import SelfCheckSuite

        suite = SelfCheckSuite(seed=args.seed) if args.seed is not None else SelfCheckSuite()
        report = suite.run(reporter)
        return build_document('selfcheck', result=report.to_dict()), report.passed

    def show_version(self):
        info = get_version_info()
        self.console.info(f"CovertLink v{info['current_version']} (document schema {info['schema_version']})")
        self.console.info(f"Installation: {self.install_dir}")
        return build_document('version', result=info)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=ReporterFactory.FORMATS,
                        help='Document format (default from config/reporting_config.json)')
    common.add_argument('--output', type=str, help='Write the document to this file instead of stdout')
    common.add_argument('--seed', type=non_negative_int, help='Master seed for reproducible runs')
    common.add_argument('--verbose', action='store_true', help='Debug logging on stderr')

    channel = argparse.ArgumentParser(add_help=False)
    channel.add_argument('--eta', type=open_unit_interval, required=True, help='Channel transmissivity in (0, 1)')
    channel.add_argument('--nbar-b', type=positive_float, required=True, help='Environment thermal photons per mode')

    # Simulation commands may take the channel from --config instead
    sim_channel = argparse.ArgumentParser(add_help=False)
    sim_channel.add_argument('--eta', type=open_unit_interval, help='Channel transmissivity in (0, 1)')
    sim_channel.add_argument('--nbar-b', type=positive_float, help='Environment thermal photons per mode')

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument('--config', type=str, help='SimConfig document (.json, .yaml or .yml)')
    sim.add_argument('--delta-qre', type=positive_float, help='Total QRE budget in nats')
    sim.add_argument('--nbar-s', type=non_negative_float, help='Mean photons per selected mode')
    sim.add_argument('--constellation', choices=['qpsk', 'bpsk'], default='qpsk')
    sim.add_argument('--trials', type=count, help='Monte Carlo trials')
    sim.add_argument('--workers', type=count, help='Trials evaluated concurrently')
    sim.add_argument('--tau-override', type=unit_interval,
                     help='Use this sparsification fraction instead of the covert budget')

    parser = argparse.ArgumentParser(
        prog='covertlink',
        description="CovertLink - Square-root-law covert communication over bosonic channels",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  covertlink budget --eta 0.5 --nbar-b 1 --delta-qre 0.01 --n 1e6
  covertlink budget --eta 0.5 --nbar-b 1 --delta-qre 0.01 --n 1e6 --nbar-s 0.01 --format csv
  covertlink qre-sweep --constellation bpsk --eta 0.5 --nbar-b 2 --u-min 1e-3 --u-max 0.3 --points 12
  covertlink fit-coeff --constellation qpsk --nt 1
  covertlink simulate --config configs/budget.yaml --seed 7
  covertlink scaling --n 1e4,1e5,1e6 --eta 0.5 --nbar-b 1 --delta-qre 0.04 --nbar-s 1 --trials 100
  covertlink selfcheck --allure-dir reports/allure-results
  covertlink version
        """
    )

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    budget = subparsers.add_parser('budget', parents=[common, channel], help='Covert photon budget and throughput')
    budget.add_argument('--delta-qre', type=positive_float, required=True, help='Total QRE budget in nats')
    budget.add_argument('--n', type=count, required=True, help='Number of modes')
    budget.add_argument('--nbar-s', type=positive_float, help='Operating photons per selected mode (adds tau)')

    sweep = subparsers.add_parser('qre-sweep', parents=[common, channel], help='Exact vs leading-order QRE sweep')
    sweep.add_argument('--constellation', choices=['qpsk', 'bpsk'], default='qpsk')
    sweep.add_argument('--u-min', type=positive_float, required=True, help='Smallest Willie-side displacement')
    sweep.add_argument('--u-max', type=positive_float, required=True, help='Largest Willie-side displacement')
    sweep.add_argument('--points', type=int, default=10, help='Log-spaced grid points')
    sweep.add_argument('--tau', type=unit_interval, default=1.0, help='Sparsification fraction')

    fit = subparsers.add_parser('fit-coeff', parents=[common], help='Fit the u^4 QRE coefficient')
    fit.add_argument('--constellation', choices=['qpsk', 'bpsk'], default='qpsk')
    fit.add_argument('--nt', type=positive_float, required=True, help='Thermal photons seen by Willie')
    fit.add_argument('--tau', type=unit_interval, default=1.0, help='Sparsification fraction')
    fit.add_argument('--u-grid', type=float_list, help='Comma-separated decreasing u values')

    simulate = subparsers.add_parser('simulate', parents=[common, sim_channel, sim], help='Monte Carlo link simulation')
    simulate.add_argument('--n', type=count, help='Number of modes')
    simulate.add_argument('--include-trials', action='store_true', help='Add per-trial records to the document')

    scaling = subparsers.add_parser('scaling', parents=[common, sim_channel, sim], help='Square-root-law scaling sweep')
    scaling.add_argument('--n', dest='n_grid', type=count_list, required=True,
                         help='Comma-separated ascending mode counts, e.g. 1e4,1e5,1e6')

    selfcheck = subparsers.add_parser('selfcheck', parents=[common], help='Run the invariant suite')
    selfcheck.add_argument('--allure-dir', type=str, help='Also write Allure results to this directory')

    subparsers.add_parser('version', parents=[common], help='Show version information')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv

    if not argv:
        parser.print_help(sys.stderr)
        return 2

    args = parser.parse_args(argv)
    configure_logging(getattr(args, 'verbose', False))
    cli = CovertLinkCLI()

    try:
        if args.command == 'selfcheck':
            config = ReporterFactory.load_config()
            allure_dir = args.allure_dir or ReporterFactory.configured_allure_dir(config)
            reporter = ReporterFactory.create_reporter(args.format, args.output, allure_dir, config)
            reporter.start_session('selfcheck')
            document, passed = cli.cmd_selfcheck(args, reporter)
            reporter.end_session()
            reporter.write_document(document)
            return 0 if passed else 1

        handlers = {
            'budget': cli.cmd_budget,
            'qre-sweep': cli.cmd_qre_sweep,
            'fit-coeff': cli.cmd_fit_coeff,
            'simulate': cli.cmd_simulate,
            'scaling': cli.cmd_scaling,
            'version': lambda _: cli.show_version(),
        }
        document = handlers[args.command](args)
        reporter = ReporterFactory.create_reporter(args.format, args.output)
        destination = reporter.write_document(document)
        if destination != '-':
            logger.info(f"Wrote {args.command} document to {destination}")
        return 0

    except CovertLinkError as e:
        logger.error(f"{args.command}: {type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("CovertLink execution interrupted by user")
        return 1
    except Exception as e:
        logger.critical(f"Unexpected error in {args.command}: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
