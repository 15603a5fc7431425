# Licensed under the GPLv3 - see LICENSE
"""Command line interface: ``fracflow <subcommand> --config --out``.

Exit codes are 0 on success, 1 if the run failed or any of its checks
did not pass, and 2 for an invalid configuration.
"""
import argparse
import os
import sys

from astropy import log

from . import __version__, conf
from .errors import ConfigError
from .io import SCENARIOS, load_config
from .scenarios import run_scenario


__all__ = ['main', 'make_parser']

SUMMARIES = {
    'solve-pde': "solve the linear transport-diffusion equation",
    'solve-sqg': "solve dissipative (optionally stochastic) SQG",
    'solve-ns2d': "solve the fractional vorticity equation",
    'run-particles': "compare vortex particles with the vorticity equation",
    'sample-stable': "sample isotropic stable increments and test their law",
    'verify-maxprinciple': "check the SQG maximum principle",
    'verify-harnack': "Harnack constants over a drift ensemble",
    'verify-holder': "Hölder exponents of SQG solutions",
    'verify-scaling': "scaling covariance of the solver",
    'verify-degiorgi': "De Giorgi constants under lattice refinement",
    'verify-krylov': "Monte Carlo Krylov functional against its exact value",
    'verify-martingale': "martingale residual with a negative control",
}


def make_parser():
    parser = argparse.ArgumentParser(
        prog='fracflow',
        description="Nonlocal transport-diffusion solvers, stable "
        "particles and regularity diagnostics.")
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    subparsers = parser.add_subparsers(dest='command', metavar='subcommand')
    subparsers.required = True
    subparsers.add_parser('info', help="print version, FFT engine and "
                          "configuration defaults")
    for scenario in SCENARIOS:
        sub = subparsers.add_parser(scenario, help=SUMMARIES[scenario],
                                    description=SUMMARIES[scenario])
        sub.add_argument('--config', required=True,
                         help="yaml run configuration")
        sub.add_argument('--out', default=None,
                         help="output directory (default: ${})"
                         .format(conf.output_dir_env))
        sub.add_argument('--seed', type=int, default=None,
                         help="override the seed of the configuration")
        verbosity = sub.add_mutually_exclusive_group()
        verbosity.add_argument('-v', '--verbose', action='store_true',
                               help="log debugging information")
        verbosity.add_argument('-q', '--quiet', action='store_true',
                               help="log warnings and errors only")
    return parser


def info():
    from .fourier import fft_maker
    print("fracflow {}".format(__version__))
    print("fft engine: {!r}".format(fft_maker.get()))
    for name in ('period', 'blowup_factor', 'cfl_safety', 'fft_threads',
                 'output_dir_env'):
        print("{}: {}".format(name, getattr(conf, name)))


def main(argv=None):
    """Run the command line interface; returns the exit code."""
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command == 'info':
        info()
        return 0

    if args.verbose:
        log.setLevel('DEBUG')
    elif args.quiet:
        log.setLevel('WARNING')

    out = args.out or os.environ.get(conf.output_dir_env)
    if not out:
        parser.error("no output directory: give --out or set ${}."
                     .format(conf.output_dir_env))

    try:
        cfg = load_config(args.config, scenario=args.command, seed=args.seed)
        result = run_scenario(cfg, out)
    except ConfigError as exc:
        print("fracflow: invalid configuration: {}".format(exc),
              file=sys.stderr)
        return 2
    except Exception as exc:
        print("fracflow: {} failed: {}: {}".format(
            args.command, type(exc).__name__, exc), file=sys.stderr)
        return 1

    failed = [name for name, verdict in result.verdicts.items()
              if not verdict.passed]
    if failed:
        print("fracflow: {} failed checks: {}".format(
            args.command, ', '.join(sorted(failed))), file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':  # pragma: no cover
    sys.exit(main())
