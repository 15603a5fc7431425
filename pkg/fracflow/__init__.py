# Licensed under the GPLv3 - see LICENSE
"""Nonlocal transport-diffusion: spectral solvers, stable particles, and
regularity diagnostics on the periodic torus."""

try:
    from .version import version as __version__
except ImportError:  # Source checkout without a build.
    __version__ = ''

from math import pi as _pi

from astropy import config as _config


class Conf(_config.ConfigNamespace):
    """Configuration parameters for `fracflow`."""

    period = _config.ConfigItem(
        2 * _pi,
        'Default period of the torus along each axis.')
    blowup_factor = _config.ConfigItem(
        1e6,
        'Solvers abort once the sup norm exceeds this factor times '
        'the sup norm of the initial state.')
    cfl_safety = _config.ConfigItem(
        0.5,
        'Default safety factor on dt * max|b| / dx.')
    fft_threads = _config.ConfigItem(
        2,
        'Number of threads for the pyfftw engine, unless OMP_NUM_THREADS '
        'is set.')
    output_dir_env = _config.ConfigItem(
        'FRACFLOW_OUTPUT',
        'Environment variable overriding the output directory of the '
        'command line interface.')


conf = Conf()
