# Licensed under the GPLv3 - see LICENSE
"""Exceptions and warnings raised by fracflow."""
from astropy.utils.exceptions import AstropyUserWarning


__all__ = ['BlowUpError', 'DivergenceError', 'ConfigError',
           'FracflowExperimentalWarning']


class BlowUpError(RuntimeError):
    """Raised when a solution or particle cloud leaves its admissible range.

    Parameters
    ----------
    message : str
        Diagnostic.
    time : float, optional
        Time at which the failure was detected.
    value : float, optional
        Offending value, e.g., the sup norm.
    """

    def __init__(self, message, time=None, value=None):
        super().__init__(message)
        self.time = time
        self.value = value


class DivergenceError(BlowUpError):
    """Raised when a drift meant to be divergence free is not.

    Arguments are those of `~fracflow.errors.BlowUpError`, with ``value``
    the largest divergence found on the lattice.
    """


class ConfigError(ValueError):
    """Raised for run configurations that fail validation.

    Parameters
    ----------
    path : str
        Dotted path of the offending key, e.g. ``'grid.n'``.
    message : str
        What is wrong with it.
    """

    def __init__(self, path, message):
        super().__init__("{}: {}".format(path, message))
        self.path = path


class FracflowExperimentalWarning(AstropyUserWarning):
    """Warning for runs outside the parameter range they are meant for."""
