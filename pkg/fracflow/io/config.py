# Licensed under the GPLv3 - see LICENSE
"""Run configurations: validated yaml documents describing one scenario.

A configuration is a mapping with a few top-level items (``scenario``,
``seed``, ``alpha``) and sections (``grid``, ``time``, ``initial``,
``drift``, ``forcing``, ``noise``, ``particles``, ``stable``,
``verify``).  Missing items take their defaults; unknown keys and values
outside their domain raise `~fracflow.errors.ConfigError` naming the
dotted path of the offending item.
"""
import hashlib
import operator

import numpy as np
from astropy.io.misc import yaml
from yaml import YAMLError

from ..errors import ConfigError
from ..grid import PeriodicGrid
from ..solvers import SolverConfig, SCHEMES


__all__ = ['RunConfig', 'load_config', 'SCENARIOS']

SCENARIOS = ('solve-pde', 'solve-sqg', 'solve-ns2d', 'run-particles',
             'sample-stable', 'verify-maxprinciple', 'verify-harnack',
             'verify-holder', 'verify-scaling', 'verify-degiorgi',
             'verify-krylov', 'verify-martingale')

INITIAL_KINDS = ('gaussian', 'plane-wave', 'band-limited', 'two-bumps',
                 'zero')
DRIFT_KINDS = ('none', 'divfree')
FORCING_KINDS = ('none', 'plane-wave', 'gaussian')
PLANAR = ('solve-sqg', 'solve-ns2d', 'run-particles', 'verify-maxprinciple',
          'verify-holder')


class Item:
    """Schema entry: default, converter and domain check."""

    def __init__(self, default, convert, check=None, domain=''):
        self.default = default
        self.convert = convert
        self.check = check
        self.domain = domain

    def __call__(self, path, value):
        if value is None:
            if self.default is None:
                return None
            value = self.default
        try:
            value = self.convert(value)
        except (TypeError, ValueError):
            raise ConfigError(path, "cannot interpret {!r}.".format(value))
        if self.check is not None and not self.check(value):
            raise ConfigError(path, "should be {}, got {!r}."
                              .format(self.domain, value))
        return value


class Required(Item):
    def __call__(self, path, value):
        if value is None:
            raise ConfigError(path, "is required.")
        return super().__call__(path, value)


def _integer(value):
    if isinstance(value, bool):
        raise TypeError("booleans are not integers.")
    return operator.index(value)


def _real(value):
    if isinstance(value, (bool, str)):
        raise TypeError("not a number.")
    return float(value)


def _reals(value):
    return [_real(v) for v in np.atleast_1d(value).tolist()]


def _integers(value):
    return [_integer(v) for v in np.atleast_1d(value).tolist()]


def _increasing(values):
    return len(values) > 0 and all(b > a for a, b in zip(values[:-1],
                                                         values[1:]))


def _positive(value):
    return value > 0


def _non_negative(value):
    return value >= 0


SCHEMA = {
    'scenario': Required(None, str, SCENARIOS.__contains__,
                         'one of {}'.format(', '.join(SCENARIOS))),
    'seed': Item(0, _integer, lambda s: 0 <= s < 2**63,
                 'a non-negative integer'),
    'alpha': Item(1.5, _real, lambda a: 0 < a <= 2, 'in (0, 2]'),
    'grid': {
        'd': Item(2, _integer, (1, 2).__contains__, '1 or 2'),
        'n': Item(64, _integer, lambda n: n >= 8 and not n & (n - 1),
                  'a power of two >= 8'),
        'period': Item(2 * np.pi, _real, _positive, 'positive'),
    },
    'time': {
        'dt': Item(0.01, _real, _positive, 'positive'),
        't_end': Item(1., _real, _positive, 'positive'),
        'output_every': Item(1, _integer, _positive, 'positive'),
        'scheme': Item('etd-rk2', str, SCHEMES.__contains__,
                       'one of {}'.format(', '.join(SCHEMES))),
    },
    'initial': {
        'kind': Item('gaussian', str, INITIAL_KINDS.__contains__,
                     'one of {}'.format(', '.join(INITIAL_KINDS))),
        'width': Item(0.5, _real, _positive, 'positive'),
        'amplitude': Item(1., _real, np.isfinite, 'finite'),
        'k': Item([1], _integers),
        'band': Item(4, _integer, lambda b: b >= 2, 'at least 2'),
    },
    'drift': {
        'kind': Item('none', str, DRIFT_KINDS.__contains__,
                     'one of {}'.format(', '.join(DRIFT_KINDS))),
        'amplitude': Item(1., _real, _non_negative, 'non-negative'),
        'kmax': Item(2., _real, _positive, 'positive'),
        'mollify': Item(0., _real, _non_negative, 'non-negative'),
    },
    'forcing': {
        'kind': Item('none', str, FORCING_KINDS.__contains__,
                     'one of {}'.format(', '.join(FORCING_KINDS))),
        'amplitude': Item(1., _real, np.isfinite, 'finite'),
        'width': Item(0.5, _real, _positive, 'positive'),
        'k': Item([1], _integers),
    },
    'noise': {
        'modes': Item(0, _integer, _non_negative, 'non-negative'),
        'amplitude': Item(0.1, _real, _non_negative, 'non-negative'),
    },
    'particles': {
        'N': Item(1000, _integer, lambda n: n >= 2, 'at least 2'),
        'level': Item(16, _integer, _positive, 'positive'),
        'bandwidth': Item(None, _real, _positive, 'positive'),
        'record_every': Item(1, _integer, _positive, 'positive'),
        'sweep': Item([], _integers,
                      lambda s: not s or (_increasing(s) and s[0] >= 2),
                      'at least 2 and strictly increasing'),
    },
    'stable': {
        'N': Item(100000, _integer, _positive, 'positive'),
        'd': Item(2, _integer, (1, 2).__contains__, '1 or 2'),
        't': Item(1., _real, _positive, 'positive'),
    },
    'verify': {
        'q': Item(np.inf, _real, _positive, 'in (0, inf]'),
        'p': Item(np.inf, _real, lambda p: p > 1, 'in (1, inf]'),
        'r': Item(0.25, _real, _positive, 'positive'),
        't0': Item(None, _real, np.isfinite, 'finite'),
        'cases': Item(20, _integer, _positive, 'positive'),
        'lam': Item(2., _real, _positive, 'positive'),
        'weak_exponent': Item(None, _real, _positive, 'positive'),
        'levels': Item([0., 0.25, 0.5], _reals, _increasing,
                       'strictly increasing'),
        'radii': Item([0.25, 0.5, 1.], _reals,
                      lambda r: _increasing(r) and r[0] > 0,
                      'positive and strictly increasing'),
        'exponents': Item([1., 2., np.inf], _reals,
                          lambda p: all(x > 0 for x in p),
                          'in (0, inf]'),
        'gamma': Item(0., _real, _non_negative, 'non-negative'),
        'A': Item(1., _real, _non_negative, 'non-negative'),
        'probes': Item(5, _integer, _positive, 'positive'),
        'tolerance': Item(None, _real, _positive, 'positive'),
    },
}


def _normalize(schema, values, prefix=''):
    if values is None:
        values = {}
    if not isinstance(values, dict):
        raise ConfigError(prefix.rstrip('.') or '<document>',
                          "should be a mapping.")
    unknown = set(values) - set(schema)
    if unknown:
        key = sorted(str(k) for k in unknown)[0]
        raise ConfigError(prefix + key, "unknown key.")
    out = {}
    for key, entry in schema.items():
        path = prefix + key
        if isinstance(entry, dict):
            out[key] = _normalize(entry, values.get(key), path + '.')
        else:
            out[key] = entry(path, values.get(key))
    return out


class RunConfig(dict):
    """Validated run configuration.

    Parameters
    ----------
    verify : bool, optional
        Whether to check cross-item constraints.  Default: `True`.
    **kwargs
        Top-level items and sections, as in a yaml configuration file.

    Raises
    ------
    ~fracflow.errors.ConfigError
        For unknown keys or values outside their domain.
    """

    def __init__(self, *, verify=True, **kwargs):
        super().__init__(_normalize(SCHEMA, kwargs))
        if verify:
            self.verify()

    def verify(self):
        d = self['grid']['d']
        for section in 'initial', 'forcing':
            if self[section]['kind'] == 'plane-wave':
                if len(self[section]['k']) != d:
                    raise ConfigError(section + '.k',
                                      "should have {} components.".format(d))
        if self['drift']['kind'] == 'divfree' and d != 2:
            raise ConfigError('drift.kind', "divergence-free drifts need "
                              "grid.d = 2.")
        if self.scenario in PLANAR and d != 2:
            raise ConfigError('grid.d', "scenario {} needs grid.d = 2."
                              .format(self.scenario))
        if (self.scenario == 'verify-scaling'
                and self['verify']['lam'] != round(self['verify']['lam'])):
            raise ConfigError('verify.lam', "should be an integer for the "
                              "periodic scaling check.")
        try:
            self.solver_config()
        except ValueError as exc:
            raise ConfigError('time', str(exc)) from None

    def __setitem__(self, item, value):
        raise TypeError("{} does not support assignment; use 'replace'."
                        .format(type(self).__name__))

    @property
    def scenario(self):
        return self['scenario']

    @property
    def seed(self):
        return self['seed']

    @property
    def alpha(self):
        return self['alpha']

    @property
    def grid(self):
        """Spatial lattice."""
        grid = self['grid']
        return PeriodicGrid(grid['d'], grid['n'], grid['period'])

    def solver_config(self, **kwargs):
        """Time-stepping parameters, possibly with some replaced."""
        time = self['time']
        kwargs = dict(dict(alpha=self.alpha, dt=time['dt'],
                           t_end=time['t_end'], scheme=time['scheme'],
                           output_every=time['output_every']), **kwargs)
        return SolverConfig(**kwargs)

    def replace(self, **kwargs):
        """Copy with some top-level items or sections replaced."""
        return self.__class__(**dict(self.todict(), **kwargs))

    def todict(self):
        """Plain nested dict copy."""
        return {key: dict(value) if isinstance(value, dict) else value
                for key, value in self.items()}

    def dumps(self):
        """Canonical yaml text."""
        return yaml.dump(self.todict())

    def checksum(self):
        """SHA-256 hex digest of the canonical yaml text."""
        return hashlib.sha256(self.dumps().encode('utf-8')).hexdigest()


def load_config(filename, **overrides):
    """Read and validate a yaml run configuration.

    Parameters
    ----------
    filename : str or path-like
        Configuration file.
    **overrides
        Top-level items replacing those in the file (e.g., ``seed``).
    """
    try:
        with open(filename) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError('<document>', "cannot read {}: {}."
                          .format(filename, exc.strerror))
    try:
        items = yaml.load(text)
    except YAMLError as exc:
        raise ConfigError('<document>', "invalid yaml: {}".format(exc))
    if items is None:
        items = {}
    if not isinstance(items, dict):
        raise ConfigError('<document>', "should be a mapping.")
    if not all(isinstance(key, str) for key in items):
        raise ConfigError('<document>', "keys should be strings.")
    items.update({key: value for key, value in overrides.items()
                  if value is not None})
    return RunConfig(**items)
