# Licensed under the GPLv3 - see LICENSE
"""Field dumps: a yaml header followed by a raw float64 payload.

The header is a yaml mapping terminated by a document end marker line
(``...``).  The payload holds the samples as little-endian 64-bit floats
in row-major (time, x_1, ..., x_d[, component]) order; its SHA-256 digest
is recorded in the header.
"""
import hashlib
import operator

import numpy as np
from astropy import log
from astropy.io.misc import yaml

from .. import __version__
from ..grid import PeriodicGrid, SampledField


__all__ = ['FieldDump', 'dump_field', 'load_field']

FORMAT = 'fracflow-field'
FORMAT_VERSION = 1
END_MARKER = b'...\n'
DTYPE = '<f8'


class FieldDump(dict):
    """Header of a field dump.

    Parameters
    ----------
    verify : bool, optional
        Whether to check that the header has everything needed to
        interpret a payload.  Default: `True`.
    mutable : bool, optional
        Whether to allow the header to be changed after initialisation.
        Default: `True`.
    **kwargs
        Header keywords to be set.
    """
    _properties = ('d', 'n', 'period', 'components', 'times')

    def __init__(self, *, verify=True, mutable=True, **kwargs):
        super().__init__()
        self.mutable = True
        kwargs.setdefault('format', FORMAT)
        kwargs.setdefault('format_version', FORMAT_VERSION)
        kwargs.setdefault('byteorder', 'little')
        kwargs.setdefault('dtype', DTYPE)
        kwargs.setdefault('vector', False)
        self.update(**kwargs, verify=verify)
        self.mutable = mutable

    def verify(self):
        missing = {'format', 'format_version', 'd', 'n', 'period', 'times',
                   'components', 'vector', 'byteorder', 'dtype',
                   'count'} - self.keys()
        if missing:
            raise ValueError("header is missing {}."
                             .format(', '.join(sorted(missing))))
        if (self['format'] != FORMAT
                or self['format_version'] != FORMAT_VERSION):
            raise ValueError("not a {} version {} header."
                             .format(FORMAT, FORMAT_VERSION))
        if self['byteorder'] != 'little' or self['dtype'] != DTYPE:
            raise ValueError("payload should be little-endian {}."
                             .format(DTYPE))
        components = self.d if self['vector'] else 1
        if self.components != components:
            raise ValueError("header has {} components, expected {}."
                             .format(self.components, components))
        if self['count'] != int(np.prod(self.shape)):
            raise ValueError("header count {} does not match shape {}."
                             .format(self['count'], self.shape))

    def copy(self):
        return self.__class__(verify=False, **self)

    def update(self, *, verify=True, **kwargs):
        """Update the header with new values.

        Keywords matching properties are processed after all others, in
        the order given by ``_properties``; unless given explicitly, the
        element count follows from the shape.
        """
        count = kwargs.pop('count', None)
        extras = [(key, kwargs.pop(key)) for key in self._properties
                  if key in kwargs]
        super().update(kwargs)
        for attr, value in extras:
            setattr(self, attr, value)
        if count is not None:
            self['count'] = operator.index(count)
        elif extras and {'d', 'n', 'components', 'times'} <= self.keys():
            self['count'] = int(np.prod(self.shape))
        if verify:
            self.verify()

    def __setitem__(self, item, value):
        if not self.mutable:
            raise TypeError("immutable {0} does not support assignment."
                            .format(type(self).__name__))
        super().__setitem__(item, value)

    @property
    def shape(self):
        """Shape of the sample array."""
        return ((len(self.times),) + (self.n,) * self.d
                + ((self.components,) if self['vector'] else ()))

    @property
    def grid(self):
        return PeriodicGrid(self.d, self.n, self.period)

    @classmethod
    def fromfield(cls, field, verify=True, **kwargs):
        """Header describing a sampled field."""
        kwargs.setdefault('version', __version__)
        grid = field.grid
        return cls(d=grid.d, n=grid.n, period=grid.period,
                   components=field.components, vector=field.is_vector,
                   times=field.times, verify=verify, **kwargs)

    @classmethod
    def fromfile(cls, fh, verify=True):
        """Read the yaml header from a binary file handle."""
        lines = []
        for line in iter(fh.readline, b''):
            if line == END_MARKER:
                break
            lines.append(line)
        else:
            raise ValueError("no end of header marker found.")
        items = yaml.load(b''.join(lines).decode('utf-8'))
        if not isinstance(items, dict):
            raise ValueError("header is not a mapping.")
        return cls(**items, mutable=False, verify=verify)

    def tofile(self, fh):
        """Write the yaml header and end marker to a binary file handle."""
        fh.write(yaml.dump(dict(self)).encode('utf-8'))
        fh.write(END_MARKER)

    def __eq__(self, other):
        return (type(self) is type(other)
                and self.keys() == other.keys()
                and all(np.all(self[key] == other[key])
                        for key in self.keys()))


def getter(attr):
    def fget(self):
        return self[attr]

    return fget


def setter(attr, cls):
    def fset(self, value):
        self[attr] = cls(value)

    return fset


def _times(value):
    return [float(t) for t in np.atleast_1d(value)]


for attr, cls in [('d', operator.index),
                  ('n', operator.index),
                  ('period', float),
                  ('components', operator.index),
                  ('times', _times)]:
    setattr(FieldDump, attr, property(getter(attr), setter(attr, cls)))


def dump_field(field, filename, **kwargs):
    """Write a sampled field to a file.

    Parameters
    ----------
    field : `~fracflow.grid.SampledField`
        Field to store.
    filename : str or path-like
        Output file.
    **kwargs
        Extra header items (e.g., a description).

    Returns
    -------
    header : `FieldDump`
        The header written, including the payload checksum.
    """
    payload = np.ascontiguousarray(field.values, dtype=DTYPE).tobytes()
    header = FieldDump.fromfield(
        field, sha256=hashlib.sha256(payload).hexdigest(), **kwargs)
    with open(filename, 'wb') as fh:
        header.tofile(fh)
        fh.write(payload)
    log.info("wrote field {} to {}".format(header.shape, filename))
    return header


def load_field(filename, verify=True):
    """Read a field written by `dump_field`.

    Parameters
    ----------
    filename : str or path-like
        Input file.
    verify : bool, optional
        Whether to check the payload checksum.  Default: `True`.

    Returns
    -------
    field : `~fracflow.grid.SampledField`
    """
    with open(filename, 'rb') as fh:
        header = FieldDump.fromfile(fh)
        payload = fh.read()
    expected = header['count'] * np.dtype(DTYPE).itemsize
    if len(payload) != expected:
        raise ValueError("payload has {} bytes, but header declares {} "
                         "elements ({} bytes)."
                         .format(len(payload), header['count'], expected))
    if verify and 'sha256' in header:
        digest = hashlib.sha256(payload).hexdigest()
        if digest != header['sha256']:
            raise ValueError("payload checksum {} does not match header "
                             "checksum {}.".format(digest, header['sha256']))
    values = np.frombuffer(payload, dtype=DTYPE).reshape(header.shape)
    return SampledField(header.grid, values.astype(float), header.times)
