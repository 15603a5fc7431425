# Licensed under the GPLv3 - see LICENSE
"""Periodic lattices and the fields sampled on them.

All fields live on the fundamental cell [-L/2, L/2)^d of a torus, with
``n`` points per axis.  A `SampledField` always has a leading time axis,
followed by the spatial axes and, for vector fields, a trailing
component axis.  A `SpectralField` holds the Fourier coefficients of a
single time slice.
"""
import operator

import numpy as np
from astropy.utils import lazyproperty

from .fourier import fft_maker


__all__ = ['PeriodicGrid', 'SampledField', 'SpectralField']


class PeriodicGrid:
    """Uniform periodic lattice on the fundamental cell [-L/2, L/2)^d.

    Parameters
    ----------
    d : int
        Spatial dimension, 1 or 2.
    n : int
        Points per axis.  Should be a power of two, at least 8.
    period : float, optional
        Period L of each axis.  Default: ``fracflow.conf.period``.
    """

    def __init__(self, d, n, period=None):
        d = operator.index(d)
        n = operator.index(n)
        if d not in (1, 2):
            raise ValueError("dimension should be 1 or 2, not {}.".format(d))
        if n < 8 or n & (n - 1):
            raise ValueError("points per axis should be a power of two "
                             "and at least 8, not {}.".format(n))
        if period is None:
            from . import conf
            period = conf.period
        period = float(period)
        if not period > 0:
            raise ValueError("period should be positive.")
        self._d = d
        self._n = n
        self._period = period
        self._ffts = {}

    @property
    def d(self):
        """Spatial dimension."""
        return self._d

    @property
    def n(self):
        """Number of points per axis."""
        return self._n

    @property
    def period(self):
        """Period of each axis."""
        return self._period

    @property
    def shape(self):
        """Shape of a scalar field on the grid."""
        return (self._n,) * self._d

    @property
    def spacing(self):
        """Lattice spacing."""
        return self._period / self._n

    @property
    def cell_volume(self):
        """Volume of a single lattice cell."""
        return self.spacing ** self._d

    @property
    def volume(self):
        """Volume of the fundamental cell."""
        return self._period ** self._d

    @lazyproperty
    def coordinates(self):
        """Lattice coordinates per axis, shaped to broadcast."""
        x = -self._period / 2 + self.spacing * np.arange(self._n)
        coords = []
        for axis in range(self._d):
            shape = [1] * self._d
            shape[axis] = self._n
            coords.append(x.reshape(shape))
        return tuple(coords)

    @lazyproperty
    def points(self):
        """Lattice points, shape ``grid.shape + (d,)``."""
        return np.stack(np.broadcast_arrays(*self.coordinates), axis=-1)

    @lazyproperty
    def wavenumbers(self):
        """Angular wavenumbers per axis, shaped to broadcast.

        Ordered as `numpy.fft.fftfreq`; the set per axis is
        (2 pi / L) {-n/2, ..., n/2-1}.
        """
        return self.fft(self.shape, start=0).wavenumber

    @lazyproperty
    def kabs(self):
        """Magnitude |k| of the wavenumbers, shape ``grid.shape``."""
        return np.sqrt(sum(k**2 for k in self.wavenumbers))

    @lazyproperty
    def phase(self):
        """Sign (-1)^m per mode, from the cell starting at -L/2."""
        phase = np.ones(self.shape)
        for axis in range(self._d):
            m = np.fft.fftfreq(self._n, d=1. / self._n).astype(int)
            shape = [1] * self._d
            shape[axis] = self._n
            phase = phase * np.where(m % 2, -1., 1.).reshape(shape)
        return phase

    @lazyproperty
    def nyquist(self):
        """Boolean mask of modes at the Nyquist wavenumber on any axis."""
        mask = np.zeros(self.shape, bool)
        for k in self.wavenumbers:
            mask |= np.isclose(k, -np.pi / self.spacing)
        return mask

    def fft(self, shape, dtype='f8', direction='forward', start=1):
        """Get an FFT over the spatial axes of arrays with given shape.

        The spatial axes start at axis ``start`` (by default after a
        leading time axis); any trailing axis holds vector components.
        Transforms are cached per shape, dtype, direction and engine.
        """
        shape = tuple(shape)
        engine = fft_maker.get()
        key = (shape, np.dtype(dtype).str, direction, start, id(engine))
        fft = self._ffts.get(key)
        if fft is None:
            axes = tuple(range(start, start + self._d))
            fft = engine(shape, dtype, direction=direction, axes=axes,
                         period=self._period)
            self._ffts[key] = fft
        return fft

    def forward(self, values, start=1):
        """Unnormalized forward transform over the spatial axes."""
        values = np.asarray(values)
        return self.fft(values.shape, 'f8', 'forward', start)(values)

    def backward(self, modes, start=1, real=True):
        """Backward transform (scaled by 1/n^d) over the spatial axes."""
        modes = np.asarray(modes)
        return self.fft(modes.shape, 'f8' if real else 'c16',
                        'backward', start)(modes)

    def minimum_image(self, z):
        """Wrap displacements into [-L/2, L/2)."""
        return (np.asarray(z) + self._period / 2) % self._period \
            - self._period / 2

    def wrap(self, x):
        """Wrap positions into the fundamental cell."""
        return self.minimum_image(x)

    def index_displacements(self):
        """Minimum-image lattice displacements, shape ``grid.shape + (d,)``.

        Entry ``[j1, ..., jd]`` is the displacement of lattice offset
        ``(j1, ..., jd)``, i.e., the layout of a periodic convolution
        kernel.
        """
        offsets = np.fft.fftfreq(self._n, d=1. / self._n) * self.spacing
        grids = np.meshgrid(*([offsets] * self._d), indexing='ij')
        return np.stack(grids, axis=-1)

    def __eq__(self, other):
        return (isinstance(other, PeriodicGrid)
                and self.d == other.d and self.n == other.n
                and self.period == other.period)

    def __hash__(self):
        return hash((self._d, self._n, self._period))

    def __repr__(self):
        return ('{0}(d={1.d}, n={1.n}, period={1.period})'
                .format(self.__class__.__name__, self))


class SampledField:
    """Real scalar or vector field on a space-time lattice.

    Parameters
    ----------
    grid : `~fracflow.grid.PeriodicGrid`
        Spatial lattice.
    values : array_like
        Samples, with shape ``(ntimes,) + grid.shape`` for scalar fields
        or ``(ntimes,) + grid.shape + (d,)`` for vector fields.
    times : array_like, optional
        Increasing sample times.  Default: a single sample at t=0.

    Notes
    -----
    Instances are immutable; the value array is copied and made
    read-only.
    """

    def __init__(self, grid, values, times=None):
        if not isinstance(grid, PeriodicGrid):
            raise TypeError("grid should be a PeriodicGrid instance.")
        values = np.array(values, dtype=float)
        times = (np.zeros(1) if times is None
                 else np.array(times, dtype=float).reshape(-1))
        if times.size == 0:
            raise ValueError("need at least one time sample.")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times should be strictly increasing.")
        scalar_shape = (times.size,) + grid.shape
        if values.shape == scalar_shape:
            components = 1
        elif values.shape == scalar_shape + (grid.d,):
            components = grid.d
        else:
            raise ValueError("values shape {} does not match grid and times "
                             "{} (or {} for vectors)."
                             .format(values.shape, scalar_shape,
                                     scalar_shape + (grid.d,)))
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values.")
        values.flags.writeable = False
        times.flags.writeable = False
        self._grid = grid
        self._values = values
        self._times = times
        self._components = components
        self._vector = values.ndim == grid.d + 2

    @classmethod
    def from_function(cls, grid, function, times=None, vector=False):
        """Sample ``function(t, x)`` on the lattice.

        Parameters
        ----------
        grid : `~fracflow.grid.PeriodicGrid`
            Spatial lattice.
        function : callable
            Called as ``function(t, x)`` with ``x`` of shape
            ``grid.shape + (d,)``; should return an array of shape
            ``grid.shape`` (scalar) or ``grid.shape + (d,)`` (vector).
        times : array_like, optional
            Sample times.  Default: single sample at t=0.
        vector : bool, optional
            Whether the field is a vector field.
        """
        times = np.zeros(1) if times is None else np.atleast_1d(times)
        shape = grid.shape + ((grid.d,) if vector else ())
        values = np.stack([np.broadcast_to(function(t, grid.points), shape)
                           for t in times])
        return cls(grid, values, times)

    @classmethod
    def constant(cls, grid, value, times=None, vector=False):
        """Field equal to ``value`` everywhere."""
        times = np.zeros(1) if times is None else np.atleast_1d(times)
        shape = (len(times),) + grid.shape + ((grid.d,) if vector else ())
        return cls(grid, np.broadcast_to(value, shape), times)

    @property
    def grid(self):
        """Spatial lattice."""
        return self._grid

    @property
    def values(self):
        """Read-only sample array."""
        return self._values

    @property
    def times(self):
        """Sample times."""
        return self._times

    @property
    def ntimes(self):
        return len(self._times)

    @property
    def components(self):
        """1 for scalar fields, d for vector fields."""
        return self._components

    @property
    def is_vector(self):
        return self._vector

    @property
    def snapshot(self):
        """Values of a single-time field, without the time axis.

        Raises
        ------
        ValueError
            If the field has more than one time sample.
        """
        if self.ntimes != 1:
            raise ValueError("operation requires a field at a single time, "
                             "got {} samples; use 'at'.".format(self.ntimes))
        return self._values[0]

    def at(self, index):
        """Field at a single time sample."""
        index = operator.index(index)
        return self.__class__(self._grid, self._values[index:index+1 or None],
                              self._times[index:index+1 or None])

    def with_values(self, values, times=None):
        """New field on the same grid (and by default the same times)."""
        return self.__class__(self._grid, values,
                              self._times if times is None else times)

    def mean(self):
        """Spatial mean per time sample (and component)."""
        axes = tuple(range(1, self._grid.d + 1))
        return self._values.mean(axis=axes)

    def integral(self):
        """Lattice quadrature of the field per time sample."""
        axes = tuple(range(1, self._grid.d + 1))
        return self._values.sum(axis=axes) * self._grid.cell_volume

    def sup(self):
        """Maximum absolute value per time sample."""
        axes = tuple(range(1, self._values.ndim))
        return np.abs(self._values).max(axis=axes)

    def check_compatible(self, other):
        if not isinstance(other, SampledField):
            raise TypeError("can only combine with another SampledField.")
        if other.grid != self._grid:
            raise ValueError("fields are on different grids.")
        if not (other.ntimes == self.ntimes
                and np.all(other.times == self._times)):
            raise ValueError("fields are sampled at different times.")

    def _combine(self, other, op):
        if isinstance(other, SampledField):
            self.check_compatible(other)
            other = other.values
        return self.with_values(op(self._values, other))

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self._values)

    def __repr__(self):
        return ('<{0} {1} field on {2!r}, {3} time sample(s)>'
                .format(self.__class__.__name__,
                        'vector' if self.is_vector else 'scalar',
                        self._grid, self.ntimes))


class SpectralField:
    """Fourier coefficients of a field at a single time.

    The coefficients are normalized such that the field equals
    ``sum_k modes[k] exp(i k.x)``; e.g., ``cos(k x)`` has weight 1/2 at
    ``+k`` and ``-k``.

    Parameters
    ----------
    grid : `~fracflow.grid.PeriodicGrid`
        Lattice the coefficients belong to.
    modes : array_like
        Complex coefficients, shape ``grid.shape`` or ``grid.shape + (d,)``,
        ordered as `numpy.fft.fftfreq` along each axis.
    """

    def __init__(self, grid, modes):
        modes = np.array(modes, dtype=complex)
        if modes.shape == grid.shape:
            components = 1
        elif modes.shape == grid.shape + (grid.d,):
            components = grid.d
        else:
            raise ValueError("modes shape {} does not match grid shape {}."
                             .format(modes.shape, grid.shape))
        modes.flags.writeable = False
        self._grid = grid
        self._modes = modes
        self._components = components

    @property
    def grid(self):
        return self._grid

    @property
    def modes(self):
        """Read-only complex coefficients."""
        return self._modes

    @property
    def components(self):
        return self._components

    @property
    def wavenumbers(self):
        return self._grid.wavenumbers

    def __getitem__(self, k):
        """Coefficient at integer wavenumber index ``k`` (tuple)."""
        index = tuple(operator.index(m) % self._grid.n for m in k)
        return self._modes[index]

    def is_hermitian(self, atol=1e-12):
        """Whether the coefficients of -k are conjugate to those of k.

        Modes at the Nyquist wavenumber are compared with themselves,
        since -k aliases k there.
        """
        axes = tuple(range(self._grid.d))
        flipped = np.roll(np.flip(self._modes, axis=axes), 1, axis=axes)
        scale = max(np.abs(self._modes).max(), 1.)
        return bool(np.allclose(flipped, self._modes.conj(),
                                rtol=0., atol=atol * scale))

    def norm(self):
        """L2 norm of the represented field over the cell (Parseval)."""
        return np.sqrt(self._grid.volume * np.sum(np.abs(self._modes)**2))

    def __repr__(self):
        return ('<{0} {1} components on {2!r}>'
                .format(self.__class__.__name__, self._components,
                        self._grid))
