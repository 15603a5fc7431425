# Licensed under the GPLv3 - see LICENSE
"""Base classes and tools for the fourier module.

Implementation Notes
--------------------

The base classes provide common code for adding new FFT engines.

The `FFTMakerBase` class is subclassed to create ``*FFTMaker`` classes
(where ``*`` stands for a package such as `pyfftw` or `numpy`).  These
hold package-level defaults, such as the number of threads for
``PyfftwFFTMaker``.  Via the `FFTMakerMeta` meta class, all such maker
classes are registered in the `FFT_MAKER_CLASSES` dict, keyed by a
lower-case version of the name (with ``fftmaker`` removed).

Calling a maker creates an ``*FFT`` instance set up for a given shape
and dtype of the data in physical space, the axes to transform, and the
physical period of those axes.  The transforms are multi-dimensional:
all axes listed in ``axes`` are transformed together.  The layout in
spectral space is always the full complex one, with modes ordered as
`numpy.fft.fftfreq`; real data in physical space are transformed as
complex, and backward transforms return the real part.

The normalization is fixed: forward transforms are unscaled, backward
ones scaled by 1/n, with n the product of the transformed axis lengths
(unless ``ortho`` is set).

Selection of a default FFT package is done via `fft_maker`, which stores
a default ``*FFTMaker`` instance.  It is based on
`astropy.utils.state.ScienceState`, with a `fft_maker.system_default`
that is used when the state is set to `None`.
"""
import operator

import numpy as np
from astropy.utils.decorators import classproperty
from astropy.utils.state import ScienceState


__all__ = ['FFTMakerBase', 'FFTBase', 'fft_maker',
           'FFTMakerMeta', 'FFT_MAKER_CLASSES']


FFT_MAKER_CLASSES = {}
"""Dict for storing FFT maker classes, indexed by their name or prefix."""


class FFTBase:
    """Framework for single pre-defined FFT and its associated metadata."""

    def __init__(self, direction):
        self._direction = direction if direction == 'backward' else 'forward'

    @property
    def direction(self):
        """Direction of the FFT ('forward' or 'backward')."""
        return self._direction

    @property
    def space_shape(self):
        """Shape of the data in physical space."""
        return self._space_shape

    @property
    def space_dtype(self):
        """Data type of the data in physical space."""
        return self._space_dtype

    @property
    def mode_shape(self):
        """Shape of the mode coefficients (identical to `space_shape`)."""
        return self._space_shape

    @property
    def mode_dtype(self):
        """Data type of the mode coefficients."""
        return self._mode_dtype

    @property
    def axes(self):
        """Axes over which the FFT is performed."""
        return self._axes

    @property
    def ortho(self):
        """Use orthogonal normalization.

        If `True`, both forward and backward transforms are scaled by
        1 / sqrt(n), where n is the number of points transformed.  If
        `False`, forward transforms are unscaled and backward ones scaled
        by 1 / n.
        """
        return self._ortho

    @property
    def period(self):
        """Physical period of each transformed axis."""
        return self._period

    @property
    def npoints(self):
        """Total number of points transformed per data set."""
        return int(np.prod([self._space_shape[axis] for axis in self.axes]))

    # Not cached: the arrays are cheap and callers keep what they need.
    @property
    def wavenumber(self):
        """Angular wavenumbers along each transformed axis.

        For an axis of length n and period L, uses `numpy.fft.fftfreq`,
        i.e., for even n,

            k = [0, 1, ..., n/2-1, -n/2, ..., -1] * 2 pi / L

        Returns
        -------
        wavenumber : tuple of `~numpy.ndarray`
            One array per transformed axis, shaped such that they
            broadcast against the mode coefficients.
        """
        ndim = len(self._space_shape)
        wavenumber = []
        for axis, period in zip(self.axes, self.period):
            n = self._space_shape[axis]
            k = 2. * np.pi * np.fft.fftfreq(n, d=period / n)
            shape = [1] * ndim
            shape[axis] = n
            wavenumber.append(k.reshape(shape))
        return tuple(wavenumber)

    def __call__(self, a):
        """Perform FFT.

        To display the direction of the transform and shapes and dtypes of
        the arrays, use `print` or `repr`.

        Parameters
        ----------
        a : array_like
            Input data.

        Returns
        -------
        out : `~numpy.ndarray`
            Transformed data.  Never shares memory with ``a``.
        """
        # Real input is transformed as complex (full layout).
        a = np.asarray(a, dtype=self._mode_dtype)
        if a.shape != self._space_shape:
            raise ValueError("data shape {} does not match transform shape {}."
                             .format(a.shape, self._space_shape))
        out = self._fft(a)
        if self.direction == 'backward' and self._space_dtype.kind == 'f':
            out = out.real.astype(self._space_dtype)
        return out

    def inverse(self):
        """Return inverse transform.

        Returns
        -------
        inverse_transform : `~fracflow.fourier.base.FFTBase` subclass
            Returns a new instance of the calling class with reversed
            transform direction.
        """
        return self.__class__(
            direction=('forward' if self.direction == 'backward'
                       else 'backward'))

    def __copy__(self):
        return self.__class__(direction=self.direction)

    def __eq__(self, other):
        return (self.direction == other.direction
                and self.space_shape == other.space_shape
                and self.space_dtype == other.space_dtype
                and self.mode_dtype == other.mode_dtype
                and self.axes == other.axes
                and self.ortho == other.ortho
                and self.period == other.period)

    def __repr__(self):
        return ("<{s.__class__.__name__}"
                " direction={s.direction},\n"
                "    axes={s.axes}, ortho={s.ortho}, period={s.period}\n"
                "    Physical space: shape={s.space_shape},"
                " dtype={s.space_dtype}\n"
                "    Mode space: dtype={s.mode_dtype}>".format(s=self))


class FFTMakerMeta(type):
    """Registry of FFT maker classes.

    Registers classes using the `FFT_MAKER_CLASSES` dict, using a key
    generated by lowercasing the class's name and removing any trailing
    'fftmaker' (eg. the key for 'NumpyFFTMaker' is 'numpy').  The class
    automatically registers any subclass of `FFTMakerBase`, checking for
    key conflicts before registering.  Used by `fft_maker` to select
    classes.
    """
    _registry = FFT_MAKER_CLASSES

    def __init__(cls, name, bases, dct):

        # Ignore FFTMakerBase.
        if name != 'FFTMakerBase':

            key = name.lower()
            if key.endswith('fftmaker') and len(key) > 8:
                key = key[:-8]

            if key in FFTMakerMeta._registry:
                raise ValueError("key {0} already registered in "
                                 "FFT_MAKER_CLASSES.".format(key))

            FFTMakerMeta._registry[key] = cls

        super().__init__(name, bases, dct)


class FFTMakerBase(metaclass=FFTMakerMeta):
    """Base class for all FFT factories."""

    _FFTBase = FFTBase
    _repr_kwargs = {}

    def __call__(self, shape, dtype, direction='forward', axes=None,
                 ortho=False, period=None, **kwargs):
        """Create an FFT instance.

        Parameters
        ----------
        shape : tuple
            Shape of the data in physical space, i.e. the input to the
            forward transform and the output of the backward one.
        dtype : str or `~numpy.dtype`
            Data type of the data in physical space.  Real types give
            complex mode coefficients of matching precision.
        direction : 'forward' or 'backward', optional
            Direction of the FFT.
        axes : tuple of int, optional
            Axes to transform.  Default: all.
        ortho : bool, optional
            Whether to use orthogonal normalization.  Default: `False`.
        period : float or tuple of float, optional
            Physical period of each transformed axis, used for the
            wavenumbers.  Default: 2 pi.

        Returns
        -------
        fft : ``cls._FFTBase`` instance
            Single pre-defined FFT object.
        """
        space_shape = tuple(operator.index(n) for n in shape)
        space_dtype = np.dtype(dtype)
        if axes is None:
            axes = tuple(range(len(space_shape)))
        else:
            axes = tuple(operator.index(axis) % len(space_shape)
                         for axis in np.atleast_1d(axes))
        if period is None:
            period = 2. * np.pi
        period = np.broadcast_to(np.asarray(period, dtype=float),
                                 (len(axes),))
        if np.any(period <= 0):
            raise ValueError("period should be positive.")

        attributes = dict(
            _space_shape=space_shape,
            _space_dtype=space_dtype,
            _mode_dtype=self.get_mode_dtype(space_dtype),
            _axes=axes,
            _ortho=bool(ortho),
            _period=tuple(float(p) for p in period))
        for key, value in kwargs.items():
            attributes['_' + key] = value

        cls = type(self._FFTBase.__name__.replace('Base', ''),
                   (self._FFTBase,), attributes)
        return cls(direction)

    @staticmethod
    def get_mode_dtype(dtype):
        """Data type of the mode coefficients for a given physical dtype."""
        dtype = np.dtype(dtype)
        if dtype.kind == 'f':
            return np.dtype('c{0:d}'.format(2 * dtype.itemsize))
        if dtype.kind == 'c':
            return dtype
        raise TypeError("can only transform real or complex data, not {}."
                        .format(dtype))

    def __repr__(self):
        return '{}({})'.format(self.__class__.__name__,
                               ', '.join(['{}={}'.format(k, v) for k, v
                                          in self._repr_kwargs.items()]))


class fft_maker(ScienceState):
    """Create an FFT, with a settable default engine.

    Parameters
    ----------
    shape : tuple
        Shape of the data in physical space.
    dtype : `~numpy.dtype`
        Data type of the data in physical space.
    direction : 'forward' or 'backward', optional
        Direction of the FFT.  Default: 'forward'
    axes : tuple of int, optional
        Axes to transform.  Default: all.
    ortho : bool, optional
        Whether to use orthogonal normalization.  Default: `False`.
    period : float or tuple of float, optional
        Physical period of the transformed axes.  Default: 2 pi.

    Notes
    -----
    The `fft_maker.set` method can be used to set the default engine for
    all spectral operations, also temporarily in a ``with`` statement.
    """

    # This is set in __init__.
    _system_default = None

    _value = None

    def __new__(cls, shape, dtype, *,
                direction='forward', axes=None, ortho=False, period=None):
        fft_engine = cls.get()
        return fft_engine(shape, dtype, direction=direction, axes=axes,
                          ortho=ortho, period=period)

    @classproperty
    def system_default(cls):
        """System default FFT factory."""
        return cls._system_default

    @classmethod
    def validate(cls, value):
        if value is None:
            value = cls.system_default
        if not isinstance(value, FFTMakerBase):
            raise TypeError("Can only set the default to an instance of "
                            "a FFT maker such as NumpyFFTMaker().")
        return value

    @classmethod
    def set(cls, fft_engine, **kwargs):
        """Set the FFT factory to be used in spectral operations.

        Parameters
        ----------
        fft_engine : {'numpy', 'pyfftw'}, FFTMaker instance, or `None`
            Keyword identifying the FFT maker class to create, or an FFT
            maker instance.  If `None`, the engine stored in the
            ``system_default`` attribute is used.
        **kwargs
            Additional keyword arguments for initializing the maker class
            (eg. ``threads`` for 'pyfftw').  Only allowed when
            ``fft_engine`` is a name of a maker class.
        """
        if fft_engine is None:
            fft_engine = cls.system_default

        elif not isinstance(fft_engine, FFTMakerBase):
            fft_engine = FFT_MAKER_CLASSES[fft_engine](**kwargs)

        elif kwargs:
            raise TypeError("cannot pass keyword arguments except if "
                            "fft_engine is the name of an FFT maker.")

        return super().set(fft_engine)
