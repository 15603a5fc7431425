# Licensed under the GPLv3 - see LICENSE
"""FFT maker and class using the `numpy.fft` routines."""

import numpy as np

from .base import FFTMakerBase, FFTBase


__all__ = ['NumpyFFTBase', 'NumpyFFTMaker']


class NumpyFFTBase(FFTBase):
    """Single pre-defined FFT based on `numpy.fft.fftn`.

    To use, initialize an instance, then call the instance to perform
    the transform.

    Parameters
    ----------
    direction : 'forward' or 'backward', optional
        Direction of the FFT.
    """

    def __init__(self, direction='forward'):
        super().__init__(direction=direction)
        self._fft = self._cfft if self.direction == 'forward' else self._icfft

    def _cfft(self, a):
        return np.fft.fftn(a, axes=self.axes, norm=self._norm)

    def _icfft(self, a):
        return np.fft.ifftn(a, axes=self.axes, norm=self._norm)


class NumpyFFTMaker(FFTMakerBase):
    """FFT factory class utilizing `numpy.fft` functions.

    `~fracflow.fourier.numpy.NumpyFFTMaker.__call__` creates individual
    transforms.
    """
    # Since `numpy.fft` has no package-level options, no ``__init__`` is
    # explicitly defined.

    _FFTBase = NumpyFFTBase

    def __call__(self, shape, dtype, direction='forward', axes=None,
                 ortho=False, period=None):
        """Create an FFT.

        Arguments are those of `~fracflow.fourier.base.FFTMakerBase`.
        """
        return super().__call__(
            shape=shape, dtype=dtype, direction=direction,
            axes=axes, ortho=ortho, period=period,
            norm=('ortho' if ortho else None))
