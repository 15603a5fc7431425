# Licensed under the GPLv3 - see LICENSE
"""Common parts to the tests."""
import numpy as np

from ..grid import PeriodicGrid, SampledField


def band_limited(grid, rng, band=None, times=None, vector=False):
    """Random real field with modes only for |m_i| < band.

    Default band is n/4, well inside the 2/3-rule range, so no Nyquist
    or aliasing effects enter.
    """
    band = grid.n // 4 if band is None else band
    times = np.zeros(1) if times is None else np.atleast_1d(times)
    shape = (len(times),) + grid.shape + ((grid.d,) if vector else ())
    noise = rng.normal(size=shape)
    F = np.fft.fftn(noise, axes=tuple(range(1, grid.d + 1)))
    m = np.fft.fftfreq(grid.n, d=1. / grid.n)
    keep = np.ones(grid.shape, bool)
    for axis in range(grid.d):
        shape_m = [1] * grid.d
        shape_m[axis] = grid.n
        keep = keep & (np.abs(m) < band).reshape(shape_m)
    if vector:
        keep = keep[..., np.newaxis]
    values = np.fft.ifftn(F * keep, axes=tuple(range(1, grid.d + 1))).real
    return SampledField(grid, values, times)


def gaussian_bump(grid, width=0.5, center=None, amplitude=1.):
    """Periodic-cell Gaussian exp(-|x-c|^2/width^2), single time."""
    center = np.zeros(grid.d) if center is None else np.asarray(center)
    z = grid.minimum_image(grid.points - center)
    values = amplitude * np.exp(-np.sum(z**2, axis=-1) / width**2)
    return SampledField(grid, values[np.newaxis])


def plane_wave(grid, k, phase=0., times=None):
    """cos(k.x + phase) with integer wavenumber indices k (period 2 pi)."""
    k = np.asarray(k, dtype=float) * 2. * np.pi / grid.period

    def function(t, x):
        return np.cos(x @ k + phase)

    return SampledField.from_function(grid, function, times=times)


class UseGrids:
    def setup_class(cls):
        cls.grid1 = PeriodicGrid(1, 64)
        cls.grid2 = PeriodicGrid(2, 32)
        cls.rng = np.random.default_rng(20240501)
