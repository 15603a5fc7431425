# Licensed under the GPLv3 - see LICENSE
"""Exact samplers for symmetric and isotropic alpha-stable laws.

The convention throughout is E exp(i xi.L_t) = exp(-t |xi|^alpha), which
matches the multiplier of `~fracflow.spectral.semigroup_apply`.  For
alpha=2 this is a Gaussian with variance 2t per coordinate.
"""
import operator

import numpy as np


__all__ = ['StableParams', 'RngStream', 'sample_sym_stable_1d',
           'sample_positive_stable', 'sample_isotropic_increments',
           'empirical_cf', 'tail_slope']


class StableParams:
    """Parameters of an isotropic alpha-stable increment.

    Parameters
    ----------
    alpha : float
        Stability index, in (0, 2].
    d : int
        Dimension, 1 or 2.
    t : float
        Time step, positive.
    """

    def __init__(self, alpha, d, t=1.):
        alpha = float(alpha)
        if not 0. < alpha <= 2.:
            raise ValueError("alpha should be in (0, 2], got {}."
                             .format(alpha))
        d = operator.index(d)
        if d not in (1, 2):
            raise ValueError("dimension should be 1 or 2, got {}.".format(d))
        t = float(t)
        if not t > 0:
            raise ValueError("time step should be positive, got {}."
                             .format(t))
        self.alpha = alpha
        self.d = d
        self.t = t

    @property
    def scale(self):
        """Self-similar scale factor t^(1/alpha)."""
        return self.t ** (1. / self.alpha)

    def __repr__(self):
        return ('{0}(alpha={1.alpha}, d={1.d}, t={1.t})'
                .format(self.__class__.__name__, self))


class RngStream:
    """Seeded, splittable source of random numbers.

    Draws are made in blocks; block ``i`` of stream ``stream`` under
    ``seed`` is always generated from the same state, so that rereading a
    block gives identical numbers irrespective of what was drawn before.

    Parameters
    ----------
    seed : int
        Base seed.
    stream : int, optional
        Stream identifier, e.g., a particle index.  Default: 0.
    """

    def __init__(self, seed, stream=0):
        self.seed = operator.index(seed)
        self.stream = operator.index(stream)
        if self.seed < 0 or self.stream < 0:
            raise ValueError("seed and stream should be non-negative.")
        self._block = 0
        self._generator = None

    def block(self, index):
        """Generator for block ``index``, independent of draw history."""
        sequence = np.random.SeedSequence(
            self.seed, spawn_key=(self.stream, operator.index(index)))
        return np.random.default_rng(sequence)

    def next_block(self):
        """Generator for the next block in sequence."""
        generator = self.block(self._block)
        self._block += 1
        return generator

    @property
    def generator(self):
        """A single generator covering the whole stream."""
        if self._generator is None:
            self._generator = np.random.default_rng(
                np.random.SeedSequence(self.seed, spawn_key=(self.stream,)))
        return self._generator

    def spawn(self, n):
        """Independent streams ``0 .. n-1`` under the same seed."""
        return [self.__class__(self.seed, i) for i in range(n)]

    def __repr__(self):
        return ('{0}(seed={1.seed}, stream={1.stream})'
                .format(self.__class__.__name__, self))


def get_generator(rng):
    """Interpret ``rng`` as a `numpy.random.Generator`.

    Accepts an `RngStream`, a `~numpy.random.Generator` or anything
    `numpy.random.default_rng` accepts.
    """
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _check_index(alpha, upper=2.):
    alpha = float(alpha)
    if not 0. < alpha <= upper:
        raise ValueError("stability index should be in (0, {}], got {}."
                         .format(upper, alpha))
    return alpha


def sample_sym_stable_1d(alpha, n, rng=None):
    """Symmetric alpha-stable samples with CF exp(-|xi|^alpha).

    Uses the Chambers-Mallows-Stuck representation.

    Parameters
    ----------
    alpha : float
        Stability index, in (0, 2].
    n : int
        Number of samples.
    rng : `RngStream`, `~numpy.random.Generator` or seed, optional
        Source of randomness.
    """
    alpha = _check_index(alpha)
    generator = get_generator(rng)
    v = generator.uniform(-np.pi / 2, np.pi / 2, size=n)
    w = generator.exponential(size=n)
    if alpha == 1.:
        return np.tan(v)
    return (np.sin(alpha * v) / np.cos(v) ** (1. / alpha)
            * (np.cos((1. - alpha) * v) / w) ** ((1. - alpha) / alpha))


def sample_positive_stable(index, n, rng=None):
    """Positive stable samples with Laplace transform exp(-lambda^index).

    Uses Kanter's representation.

    Parameters
    ----------
    index : float
        Stability index, in (0, 1).
    n : int
        Number of samples.
    rng : `RngStream`, `~numpy.random.Generator` or seed, optional
        Source of randomness.
    """
    index = float(index)
    if not 0. < index < 1.:
        raise ValueError("index should be in (0, 1), got {}.".format(index))
    generator = get_generator(rng)
    u = generator.uniform(0., 1., size=n)
    # Keep u away from 0, where sin(pi u) underflows the ratio.
    u = np.where(u > 0, u, np.finfo(float).tiny)
    e = generator.exponential(size=n)
    return (np.sin(index * np.pi * u) / np.sin(np.pi * u) ** (1. / index)
            * (np.sin((1. - index) * np.pi * u) / e)
            ** ((1. - index) / index))


def sample_isotropic_increments(params, n, rng=None):
    """Isotropic alpha-stable increments over a time step.

    Constructed by subordination, L_t = B_{S_t}, with B the Brownian
    motion with CF exp(-t|xi|^2) and S_t the alpha/2 stable subordinator,
    so that E exp(i xi.L_t) = exp(-t |xi|^alpha).

    Parameters
    ----------
    params : `StableParams`
        Index, dimension and time step.
    n : int
        Number of increments.
    rng : `RngStream`, `~numpy.random.Generator` or seed, optional
        Source of randomness.

    Returns
    -------
    increments : `~numpy.ndarray`
        Shape ``(n, d)``.
    """
    if not isinstance(params, StableParams):
        raise TypeError("params should be a StableParams instance.")
    generator = get_generator(rng)
    gaussian = generator.normal(scale=np.sqrt(2.), size=(n, params.d))
    if params.alpha == 2.:
        return np.sqrt(params.t) * gaussian
    subordinator = params.t ** (2. / params.alpha) * sample_positive_stable(
        params.alpha / 2., n, generator)
    return np.sqrt(subordinator)[:, np.newaxis] * gaussian


def empirical_cf(samples, xis):
    """Empirical characteristic function with its Monte Carlo error.

    Parameters
    ----------
    samples : array_like
        Shape ``(n,)`` or ``(n, d)``.
    xis : array_like
        Frequencies, shape ``(m,)`` or ``(m, d)``.

    Returns
    -------
    cf : `~numpy.ndarray`
        Complex mean of exp(i xi.X), shape ``(m,)``.
    error : `~numpy.ndarray`
        Standard error of each estimate.
    """
    samples = np.asarray(samples, dtype=float)
    xis = np.asarray(xis, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, np.newaxis]
    if xis.ndim == 1 and samples.shape[1] == 1:
        xis = xis[:, np.newaxis]
    xis = np.atleast_2d(xis)
    if xis.shape[1] != samples.shape[1]:
        raise ValueError("frequencies have dimension {}, samples {}."
                         .format(xis.shape[1], samples.shape[1]))
    phase = samples @ xis.T
    cos = np.cos(phase)
    sin = np.sin(phase)
    n = samples.shape[0]
    cf = cos.mean(0) + 1j * sin.mean(0)
    error = np.sqrt((cos.var(0) + sin.var(0)) / n)
    return cf, error


def tail_slope(samples, probabilities=(1e-2, 1e-4), npoints=20):
    """Log-log slope of the empirical survival function of |X|.

    The radii are the empirical quantiles for survival probabilities
    spaced logarithmically between the given bounds.
    """
    samples = np.asarray(samples, dtype=float)
    radii = (np.abs(samples) if samples.ndim == 1
             else np.sqrt(np.sum(samples**2, axis=-1)))
    high, low = probabilities
    if not 0 < low < high < 1 or low * radii.size < 10:
        raise ValueError("need 0 < {} < {} < 1 with at least 10 samples "
                         "beyond the smallest probability.".format(low, high))
    survival = np.logspace(np.log10(high), np.log10(low), npoints)
    r = np.quantile(radii, 1. - survival)
    slope = np.polyfit(np.log(r), np.log(survival), 1)[0]
    return float(slope)
