# Licensed under the GPLv3 - see LICENSE
"""Space-time cylinders, jump kernels and localization cut-offs.

Balls are taken in the Euclidean metric with periodic (minimum-image)
distance; a lattice point belongs to a ball when its coordinate lies
inside, without partial-cell weighting.
"""
import itertools

import numpy as np
from scipy.special import gamma as gamma_function

from .grid import PeriodicGrid


__all__ = ['Cylinder', 'KernelSpec', 'LocalizationSpec', 'smooth_cutoff',
           'fractional_constant']

CYLINDER_KINDS = ('two-sided', 'plus', 'minus')


class Cylinder:
    """Parabolic cylinder [t0-r, t0+r] x B_r(center) and its halves.

    Parameters
    ----------
    t0 : float
        Center time.
    r : float
        Radius, used both for the time extent and the ball.
    kind : {'two-sided', 'plus', 'minus'}, optional
        Time extent [t0-r, t0+r], [t0, t0+r] or [t0-r, t0], respectively.
    center : array_like, optional
        Center of the ball.  Default: the origin.
    """

    def __init__(self, t0, r, kind='two-sided', center=None):
        r = float(r)
        if not r > 0:
            raise ValueError("radius should be positive, got {}.".format(r))
        if kind not in CYLINDER_KINDS:
            raise ValueError("kind should be one of {}, got {!r}."
                             .format(CYLINDER_KINDS, kind))
        self.t0 = float(t0)
        self.r = r
        self.kind = kind
        self.center = None if center is None else np.array(center, float)

    @property
    def time_interval(self):
        """Closed time extent (start, stop)."""
        start = self.t0 if self.kind == 'plus' else self.t0 - self.r
        stop = self.t0 if self.kind == 'minus' else self.t0 + self.r
        return start, stop

    def time_mask(self, times):
        """Which of the given times lie in the time extent."""
        times = np.asarray(times, dtype=float)
        start, stop = self.time_interval
        eps = 1e-12 * max(1., abs(start), abs(stop))
        return (times >= start - eps) & (times <= stop + eps)

    def ball_mask(self, grid):
        """Which lattice points lie in the closed ball, shape grid.shape."""
        center = np.zeros(grid.d) if self.center is None else self.center
        if center.shape != (grid.d,):
            raise ValueError("ball center has {} components, grid has "
                             "dimension {}.".format(center.size, grid.d))
        z = grid.minimum_image(grid.points - center)
        distance = np.sqrt(np.sum(z**2, axis=-1))
        return distance <= self.r * (1. + 1e-12)

    def mask(self, grid, times):
        """Membership of the space-time lattice points.

        Parameters
        ----------
        grid : `~fracflow.grid.PeriodicGrid`
            Spatial lattice.
        times : array_like
            Sample times.

        Returns
        -------
        mask : `~numpy.ndarray`
            Boolean, shape ``(len(times),) + grid.shape``.
        """
        if not isinstance(grid, PeriodicGrid):
            raise TypeError("grid should be a PeriodicGrid instance.")
        time_mask = self.time_mask(np.atleast_1d(times))
        ball = self.ball_mask(grid)
        return time_mask[(slice(None),) + (np.newaxis,) * grid.d] & ball

    def shifted(self, dt=0., dx=None):
        """Cylinder translated by ``dt`` in time and ``dx`` in space."""
        center = self.center
        if dx is not None:
            dx = np.asarray(dx, dtype=float)
            center = dx if center is None else center + dx
        return self.__class__(self.t0 + dt, self.r, self.kind, center)

    def scaled(self, factor):
        """Cylinder with the radius multiplied by ``factor``."""
        return self.__class__(self.t0, self.r * factor, self.kind,
                              self.center)

    def __eq__(self, other):
        if not isinstance(other, Cylinder):
            return NotImplemented
        centers_equal = (
            (self.center is None and other.center is None)
            or (self.center is not None and other.center is not None
                and np.array_equal(self.center, other.center)))
        return (self.t0 == other.t0 and self.r == other.r
                and self.kind == other.kind and centers_equal)

    def __repr__(self):
        return ('{0}(t0={1.t0}, r={1.r}, kind={1.kind!r}, center={2})'
                .format(self.__class__.__name__, self,
                        None if self.center is None
                        else self.center.tolist()))


def fractional_constant(alpha, d):
    """Normalization c such that c|y|^{-d-alpha} generates -(-Δ)^{α/2}."""
    return (alpha * 2.**(alpha - 1) * gamma_function((d + alpha) / 2)
            / (np.pi**(d / 2) * gamma_function(1 - alpha / 2)))


class KernelSpec:
    """Symmetric jump kernel K(t, y) comparable to |y|^{-d-alpha}.

    Parameters
    ----------
    alpha : float
        Order, in (0, 2).
    kappa0, kappa1 : float
        Lower and upper constants, ``0 < kappa0 <= kappa1``.
    profile : callable, optional
        Called as ``profile(t, y)`` with ``y`` of shape ``(..., d)``.
        Default: ``kappa0 |y|^{-d-alpha}``.
    """

    def __init__(self, alpha, kappa0, kappa1, profile=None):
        alpha = float(alpha)
        if not 0. < alpha < 2.:
            raise ValueError("alpha should be in (0, 2), got {}."
                             .format(alpha))
        if not 0. < kappa0 <= kappa1:
            raise ValueError("need 0 < kappa0 <= kappa1, got {} and {}."
                             .format(kappa0, kappa1))
        self.alpha = alpha
        self.kappa0 = float(kappa0)
        self.kappa1 = float(kappa1)
        if profile is None:
            def profile(t, y):
                r = np.sqrt(np.sum(np.asarray(y)**2, axis=-1))
                return self.kappa0 * r ** -(y.shape[-1] + self.alpha)
        self.profile = profile

    @classmethod
    def fractional(cls, alpha, d):
        """Kernel of the fractional Laplacian itself.

        With this kernel, `~fracflow.norms.energy_form` pairs with
        `~fracflow.spectral.frac_laplacian` without rescaling.
        """
        c = fractional_constant(alpha, d)
        return cls(alpha, c, c)

    def __call__(self, t, y):
        return self.profile(t, np.asarray(y, dtype=float))

    def verify(self, d, times=(0.,), radii=None, ndirections=16):
        """Check the two-sided bound and symmetry on a test lattice.

        Raises
        ------
        ValueError
            If any sampled value violates the bounds or K(t,y) != K(t,-y).
        """
        radii = (np.logspace(-2, 1, 13) if radii is None
                 else np.asarray(radii, dtype=float))
        if d == 1:
            directions = np.array([[1.], [-1.]])
        else:
            angle = np.linspace(0, 2 * np.pi, ndirections, endpoint=False)
            directions = np.stack([np.cos(angle), np.sin(angle)], axis=-1)
        y = radii[:, np.newaxis, np.newaxis] * directions
        envelope = radii[:, np.newaxis] ** -(d + self.alpha)
        for t in times:
            value = self(t, y)
            if not (np.all(value >= self.kappa0 * envelope * (1 - 1e-12))
                    and np.all(value <= self.kappa1 * envelope
                               * (1 + 1e-12))):
                raise ValueError("kernel violates kappa0|y|^(-d-alpha) <= "
                                 "K <= kappa1|y|^(-d-alpha) at t={}."
                                 .format(t))
            if not np.allclose(value, self(t, -y), rtol=1e-12, atol=0.):
                raise ValueError("kernel is not symmetric in y at t={}."
                                 .format(t))
        return True

    def __repr__(self):
        return ('{0}(alpha={1.alpha}, kappa0={1.kappa0}, kappa1={1.kappa1})'
                .format(self.__class__.__name__, self))


def _psi(s):
    with np.errstate(divide='ignore'):
        return np.where(s > 0, np.exp(-1. / np.where(s > 0, s, 1.)), 0.)


def smooth_cutoff(x):
    """Smooth radial bump: 1 for |x| <= 1, 0 for |x| >= 2.

    Parameters
    ----------
    x : array_like
        Points, shape ``(..., d)``.
    """
    s = np.sqrt(np.sum(np.asarray(x, dtype=float)**2, axis=-1))
    upper = _psi(2. - s)
    return upper / (upper + _psi(s - 1.))


class LocalizationSpec:
    """Cut-offs chi((x - z) / r) over a finite set of shifts z.

    Parameters
    ----------
    r : float
        Cut-off radius.
    centers : array_like
        Shift lattice, shape ``(nshift, d)``.
    chi : callable, optional
        Profile, 1 on the unit ball and 0 outside the ball of radius 2.
        Default: `smooth_cutoff`.
    """

    def __init__(self, r, centers, chi=smooth_cutoff):
        r = float(r)
        if not r > 0:
            raise ValueError("cut-off radius should be positive.")
        centers = np.array(centers, dtype=float)
        if centers.ndim == 1:
            centers = centers[:, np.newaxis]
        self.r = r
        self.centers = centers
        self.chi = chi

    @classmethod
    def covering(cls, grid, r, step=None):
        """Shifts on a square lattice of spacing ``step`` (default r)."""
        step = r if step is None else step
        count = max(1, int(np.ceil(grid.period / step)))
        offsets = -grid.period / 2 + grid.period / count * np.arange(count)
        centers = np.array(list(itertools.product(offsets, repeat=grid.d)))
        return cls(r, centers)

    def cutoff(self, grid, z):
        """Samples of chi((x - z) / r) on the lattice, shape grid.shape."""
        z = np.asarray(z, dtype=float)
        return self.chi(grid.minimum_image(grid.points - z) / self.r)

    def __len__(self):
        return len(self.centers)

    def __repr__(self):
        return ('{0}(r={1.r}, {2} centers)'
                .format(self.__class__.__name__, self, len(self)))
