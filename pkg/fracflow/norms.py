# Licensed under the GPLv3 - see LICENSE
"""Lattice versions of the mixed norms and nonlocal functionals.

All integrals are uniform-lattice (periodic trapezoidal) sums over the
fundamental cell; time integrals use the trapezoidal rule on the sample
times.  A field with a single time sample is given unit time weight, so
that space-time norms reduce to the spatial norm.
"""
import itertools
from collections import namedtuple

import numpy as np
from scipy.integrate import trapezoid

from .grid import SampledField
from .geometry import KernelSpec, LocalizationSpec, smooth_cutoff
from . import spectral


__all__ = ['MultiIndex', 'IndexPair', 'IndexVerdict',
           'mixed_norm', 'space_time_norm', 'tail', 'tail_truncation_bound',
           'energy_form', 'valpha_norm', 'bessel_norm', 'localized_norm',
           'index_classify', 'holder_seminorm', 'bmo_seminorm',
           'critical_drift_norm', 'young_convolution', 'sobolev_ball_norm',
           'interpolation_constant']


class MultiIndex:
    """Vector of exponents p in (0, inf], one per axis.

    Parameters
    ----------
    exponents : float or sequence of float
        Exponents; `numpy.inf` is allowed.
    n : int, optional
        Length to broadcast a single exponent to.
    """

    def __init__(self, exponents, n=None):
        if isinstance(exponents, MultiIndex):
            exponents = exponents.exponents
        exponents = np.array(exponents, dtype=float).reshape(-1)
        if n is not None and exponents.size == 1:
            exponents = np.repeat(exponents, n)
        if exponents.size == 0:
            raise ValueError("need at least one exponent.")
        if np.any(np.isnan(exponents)) or np.any(exponents <= 0):
            raise ValueError("exponents should be in (0, inf], got {}."
                             .format(exponents.tolist()))
        exponents.flags.writeable = False
        self._exponents = exponents

    @property
    def exponents(self):
        return self._exponents

    @property
    def inverse(self):
        """Vector 1/p (zero for infinite entries)."""
        return 1. / self._exponents

    @property
    def inverse_sum(self):
        """|1/p| = sum_i 1/p_i."""
        return float(self.inverse.sum())

    def __len__(self):
        return self._exponents.size

    def __iter__(self):
        return iter(self._exponents.tolist())

    def __getitem__(self, item):
        return self._exponents[item]

    def __eq__(self, other):
        if not isinstance(other, MultiIndex):
            return NotImplemented
        return np.array_equal(self._exponents, other._exponents)

    def __repr__(self):
        return '{}({})'.format(self.__class__.__name__,
                               self._exponents.tolist())


IndexVerdict = namedtuple('IndexVerdict',
                          ['member', 'regime', 'scaling_exponent', 'value'])
IndexVerdict.__doc__ = """Classification of an index pair.

Attributes
----------
member : bool
    Whether alpha/q + |1/p| < alpha - beta.
regime : str
    'sub', 'critical', 'super' or 'out-of-range'.
scaling_exponent : float
    alpha - 1 - |1/p| - alpha/q, the power of lambda in the drift norm.
value : float
    The evaluated alpha/q + |1/p|.
"""


class IndexPair:
    """Integrability pair (q, p) for a drift or forcing term.

    Parameters
    ----------
    q : float
        Time exponent, in (1, inf).
    p : `MultiIndex` or sequence
        Space exponents, each in (1, inf).
    alpha : float
        Diffusion order, in (0, 2].
    beta : float
        Regularity offset, in [0, alpha/2).
    """

    def __init__(self, q, p, alpha, beta=0.):
        alpha = float(alpha)
        beta = float(beta)
        q = float(q)
        if not 0. < alpha <= 2.:
            raise ValueError("alpha should be in (0, 2], got {}."
                             .format(alpha))
        if not 0. <= beta < alpha / 2:
            raise ValueError("beta should be in [0, alpha/2), got {}."
                             .format(beta))
        p = MultiIndex(p)
        if not 1. < q < np.inf:
            raise ValueError("q should be in (1, inf), got {}.".format(q))
        if np.any(p.exponents <= 1) or np.any(np.isinf(p.exponents)):
            raise ValueError("p entries should be in (1, inf), got {}."
                             .format(p.exponents.tolist()))
        self.q = q
        self.p = p
        self.alpha = alpha
        self.beta = beta

    @property
    def value(self):
        """alpha/q + |1/p|."""
        return self.alpha / self.q + self.p.inverse_sum

    @property
    def scaling_exponent(self):
        """Exponent e with ||b_lambda|| = lambda^e ||b||."""
        return self.alpha - 1. - self.p.inverse_sum - self.alpha / self.q

    def classify(self, atol=1e-12):
        """Membership in the index set and scaling regime."""
        member = self.value < self.alpha - self.beta
        exponent = self.scaling_exponent
        if abs(exponent) <= atol:
            regime = 'critical'
        elif exponent > 0:
            regime = 'sub'
        elif exponent > -1.:
            regime = 'super'
        else:
            regime = 'out-of-range'
        return IndexVerdict(bool(member), regime, exponent, self.value)

    def __repr__(self):
        return ('{0}(q={1.q}, p={2}, alpha={1.alpha}, beta={1.beta})'
                .format(self.__class__.__name__, self,
                        self.p.exponents.tolist()))


def index_classify(q, p, alpha, beta=0.):
    """Classify (q, p) for given alpha and beta.

    Returns
    -------
    verdict : `IndexVerdict`
        Membership alpha/q + |1/p| < alpha - beta, the scaling regime and
        the scaling exponent alpha - 1 - |1/p| - alpha/q.
    """
    return IndexPair(q, p, alpha, beta).classify()


def _magnitude(f):
    # Pointwise Euclidean norm for vector fields.
    values = f.values
    if f.is_vector:
        return np.sqrt(np.sum(values**2, axis=-1))
    return np.abs(values)


def _reduce(values, p, weight, axis):
    if np.isinf(p):
        return values.max(axis=axis)
    return (np.sum(values**p, axis=axis) * weight) ** (1. / p)


def _single_time(f):
    # Raises unless the field has exactly one time sample.
    return f.snapshot


def _lattice_norms(f, p):
    """Spatial mixed norm of every time sample."""
    grid = f.grid
    p = MultiIndex(p, n=grid.d)
    if len(p) != grid.d:
        raise ValueError("need {} spatial exponents, got {}."
                         .format(grid.d, len(p)))
    values = _magnitude(f)
    # Innermost (last) axis first.
    for axis in range(grid.d, 0, -1):
        values = _reduce(values, p[axis - 1], grid.spacing, axis)
    return values


def _time_norm(norms, times, q):
    q = float(q)
    if not q > 0:
        raise ValueError("q should be in (0, inf], got {}.".format(q))
    if np.isinf(q):
        return float(norms.max())
    if len(times) == 1:
        return float(norms[0])
    return float(trapezoid(norms**q, times) ** (1. / q))


def mixed_norm(f, p):
    """Mixed Lebesgue norm of a field at a single time.

    Parameters
    ----------
    f : `~fracflow.grid.SampledField`
        Field at a single time; vector fields use the pointwise
        Euclidean magnitude.
    p : `MultiIndex`, float or sequence of float
        Exponents per spatial axis; the last axis is integrated first.

    Returns
    -------
    norm : float
        (int (... (int |f|^{p_d} dx_d)^{p_{d-1}/p_d} ...) dx_1)^{1/p_1},
        with infinite entries replaced by a maximum.
    """
    _single_time(f)
    return float(_lattice_norms(f, p)[0])


def space_time_norm(f, q, p):
    """L^q in time of the spatial mixed L^p norm; q=inf gives the maximum."""
    return _time_norm(_lattice_norms(f, p), f.times, q)


def tail(f, r, alpha, center=None):
    """Weighted far-field integral of |f| outside the closed ball B_r(center).

    The integral of |f(y)| / |y|^{d+alpha} is truncated at the boundary of
    the fundamental cell; see `tail_truncation_bound` for the discarded
    part.

    Parameters
    ----------
    f : `~fracflow.grid.SampledField`
        Scalar field at a single time.
    r : float
        Radius, less than half the period.
    alpha : float
        Order of the kernel.
    center : array_like, optional
        Center of the ball.  Default: the origin.
    """
    grid = f.grid
    r = float(r)
    if not 0 < r < grid.period / 2:
        raise ValueError("radius should be in (0, {}), got {}."
                         .format(grid.period / 2, r))
    z = grid.points if center is None else grid.minimum_image(
        grid.points - np.asarray(center, dtype=float))
    distance = np.sqrt(np.sum(z**2, axis=-1))
    outside = distance > r
    weight = np.zeros(grid.shape)
    weight[outside] = distance[outside] ** -(grid.d + alpha)
    return float(np.sum(np.abs(f.snapshot) * weight) * grid.cell_volume)


def tail_truncation_bound(f, alpha):
    """Bound on the tail mass beyond the inscribed ball of the cell.

    sup|f| times the integral of |y|^{-d-alpha} over |y| > L/2.
    """
    grid = f.grid
    sphere = 2. if grid.d == 1 else 2. * np.pi
    return float(f.sup().max() * sphere * (grid.period / 2) ** -alpha
                 / alpha)


def _kernel_weights(grid, kernel, t, delta, images):
    z = grid.index_displacements()
    distance = np.sqrt(np.sum(z**2, axis=-1))
    near = distance < delta
    weights = np.zeros(grid.shape)
    safe = np.where(near[..., np.newaxis], grid.period, z)
    for shift in itertools.product(range(-images, images + 1),
                                   repeat=grid.d):
        shift = np.array(shift, dtype=float) * grid.period
        if np.all(shift == 0):
            weights += np.where(near, 0., kernel(t, safe))
        else:
            weights += kernel(t, z + shift)
    return weights, near


def energy_form(f, g, kernel, delta=None, images=0, local_correction=False):
    """Nonlocal energy form of two fields at a single time.

    Evaluates (1/2) sum_{|x-y| >= delta} (f(x)-f(y))(g(x)-g(y)) K(t, x-y)
    over the fundamental cell with periodic distance.  For the kernel of
    `~fracflow.geometry.KernelSpec.fractional`, this approximates
    <-Δ^{α/2} f, g>.

    Parameters
    ----------
    f, g : `~fracflow.grid.SampledField`
        Scalar fields on the same grid, at a single time.
    kernel : `~fracflow.geometry.KernelSpec`
        Jump kernel, evaluated at the time of the fields.
    delta : float, optional
        Singular cut-off.  Default: one lattice spacing.
    images : int, optional
        Number of periodic images of the kernel to include along each
        axis.  Default: 0, i.e., minimum image only.
    local_correction : bool, optional
        Whether to add the second-order Taylor estimate of the excised
        neighbourhood, (1/2) int grad f . grad g * int_{|z|<rho} z^2 K/d,
        with rho the radius of a ball of the excised volume.
        Default: `False`.
    """
    f.check_compatible(g)
    if f.is_vector or g.is_vector:
        raise ValueError("energy form requires scalar fields.")
    grid = f.grid
    fv = f.snapshot
    gv = g.snapshot
    delta = grid.spacing if delta is None else float(delta)
    if delta < grid.spacing * (1 - 1e-12):
        raise ValueError("cut-off should be at least one lattice spacing.")
    if not isinstance(kernel, KernelSpec):
        raise TypeError("kernel should be a KernelSpec instance.")
    t = f.times[0]
    weights, near = _kernel_weights(grid, kernel, t, delta, images)
    F = grid.forward(fv, start=0)
    G = grid.forward(gv, start=0)
    # c(z) + c(-z), with c(z) = sum_x f(x) g(x+z); symmetric in f and g.
    cross = grid.backward(2. * (F.real * G.real + F.imag * G.imag), start=0)
    difference = 2. * np.sum(fv * gv) - cross
    value = 0.5 * np.sum(weights * difference) * grid.cell_volume ** 2
    if local_correction:
        volume = near.sum() * grid.cell_volume
        rho = volume / 2. if grid.d == 1 else np.sqrt(volume / np.pi)
        sphere = 2. if grid.d == 1 else 2. * np.pi
        direction = np.zeros(grid.d)
        direction[0] = rho
        strength = float(kernel(t, direction)) * rho ** (grid.d
                                                         + kernel.alpha)
        moment = (strength * sphere * rho ** (2. - kernel.alpha)
                  / ((2. - kernel.alpha) * grid.d))
        grad_f = spectral.gradient(f).snapshot
        grad_g = spectral.gradient(g).snapshot
        pairing = np.sum(grad_f * grad_g) * grid.cell_volume
        value += 0.5 * moment * pairing
    return float(value)


def valpha_norm(f, alpha):
    """Energy-space norm ||f||_{L^inf_t L^2_x} + ||Δ^{α/4} f||_{L^2_{t,x}}."""
    spectral.check_alpha(alpha)
    half = spectral.fractional_power(f, alpha / 2)
    return (space_time_norm(f, np.inf, 2.)
            + space_time_norm(half, 2., 2.))


def _check_bessel_exponents(p, d):
    p = MultiIndex(p, n=d)
    if np.any(p.exponents <= 1):
        raise ValueError("Bessel norms need exponents in (1, inf], got {}."
                         .format(p.exponents.tolist()))
    return p


def _bessel_field(f, beta, p):
    # Returns the per-time Bessel norms.
    beta = float(beta)
    if beta >= 0:
        return (_lattice_norms(f, p)
                + _lattice_norms(spectral.fractional_power(f, beta), p))
    return _lattice_norms(spectral.bessel_potential(f, beta), p)


def bessel_norm(f, beta, p):
    """Bessel potential norm at a single time.

    For ``beta >= 0`` this is ||f||_p + ||Δ^{β/2} f||_p; for negative
    ``beta`` it is ||(I - Δ)^{β/2} f||_p.
    """
    _single_time(f)
    p = _check_bessel_exponents(p, f.grid.d)
    return float(_bessel_field(f, beta, p)[0])


def localized_norm(f, beta, p, q, loc):
    """Supremum over shifts z of ||f chi^z_r||_{L^q_t H^beta_p}.

    Parameters
    ----------
    f : `~fracflow.grid.SampledField`
        Scalar field, possibly at several times.
    beta : float
        Bessel order.
    p : `MultiIndex` or sequence
        Space exponents, each in (1, inf].
    q : float
        Time exponent.
    loc : `~fracflow.geometry.LocalizationSpec`
        Cut-off radius and shifts.
    """
    if not isinstance(loc, LocalizationSpec):
        raise TypeError("loc should be a LocalizationSpec instance.")
    if len(loc) == 0:
        raise ValueError("shift lattice is empty.")
    p = _check_bessel_exponents(p, f.grid.d)
    best = 0.
    for z in loc.centers:
        localized = f * loc.cutoff(f.grid, z)
        value = _time_norm(_bessel_field(localized, beta, p), f.times, q)
        best = max(best, value)
    return best


def _pairwise_offsets(grid, max_offset=None):
    m = np.fft.fftfreq(grid.n, d=1. / grid.n).astype(int)
    if max_offset is not None:
        m = m[np.abs(m) <= max_offset]
    for offset in itertools.product(m.tolist(), repeat=grid.d):
        if any(offset):
            yield offset


def holder_seminorm(f, gamma, max_offset=None):
    """Lattice Hölder seminorm sup |f(x)-f(y)| / |x-y|^gamma.

    Computed per time sample with periodic distance; the maximum over
    time samples is returned.  ``max_offset`` limits the lattice offsets
    considered (in points per axis).
    """
    grid = f.grid
    gamma = float(gamma)
    if not 0 < gamma <= 1:
        raise ValueError("gamma should be in (0, 1], got {}.".format(gamma))
    axes = tuple(range(1, grid.d + 1))
    best = 0.
    for offset in _pairwise_offsets(grid, max_offset):
        z = grid.minimum_image(np.array(offset) * grid.spacing)
        difference = f.values - np.roll(f.values, offset, axis=axes)
        if f.is_vector:
            difference = np.sqrt(np.sum(difference**2, axis=-1))
        ratio = np.abs(difference).max() / np.sqrt(np.sum(z**2)) ** gamma
        best = max(best, ratio)
    return float(best)


def _ball_offsets(grid, r):
    m = np.fft.fftfreq(grid.n, d=1. / grid.n).astype(int)
    offsets = []
    for offset in itertools.product(m.tolist(), repeat=grid.d):
        if np.sqrt(np.sum(np.square(offset))) * grid.spacing <= r:
            offsets.append(offset)
    return offsets


def bmo_seminorm(f, radii=None):
    """Lattice BMO seminorm: sup over balls of the mean deviation.

    Parameters
    ----------
    f : `~fracflow.grid.SampledField`
        Scalar or vector field; the maximum over time samples is taken.
    radii : array_like, optional
        Ball radii.  Default: dyadic multiples of the spacing up to a
        quarter period.
    """
    grid = f.grid
    if radii is None:
        radii = grid.spacing * 2. ** np.arange(
            int(np.log2(grid.n / 4)) + 1)
    axes = tuple(range(1, grid.d + 1))
    best = 0.
    for r in np.atleast_1d(radii):
        offsets = [tuple(-o for o in offset)
                   for offset in _ball_offsets(grid, r)]
        average = sum(np.roll(f.values, offset, axis=axes)
                      for offset in offsets) / len(offsets)
        deviation = 0.
        for offset in offsets:
            difference = np.roll(f.values, offset, axis=axes) - average
            if f.is_vector:
                difference = np.sqrt(np.sum(difference**2, axis=-1))
            deviation = deviation + np.abs(difference)
        best = max(best, float((deviation / len(offsets)).max()))
    return best


def critical_drift_norm(b, alpha):
    """Critical drift norm: Hölder of order 1-alpha, or BMO for alpha=1."""
    alpha = float(alpha)
    if 0 < alpha < 1:
        return holder_seminorm(b, 1. - alpha)
    elif alpha == 1:
        return bmo_seminorm(b)
    raise ValueError("critical drift norm is defined for alpha in (0, 1], "
                     "got {}.".format(alpha))


def young_convolution(f, g):
    """Periodic lattice convolution (f * g)(x) = sum_y f(x-y) g(y) dy."""
    f.check_compatible(g)
    grid = f.grid
    F = grid.forward(f.values)
    G = grid.forward(g.values)
    # The phase moves the origin from the cell corner to its center.
    return f.with_values(grid.backward(F * G * grid.phase)
                         * grid.cell_volume)


def sobolev_ball_norm(f, alpha, r, R, center=None):
    """Ball-restricted fractional Sobolev functional of f eta.

    Evaluates (1 + R^d / (R-r)^{d+alpha}) ||f eta||_2 plus the square root
    of the double integral of ((f eta)(x) - (f eta)(y))^2 / |x-y|^{d+alpha}
    over B_R x B_R, where eta is a smooth cut-off equal to 1 on B_{r/2}
    and vanishing outside B_r.
    """
    grid = f.grid
    if not 0 < r < R < grid.period / 2:
        raise ValueError("need 0 < r < R < {}.".format(grid.period / 2))
    center = np.zeros(grid.d) if center is None else np.asarray(center)
    z = grid.minimum_image(grid.points - center)
    eta = smooth_cutoff(2. * z / r)
    values = f.snapshot * eta
    l2 = np.sqrt(np.sum(values**2) * grid.cell_volume)
    inside = np.sqrt(np.sum(z**2, axis=-1)) <= R
    x = z[inside]
    v = values[inside]
    distance = np.sqrt(np.sum((x[:, np.newaxis] - x[np.newaxis])**2,
                              axis=-1))
    np.fill_diagonal(distance, np.inf)
    double = np.sum((v[:, np.newaxis] - v[np.newaxis])**2
                    * distance ** -(grid.d + alpha)) * grid.cell_volume**2
    factor = 1. + R**grid.d / (R - r) ** (grid.d + alpha)
    return float(factor * l2 + np.sqrt(double))


def interpolation_constant(family, s, s0, s1, p, q, r, theta):
    """Smallest C with ||f||_{H^s_p} <= C ||f||^{1-θ}_{H^{s0}_q} ||f||^θ_{H^{s1}_r}.

    Calibrated by brute force over a family of single-time fields.
    """
    theta = float(theta)
    if not 0 <= theta <= 1:
        raise ValueError("theta should be in [0, 1], got {}.".format(theta))
    best = 0.
    for f in family:
        if not isinstance(f, SampledField):
            raise TypeError("family members should be SampledField "
                            "instances.")
        lhs = bessel_norm(f, s, p)
        rhs = (bessel_norm(f, s0, q) ** (1. - theta)
               * bessel_norm(f, s1, r) ** theta)
        best = max(best, lhs / rhs)
    return best
