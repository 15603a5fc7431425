# Licensed under the GPLv3 - see LICENSE
"""Numerical checks of the local regularity theory.

The functions here take computed or synthetic solutions, sampled as
`~fracflow.grid.SampledField` instances, and evaluate the quantities that
enter weak formulations, Harnack and oscillation estimates, Hölder fits,
global sup bounds, De Giorgi classes and Moser iterations.  Suprema and
infima are lattice extrema over the points inside a cylinder; there is no
subgrid interpolation.

The tail terms of the Harnack and oscillation estimates use the tail of
the negative part truncated to the fundamental cell (see
`~fracflow.norms.tail`), which is only a surrogate for the whole-space
quantity.
"""
from collections import namedtuple

import numpy as np

from .grid import SampledField
from .geometry import Cylinder, KernelSpec, LocalizationSpec
from .norms import energy_form, localized_norm, space_time_norm, tail
from . import spectral


__all__ = ['OscReport', 'HarnackReport', 'HolderFit', 'TruncationProfile',
           'BumpFunction', 'bump_bank', 'weak_residual', 'oscillation',
           'harnack_report', 'oscillation_decay_ratio', 'holder_fit',
           'linfty_ratio', 'degiorgi_profile', 'moser_iteration_constant',
           'moser_partial_product', 'scaling_transform', 'resample']


OscReport = namedtuple('OscReport', ['cylinder', 'osc', 'sup', 'inf'])
OscReport.__doc__ = """Oscillation of a field over a cylinder.

Attributes
----------
cylinder : `~fracflow.geometry.Cylinder`
osc : float
    ``sup - inf``.
sup, inf : float
    Lattice extrema over the points inside the cylinder.
"""

HolderFit = namedtuple('HolderFit', ['exponent', 'r_squared', 'radii',
                                     'oscillations', 'discarded',
                                     'zero_oscillation'])
HolderFit.__doc__ = """Least-squares fit of log oscillation against log radius.

Attributes
----------
exponent : float
    Fitted slope; `numpy.inf` if the field does not oscillate.
r_squared : float
    Coefficient of determination of the fit (NaN if degenerate).
radii, oscillations : `~numpy.ndarray`
    Radii used and the oscillations over the corresponding cylinders.
discarded : int
    Number of radii dropped for lying below the lattice floor.
zero_oscillation : bool
    Whether all oscillations vanished.
"""

BANK_SCALES = (0.45, 0.3, 0.15)
BANK_CENTERS = 5


def _check_scalar(u, name='u'):
    if not isinstance(u, SampledField):
        raise TypeError("{} should be a SampledField instance.".format(name))
    if u.is_vector:
        raise ValueError("{} should be a scalar field.".format(name))


def _time_weights(times):
    """Trapezoidal weights; a single sample gets unit weight."""
    times = np.asarray(times, dtype=float)
    if len(times) == 1:
        return np.ones(1)
    steps = np.diff(times)
    weights = np.zeros(len(times))
    weights[:-1] += steps / 2
    weights[1:] += steps / 2
    return weights


def _in_time(field, u, vector=False):
    """Values of ``field`` at the times of ``u``, or `None`."""
    if field is None:
        return None
    if not isinstance(field, SampledField):
        raise TypeError("expected a SampledField, got {!r}.".format(field))
    if field.grid != u.grid:
        raise ValueError("fields are on different grids.")
    if field.is_vector != vector:
        raise ValueError("expected a {} field."
                         .format('vector' if vector else 'scalar'))
    if field.ntimes == 1:
        return np.broadcast_to(field.values,
                               (u.ntimes,) + field.values.shape[1:])
    u.check_compatible(field)
    return field.values


def _psi(s):
    return np.where(np.abs(s) < 1., (1. - s**2)**3, 0.)


def _dpsi(s):
    return np.where(np.abs(s) < 1., -6. * s * (1. - s**2)**2, 0.)


class BumpFunction:
    """Tensor bump (1-s²)³₊ in time and in every spatial coordinate.

    Parameters
    ----------
    t0 : float
        Center time.
    t_radius : float
        Half-width of the time support.
    center : array_like
        Center of the spatial support.
    radius : float
        Half-width of the spatial support along each axis.
    """

    def __init__(self, t0, t_radius, center, radius):
        self.t0 = float(t0)
        self.t_radius = float(t_radius)
        self.center = np.array(center, dtype=float).reshape(-1)
        self.radius = float(radius)
        if not (self.t_radius > 0 and self.radius > 0):
            raise ValueError("bump radii should be positive.")

    def check(self, grid, times):
        """Raise unless the support lies inside the sampled box."""
        times = np.asarray(times, dtype=float)
        eps = 1e-12 * max(1., abs(self.t0))
        if (self.t0 - self.t_radius < times[0] - eps
                or self.t0 + self.t_radius > times[-1] + eps
                or self.radius >= grid.period / 2):
            raise ValueError("test function support {!r} touches the "
                             "boundary of the sampled box.".format(self))
        if self.center.shape != (grid.d,):
            raise ValueError("test function center has {} components, "
                             "grid has dimension {}."
                             .format(self.center.size, grid.d))

    def spatial(self, grid):
        z = grid.minimum_image(grid.points - self.center) / self.radius
        return np.prod(_psi(z), axis=-1)

    def __call__(self, grid, times):
        """Samples of φ and ∂_tφ, each of shape ``(ntimes,) + grid.shape``.
        """
        s = (np.asarray(times, dtype=float) - self.t0) / self.t_radius
        space = self.spatial(grid)
        expand = (slice(None),) + (np.newaxis,) * grid.d
        return (_psi(s)[expand] * space,
                (_dpsi(s) / self.t_radius)[expand] * space)

    def __repr__(self):
        return ('{0}(t0={1.t0}, t_radius={1.t_radius}, center={2}, '
                'radius={1.radius})'.format(self.__class__.__name__, self,
                                            self.center.tolist()))


def bump_bank(grid, times, scales=BANK_SCALES, ncenters=BANK_CENTERS):
    """Bank of test functions at several scales and centers.

    For each scale s, the time half-width spans about s (ntimes-1)/2
    samples and the spatial half-width is s times the period; centers are
    spread evenly over the interior of the sampled time span and along
    a diagonal through the origin in space.

    Parameters
    ----------
    grid : `~fracflow.grid.PeriodicGrid`
        Spatial lattice.
    times : array_like
        Sample times of the fields the bank will be paired with.
    scales : sequence of float, optional
        Each in (0, 1/2).
    ncenters : int, optional
        Number of centers per scale.

    Returns
    -------
    bank : list of `BumpFunction`
    """
    times = np.asarray(times, dtype=float)
    nt = len(times)
    direction = (-0.5) ** np.arange(grid.d)
    offsets = (np.arange(ncenters) - (ncenters - 1) / 2) * grid.period / 8
    bank = []
    for scale in scales:
        half = max(1, int(round(scale * (nt - 1) / 2)))
        if nt < 2 * half + 3:
            raise ValueError("need at least {} time samples for the test "
                             "function bank, got {}."
                             .format(2 * half + 3, nt))
        indices = np.rint(np.linspace(half + 1, nt - 2 - half,
                                      ncenters)).astype(int)
        for index, offset in zip(indices, offsets):
            t_radius = min(times[index + half] - times[index],
                           times[index] - times[index - half])
            bank.append(BumpFunction(times[index], t_radius,
                                     offset * direction,
                                     scale * grid.period))
    return bank


def weak_residual(u, kernel, b=None, f=None, bank=None, full_output=False):
    """Residual of the weak formulation of ∂_t u = L u + b·∇u + f.

    For each test function φ, evaluates

        -∫∫ u ∂_tφ - ∫∫ u Lφ + ∫∫ (b·∇φ + φ div b) u - ∫∫ f φ,

    divided by ∫∫|φ|.  Space integrals are lattice sums and time
    integrals trapezoidal sums over the sample times of ``u``.

    Parameters
    ----------
    u : `~fracflow.grid.SampledField`
        Scalar field at several times.
    kernel : float or `~fracflow.geometry.KernelSpec`
        For a number α, L = Δ^{α/2} is applied as a spectral multiplier;
        for a jump kernel, ∫u Lφ is minus its energy form.
    b : `~fracflow.grid.SampledField`, optional
        Vector drift, at a single time or at the times of ``u``.
    f : `~fracflow.grid.SampledField`, optional
        Scalar forcing, at a single time or at the times of ``u``.
    bank : sequence of `BumpFunction`, optional
        Test functions.  Default: `bump_bank` for the grid and times.
    full_output : bool, optional
        Whether to return the signed residual per test function instead
        of the maximum absolute value.

    Returns
    -------
    residual : float or `~numpy.ndarray`
    """
    _check_scalar(u)
    grid = u.grid
    times = u.times
    if isinstance(kernel, KernelSpec):
        alpha = None
    else:
        alpha = spectral.check_alpha(kernel)
    bank = bump_bank(grid, times) if bank is None else list(bank)
    if len(bank) == 0:
        raise ValueError("need at least one test function.")
    b_values = _in_time(b, u, vector=True)
    div_b = (None if b is None
             else _in_time(spectral.divergence(b), u))
    f_values = _in_time(f, u)
    weights = _time_weights(times)
    residuals = []
    for bump in bank:
        bump.check(grid, times)
        phi, dphi = bump(grid, times)
        active = np.any(phi != 0., axis=tuple(range(1, grid.d + 1)))
        phi = phi[active]
        sub = u.values[active]
        sub_times = times[active]
        integrand = -np.sum(sub * dphi[active], axis=tuple(
            range(1, grid.d + 1))) * grid.cell_volume
        phi_field = SampledField(grid, phi, sub_times)
        if alpha is None:
            u_field = SampledField(grid, sub, sub_times)
            integrand += np.array([
                energy_form(u_field.at(i), phi_field.at(i), kernel)
                for i in range(len(sub_times))])
        else:
            integrand -= np.sum(
                sub * spectral.frac_laplacian(phi_field, alpha).values,
                axis=tuple(range(1, grid.d + 1))) * grid.cell_volume
        if b_values is not None:
            grad_phi = spectral.gradient(phi_field).values
            transport = (np.sum(b_values[active] * grad_phi, axis=-1)
                         + phi * div_b[active])
            integrand += np.sum(sub * transport, axis=tuple(
                range(1, grid.d + 1))) * grid.cell_volume
        if f_values is not None:
            integrand -= np.sum(f_values[active] * phi, axis=tuple(
                range(1, grid.d + 1))) * grid.cell_volume
        scale = np.sum(weights[active] * np.sum(np.abs(phi), axis=tuple(
            range(1, grid.d + 1)))) * grid.cell_volume
        residuals.append(np.sum(weights[active] * integrand) / scale)
    residuals = np.array(residuals)
    return residuals if full_output else float(np.abs(residuals).max())


def oscillation(u, cylinder):
    """Oscillation of a scalar field over the lattice points in a cylinder.

    Parameters
    ----------
    u : `~fracflow.grid.SampledField`
        Scalar field.
    cylinder : `~fracflow.geometry.Cylinder`
        Region; only sample times inside its time extent are used.

    Returns
    -------
    report : `OscReport`
    """
    _check_scalar(u)
    mask = cylinder.mask(u.grid, u.times)
    if not mask.any():
        raise ValueError("{!r} contains no sampled lattice points."
                         .format(cylinder))
    values = u.values[mask]
    sup = float(values.max())
    inf = float(values.min())
    return OscReport(cylinder, sup - inf, sup, inf)


class HarnackReport:
    """Terms of a (weak) Harnack inequality.

    Parameters
    ----------
    sup : float
        Supremum of u over the earlier cylinder, or for the weak form its
        L^p average.
    inf : float
        Infimum of u over the later cylinder.
    forcing : float
        Mixed norm of the forcing restricted to the central cylinder.
    tail : float
        Largest tail of the negative part over the time span of the
        outer cylinder.
    weak : bool
        Whether ``sup`` is an L^p average.
    """

    def __init__(self, sup, inf, forcing, tail, weak=False):
        self.sup = float(sup)
        self.inf = float(inf)
        self.forcing = float(forcing)
        self.tail = float(tail)
        self.weak = bool(weak)

    @property
    def constant(self):
        """Implied constant sup / (inf + forcing + tail); inf if undefined.
        """
        denominator = self.inf + self.forcing + self.tail
        return self.sup / denominator if denominator > 0 else np.inf

    def __repr__(self):
        return ('<{0} sup={1.sup:.6g} inf={1.inf:.6g} forcing={1.forcing:.6g}'
                ' tail={1.tail:.6g} constant={1.constant:.6g}>'
                .format(self.__class__.__name__, self))


def _forcing_term(f, u, cylinder, q0, p0):
    if f is None:
        return 0.
    _check_scalar(f, 'f')
    values = _in_time(f, u)
    in_time = cylinder.time_mask(u.times)
    if not in_time.any():
        return 0.
    mask = cylinder.mask(u.grid, u.times)
    restricted = SampledField(u.grid, (values * mask)[in_time],
                              u.times[in_time])
    return space_time_norm(restricted, q0, [p0] * u.grid.d)


def _tail_term(u, cylinder, r, alpha, center):
    in_time = cylinder.time_mask(u.times)
    negative = np.maximum(-u.values[in_time], 0.)
    if negative.size == 0 or not negative.any():
        return 0.
    return max(tail(SampledField(u.grid, part[np.newaxis]), r, alpha,
                    center) for part in negative)


def harnack_report(u, alpha, f=None, r=1., t0=0., center=None,
                   q0=np.inf, p0=np.inf, weak_exponent=None):
    """Evaluate the terms of the Harnack inequality around (t0, center).

    The supremum is taken over [t0-2r, t0-r] x B_r and the infimum over
    [t0+r, t0+2r] x B_r.  For the weak form (``weak_exponent`` given),
    the L^p average of u over [t0-2r, t0-r/2] x B_{3r/2} replaces the
    supremum and the infimum is over [t0+r/2, t0+2r] x B_{3r/2}.

    Parameters
    ----------
    u : `~fracflow.grid.SampledField`
        Scalar field, non-negative on the cylinder of radius 4r.
    alpha : float
        Order of the operator, used for the tail weights.
    f : `~fracflow.grid.SampledField`, optional
        Forcing; its norm is taken over the cylinder of radius 2r.
    r : float, optional
        Unit radius, less than half the period.
    t0 : float, optional
        Central time.
    center : array_like, optional
        Spatial center.  Default: origin.
    q0, p0 : float, optional
        Time and space exponents for the forcing norm.
    weak_exponent : float, optional
        Exponent p of the weak Harnack inequality.

    Returns
    -------
    report : `HarnackReport`
    """
    _check_scalar(u)
    r = float(r)
    outer = Cylinder(t0, 4 * r, center=center)
    mask = outer.mask(u.grid, u.times)
    if not mask.any():
        raise ValueError("{!r} contains no sampled lattice points."
                         .format(outer))
    minimum = u.values[mask].min()
    if minimum < -1e-8:
        raise ValueError("u should be non-negative on {!r}, but reaches "
                         "{:.3g}.".format(outer, minimum))
    if weak_exponent is None:
        sup = oscillation(u, Cylinder(t0 - 2 * r, r, 'plus', center)).sup
        inf = oscillation(u, Cylinder(t0 + 2 * r, r, 'minus', center)).inf
    else:
        p = float(weak_exponent)
        if not p > 0:
            raise ValueError("weak exponent should be positive.")
        earlier = Cylinder(t0 - 2 * r, 1.5 * r, 'plus', center)
        earlier_mask = earlier.mask(u.grid, u.times)
        if not earlier_mask.any():
            raise ValueError("{!r} contains no sampled lattice points."
                             .format(earlier))
        values = np.maximum(u.values[earlier_mask], 0.)
        sup = np.mean(values ** p) ** (1. / p)
        inf = oscillation(u, Cylinder(t0 + 2 * r, 1.5 * r, 'minus',
                                      center)).inf
    forcing = _forcing_term(f, u, Cylinder(t0, 2 * r, center=center),
                            q0, p0)
    tail_term = _tail_term(u, outer, r, alpha, center)
    return HarnackReport(max(sup, 0.), max(inf, 0.), forcing, tail_term,
                         weak=weak_exponent is not None)


def oscillation_decay_ratio(u, alpha, f=None, r=1., t0=0., center=None,
                            q0=np.inf, p0=np.inf):
    """Adjusted ratio of oscillations over nested cylinders.

    Computes (osc over Q_{r/2} - forcing - tail) / osc over Q_{6r}, with
    the forcing norm over Q_{4r} and the tail term of the negative part
    over the time span of Q_{4r}.  Values below 1 indicate decay of
    oscillation.  A field that does not oscillate on Q_{6r} gives 0.
    """
    _check_scalar(u)
    r = float(r)
    small = oscillation(u, Cylinder(t0, r / 2, center=center))
    large = oscillation(u, Cylinder(t0, 6 * r, center=center))
    if large.osc == 0.:
        return 0.
    middle = Cylinder(t0, 4 * r, center=center)
    forcing = _forcing_term(f, u, middle, q0, p0)
    tail_term = _tail_term(u, middle, r, alpha, center)
    return (small.osc - forcing - tail_term) / large.osc


def holder_fit(u, t0=None, center=None, radii=None):
    """Fit a Hölder exponent from oscillations on shrinking cylinders.

    Parameters
    ----------
    u : `~fracflow.grid.SampledField`
        Scalar field.
    t0 : float, optional
        Time of the probe point.  Default: last sample time.
    center : array_like, optional
        Spatial probe point.  Default: origin.
    radii : array_like, optional
        Cylinder radii.  Default: dyadic from 1/8 of the period down.
        Radii below four lattice spacings are discarded.

    Returns
    -------
    fit : `HolderFit`
    """
    _check_scalar(u)
    grid = u.grid
    t0 = u.times[-1] if t0 is None else float(t0)
    floor = 4 * grid.spacing * (1. - 1e-12)
    if radii is None:
        radii = grid.period / 8 / 2. ** np.arange(
            max(1, int(np.log2(grid.period / 8 / floor)) + 3))
    radii = np.sort(np.asarray(radii, dtype=float).reshape(-1))[::-1]
    usable = radii >= floor
    discarded = int(np.count_nonzero(~usable))
    radii = radii[usable]
    if len(radii) < 3:
        raise ValueError("need at least 3 radii above the lattice floor "
                         "{:.3g}, got {}.".format(floor, len(radii)))
    osc = np.array([oscillation(u, Cylinder(t0, radius, center=center)).osc
                    for radius in radii])
    if np.all(osc == 0.):
        return HolderFit(np.inf, np.nan, radii, osc, discarded, True)
    if np.any(osc == 0.):
        raise ValueError("oscillation vanishes at some but not all radii.")
    x = np.log(radii)
    y = np.log(osc)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r_squared = 1. - np.sum(residual ** 2) / total if total > 0 else 1.
    return HolderFit(float(slope), float(r_squared), radii, osc, discarded,
                     False)


def linfty_ratio(u, f, q0=np.inf, p0=np.inf, loc=None, beta=0.):
    """Ratio of sup|u| to the localized norm of the forcing.

    Parameters
    ----------
    u : `~fracflow.grid.SampledField`
        Solution trajectory, typically started from zero.
    f : `~fracflow.grid.SampledField`
        Forcing.
    q0, p0 : float, optional
        Time and space exponents of the forcing norm.
    loc : `~fracflow.geometry.LocalizationSpec`, optional
        Default: cut-offs of radius a quarter period on a lattice of the
        same spacing.
    beta : float, optional
        The forcing norm is taken in the Bessel space of order -beta.
    """
    _check_scalar(u)
    _check_scalar(f, 'f')
    if loc is None:
        loc = LocalizationSpec.covering(f.grid, f.grid.period / 4)
    norm = localized_norm(f, -float(beta), [p0] * f.grid.d, q0, loc)
    if norm == 0.:
        raise ValueError("forcing vanishes, so the ratio is undefined.")
    return float(np.abs(u.values).max() / norm)


class TruncationProfile:
    """Norms of truncations (u-κ)^+ and level sets over nested cylinders.

    Attributes
    ----------
    levels, radii, exponents : `~numpy.ndarray`
        Truncation levels κ, cylinder radii τ and space-time exponents p.
    truncation : `~numpy.ndarray`
        ||1_{Q_τ} (u-κ)^+||_p, shape ``(nlevels, nradii, nexponents)``.
    level_sets : `~numpy.ndarray`
        ||1_{{u>κ} ∩ Q_τ}||_p, same shape.
    constants : `~numpy.ndarray`
        Smallest C such that (σ-τ)^γ ||1_{Q_τ}(u-κ)^+||_p is bounded by C
        times the sum of truncation norms over Q_σ for the leading
        exponents and 𝒜 times the level-set norms for the others.  Shape
        ``(nlevels, nradii, nradii, nexponents)`` indexed by
        (κ, τ, σ, p); NaN where τ >= σ or the bound vanishes.
    """

    def __init__(self, levels, radii, exponents, truncation, level_sets,
                 constants):
        self.levels = levels
        self.radii = radii
        self.exponents = exponents
        self.truncation = truncation
        self.level_sets = level_sets
        self.constants = constants

    def is_monotone(self, rtol=1e-12):
        """Nonincreasing in level and nondecreasing in radius."""
        t = self.truncation
        scale = rtol * max(1., np.abs(t).max())
        return bool(np.all(np.diff(t, axis=0) <= scale)
                    and np.all(np.diff(t, axis=1) >= -scale))

    def __repr__(self):
        return ('<{0} {1} levels, {2} radii, exponents {3}>'
                .format(self.__class__.__name__, len(self.levels),
                        len(self.radii), self.exponents.tolist()))


def _space_time_lattice_norm(values, weights, p):
    if np.isinf(p):
        return values.max() if values.size else 0.
    return np.sum(weights * values ** p) ** (1. / p)


def degiorgi_profile(u, levels, radii, exponents, gamma=0., A=1.,
                     split=None, t0=None, center=None, kind='two-sided'):
    """Truncation norms and empirical De Giorgi constants.

    Parameters
    ----------
    u : `~fracflow.grid.SampledField`
        Scalar field.
    levels : array_like
        Increasing truncation levels κ.
    radii : array_like
        Increasing cylinder radii; each pair τ < σ yields a constant.
    exponents : array_like
        Space-time exponents p, each in (0, inf].
    gamma : float, optional
        Power of (σ - τ) on the left-hand side.
    A : float, optional
        Weight of the level-set terms.
    split : int, optional
        Number of leading exponents whose truncation norms enter the
        bound; the remaining ones enter through level sets.  Default:
        all exponents.
    t0 : float, optional
        Cylinder time.  Default: middle of the sampled span.
    center : array_like, optional
        Cylinder center.  Default: origin.
    kind : {'two-sided', 'plus', 'minus'}, optional
        Cylinder kind.

    Returns
    -------
    profile : `TruncationProfile`
    """
    _check_scalar(u)
    grid = u.grid
    levels = np.asarray(levels, dtype=float).reshape(-1)
    radii = np.asarray(radii, dtype=float).reshape(-1)
    exponents = np.asarray(exponents, dtype=float).reshape(-1)
    if np.any(np.diff(levels) <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("levels and radii should be strictly increasing.")
    if np.any(~(exponents > 0)):
        raise ValueError("exponents should be in (0, inf].")
    split = len(exponents) if split is None else int(split)
    if not 0 < split <= len(exponents):
        raise ValueError("split should be in [1, {}], got {}."
                         .format(len(exponents), split))
    t0 = 0.5 * (u.times[0] + u.times[-1]) if t0 is None else float(t0)
    weights = (_time_weights(u.times)[(slice(None),)
                                      + (np.newaxis,) * grid.d]
               * grid.cell_volume)
    weights = np.broadcast_to(weights, u.values.shape)
    shape = (len(levels), len(radii), len(exponents))
    truncation = np.zeros(shape)
    level_sets = np.zeros(shape)
    for j, radius in enumerate(radii):
        mask = Cylinder(t0, radius, kind, center).mask(grid, u.times)
        inside = u.values[mask]
        w = weights[mask]
        for i, level in enumerate(levels):
            positive = np.maximum(inside - level, 0.)
            indicator = (inside > level).astype(float)
            for k, p in enumerate(exponents):
                truncation[i, j, k] = _space_time_lattice_norm(positive,
                                                               w, p)
                level_sets[i, j, k] = _space_time_lattice_norm(indicator,
                                                               w, p)
    bound = (truncation[..., :split].sum(-1)
             + A * level_sets[..., split:].sum(-1))
    gaps = radii[np.newaxis, :] - radii[:, np.newaxis]
    constants = np.full((len(levels), len(radii), len(radii),
                         len(exponents)), np.nan)
    for j in range(len(radii)):
        for m in range(j + 1, len(radii)):
            denominator = bound[:, m]
            ok = denominator > 0
            constants[ok, j, m, :] = (gaps[j, m] ** gamma
                                      * truncation[ok, j, :]
                                      / denominator[ok, np.newaxis])
    return TruncationProfile(levels, radii, exponents, truncation,
                             level_sets, constants)


def _moser_arguments(theta, gamma, beta, m, C0, q, gap):
    theta, gamma, beta, m, C0, q, gap = np.broadcast_arrays(
        *[np.asarray(x, dtype=float)
          for x in (theta, gamma, beta, m, C0, q, gap)])
    if np.any(theta <= 1):
        raise ValueError("theta should exceed 1.")
    if np.any(gamma < 0) or np.any(beta < 0):
        raise ValueError("gamma and beta should be non-negative.")
    if np.any(m < 1) or np.any(C0 <= 0):
        raise ValueError("need m >= 1 and C0 > 0.")
    if np.any((q <= 0) | (q >= 1)):
        raise ValueError("q should be in (0, 1).")
    if np.any((gap <= 0) | (gap > 1)):
        raise ValueError("radius gap should be in (0, 1].")
    growth = gamma * np.log(2.) + beta * np.log(theta)
    base = np.log(2. * m * C0) - gamma * np.log(gap)
    return theta, q, growth, base


def moser_iteration_constant(theta, gamma, beta, m, C0, q, gap):
    """Closed form of the infinite product bounding a Moser iteration.

    Evaluates

        exp(θ/(θ-1)² ln(2^γ θ^β) + 1/(θ-1) ln(gap^{-γ} 2 m C0))^{θ/q},

    the limit of `moser_partial_product`.  Arguments broadcast.
    """
    theta, q, growth, base = _moser_arguments(theta, gamma, beta, m, C0,
                                              q, gap)
    log = (theta / (theta - 1.) ** 2 * growth + base / (theta - 1.))
    result = np.exp(log * theta / q)
    return result if result.ndim else float(result)


def moser_partial_product(theta, gamma, beta, m, C0, q, gap, terms):
    """Product over j=1..terms of (2^{γj} gap^{-γ} 2mC0 θ^{βj})^{θ^{1-j}/q}.
    """
    theta, q, growth, base = _moser_arguments(theta, gamma, beta, m, C0,
                                              q, gap)
    j = np.arange(1, int(terms) + 1).reshape((-1,) + (1,) * theta.ndim)
    log = np.sum(theta ** (1. - j) * (j * growth + base), axis=0) / q
    result = np.exp(log)
    return result if result.ndim else float(result)


SCALING_POWERS = {'u': lambda alpha: 0., 'b': lambda alpha: alpha - 1.,
                  'f': lambda alpha: alpha}


def _interpolation_matrix(grid, targets):
    # Trigonometric interpolant of the lattice samples along one axis.
    x = grid.coordinates[0].reshape(-1)
    k = 2. * np.pi / grid.period * np.fft.fftfreq(grid.n, 1. / grid.n)
    phases = np.exp(1j * k * (targets[:, np.newaxis, np.newaxis]
                              - x[np.newaxis, :, np.newaxis]))
    return phases.sum(-1).real / grid.n


def scaling_transform(field, lam, alpha, kind='u', periodic=False):
    """Parabolic rescaling of a solution, drift or forcing.

    Returns λ^s g(λ^α t, λx), with s = 0, α-1 or α for ``kind`` 'u', 'b'
    or 'f'.  The field is taken to vanish outside the fundamental cell:
    for λ > 1 points mapped beyond the cell are set to zero, while for
    λ < 1 the field should vanish where its rescaled support would leave
    the cell.  With ``periodic`` set, the field is instead extended
    periodically, which for integer λ maps periodic solutions to periodic
    solutions exactly.  Off-lattice values are evaluated with the
    trigonometric interpolant.

    Parameters
    ----------
    field : `~fracflow.grid.SampledField`
        Scalar or vector field.
    lam : float
        Scale factor λ > 0.
    alpha : float
        Order of the operator.
    kind : {'u', 'b', 'f'}, optional
        Which quantity the field represents.
    periodic : bool, optional
        Whether to extend the field periodically rather than by zero.
    """
    if not isinstance(field, SampledField):
        raise TypeError("field should be a SampledField instance.")
    lam = float(lam)
    if not lam > 0:
        raise ValueError("scale factor should be positive, got {}."
                         .format(lam))
    alpha = spectral.check_alpha(alpha)
    try:
        power = SCALING_POWERS[kind](alpha)
    except KeyError:
        raise ValueError("kind should be one of {}, got {!r}."
                         .format(tuple(SCALING_POWERS), kind)) from None
    grid = field.grid
    half = grid.period / 2
    values = field.values
    if lam == 1.:
        return field.with_values(values)
    if lam < 1. and not periodic:
        beyond = np.any(np.abs(grid.points) > lam * half, axis=-1)
        magnitude = np.abs(values)
        if field.is_vector:
            magnitude = magnitude.max(-1)
        if (magnitude[:, beyond].max(initial=0.)
                > 1e-10 * magnitude.max()):
            raise ValueError("scaled support exits the box for scale "
                             "factor {}.".format(lam))
    targets = lam * grid.coordinates[0].reshape(-1)
    matrix = _interpolation_matrix(grid, targets)
    for axis in range(1, grid.d + 1):
        values = np.moveaxis(np.tensordot(matrix, values, axes=([1], [axis])),
                             0, axis)
    if not periodic:
        outside = np.any(np.abs(lam * grid.points) >= half, axis=-1)
        if field.is_vector:
            outside = outside[..., np.newaxis]
        values = np.where(outside, 0., values)
    values = values * lam ** power
    return SampledField(grid, values, field.times / lam ** alpha)


def resample(field, grid):
    """Trigonometric interpolant of a field on another lattice.

    Both lattices should have the same dimension and period.  Moving to
    a finer lattice is exact for fields resolved on the coarser one.
    """
    if not isinstance(field, SampledField):
        raise TypeError("field should be a SampledField instance.")
    old = field.grid
    if old.d != grid.d or old.period != grid.period:
        raise ValueError("can only resample to a lattice with the same "
                         "dimension and period.")
    if old == grid:
        return field.with_values(field.values)
    matrix = _interpolation_matrix(old, grid.coordinates[0].reshape(-1))
    values = field.values
    for axis in range(1, grid.d + 1):
        values = np.moveaxis(np.tensordot(matrix, values, axes=([1], [axis])),
                             0, axis)
    return SampledField(grid, values, field.times)
