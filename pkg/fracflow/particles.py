# Licensed under the GPLv3 - see LICENSE
"""Interacting particles driven by isotropic stable noise.

The particle system

    X^i_{t+dt} = X^i_t + dt (1/N) sum_j b(t, X^i_t, X^j_t) + ΔL^i

approximates the distribution-dependent SDE whose one-particle law
solves the corresponding nonlocal Fokker-Planck equation.  Particles live
on the fundamental cell [-L/2, L/2)^d of the torus; interactions use the
minimum-image displacement.
"""
import operator
import warnings

import numpy as np
from scipy import integrate, special
from scipy.stats import wasserstein_distance

from .errors import BlowUpError, FracflowExperimentalWarning
from .grid import SampledField
from .spectral import apply_multiplier
from .stable import (StableParams, RngStream, get_generator,
                     sample_isotropic_increments)


__all__ = ['ParticleEnsemble', 'ParticleTrajectory', 'InteractionKernel',
           'MollifierSpec', 'InitialLaw', 'mollify_kernel', 'em_step',
           'simulate_ddsde', 'empirical_density', 'density_standard_error',
           'interpolate', 'krylov_functional', 'martingale_residual',
           'simulate_ns_particles', 'sliced_wasserstein', 'smoothed_l1',
           'second_moment']


BLOCK_SIZE = 256
"""Rows of the pairwise interaction evaluated at once."""


def _get_period(period):
    if period is None:
        from . import conf
        period = conf.period
    period = float(period)
    if not period > 0:
        raise ValueError("period should be positive.")
    return period


def _minimum_image(z, period):
    return (z + period / 2) % period - period / 2


class ParticleEnsemble:
    """Equally weighted particles on the torus at a given time.

    Parameters
    ----------
    positions : array_like
        Shape ``(N, d)``, with N at least 2; wrapped into the cell.
    time : float, optional
        Default: 0.
    period : float, optional
        Period of the torus.  Default: ``fracflow.conf.period``.
    """

    def __init__(self, positions, time=0., period=None):
        positions = np.array(positions, dtype=float)
        if positions.ndim == 1:
            positions = positions[:, np.newaxis]
        if positions.ndim != 2 or positions.shape[0] < 2:
            raise ValueError("need positions of shape (N, d) with N >= 2.")
        if not np.all(np.isfinite(positions)):
            raise ValueError("particle positions are non-finite.")
        self.period = _get_period(period)
        self.positions = _minimum_image(positions, self.period)
        self.time = float(time)

    @property
    def N(self):
        return self.positions.shape[0]

    @property
    def d(self):
        return self.positions.shape[1]

    @property
    def weights(self):
        """Uniform weights 1/N."""
        return np.full(self.N, 1. / self.N)

    def __len__(self):
        return self.N

    def __repr__(self):
        return ('<{0} N={1.N}, d={1.d}, t={1.time}>'
                .format(self.__class__.__name__, self))


class ParticleTrajectory:
    """Snapshots of an ensemble at increasing times.

    Parameters
    ----------
    times : array_like
        Snapshot times, shape ``(ntimes,)``.
    positions : array_like
        Shape ``(ntimes, N, d)``.
    period : float
        Period of the torus.
    """

    def __init__(self, times, positions, period):
        self.times = np.asarray(times, dtype=float)
        self.positions = np.asarray(positions, dtype=float)
        if self.positions.shape[:1] != self.times.shape:
            raise ValueError("need one snapshot per time.")
        self.period = _get_period(period)

    @property
    def N(self):
        return self.positions.shape[1]

    @property
    def d(self):
        return self.positions.shape[2]

    def __len__(self):
        return len(self.times)

    def __getitem__(self, index):
        """Ensemble at snapshot ``index``."""
        index = operator.index(index)
        return ParticleEnsemble(self.positions[index], self.times[index],
                                self.period)

    def unwrapped(self):
        """Positions with periodic jumps between snapshots removed.

        Successive displacements are taken as minimum images, which is
        exact as long as no particle moves more than half a period
        between snapshots.
        """
        steps = _minimum_image(np.diff(self.positions, axis=0), self.period)
        return np.concatenate([self.positions[:1],
                               self.positions[:1] + np.cumsum(steps, 0)])

    def __repr__(self):
        return ('<{0} N={1.N}, d={1.d}, {2} snapshots>'
                .format(self.__class__.__name__, self, len(self)))


class InteractionKernel:
    """Interaction b(t, x, y) between particles.

    Parameters
    ----------
    function : callable
        For translation-invariant kernels, ``function(t, z)`` with
        ``z = x - y`` of shape ``(..., d)``; otherwise ``function(t, x,
        y)``.  Should return vectors of shape ``(..., d)``.
    d : int
        Dimension.
    envelope : callable, optional
        Dominating function ``h(t, z)`` with ``|b(t, x, y)| <= h(t, x-y)``.
    divergence_free : bool, optional
        Whether b is divergence free in x.
    bound : float, optional
        Global bound on |b|, if known.  Default: infinity.
    translation_invariant : bool, optional
        Whether b depends on x - y only.  Default: `True`.
    name : str, optional
        Label; 'biot-savart' kernels are mollified in closed form.
    """

    def __init__(self, function, d, envelope=None, divergence_free=False,
                 bound=None, translation_invariant=True, name='custom'):
        if not callable(function):
            raise TypeError("kernel function should be callable.")
        self.function = function
        self.d = operator.index(d)
        self.envelope = envelope
        self.divergence_free = bool(divergence_free)
        self.bound = np.inf if bound is None else float(bound)
        self.translation_invariant = bool(translation_invariant)
        self.name = name

    @classmethod
    def constant(cls, c):
        """Kernel equal to the constant vector ``c``."""
        c = np.atleast_1d(np.asarray(c, dtype=float))
        magnitude = float(np.sqrt(np.sum(c**2)))

        def function(t, z):
            return np.broadcast_to(c, np.shape(z)).copy()

        def envelope(t, z):
            return np.full(np.shape(z)[:-1], magnitude)

        return cls(function, c.size, envelope, divergence_free=True,
                   bound=magnitude, name='constant')

    @classmethod
    def biot_savart(cls):
        """K₂(z) = (-z₂, z₁) / (2π|z|²), set to zero at the origin."""
        def function(t, z):
            z = np.asarray(z, dtype=float)
            r2 = np.sum(z**2, axis=-1)
            safe = np.where(r2 > 0, r2, 1.)[..., np.newaxis]
            out = np.stack([-z[..., 1], z[..., 0]], axis=-1) / (
                2. * np.pi * safe)
            return np.where((r2 > 0)[..., np.newaxis], out, 0.)

        def envelope(t, z):
            r = np.sqrt(np.sum(np.asarray(z)**2, axis=-1))
            with np.errstate(divide='ignore'):
                return 1. / (2. * np.pi * r)

        return cls(function, 2, envelope, divergence_free=True,
                   name='biot-savart')

    def __call__(self, t, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.translation_invariant:
            return self.function(t, x - y)
        return self.function(t, x, y)

    def pairwise_mean(self, t, positions, period):
        """Mean interaction (1/N) sum_j b(t, x_i, x_j) on each particle.

        Rows are processed in blocks with a fixed summation order, so
        that results do not depend on anything but the input.
        """
        positions = np.asarray(positions, dtype=float)
        out = np.empty_like(positions)
        for start in range(0, len(positions), BLOCK_SIZE):
            x = positions[start:start+BLOCK_SIZE, np.newaxis]
            z = _minimum_image(x - positions[np.newaxis], period)
            if self.translation_invariant:
                values = self.function(t, z)
            else:
                values = self.function(t, np.broadcast_to(x, z.shape),
                                       x - z)
            out[start:start+BLOCK_SIZE] = values.mean(axis=1)
        return out

    def verify(self, t, x, y):
        """Check |b(t, x, y)| <= h(t, x - y) on the given points.

        Raises
        ------
        ValueError
            If the envelope is violated.
        """
        if self.envelope is None:
            raise AttributeError("kernel has no envelope to verify.")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        magnitude = np.sqrt(np.sum(self(t, x, y)**2, axis=-1))
        envelope = self.envelope(t, x - y)
        if np.any(magnitude > envelope * (1. + 1e-12)):
            raise ValueError("kernel exceeds its envelope at {} points."
                             .format(np.count_nonzero(magnitude > envelope)))
        return True

    def __repr__(self):
        return ('{0}({1.name!r}, d={1.d}, bound={1.bound})'
                .format(self.__class__.__name__, self))


def standard_bump(r):
    """Unnormalized bump exp(-1/(1-r²)) on r < 1."""
    r = np.asarray(r, dtype=float)
    inside = r < 1.
    safe = np.where(inside, r, 0.)
    return np.where(inside, np.exp(-1. / (1. - safe**2)), 0.)


def _sphere_area(dimension):
    return 2. * np.pi ** (dimension / 2) / special.gamma(dimension / 2)


class MollifierSpec:
    """Radial mollifier Γ on space-time pairs (t, x, y) ∈ R^{1+2d}.

    Parameters
    ----------
    bump : callable
        Radial profile φ(r), supported on r <= 1, such that
        Γ(t, x, y) = φ(|(t, x, y)|) integrates to 1.
    level : int
        Mollification level n; Γ_n(t, x, y) = n^{1+2d} Γ(nt, nx, ny).
    d : int, optional
        Spatial dimension.  Default: 2.
    time_mollify : bool, optional
        Whether to mollify in time as well.  By default, the time
        marginal is integrated out, leaving a mollifier in (x, y) only.

    Raises
    ------
    ValueError
        If Γ does not integrate to 1 within 1e-8.
    """

    def __init__(self, bump, level, d=2, time_mollify=False):
        self.level = operator.index(level)
        if self.level < 1:
            raise ValueError("mollification level should be positive.")
        self.d = operator.index(d)
        self.dimension = 1 + 2 * self.d
        self.bump = bump
        self.time_mollify = bool(time_mollify)
        mass = self.mass(bump, self.dimension)
        if abs(mass - 1.) > 1e-8:
            raise ValueError("mollifier integrates to {}, not 1."
                             .format(mass))
        self._cdf = None

    @staticmethod
    def mass(bump, dimension):
        """Integral of the radial profile over R^dimension."""
        value, _ = integrate.quad(
            lambda r: float(bump(r)) * r ** (dimension - 1), 0., 1.,
            epsabs=1e-14, epsrel=1e-12, limit=200)
        return _sphere_area(dimension) * value

    @classmethod
    def standard(cls, level, d=2, time_mollify=False):
        """The normalized bump C exp(-1/(1-r²))."""
        dimension = 1 + 2 * operator.index(d)
        norm = cls.mass(standard_bump, dimension)

        def bump(r):
            return standard_bump(r) / norm

        return cls(bump, level, d, time_mollify)

    @property
    def reach(self):
        """Largest displacement |x - y| mollified over, sqrt(2)/n."""
        return np.sqrt(2.) / self.level

    def __call__(self, t, x, y):
        """Γ_n(t, x, y)."""
        r2 = (np.asarray(t)**2 + np.sum(np.asarray(x)**2, axis=-1)
              + np.sum(np.asarray(y)**2, axis=-1))
        n = self.level
        return n ** self.dimension * self.bump(n * np.sqrt(r2))

    def nodes(self, order=8):
        """Quadrature nodes and weights for Γ_n on a midpoint lattice.

        Returns
        -------
        s : `~numpy.ndarray`
            Time offsets, shape ``(Q,)``; zero without time mollification.
        a, c : `~numpy.ndarray`
            Space offsets for x and y, shape ``(Q, d)``.
        weights : `~numpy.ndarray`
            Normalized to sum to 1.
        """
        n = self.level
        h = 2. / (n * order)
        axis = -1. / n + h * (np.arange(order) + 0.5)
        grids = np.meshgrid(*([axis] * self.dimension), indexing='ij')
        points = np.stack([g.ravel() for g in grids], axis=-1)
        d = self.d
        weights = self(points[:, 0], points[:, 1:1+d], points[:, 1+d:])
        keep = weights > 0
        points = points[keep]
        weights = weights[keep] / weights[keep].sum()
        s = points[:, 0] if self.time_mollify else np.zeros(len(points))
        return s, points[:, 1:1+d], points[:, 1+d:], weights

    def difference_cdf(self, r):
        """P(|A - C| <= r) for (S, A, C) distributed as Γ_n.

        A - C is sqrt(2) times the projection of a radial vector in
        R^{1+2d} on a d-dimensional subspace, for which the squared
        length fraction is Beta(d/2, (1+2d-d)/2) distributed.
        """
        if self._cdf is None:
            D = self.dimension
            d = self.d
            rho = np.linspace(0., 1., 257)

            def cdf(x):
                def integrand(R):
                    fraction = 1. if R <= x else (x / R)**2
                    return (_sphere_area(D) * R ** (D - 1)
                            * float(self.bump(R))
                            * special.betainc(d / 2, (D - d) / 2, fraction))
                if x == 0:
                    return 0.
                value, _ = integrate.quad(
                    integrand, 0., 1., points=[x] if x < 1 else None,
                    limit=200)
                return value

            table = np.array([cdf(x) for x in rho])
            self._cdf = rho, np.minimum(np.maximum.accumulate(table), 1.)
        rho, table = self._cdf
        return np.interp(np.asarray(r) * self.level / np.sqrt(2.), rho, table,
                         right=1.)

    def __repr__(self):
        return ('{0}(level={1.level}, d={1.d}, time_mollify={1.time_mollify})'
                .format(self.__class__.__name__, self))


def mollify_kernel(kernel, moll, order=8, bound_samples=64):
    """Convolve b·1_{t>=0} with the mollifier Γ_n.

    Parameters
    ----------
    kernel : `InteractionKernel`
        Kernel to mollify.
    moll : `MollifierSpec`
        Mollifier and level.
    order : int, optional
        Quadrature points per axis of the mollifier support.
    bound_samples : int, optional
        Lattice points per axis on which the bound is estimated for
        kernels without a known bound.

    Returns
    -------
    mollified : `InteractionKernel`
        Bounded kernel, with the bound in its ``bound`` attribute.

    Notes
    -----
    The Biot-Savart kernel is mollified in closed form: for a radial
    law of y - x, K₂ * law equals K₂(z) P(|δ| <= |z|), by the mean
    value property of the logarithmic potential.
    """
    if not isinstance(kernel, InteractionKernel):
        raise TypeError("kernel should be an InteractionKernel.")
    if not isinstance(moll, MollifierSpec):
        raise TypeError("moll should be a MollifierSpec.")
    if kernel.d != moll.d:
        raise ValueError("kernel and mollifier dimensions differ.")

    if kernel.name == 'biot-savart':
        def function(t, z):
            z = np.asarray(z, dtype=float)
            r = np.sqrt(np.sum(z**2, axis=-1))
            return (kernel.function(t, z)
                    * moll.difference_cdf(r)[..., np.newaxis])

        r = np.linspace(0., moll.reach, 1025)[1:]
        bound = float(np.max(moll.difference_cdf(r) / (2. * np.pi * r)))
        return InteractionKernel(function, kernel.d, kernel.envelope,
                                 kernel.divergence_free, bound,
                                 name='mollified biot-savart')

    s, a, c, weights = moll.nodes(order)
    time_mollify = moll.time_mollify
    if kernel.translation_invariant:
        # Aggregate nodes with equal time offset and displacement a - c;
        # the latter lie on a lattice with twice the node spacing.
        h = 2. / (moll.level * order)
        keys = np.column_stack([s, np.rint((a - c) / h)])
        keys, inverse = np.unique(keys, axis=0, return_inverse=True)
        weights = np.bincount(inverse.ravel(), weights, minlength=len(keys))
        s = keys[:, 0]
        a = keys[:, 1:] * h
        c = np.zeros_like(a)

    def evaluate(t, *args):
        # Nodes are summed in turn to bound the size of intermediates.
        out = 0.
        for s_q, a_q, c_q, w_q in zip(s, a, c, weights):
            if time_mollify and t - s_q < 0:
                continue
            if kernel.translation_invariant:
                value = kernel.function(t - s_q, args[0] - a_q)
            else:
                value = kernel.function(t - s_q, args[0] - a_q,
                                        args[1] - c_q)
            out = out + w_q * value
        return out * np.ones(np.shape(args[0]))

    if kernel.translation_invariant:
        def function(t, z):
            return evaluate(t, np.asarray(z, dtype=float))
    else:
        def function(t, x, y):
            return evaluate(t, np.asarray(x, dtype=float),
                            np.asarray(y, dtype=float))

    mollified = InteractionKernel(function, kernel.d, None,
                                  kernel.divergence_free, kernel.bound,
                                  kernel.translation_invariant,
                                  name='mollified ' + kernel.name)
    if not np.isfinite(mollified.bound) and kernel.translation_invariant:
        offsets = ((np.arange(bound_samples) / bound_samples - 0.5)
                   * _get_period(None))
        z = np.stack(np.meshgrid(*([offsets] * kernel.d), indexing='ij'),
                     axis=-1).reshape(-1, kernel.d)
        mollified.bound = float(np.sqrt(np.sum(function(0., z)**2,
                                               axis=-1)).max())
    return mollified


class InitialLaw:
    """Law of the initial positions.

    Parameters
    ----------
    sampler : callable
        ``sampler(N, generator)`` returning ``(N, d)`` positions.
    d : int
        Dimension.
    period : float, optional
        Period of the torus.  Default: ``fracflow.conf.period``.
    tag : str, optional
        Description.
    """

    def __init__(self, sampler, d, period=None, tag=''):
        self.sampler = sampler
        self.d = operator.index(d)
        self.period = _get_period(period)
        self.tag = tag

    @classmethod
    def uniform(cls, d, period=None):
        period = _get_period(period)

        def sampler(N, generator):
            return generator.uniform(-period / 2, period / 2, size=(N, d))

        return cls(sampler, d, period, 'uniform')

    @classmethod
    def gaussian(cls, d, width, center=None, period=None):
        """Normal law with standard deviation ``width``, wrapped."""
        center = np.zeros(d) if center is None else np.asarray(center)

        def sampler(N, generator):
            return center + width * generator.normal(size=(N, d))

        return cls(sampler, d, period, 'gaussian({})'.format(width))

    @classmethod
    def from_density(cls, rho):
        """Law with a lattice density: a cell is drawn with probability
        ρ times the cell volume, then a point uniformly within it."""
        if not isinstance(rho, SampledField) or rho.is_vector:
            raise TypeError("density should be a scalar SampledField.")
        values = rho.snapshot
        if np.any(values < 0):
            raise ValueError("density should be non-negative.")
        grid = rho.grid
        mass = values.sum() * grid.cell_volume
        if abs(mass - 1.) > 1e-8:
            raise ValueError("density should integrate to 1, got {}."
                             .format(mass))
        probabilities = values.ravel() / values.sum()
        points = grid.points.reshape(-1, grid.d)

        def sampler(N, generator):
            cells = generator.choice(len(probabilities), size=N,
                                     p=probabilities)
            jitter = generator.uniform(-0.5, 0.5, size=(N, grid.d))
            return points[cells] + grid.spacing * jitter

        return cls(sampler, grid.d, grid.period, 'lattice density')

    def sample(self, N, rng=None):
        """Draw N positions in the fundamental cell."""
        positions = np.asarray(self.sampler(N, get_generator(rng)),
                               dtype=float).reshape(N, self.d)
        return _minimum_image(positions, self.period)

    def __repr__(self):
        return '{}({!r}, d={})'.format(self.__class__.__name__, self.tag,
                                       self.d)


def em_step(ens, kernel, dt, increments=None):
    """One Euler-Maruyama step of the interacting particle system.

    Parameters
    ----------
    ens : `ParticleEnsemble`
        Current positions.
    kernel : `InteractionKernel` or `None`
        Interaction; `None` for none.
    dt : float
        Time step.
    increments : array_like, optional
        Stable increments over the step, shape ``(N, d)``.

    Returns
    -------
    ens : `ParticleEnsemble`
        Positions at ``ens.time + dt``.

    Raises
    ------
    BlowUpError
        If positions become non-finite.
    """
    x = ens.positions
    new = x.copy()
    if kernel is not None:
        new += dt * kernel.pairwise_mean(ens.time, x, ens.period)
    if increments is not None:
        increments = np.asarray(increments, dtype=float)
        if increments.shape != x.shape:
            raise ValueError("increments should have shape {}."
                             .format(x.shape))
        new += increments
    if not np.all(np.isfinite(new)):
        raise BlowUpError("particle positions became non-finite at t={}."
                          .format(ens.time + dt), ens.time + dt)
    return ParticleEnsemble(new, ens.time + dt, ens.period)


def simulate_ddsde(law, kernel, alpha, T, N, dt, seed, record_every=1,
                   streams=None):
    """Simulate the interacting particle system up to time T.

    Parameters
    ----------
    law : `InitialLaw` or array_like
        Law of the initial positions, or the positions themselves.
    kernel : `InteractionKernel` or `None`
        Interaction.
    alpha : float
        Stability index of the noise, in (0, 2].
    T : float
        Final time; should be a multiple of ``dt``.
    N : int
        Number of particles.
    dt : float
        Time step.
    seed : int
        Seed; particle ``i`` draws its noise from stream ``streams[i]``.
    record_every : int, optional
        Store positions every this many steps.
    streams : sequence of int, optional
        Noise stream per particle.  Default: ``range(N)``.

    Returns
    -------
    trajectory : `ParticleTrajectory`
    """
    N = operator.index(N)
    nsteps = int(round(T / dt))
    if nsteps < 1 or abs(nsteps * dt - T) > 1e-9 * T:
        raise ValueError("T={} should be a multiple of dt={}."
                         .format(T, dt))
    if isinstance(law, InitialLaw):
        positions = law.sample(N, RngStream(seed, 2**32).generator)
        period, d = law.period, law.d
    else:
        positions = np.asarray(law, dtype=float)
        if positions.ndim == 1:
            positions = positions[:, np.newaxis]
        if positions.shape[0] != N:
            raise ValueError("got {} initial positions for N={}."
                             .format(positions.shape[0], N))
        period, d = _get_period(None), positions.shape[1]
    streams = range(N) if streams is None else list(streams)
    if len(streams) != N:
        raise ValueError("need one noise stream per particle.")
    params = StableParams(alpha, d, dt)
    noise = np.stack([sample_isotropic_increments(
        params, nsteps, RngStream(seed, stream).generator)
        for stream in streams], axis=1)
    ens = ParticleEnsemble(positions, 0., period)
    times = [0.]
    snapshots = [ens.positions]
    for step in range(1, nsteps + 1):
        ens = em_step(ens, kernel, dt, noise[step - 1])
        if step % record_every == 0 or step == nsteps:
            times.append(step * dt)
            snapshots.append(ens.positions)
    return ParticleTrajectory(times, np.stack(snapshots), period)


def _silverman_bandwidth(ens):
    # Circular standard deviation per axis, capped at the uniform one.
    angles = 2. * np.pi * ens.positions / ens.period
    R = np.abs(np.mean(np.exp(1j * angles), axis=0))
    with np.errstate(divide='ignore'):
        sigma = ens.period / (2. * np.pi) * np.sqrt(-2. * np.log(R))
    sigma = np.minimum(sigma, ens.period / np.sqrt(12.)).mean()
    d = ens.d
    return sigma * (4. / (d + 2)) ** (1. / (d + 4)) * ens.N ** (-1. / (d + 4))


def _periodic_gaussian(grid, centers, bandwidth):
    """Per-particle periodized 1-d Gaussians on the lattice, unit mass."""
    x = grid.coordinates[0].ravel()
    images = int(np.ceil(6. * bandwidth / grid.period)) + 1
    shifts = grid.period * np.arange(-images, images + 1)
    z = (x[np.newaxis, :, np.newaxis] - centers[:, np.newaxis, np.newaxis]
         + shifts)
    g = np.exp(-0.5 * (z / bandwidth)**2).sum(-1)
    return g / (g.sum(1, keepdims=True) * grid.spacing)


def _density_bandwidth(ens, grid, bandwidth):
    if grid.d != ens.d or not np.isclose(grid.period, ens.period):
        raise ValueError("grid does not match the ensemble.")
    if bandwidth is None:
        bandwidth = max(_silverman_bandwidth(ens), grid.spacing)
    bandwidth = float(bandwidth)
    if bandwidth < grid.spacing:
        raise ValueError("bandwidth {} is below the lattice spacing {}."
                         .format(bandwidth, grid.spacing))
    return bandwidth


def _kernel_mean(x, grid, bandwidth, power=1):
    """Mean over particles of the kernel, raised to a power, per point."""
    if grid.d == 1:
        return (_periodic_gaussian(grid, x[:, 0], bandwidth)**power).mean(0)
    out = np.zeros(grid.shape)
    for start in range(0, len(x), 4096):
        chunk = x[start:start+4096]
        g1 = _periodic_gaussian(grid, chunk[:, 0], bandwidth)**power
        g2 = _periodic_gaussian(grid, chunk[:, 1], bandwidth)**power
        out += g1.T @ g2
    return out / len(x)


def empirical_density(ens, grid, bandwidth=None):
    """Periodic Gaussian kernel density estimate on a lattice.

    The kernel is a product of periodized one-dimensional Gaussians,
    each normalized to unit lattice mass, so the estimate integrates to 1
    to rounding error.

    Parameters
    ----------
    ens : `ParticleEnsemble`
        Particles.
    grid : `~fracflow.grid.PeriodicGrid`
        Lattice; its period should match the ensemble's.
    bandwidth : float, optional
        Gaussian standard deviation.  Default: Silverman's rule with a
        circular spread estimate.

    Raises
    ------
    ValueError
        If the bandwidth is smaller than the lattice spacing.
    """
    bandwidth = _density_bandwidth(ens, grid, bandwidth)
    density = _kernel_mean(ens.positions, grid, bandwidth)
    return SampledField(grid, density[np.newaxis], [ens.time])


def density_standard_error(ens, grid, bandwidth=None):
    """Monte Carlo error of the L¹ norm of a kernel density estimate.

    Returns the integral over the lattice of the pointwise standard
    error of `empirical_density`, which bounds the mean absolute
    deviation of the estimate from its expectation in L¹.  Arguments are
    as for `empirical_density`.
    """
    bandwidth = _density_bandwidth(ens, grid, bandwidth)
    mean = _kernel_mean(ens.positions, grid, bandwidth)
    square = _kernel_mean(ens.positions, grid, bandwidth, power=2)
    variance = np.maximum(square - mean**2, 0.) / ens.N
    return float(np.sqrt(variance).sum() * grid.cell_volume)


def interpolate(grid, values, positions):
    """Periodic multilinear interpolation of lattice values.

    Parameters
    ----------
    grid : `~fracflow.grid.PeriodicGrid`
        Lattice.
    values : array_like
        Shape ``grid.shape``.
    positions : array_like
        Shape ``(M, d)``.
    """
    positions = np.asarray(positions, dtype=float)
    s = (positions + grid.period / 2) / grid.spacing
    base = np.floor(s)
    frac = s - base
    base = base.astype(int)
    out = np.zeros(len(positions))
    for corner in np.ndindex(*(2,) * grid.d):
        index = tuple((base[:, j] + corner[j]) % grid.n
                      for j in range(grid.d))
        weight = np.prod([frac[:, j] if corner[j] else 1. - frac[:, j]
                          for j in range(grid.d)], axis=0)
        out += weight * values[index]
    return out


def _check_times(trajectory, field):
    if not (len(trajectory.times) == field.ntimes
            and np.allclose(trajectory.times, field.times, rtol=0,
                            atol=1e-9)):
        raise ValueError("field is not sampled on the trajectory's times.")


def _path_values(trajectory, field):
    # f(t_r, X_r) per snapshot and particle, shape (ntimes, N).
    return np.stack([interpolate(field.grid, field.values[i],
                                 trajectory.positions[i])
                     for i in range(len(trajectory))])


def krylov_functional(trajectory, f):
    """Monte Carlo estimate of E ∫_0^T f(r, X_r) dr.

    Parameters
    ----------
    trajectory : `ParticleTrajectory`
        Particle paths.
    f : `~fracflow.grid.SampledField`
        Scalar field sampled on the trajectory's times.

    Returns
    -------
    estimate, standard_error : float
    """
    _check_times(trajectory, f)
    values = _path_values(trajectory, f)
    integrals = integrate.trapezoid(values, trajectory.times, axis=0)
    return (float(integrals.mean()),
            float(integrals.std(ddof=1) / np.sqrt(len(integrals))))


def martingale_residual(trajectory, u, f, t0=None, t1=None):
    """Test the martingale property of u(t, X_t) - ∫_0^t f(r, X_r) dr.

    If u solves the backward equation ∂_t u + Δ^{α/2}u + b·∇u = f for the
    drift b of the particles, M_t = u(t, X_t) - u(0, X_0) - ∫_0^t f dr is
    a martingale, so E[(M_{t1} - M_{t0}) G] = 0 for any bounded G
    depending on the path up to t0.  Used are G = 1 and G equal to the
    first coordinate of X_{t0}.

    Parameters
    ----------
    trajectory : `ParticleTrajectory`
        Particle paths.
    u, f : `~fracflow.grid.SampledField`
        Backward solution and forcing, sampled on the trajectory's times.
    t0, t1 : float, optional
        Times to compare.  Default: the middle and the last snapshot.

    Returns
    -------
    residual, standard_error : float
        Largest absolute mean over the test functionals and its
        Monte Carlo error.
    """
    _check_times(trajectory, u)
    _check_times(trajectory, f)
    times = trajectory.times
    i0 = len(times) // 2 if t0 is None else int(np.argmin(abs(times - t0)))
    i1 = len(times) - 1 if t1 is None else int(np.argmin(abs(times - t1)))
    if not i0 < i1:
        raise ValueError("need t0 < t1 on the trajectory's times.")
    u_path = _path_values(trajectory, u)
    f_path = _path_values(trajectory, f)
    forcing = integrate.trapezoid(f_path[i0:i1+1], times[i0:i1+1], axis=0)
    increment = u_path[i1] - u_path[i0] - forcing
    residual = error = 0.
    for g in (np.ones(trajectory.N), trajectory.positions[i0, :, 0]):
        samples = increment * g
        mean = abs(samples.mean())
        if mean >= residual:
            residual = mean
            error = samples.std(ddof=1) / np.sqrt(len(samples))
    return float(residual), float(error)


def simulate_ns_particles(rho0, alpha, T, N, level, dt, seed,
                          bandwidth=None, record_every=1):
    """Vortex particles for the fractional vorticity equation.

    Particles move with the velocity of a mollified Biot-Savart kernel,
    averaged over the ensemble, plus isotropic stable noise.

    Parameters
    ----------
    rho0 : `~fracflow.grid.SampledField`
        Initial probability density on a 2-dimensional grid.
    alpha : float
        Stability index; runs outside (1, 2) are flagged as experimental.
    T, dt : float
        Final time and time step.
    N : int
        Number of particles.
    level : int
        Mollification level.
    seed : int
        Seed of initial positions and noise.
    bandwidth : float, optional
        For the density estimates.

    Returns
    -------
    trajectory : `ParticleTrajectory`
    densities : `~fracflow.grid.SampledField`
        Density estimates at the snapshot times.
    """
    if rho0.grid.d != 2:
        raise ValueError("vortex particles need a 2-dimensional grid.")
    if not 1. < alpha < 2.:
        warnings.warn("alpha={} is outside (1, 2); run is experimental."
                      .format(alpha), FracflowExperimentalWarning)
    kernel = mollify_kernel(InteractionKernel.biot_savart(),
                            MollifierSpec.standard(level, 2))
    trajectory = simulate_ddsde(InitialLaw.from_density(rho0), kernel,
                                alpha, T, N, dt, seed, record_every)
    grid = rho0.grid
    densities = [empirical_density(trajectory[i], grid, bandwidth).snapshot
                 for i in range(len(trajectory))]
    return trajectory, SampledField(grid, np.stack(densities),
                                    trajectory.times)


def sliced_wasserstein(ens_a, ens_b, nprojections=64):
    """Wasserstein-1 distance between empirical laws.

    Exact in one dimension; in two dimensions, the average over equally
    spaced directions of the distance between projections.  Positions
    are taken in the fundamental cell.
    """
    a = ens_a.positions
    b = ens_b.positions
    if a.shape[1] != b.shape[1]:
        raise ValueError("ensembles have different dimensions.")
    if a.shape[1] == 1:
        return float(wasserstein_distance(a[:, 0], b[:, 0]))
    angles = np.pi * np.arange(nprojections) / nprojections
    directions = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return float(np.mean([wasserstein_distance(a @ e, b @ e)
                          for e in directions]))


def smoothed_l1(rho_a, rho_b, bandwidth):
    """L¹ distance after Gaussian smoothing with the given bandwidth."""
    rho_a.check_compatible(rho_b)
    multiplier = np.exp(-0.5 * (rho_a.grid.kabs * float(bandwidth))**2)
    difference = apply_multiplier(rho_a - rho_b, multiplier)
    return np.abs(difference.values).sum(
        axis=tuple(range(1, rho_a.grid.d + 1))) * rho_a.grid.cell_volume


def second_moment(trajectory):
    """Mean squared displacement from the initial positions per snapshot.

    Displacements are unwrapped across snapshots by minimum images.
    """
    unwrapped = trajectory.unwrapped()
    displacement = unwrapped - unwrapped[:1]
    return np.mean(np.sum(displacement**2, axis=-1), axis=1)
