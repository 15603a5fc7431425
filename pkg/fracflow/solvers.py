# Licensed under the GPLv3 - see LICENSE
"""Pseudo-spectral time integration of nonlocal transport-diffusion.

All solvers integrate

    ∂_t u = Δ^{α/2} u + b·∇u + f

on the periodic grid with exponential time differencing: the fractional
Laplacian, together with the spatial mean of the drift, is propagated
exactly per Fourier mode, while the remaining transport term and the
forcing are treated explicitly (ETD-Euler, or the two-stage ETD-RK2 of
Cox & Matthews).  Drifts that are divergence free by construction (the
SQG and Biot-Savart velocities) use the divergence form ∇·(ub), which
leaves the mean mode untouched.
"""
import operator
from collections import namedtuple

import numpy as np
from astropy import log
from astropy.table import Table

from .errors import BlowUpError, DivergenceError
from .grid import PeriodicGrid, SampledField
from .norms import localized_norm
from .geometry import LocalizationSpec
from .spectral import check_alpha, dealias_mask, _odd, _inverse_power
from .stable import RngStream


__all__ = ['SolverConfig', 'DriftSpec', 'NoiseSpec', 'Solver',
           'phi_functions', 'step_linear', 'solve_transport_diffusion',
           'solve_sqg', 'solve_ns_vorticity', 'simulate_stochastic_sqg',
           'solve_backward_kolmogorov', 'convergence_order',
           'mollify_drift', 'random_divfree_drift']


SCHEMES = ('etd-euler', 'etd-rk2')
DIVERGENCE_GATE = 1e-10
MAX_HALVINGS = 20


class SolverConfig:
    """Time-stepping parameters.

    Parameters
    ----------
    alpha : float
        Order of the fractional Laplacian, in (0, 2].
    dt : float
        Time step.
    t_end : float
        Duration of the run; should be a multiple of ``dt``.
    dealias : bool, optional
        Whether to apply the 2/3 rule to products.  Default: `True`.
    scheme : {'etd-rk2', 'etd-euler'}, optional
        Time integrator.  Default: 'etd-rk2'.
    cfl_safety : float, optional
        Bound on ``dt * max|b| / dx``, in (0, 1].  Steps violating it are
        split in halves.  Default: ``fracflow.conf.cfl_safety``.
    output_every : int, optional
        Store the state every this many steps (the last step is always
        stored).  Default: 1.
    blowup_factor : float, optional
        Abort once ``max|u|`` exceeds this factor times
        ``max(max|u0|, 1)``.  Default: ``fracflow.conf.blowup_factor``.
    """

    def __init__(self, alpha, dt, t_end, dealias=True, scheme='etd-rk2',
                 cfl_safety=None, output_every=1, blowup_factor=None):
        from . import conf
        self.alpha = check_alpha(alpha)
        dt = float(dt)
        t_end = float(t_end)
        if not dt > 0 or not t_end > 0:
            raise ValueError("dt and t_end should be positive.")
        nsteps = int(round(t_end / dt))
        if nsteps < 1 or abs(nsteps * dt - t_end) > 1e-9 * t_end:
            raise ValueError("t_end={} should be a multiple of dt={}."
                             .format(t_end, dt))
        self.dt = dt
        self.t_end = t_end
        self.nsteps = nsteps
        self.dealias = bool(dealias)
        scheme = scheme.lower()
        if scheme not in SCHEMES:
            raise ValueError("scheme should be one of {}, got '{}'."
                             .format(SCHEMES, scheme))
        self.scheme = scheme
        cfl_safety = float(conf.cfl_safety if cfl_safety is None
                           else cfl_safety)
        if not 0. < cfl_safety <= 1.:
            raise ValueError("cfl_safety should be in (0, 1], got {}."
                             .format(cfl_safety))
        self.cfl_safety = cfl_safety
        self.output_every = operator.index(output_every)
        if self.output_every < 1:
            raise ValueError("output_every should be at least 1.")
        self.blowup_factor = float(conf.blowup_factor if blowup_factor is None
                                   else blowup_factor)

    def replace(self, **kwargs):
        """Copy with some parameters replaced."""
        kwargs = dict(dict(alpha=self.alpha, dt=self.dt, t_end=self.t_end,
                           dealias=self.dealias, scheme=self.scheme,
                           cfl_safety=self.cfl_safety,
                           output_every=self.output_every,
                           blowup_factor=self.blowup_factor), **kwargs)
        return self.__class__(**kwargs)

    def __repr__(self):
        return ('{0}(alpha={1.alpha}, dt={1.dt}, t_end={1.t_end}, '
                'scheme={1.scheme!r}, dealias={1.dealias})'
                .format(self.__class__.__name__, self))


class _Interpolant:
    """Linear interpolation in time of a sampled field, clamped at ends."""

    def __init__(self, field):
        self.field = field

    def __call__(self, t):
        field = self.field
        times = field.times
        if field.ntimes == 1 or t <= times[0]:
            return field.values[0]
        if t >= times[-1]:
            return field.values[-1]
        i = np.searchsorted(times, t, side='right') - 1
        w = (t - times[i]) / (times[i+1] - times[i])
        return (1. - w) * field.values[i] + w * field.values[i+1]


def _as_time_function(f, grid, vector=False):
    if f is None:
        return None
    if isinstance(f, SampledField):
        if f.grid != grid:
            raise ValueError("field is on a different grid than the state.")
        if f.is_vector != vector:
            raise ValueError("expected a {} field."
                             .format('vector' if vector else 'scalar'))
        return _Interpolant(f)
    if callable(f):
        def function(t):
            value = f(t)
            return (value.snapshot if isinstance(value, SampledField)
                    else np.asarray(value, dtype=float))
        return function
    raise TypeError("expected a SampledField or a callable of time.")


class DriftSpec:
    """Drift entering the transport term b·∇u.

    Parameters
    ----------
    kind : {'fixed-field', 'riesz-of-state', 'biot-savart-of-state', \
'mollified-kernel'}
        How the drift is obtained.  The state-coupled kinds give b = Rθ
        (SQG) and b = -K₂*ρ (vorticity transported by its Biot-Savart
        velocity).
    payload : optional
        For 'fixed-field', a vector `~fracflow.grid.SampledField` (linearly
        interpolated in time between its samples) or `None` for no drift.
        For 'mollified-kernel', a callable ``k(z)`` of lattice displacements
        of shape ``(..., d)`` returning vectors, or an array of such values
        in convolution layout; the drift is ``k * u``.  Unused otherwise.
    """

    KINDS = ('fixed-field', 'riesz-of-state', 'biot-savart-of-state',
             'mollified-kernel')
    _state_coupled = ('riesz-of-state', 'biot-savart-of-state')

    def __init__(self, kind, payload=None):
        if kind not in self.KINDS:
            raise ValueError("drift kind should be one of {}, got '{}'."
                             .format(self.KINDS, kind))
        if kind == 'fixed-field' and payload is not None:
            if not (isinstance(payload, SampledField) and payload.is_vector):
                raise TypeError("fixed-field drift needs a vector "
                                "SampledField.")
        if kind == 'mollified-kernel' and payload is None:
            raise ValueError("mollified-kernel drift needs a kernel.")
        self.kind = kind
        self.payload = payload
        self._kernel_modes = None

    @classmethod
    def zero(cls):
        """No drift."""
        return cls('fixed-field')

    @property
    def is_zero(self):
        return self.kind == 'fixed-field' and self.payload is None

    @property
    def divergence_free(self):
        """Whether the drift is divergence free by construction."""
        return self.kind in self._state_coupled

    def _kernel(self, grid):
        if self._kernel_modes is None:
            kernel = self.payload
            if callable(kernel):
                kernel = kernel(grid.index_displacements())
            kernel = np.asarray(kernel, dtype=float)
            if kernel.shape != grid.shape + (grid.d,):
                raise ValueError("kernel shape {} does not match grid {}."
                                 .format(kernel.shape, grid.shape))
            self._kernel_modes = (grid.forward(kernel, start=0)
                                  * grid.cell_volume)
        return self._kernel_modes

    def modes(self, grid, U, t):
        """Unnormalized Fourier modes of the drift.

        Parameters
        ----------
        grid : `~fracflow.grid.PeriodicGrid`
            Lattice.
        U : `~numpy.ndarray`
            Unnormalized modes of the current state.
        t : float
            Current time.

        Returns
        -------
        B : `~numpy.ndarray` or `None`
            Shape ``grid.shape + (d,)``; `None` for zero drift.
        """
        if self.is_zero:
            return None
        if self.kind == 'fixed-field':
            if self.payload.grid != grid:
                raise ValueError("drift is on a different grid.")
            return grid.forward(_Interpolant(self.payload)(t), start=0)
        if self.kind == 'mollified-kernel':
            return self._kernel(grid) * U[..., np.newaxis]
        if grid.d != 2:
            raise ValueError("{} drift requires a 2-dimensional grid."
                             .format(self.kind))
        # Rθ has multiplier i(-k₂, k₁)/|k|; minus the Biot-Savart velocity
        # has i(-k₂, k₁)/|k|².
        k1, k2 = np.broadcast_arrays(*grid.wavenumbers)
        inverse = _inverse_power(grid, 1 if self.kind == 'riesz-of-state'
                                 else 2)
        multiplier = np.stack([-1j * k2 * inverse, 1j * k1 * inverse], axis=-1)
        return _odd(grid, multiplier) * U[..., np.newaxis]

    def __repr__(self):
        return '{}({!r})'.format(self.__class__.__name__, self.kind)


class NoiseSpec:
    """Additive noise acting on finitely many Fourier modes.

    The noise is ``sum_k g_k exp(i k.x) dW_k`` with complex Brownian
    motions satisfying ``W_{-k} = conj(W_k)``, so that it is real.

    Parameters
    ----------
    modes : dict
        Maps integer wavenumber indices (tuples) to complex amplitudes.
        Missing conjugate partners are added; inconsistent ones raise.
    seed : int
        Seed of the noise stream, in [0, 2**64).
    """

    def __init__(self, modes, seed):
        amplitudes = {}
        for k, g in dict(modes).items():
            k = tuple(operator.index(m) for m in np.atleast_1d(k))
            g = complex(g)
            if not np.isfinite(g):
                raise ValueError("noise amplitudes should be finite.")
            amplitudes[k] = g
        dims = {len(k) for k in amplitudes}
        if len(dims) > 1:
            raise ValueError("noise modes have inconsistent dimensions.")
        for k, g in list(amplitudes.items()):
            minus = tuple(-m for m in k)
            if minus == k:
                if g.imag != 0:
                    raise ValueError("amplitude of the zero mode should be "
                                     "real.")
            elif minus in amplitudes:
                if not np.isclose(amplitudes[minus], g.conjugate(),
                                  rtol=1e-12, atol=1e-15):
                    raise ValueError("amplitudes of {} and {} are not "
                                     "conjugate.".format(k, minus))
            else:
                amplitudes[minus] = g.conjugate()
        seed = operator.index(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed should be a 64-bit unsigned integer.")
        self.amplitudes = amplitudes
        self.seed = seed

    @property
    def active(self):
        """Whether any amplitude is nonzero."""
        return any(g != 0 for g in self.amplitudes.values())

    def check_grid(self, grid):
        """Check all modes are resolved below the Nyquist frequency."""
        for k in self.amplitudes:
            if len(k) != grid.d or any(abs(m) >= grid.n // 2 for m in k):
                raise ValueError("noise mode {} is outside the grid."
                                 .format(k))

    def _representatives(self):
        # One of each conjugate pair, in a fixed order.
        return sorted(k for k in self.amplitudes
                      if k >= tuple(-m for m in k))

    def increment(self, grid, dt, alpha, generator):
        """Normalized Fourier increments over one step.

        Each forced mode receives a centred Gaussian with variance
        |g_k|² (1 - exp(-2 dt |k|^α)) / (2 |k|^α), i.e., the stochastic
        convolution of the linear part over the step.
        """
        out = np.zeros(grid.shape, complex)
        scale = 2. * np.pi / grid.period
        for k in self._representatives():
            g = self.amplitudes[k]
            lam = (scale * np.sqrt(sum(m**2 for m in k))) ** alpha
            if lam > 0:
                variance = -np.expm1(-2. * dt * lam) / (2. * lam)
            else:
                variance = dt
            index = tuple(m % grid.n for m in k)
            minus = tuple(-m % grid.n for m in k)
            if index == minus:
                out[index] = g * np.sqrt(variance) * generator.normal()
            else:
                xi = complex(*generator.normal(size=2)) / np.sqrt(2.)
                out[index] = g * np.sqrt(variance) * xi
                out[minus] = out[index].conjugate()
        return out

    def __repr__(self):
        return ('{}({} modes, seed={})'
                .format(self.__class__.__name__, len(self.amplitudes),
                        self.seed))


def phi_functions(z):
    """ETD coefficients φ₁(z) = (e^z-1)/z and φ₂(z) = (e^z-1-z)/z².

    Taylor series are used for |z| < 1e-4.
    """
    z = np.asarray(z)
    small = np.abs(z) < 1e-4
    safe = np.where(small, 1., z)
    em1 = np.expm1(safe)
    phi1 = np.where(small, 1. + z / 2. + z**2 / 6., em1 / safe)
    phi2 = np.where(small, 0.5 + z / 6. + z**2 / 24.,
                    (em1 - safe) / safe**2)
    return phi1, phi2


_Stage = namedtuple('_Stage', ['N', 'speed', 'divergence', 'mean'])


class Solver:
    """Integrator owning a state, its time and its noise stream.

    Parameters
    ----------
    u0 : `~fracflow.grid.SampledField`
        Scalar initial state at a single time.
    cfg : `SolverConfig`
        Time-stepping parameters.
    drift : `DriftSpec`, optional
        Default: no drift.
    forcing : `~fracflow.grid.SampledField` or callable, optional
        Scalar forcing, interpolated linearly in time, or a callable
        ``f(t)`` returning one.
    noise : `NoiseSpec`, optional
        Additive noise on selected modes.
    """

    def __init__(self, u0, cfg, drift=None, forcing=None, noise=None):
        if not isinstance(u0, SampledField):
            raise TypeError("initial state should be a SampledField.")
        if u0.is_vector:
            raise ValueError("initial state should be a scalar field.")
        if not isinstance(cfg, SolverConfig):
            raise TypeError("cfg should be a SolverConfig instance.")
        drift = DriftSpec.zero() if drift is None else drift
        if not isinstance(drift, DriftSpec):
            raise TypeError("drift should be a DriftSpec instance.")
        grid = u0.grid
        self.grid = grid
        self.cfg = cfg
        self.drift = drift
        self._forcing = _as_time_function(forcing, grid)
        if noise is not None:
            if not isinstance(noise, NoiseSpec):
                raise TypeError("noise should be a NoiseSpec instance.")
            noise.check_grid(grid)
            if not noise.active:
                noise = None
        self.noise = noise
        self._rng = None if noise is None else RngStream(noise.seed)
        self.t0 = float(u0.times[0])
        self.time = self.t0
        self.nstep = 0
        self._modes = grid.forward(u0.snapshot, start=0)
        self._ik = [_odd(grid, 1j * np.broadcast_to(k, grid.shape))
                    for k in grid.wavenumbers]
        self._mask = dealias_mask(grid) if cfg.dealias else None
        self._symbol = -grid.kabs ** cfg.alpha
        self._coefficients = {}
        self.ceiling = cfg.blowup_factor * max(np.abs(u0.snapshot).max(), 1.)
        self.max_divergence = 0.
        self.metrics = Table(names=('time', 'sup', 'energy', 'mean',
                                    'max_div', 'dt'),
                             dtype=('f8',) * 6)

    @property
    def state(self):
        """Current state as a single-time field."""
        return SampledField(self.grid, self._values()[np.newaxis],
                            [self.time])

    def _values(self):
        return self.grid.backward(self._modes, start=0)

    def _truncate(self, modes):
        if self._mask is None:
            return modes
        mask = self._mask if modes.ndim == self.grid.d else \
            self._mask[..., np.newaxis]
        return modes * mask

    def _stage(self, U, t, mean=None):
        """Explicit term: modes of (b - mean)·∇u + f, with drift diagnostics.

        ``mean`` is the drift mean propagated exactly; by default the
        current mean of b.
        """
        grid = self.grid
        N = np.zeros(grid.shape, complex)
        speed = divergence = 0.
        B = self.drift.modes(grid, U, t)
        if B is not None:
            b = grid.backward(self._truncate(B), start=0)
            speed = float(np.sqrt(np.sum(b**2, axis=-1)).max())
            div = sum(self._ik[j] * B[..., j] for j in range(grid.d))
            divergence = float(np.abs(grid.backward(div, start=0)).max())
            if (self.drift.divergence_free
                    and divergence > DIVERGENCE_GATE * max(speed, 1.)):
                raise DivergenceError(
                    "{} drift has divergence {:.3g} at t={}."
                    .format(self.drift.kind, divergence, t), t, divergence)
            if self.drift.divergence_free:
                mean = np.zeros(grid.d)
            elif mean is None:
                mean = B[(0,) * grid.d].real / grid.n ** grid.d
            b = b - mean
            if self.drift.divergence_free:
                u = grid.backward(self._truncate(U), start=0)
                P = grid.forward(u[..., np.newaxis] * b, start=0)
                N = sum(self._ik[j] * P[..., j] for j in range(grid.d))
            else:
                gradient = np.stack(
                    [grid.backward(self._truncate(ik * U), start=0)
                     for ik in self._ik], axis=-1)
                N = grid.forward(np.sum(b * gradient, axis=-1), start=0)
            N = self._truncate(N)
        if self._forcing is not None:
            N = N + grid.forward(self._forcing(t), start=0)
        return _Stage(N, speed, divergence,
                      np.zeros(grid.d) if mean is None else mean)

    def _linear(self, dt, mean):
        """Exponential and φ coefficients for the linear part."""
        if np.any(mean != 0):
            symbol = self._symbol + sum(ik * m for ik, m in
                                        zip(self._ik, mean))
            z = symbol * dt
            return (np.exp(z),) + phi_functions(z)
        coefficients = self._coefficients.get(dt)
        if coefficients is None:
            z = self._symbol * dt
            coefficients = (np.exp(z),) + phi_functions(z)
            self._coefficients[dt] = coefficients
        return coefficients

    def _advance(self, dt, stage, halvings=0):
        t = self.time
        if stage.speed * dt > self.cfg.cfl_safety * self.grid.spacing:
            if halvings >= MAX_HALVINGS:
                raise BlowUpError("time step underflow enforcing CFL "
                                  "condition at t={}.".format(t), t,
                                  stage.speed)
            log.info("CFL violated at t={:.6g} (max|b|={:.3g}, dt={:.3g}); "
                     "halving time step.".format(t, stage.speed, dt))
            self._advance(dt / 2, stage, halvings + 1)
            self._advance(dt / 2, self._stage(self._modes, self.time),
                          halvings + 1)
            return
        U = self._modes
        E, phi1, phi2 = self._linear(dt, stage.mean)
        A = E * U + dt * phi1 * stage.N
        if self.cfg.scheme == 'etd-rk2':
            second = self._stage(A, t + dt, stage.mean)
            A = A + dt * phi2 * (second.N - stage.N)
            self.max_divergence = max(self.max_divergence,
                                      second.divergence)
        self.max_divergence = max(self.max_divergence, stage.divergence)
        self._modes = A
        self.time = t + dt

    def step(self):
        """Advance the state by one configured time step."""
        target = self.t0 + (self.nstep + 1) * self.cfg.dt
        self._advance(self.cfg.dt, self._stage(self._modes, self.time))
        if self.noise is not None:
            grid = self.grid
            increment = self.noise.increment(
                grid, self.cfg.dt, self.cfg.alpha,
                self._rng.block(self.nstep))
            self._modes = self._modes + increment * (grid.phase
                                                     * grid.n ** grid.d)
        self.nstep += 1
        self.time = target
        values = self._values()
        sup = np.abs(values).max()
        if not np.isfinite(sup) or sup > self.ceiling:
            log.warning("solution blew up at t={:.6g}: max|u|={:.3g}."
                        .format(self.time, sup))
            raise BlowUpError("max|u|={:.3g} exceeds ceiling {:.3g} at t={}."
                              .format(sup, self.ceiling, self.time),
                              self.time, sup)
        return values

    def _record(self, values, dt):
        grid = self.grid
        self.metrics.add_row((self.time, np.abs(values).max(),
                              np.sum(values**2) * grid.cell_volume,
                              values.mean(), self.max_divergence, dt))

    def run(self):
        """Integrate to ``t_end``.

        Returns
        -------
        trajectory : `~fracflow.grid.SampledField`
            States at the start and every ``output_every`` steps.
        """
        values = [self._values()]
        times = [self.time]
        self._record(values[0], 0.)
        every = self.cfg.output_every
        for i in range(1, self.cfg.nsteps + 1):
            u = self.step()
            if i % every == 0 or i == self.cfg.nsteps:
                values.append(u)
                times.append(self.time)
                self._record(u, self.cfg.dt)
        return SampledField(self.grid, np.stack(values), times)


def step_linear(u, b, f, cfg):
    """Single step of ∂_t u = Δ^{α/2}u + b·∇u + f.

    Parameters
    ----------
    u : `~fracflow.grid.SampledField`
        Scalar state at a single time.
    b : `~fracflow.grid.SampledField` or `None`
        Vector drift, frozen over the step.
    f : `~fracflow.grid.SampledField` or `None`
        Scalar forcing, frozen over the step.
    cfg : `SolverConfig`
        Uses ``alpha``, ``dt``, ``scheme``, ``dealias`` and ``cfl_safety``.

    Returns
    -------
    u : `~fracflow.grid.SampledField`
        State at ``t + dt``.
    """
    drift = DriftSpec.zero() if b is None else DriftSpec('fixed-field', b)
    solver = Solver(u, cfg, drift, f)
    solver.step()
    return solver.state


def _solve(u0, cfg, drift, forcing=None, noise=None, full_output=False):
    solver = Solver(u0, cfg, drift, forcing, noise)
    trajectory = solver.run()
    if full_output:
        return trajectory, solver.metrics
    return trajectory


def solve_transport_diffusion(u0, drift, f, cfg, full_output=False,
                              forcing_norm=None):
    """Solve ∂_t u = Δ^{α/2}u + b·∇u + f with a prescribed drift.

    Parameters
    ----------
    u0 : `~fracflow.grid.SampledField`
        Initial state.
    drift : `DriftSpec` or `~fracflow.grid.SampledField` or `None`
        Drift; a vector field is taken as kind 'fixed-field'.
    f : `~fracflow.grid.SampledField`, callable or `None`
        Forcing.
    cfg : `SolverConfig`
        Time stepping.
    full_output : bool, optional
        Whether to also return the metrics table.
    forcing_norm : dict, optional
        Keyword arguments ``beta``, ``p``, ``q`` and ``loc`` for
        `~fracflow.norms.localized_norm`, used for the ratio of the sup
        norm of the solution to the localized norm of a sampled forcing,
        stored as ``metrics.meta['linfty_ratio']``.  Default: ``beta=0``,
        ``p=inf``, ``q=inf``, shifts spaced by a quarter period.

    Returns
    -------
    trajectory : `~fracflow.grid.SampledField`
    metrics : `~astropy.table.Table`
        Only if ``full_output`` is set.
    """
    if drift is None or isinstance(drift, SampledField):
        drift = DriftSpec('fixed-field', drift)
    trajectory, metrics = _solve(u0, cfg, drift, f, full_output=True)
    if full_output and isinstance(f, SampledField):
        grid = u0.grid
        kwargs = dict(beta=0., p=[np.inf] * grid.d, q=np.inf,
                      loc=LocalizationSpec.covering(grid, grid.period / 4))
        kwargs.update(forcing_norm or {})
        norm = localized_norm(f, **kwargs)
        metrics.meta['linfty_ratio'] = (metrics['sup'].max() / norm
                                        if norm > 0 else np.inf)
    if full_output:
        return trajectory, metrics
    return trajectory


def solve_sqg(theta0, alpha, forcing=None, cfg=None, noise=None,
              full_output=False):
    """Dissipative SQG, ∂_t θ = Δ^{α/2}θ + Rθ·∇θ + f.

    The Riesz velocity Rθ is recomputed at every stage.  ``alpha``
    overrides the one in ``cfg``.
    """
    if cfg is None:
        raise TypeError("solve_sqg needs a SolverConfig.")
    if theta0.grid.d != 2:
        raise ValueError("SQG requires a 2-dimensional grid.")
    return _solve(theta0, cfg.replace(alpha=alpha),
                  DriftSpec('riesz-of-state'), forcing, noise, full_output)


def solve_ns_vorticity(rho0, alpha, cfg, full_output=False):
    """Fractional vorticity equation ∂_t ρ + u·∇ρ = Δ^{α/2}ρ, u = K₂*ρ.

    In divergence form, ∂_t ρ = Δ^{α/2}ρ - ∇·(ρu), the Fokker-Planck
    equation of particles moving with velocity u under stable noise.

    The mean of ρ is carried separately: the solver evolves ρ minus its
    mean, and the mean is added back to every snapshot.
    """
    if rho0.grid.d != 2:
        raise ValueError("vorticity equation requires a 2-dimensional "
                         "grid.")
    mean = float(rho0.mean()[0])
    fluctuation = rho0 - mean
    result = _solve(fluctuation, cfg.replace(alpha=alpha),
                    DriftSpec('biot-savart-of-state'),
                    full_output=full_output)
    trajectory, metrics = result if full_output else (result, None)
    trajectory = trajectory + mean
    if full_output:
        metrics['mean'] += mean
        metrics.meta['mass'] = mean * rho0.grid.volume
        return trajectory, metrics
    return trajectory


def simulate_stochastic_sqg(theta0, noise, cfg, drift=None, forcing=None,
                            full_output=False):
    """SQG driven by additive noise on finitely many modes.

    Each step is the deterministic ETD step followed by the exact
    Gaussian increment of the forced modes.  Blocks of the noise stream
    are indexed by step, so identical seeds reproduce identical paths.

    Parameters
    ----------
    theta0 : `~fracflow.grid.SampledField`
        Initial state.
    noise : `NoiseSpec`
        Forced modes and seed.
    cfg : `SolverConfig`
        Time stepping.
    drift : `DriftSpec`, optional
        Default: the Riesz velocity of the state.  Pass
        ``DriftSpec.zero()`` for the linear equation.
    """
    if not isinstance(noise, NoiseSpec):
        raise TypeError("noise should be a NoiseSpec instance.")
    drift = DriftSpec('riesz-of-state') if drift is None else drift
    return _solve(theta0, cfg, drift, forcing, noise, full_output)


def _reverse_time(field, T):
    """Field sampled at T - t, with times increasing again."""
    if field is None or not isinstance(field, SampledField):
        return field
    return SampledField(field.grid, field.values[::-1], T - field.times[::-1])


def solve_backward_kolmogorov(f, b, T, cfg):
    """Solve ∂_t u + Δ^{α/2}u + b·∇u = f on [0, T] with u(T) = 0.

    Integrates v(s) = u(T - s), which satisfies the forward equation
    ∂_s v = Δ^{α/2}v + b(T-s)·∇v - f(T-s) with v(0) = 0.

    Parameters
    ----------
    f : `~fracflow.grid.SampledField` or callable
        Scalar forcing, possibly time dependent.
    b : `~fracflow.grid.SampledField` or `None`
        Vector drift, possibly time dependent.
    T : float
        Terminal time; ``cfg.t_end`` is replaced by it.
    cfg : `SolverConfig`
        Time stepping.

    Returns
    -------
    u : `~fracflow.grid.SampledField`
        Solution at times increasing from 0 to T.
    """
    T = float(T)
    if isinstance(f, SampledField):
        grid = f.grid
        forcing = -_reverse_time(f, T)
    elif callable(f):
        grid = None

        def forcing(s):
            value = f(T - s)
            values = (value.snapshot if isinstance(value, SampledField)
                      else np.asarray(value))
            return -values
    else:
        raise TypeError("forcing should be a SampledField or a callable.")
    if b is not None:
        grid = b.grid
        drift = DriftSpec('fixed-field', _reverse_time(b, T))
    else:
        drift = DriftSpec.zero()
    if grid is None:
        raise ValueError("cannot infer the grid from a callable forcing "
                         "without a drift field.")
    v0 = SampledField(grid, np.zeros((1,) + grid.shape), [0.])
    v = _solve(v0, cfg.replace(t_end=T), drift, forcing)
    return SampledField(grid, v.values[::-1], T - v.times[::-1])


def convergence_order(solve, dts):
    """Observed order of convergence under time-step refinement.

    Parameters
    ----------
    solve : callable
        ``solve(dt)`` returns the final state as a `SampledField` or array.
    dts : sequence of float
        Decreasing time steps, typically successive halvings.

    Returns
    -------
    orders : `~numpy.ndarray`
        log(e_i / e_{i+1}) / log(dt_i / dt_{i+1}), with e_i the sup
        distance between the solutions for dt_i and dt_{i+1}.
    """
    dts = np.asarray(dts, dtype=float)
    if dts.size < 3 or np.any(np.diff(dts) >= 0):
        raise ValueError("need at least 3 decreasing time steps.")
    finals = []
    for dt in dts:
        u = solve(dt)
        finals.append(u.values[-1] if isinstance(u, SampledField)
                      else np.asarray(u))
    errors = np.array([np.abs(a - b).max()
                       for a, b in zip(finals[:-1], finals[1:])])
    return np.log(errors[:-1] / errors[1:]) / np.log(dts[:-2] / dts[1:-1])


def mollify_drift(b, radius):
    """Gaussian mollification of a drift, multiplier exp(-|k|² r²/2)."""
    radius = float(radius)
    if radius < 0:
        raise ValueError("radius should be non-negative.")
    multiplier = np.exp(-0.5 * (b.grid.kabs * radius)**2)
    grid = b.grid
    F = grid.forward(b.values)
    if b.is_vector:
        multiplier = multiplier[..., np.newaxis]
    return b.with_values(grid.backward(F * multiplier))


def random_divfree_drift(grid, amplitude, kmax, rng=None, times=None):
    """Smooth divergence-free drift ∇^⊥ψ from a random stream function.

    The stream function has independent Gaussian coefficients on the
    modes with 0 < |m| <= kmax (m the integer wavenumber), and the drift
    is scaled such that its largest magnitude equals ``amplitude``.

    Parameters
    ----------
    grid : `~fracflow.grid.PeriodicGrid`
        Two-dimensional lattice.
    amplitude : float
        Maximum of |b|.
    kmax : float
        Largest integer wavenumber magnitude.
    rng : `~fracflow.stable.RngStream`, generator or seed, optional
    times : array_like, optional
        If given, independent drifts are drawn per time sample.
    """
    from .stable import get_generator
    if not isinstance(grid, PeriodicGrid):
        raise TypeError("grid should be a PeriodicGrid instance.")
    if grid.d != 2:
        raise ValueError("divergence-free drifts need a 2-dimensional grid.")
    if not kmax >= 1:
        raise ValueError("kmax should be at least 1.")
    generator = get_generator(rng)
    times = np.zeros(1) if times is None else np.atleast_1d(times)
    m = grid.kabs * grid.period / (2. * np.pi)
    keep = (m > 0) & (m <= kmax) & ~grid.nyquist
    k1, k2 = np.broadcast_arrays(*grid.wavenumbers)
    values = []
    for _ in times:
        psi = generator.normal(size=grid.shape)
        F = grid.forward(psi, start=0) * keep
        B = np.stack([-1j * k2 * F, 1j * k1 * F], axis=-1)
        b = grid.backward(B, start=0)
        values.append(b)
    values = np.stack(values)
    peak = np.sqrt(np.sum(values**2, axis=-1)).max()
    if peak > 0:
        values *= amplitude / peak
    return SampledField(grid, values, times)
