# Licensed under the GPLv3 - see LICENSE
"""Reproducible scenarios: solver runs, particle runs and verifications.

Each scenario turns a `~fracflow.io.RunConfig` into fields, tables and
verdicts; `run_scenario` writes these to an output directory together
with a provenance record and the checksums of everything written.

Random inputs are drawn from `~fracflow.stable.RngStream` instances with
fixed stream numbers, so identical configurations and seeds give
identical output bytes.
"""
import hashlib
import pathlib
from collections import namedtuple
from itertools import product

import numpy as np
from astropy import log
from astropy.io.misc import yaml
from astropy.table import Table

from . import __version__
from .errors import ConfigError
from .grid import PeriodicGrid, SampledField
from .io import SCENARIOS, dump_field
from .particles import (density_standard_error, krylov_functional,
                        martingale_residual, second_moment, simulate_ddsde,
                        simulate_ns_particles, smoothed_l1)
from .regularity import (degiorgi_profile, harnack_report, holder_fit,
                         oscillation_decay_ratio, resample,
                         scaling_transform)
from .solvers import (NoiseSpec, mollify_drift, random_divfree_drift,
                      solve_backward_kolmogorov, solve_ns_vorticity,
                      solve_sqg, solve_transport_diffusion)
from .spectral import apply_multiplier, divergence, riesz_velocity
from .stable import (RngStream, StableParams, empirical_cf,
                     sample_isotropic_increments, tail_slope)


__all__ = ['ScenarioResult', 'Verdict', 'run_scenario', 'RUNNERS',
           'initial_state', 'initial_density', 'drift_field',
           'forcing_field', 'noise_spec']

# Stream numbers of the random inputs under the configured seed.
INITIAL_STREAM = 1
DRIFT_STREAM = 2
STABLE_STREAM = 3
ENSEMBLE_STREAM = 100

ScenarioResult = namedtuple('ScenarioResult', ['fields', 'tables',
                                               'verdicts'])
ScenarioResult.__doc__ = """Output of a scenario runner.

Parameters
----------
fields : dict
    `~fracflow.grid.SampledField` instances by name.
tables : dict
    `~astropy.table.Table` instances by name; always includes 'metrics'.
verdicts : dict
    `Verdict` instances by name.
"""

Verdict = namedtuple('Verdict', ['passed', 'value', 'threshold'])
Verdict.__doc__ = """Outcome of a single check: value compared to threshold."""


def _verdict(value, threshold, below=True):
    value = float(value)
    passed = value <= threshold if below else value > threshold
    return Verdict(bool(passed), value, float(threshold))


def _wavevector(grid, k):
    return np.asarray(k, dtype=float) * 2. * np.pi / grid.period


def _bump(grid, width, center, amplitude=1.):
    z = grid.minimum_image(grid.points - np.asarray(center, dtype=float))
    return amplitude * np.exp(-np.sum(z**2, axis=-1) / width**2)


def _two_bump_centers(d):
    return [(-0.8, 0.)[:d], (0.8, 0.3)[:d]]


def _band_limited(grid, band, rng):
    # Explicit mode sum, so that the field does not depend on n.
    modes = [m for m in product(range(-band + 1, band), repeat=grid.d)
             if m > (0,) * grid.d]
    k = _wavevector(grid, modes)
    generator = rng.generator
    a = generator.normal(size=len(modes))
    b = generator.normal(size=len(modes))
    phase = grid.points @ k.T
    values = np.cos(phase) @ a + np.sin(phase) @ b
    # Bounded by 1 everywhere, not only on the lattice.
    return values / (np.abs(a).sum() + np.abs(b).sum())


def initial_state(cfg, grid=None):
    """Initial state described by the 'initial' section.

    Parameters
    ----------
    cfg : `~fracflow.io.RunConfig`
        Configuration.
    grid : `~fracflow.grid.PeriodicGrid`, optional
        Lattice to sample on.  Default: the configured one.

    Returns
    -------
    u0 : `~fracflow.grid.SampledField`
        Scalar field at time 0.
    """
    grid = cfg.grid if grid is None else grid
    section = cfg['initial']
    kind = section['kind']
    amplitude = section['amplitude']
    if kind == 'gaussian':
        values = _bump(grid, section['width'], np.zeros(grid.d), amplitude)
    elif kind == 'two-bumps':
        values = sum(_bump(grid, section['width'], center, amplitude)
                     for center in _two_bump_centers(grid.d))
    elif kind == 'plane-wave':
        values = amplitude * np.cos(grid.points
                                    @ _wavevector(grid, section['k']))
    elif kind == 'band-limited':
        values = amplitude * _band_limited(
            grid, section['band'], RngStream(cfg.seed, INITIAL_STREAM))
    else:
        values = np.zeros(grid.shape)
    return SampledField(grid, values[np.newaxis], [0.])


def initial_density(cfg, grid=None):
    """Initial state normalized to a probability density."""
    u0 = initial_state(cfg, grid)
    mass = u0.integral()[0]
    if np.any(u0.values < 0) or not mass > 0:
        raise ConfigError('initial.kind', "should give a non-negative "
                          "state with positive mass for a density.")
    return u0 * (1. / mass)


def drift_field(cfg, grid=None):
    """Time-independent drift described by the 'drift' section, or `None`.

    The drift is drawn on the configured lattice and resampled on
    ``grid`` if that differs, so refinements see the same drift.
    """
    section = cfg['drift']
    if section['kind'] == 'none':
        return None
    b = random_divfree_drift(cfg.grid, section['amplitude'], section['kmax'],
                             RngStream(cfg.seed, DRIFT_STREAM))
    if section['mollify'] > 0:
        b = mollify_drift(b, section['mollify'])
    if grid is not None:
        b = resample(b, grid)
    return b


def forcing_field(cfg, grid=None):
    """Time-independent forcing described by the 'forcing' section.

    Returns `None` for kind 'none'; otherwise a field sampled at the
    start and end of the run.
    """
    grid = cfg.grid if grid is None else grid
    section = cfg['forcing']
    kind = section['kind']
    if kind == 'none':
        return None
    if kind == 'gaussian':
        values = _bump(grid, section['width'], np.zeros(grid.d),
                       section['amplitude'])
    else:
        values = section['amplitude'] * np.cos(
            grid.points @ _wavevector(grid, section['k']))
    t_end = cfg['time']['t_end']
    return SampledField(grid, np.stack([values, values]), [0., t_end])


def noise_spec(cfg):
    """Additive noise on the lowest ``noise.modes`` modes, or `None`."""
    section = cfg['noise']
    nmodes = section['modes']
    if nmodes == 0 or section['amplitude'] == 0:
        return None
    d = cfg.grid.d
    half = cfg.grid.n // 2
    candidates = sorted(
        (m for m in product(range(-half + 1, half), repeat=d)
         if m > (0,) * d),
        key=lambda m: (sum(i * i for i in m), m))[:nmodes]
    return NoiseSpec({m: section['amplitude'] for m in candidates},
                     cfg.seed)


def _sup_excess(metrics, u0):
    return metrics['sup'].max() - np.abs(u0.snapshot).max()


def _metrics_table(metrics):
    table = Table(metrics, copy=True)
    table.meta.clear()
    return table


def solve_pde(cfg):
    u0 = initial_state(cfg)
    u, metrics = solve_transport_diffusion(
        u0, drift_field(cfg), forcing_field(cfg), cfg.solver_config(),
        full_output=True)
    verdicts = {'finite': Verdict(bool(np.all(np.isfinite(u.values))),
                                  float(metrics['sup'].max()), np.inf)}
    return ScenarioResult({'u': u}, {'metrics': _metrics_table(metrics)},
                          verdicts)


def solve_sqg_scenario(cfg):
    theta0 = initial_state(cfg)
    forcing = forcing_field(cfg)
    noise = noise_spec(cfg)
    theta, metrics = solve_sqg(theta0, cfg.alpha, forcing,
                               cfg.solver_config(), noise, full_output=True)
    velocity = riesz_velocity(theta)
    verdicts = {'divergence_free': _verdict(
        np.abs(divergence(velocity).values).max(), 1e-10)}
    if forcing is None and noise is None:
        verdicts['max_principle'] = _verdict(_sup_excess(metrics, theta0),
                                             1e-6)
    return ScenarioResult({'theta': theta, 'velocity': velocity},
                          {'metrics': _metrics_table(metrics)}, verdicts)


def solve_ns2d(cfg):
    rho0 = initial_density(cfg)
    rho, metrics = solve_ns_vorticity(rho0, cfg.alpha, cfg.solver_config(),
                                      full_output=True)
    verdicts = {'mass': _verdict(np.abs(rho.integral() - 1.).max(), 1e-10),
                'divergence_free': _verdict(metrics['max_div'].max(),
                                            1e-10)}
    return ScenarioResult({'rho': rho}, {'metrics': _metrics_table(metrics)},
                          verdicts)


def _particle_distance(cfg, rho0, rho_T, bandwidth, N):
    section = cfg['particles']
    time = cfg['time']
    trajectory, densities = simulate_ns_particles(
        rho0, cfg.alpha, time['t_end'], N, section['level'], time['dt'],
        cfg.seed, bandwidth, section['record_every'])
    final = densities.at(-1)
    distance = float(smoothed_l1(
        final, rho_T.with_values(rho_T.values, final.times), 0.)[0])
    error = density_standard_error(trajectory[-1], rho0.grid, bandwidth)
    log.info("particles N={}: smoothed L1 distance {:.4g} +/- {:.2g}"
             .format(N, distance, error))
    return trajectory, densities, distance, error


def run_particles(cfg):
    rho0 = initial_density(cfg)
    grid = rho0.grid
    section = cfg['particles']
    bandwidth = section['bandwidth']
    if bandwidth is None:
        bandwidth = 4 * grid.spacing
    rho = solve_ns_vorticity(rho0, cfg.alpha, cfg.solver_config()).at(-1)
    # The particle densities carry the kernel; smooth the PDE alike.
    smoothed = apply_multiplier(rho, np.exp(-0.5 * (grid.kabs
                                                    * bandwidth)**2))
    trajectory, densities, distance, error = _particle_distance(
        cfg, rho0, smoothed, bandwidth, section['N'])
    metrics = Table([trajectory.times, second_moment(trajectory),
                     densities.integral()],
                    names=('time', 'second_moment', 'mass'))
    tables = {'metrics': metrics}
    tolerance = cfg['verify']['tolerance'] or 0.1
    verdicts = {'smoothed_l1': _verdict(distance, tolerance)}
    if section['sweep']:
        rows = [(N,) + _particle_distance(cfg, rho0, smoothed, bandwidth,
                                          N)[2:]
                for N in section['sweep']]
        sweep = Table(rows=rows, names=('N', 'smoothed_l1',
                                        'standard_error'))
        tables['sweep'] = sweep
        # Increase of the distance with N, in units of the standard error
        # of the smaller ensemble.
        excess = (np.diff(sweep['smoothed_l1'])
                  / np.asarray(sweep['standard_error'][:-1]))
        verdicts['monotone_in_N'] = _verdict(
            excess.max() if excess.size else -np.inf, 1.)
    return ScenarioResult({'density': densities, 'rho': rho}, tables,
                          verdicts)


def _frequencies(d, radius=3., npoints=13):
    xi = np.linspace(-radius, radius, npoints)
    if d == 1:
        return xi[:, np.newaxis]
    xis = np.stack(np.meshgrid(xi, xi, indexing='ij'), -1).reshape(-1, 2)
    return xis[np.sum(xis**2, -1) <= radius**2 * (1 + 1e-12)]


def sample_stable(cfg):
    section = cfg['stable']
    params = StableParams(cfg.alpha, section['d'], section['t'])
    samples = sample_isotropic_increments(
        params, section['N'], RngStream(cfg.seed, STABLE_STREAM))
    xis = _frequencies(params.d)
    cf, error = empirical_cf(samples, xis)
    exact = np.exp(-params.t * np.sqrt(np.sum(xis**2, -1)) ** params.alpha)
    names = tuple('xi_{}'.format(i + 1) for i in range(params.d))
    metrics = Table(list(xis.T) + [cf.real, cf.imag, exact, error],
                    names=names + ('cf_real', 'cf_imag', 'exact',
                                   'error'))
    tolerance = cfg['verify']['tolerance'] or 0.02
    verdicts = {'cf': _verdict(np.abs(cf - exact).max(), tolerance)}
    low = max(1e-4, 20. / len(samples))
    if params.alpha < 2 and low < 1e-2:
        slope = tail_slope(samples, (1e-2, low))
        verdicts['tail_slope'] = _verdict(abs(slope + params.alpha), 0.15)
    return ScenarioResult({}, {'metrics': metrics,
                               'samples': Table(samples,
                                                names=('x', 'y')[:params.d])},
                          verdicts)


def verify_maxprinciple(cfg):
    theta0 = initial_state(cfg)
    theta, metrics = solve_sqg(theta0, cfg.alpha, cfg=cfg.solver_config(),
                               full_output=True)
    tolerance = cfg['verify']['tolerance'] or 1e-6
    return ScenarioResult(
        {'theta': theta}, {'metrics': _metrics_table(metrics)},
        {'max_principle': _verdict(_sup_excess(metrics, theta0), tolerance),
         'divergence_free': _verdict(metrics['max_div'].max(), 1e-10)})


def _t0(cfg):
    t0 = cfg['verify']['t0']
    return cfg['time']['t_end'] / 2 if t0 is None else t0


def verify_harnack(cfg):
    section = cfg['verify']
    grid = cfg.grid
    forcing = forcing_field(cfg)
    solver_config = cfg.solver_config()
    t0 = _t0(cfg)
    rows = []
    for case in range(section['cases']):
        width = cfg['initial']['width'] * (1. + 0.25 * case
                                           / max(section['cases'] - 1, 1))
        u0 = SampledField(grid, _bump(grid, width, np.zeros(grid.d),
                                      cfg['initial']['amplitude'])[np.newaxis],
                          [0.])
        b = None
        if cfg['drift']['kind'] != 'none':
            drift = cfg['drift']
            b = random_divfree_drift(grid, drift['amplitude'], drift['kmax'],
                                     RngStream(cfg.seed,
                                               ENSEMBLE_STREAM + case))
        u = solve_transport_diffusion(u0, b, forcing, solver_config)
        kwargs = dict(f=None if forcing is None else forcing.at(0),
                      r=section['r'], t0=t0, q0=section['q'],
                      p0=section['p'])
        report = harnack_report(u, cfg.alpha,
                                weak_exponent=section['weak_exponent'],
                                **kwargs)
        ratio = oscillation_decay_ratio(u, cfg.alpha, **kwargs)
        rows.append((case, width, report.sup, report.inf, report.forcing,
                     report.tail, report.constant, ratio))
        log.info("harnack case {}: constant {:.4g}, decay ratio {:.4g}"
                 .format(case, report.constant, ratio))
    metrics = Table(rows=rows, names=('case', 'width', 'sup', 'inf',
                                      'forcing', 'tail', 'constant',
                                      'decay_ratio'))
    finite = np.isfinite(metrics['constant'])
    decaying = float(np.mean(metrics['decay_ratio'] < 1.))
    return ScenarioResult(
        {}, {'metrics': metrics},
        {'finite_constants': Verdict(bool(finite.all()),
                                     float(finite.mean()), 1.),
         'oscillation_decay': Verdict(decaying >= 0.9, decaying, 0.9)})


def _probe_centers(grid, nprobes):
    offsets = (np.arange(nprobes) - (nprobes - 1) / 2) * grid.period / (
        4. * max(nprobes, 1))
    return [offset * (-0.5) ** np.arange(grid.d) for offset in offsets]


def verify_holder(cfg):
    theta0 = initial_state(cfg)
    theta = solve_sqg(theta0, cfg.alpha, cfg=cfg.solver_config())
    rows = []
    for probe, center in enumerate(_probe_centers(theta.grid,
                                                  cfg['verify']['probes'])):
        fit = holder_fit(theta, center=center)
        rows.append((probe,) + tuple(center) + (fit.exponent, fit.r_squared))
    names = tuple('center_{}'.format(i + 1) for i in range(theta.grid.d))
    metrics = Table(rows=rows, names=('probe',) + names
                    + ('exponent', 'r_squared'))
    control_grid = PeriodicGrid(1, 256, cfg.grid.period)
    control = holder_fit(SampledField.from_function(
        control_grid, lambda t, x: np.sqrt(np.abs(x[..., 0]))),
        center=[0.])
    positive = bool(np.all(metrics['exponent'] > 0))
    return ScenarioResult(
        {'theta': theta}, {'metrics': metrics},
        {'positive_exponent': Verdict(positive,
                                      float(metrics['exponent'].min()), 0.),
         'fit_quality': _verdict(metrics['r_squared'].min(), 0.9,
                                 below=False),
         'square_root_control': _verdict(abs(control.exponent - 0.5), 0.05)})


def verify_scaling(cfg):
    lam = int(round(cfg['verify']['lam']))
    alpha = cfg.alpha
    u0 = initial_state(cfg)
    b = drift_field(cfg)
    f = forcing_field(cfg)
    solver_config = cfg.solver_config()
    u = solve_transport_diffusion(u0, b, f, solver_config)
    expected = scaling_transform(u, lam, alpha, 'u', periodic=True)

    def scaled(field, kind):
        return (None if field is None
                else scaling_transform(field, lam, alpha, kind,
                                       periodic=True))

    factor = lam ** alpha
    scaled_config = solver_config.replace(dt=solver_config.dt / factor,
                                          t_end=solver_config.t_end / factor)
    v = solve_transport_diffusion(scaled(u0, 'u'), scaled(b, 'b'),
                                  scaled(f, 'f'), scaled_config)
    difference = np.abs(v.values[-1] - expected.values[-1]).max()
    peak = np.abs(expected.values[-1]).max()
    error = difference / peak if peak > 0 else difference
    metrics = Table([[lam], [v.times[-1]], [difference], [peak]],
                    names=('lam', 'time', 'difference', 'peak'))
    tolerance = cfg['verify']['tolerance'] or 1e-3
    return ScenarioResult({'u': u, 'scaled': v}, {'metrics': metrics},
                          {'scaling_covariance': _verdict(error, tolerance)})


def verify_degiorgi(cfg):
    section = cfg['verify']
    grid = cfg.grid
    profiles = []
    for n in grid.n, 2 * grid.n:
        refined = PeriodicGrid(grid.d, n, grid.period)
        u = solve_transport_diffusion(
            initial_state(cfg, refined), drift_field(cfg, refined),
            forcing_field(cfg, refined), cfg.solver_config())
        profiles.append(degiorgi_profile(
            u, section['levels'], section['radii'], section['exponents'],
            gamma=section['gamma'], A=section['A'], t0=section['t0']))
    coarse, fine = (p.constants for p in profiles)
    usable = np.isfinite(coarse) & np.isfinite(fine) & (coarse > 0)
    change = np.abs(fine[usable] / coarse[usable] - 1.)
    metrics = Table(list(np.nonzero(usable)) + [coarse[usable], fine[usable]],
                    names=('level', 'inner', 'outer', 'exponent',
                           'constant', 'refined'))
    tolerance = section['tolerance'] or 0.5
    return ScenarioResult(
        {}, {'metrics': metrics},
        {'refinement': _verdict(change.max() if change.size else 0.,
                                tolerance),
         'monotone': Verdict(bool(profiles[0].is_monotone()), 0., 0.)})


def _particle_run(cfg, dt=None, record_every=None):
    grid = cfg.grid
    section = cfg['particles']
    time = cfg['time']
    trajectory = simulate_ddsde(
        np.zeros((section['N'], grid.d)), None, cfg.alpha, time['t_end'],
        section['N'], time['dt'] if dt is None else dt, cfg.seed,
        section['record_every'] if record_every is None else record_every)
    rate = (2. * np.pi / grid.period) ** cfg.alpha
    k = _wavevector(grid, (1,) + (0,) * (grid.d - 1))
    return trajectory, rate, k


def verify_krylov(cfg):
    trajectory, rate, k = _particle_run(cfg)
    f = SampledField.from_function(cfg.grid, lambda t, x: np.cos(x @ k),
                                   trajectory.times)
    estimate, error = krylov_functional(trajectory, f)
    T = trajectory.times[-1]
    # E cos(k.X_t) = exp(-|k|^alpha t) for stable noise started at 0.
    exact = (1. - np.exp(-rate * T)) / rate
    slack = cfg['verify']['tolerance'] or 3e-3
    metrics = Table([[estimate], [error], [exact]],
                    names=('estimate', 'standard_error', 'exact'))
    return ScenarioResult(
        {}, {'metrics': metrics},
        {'krylov': _verdict(abs(estimate - exact), 4 * error + slack)})


def _martingale_run(cfg, dt):
    trajectory, rate, k = _particle_run(cfg, dt, record_every=1)
    f = SampledField.from_function(cfg.grid, lambda t, x: np.cos(x @ k),
                                   trajectory.times)
    u = solve_backward_kolmogorov(
        f, None, cfg['time']['t_end'],
        cfg.solver_config(dt=dt, output_every=1))
    return trajectory, u, f, k


def verify_martingale(cfg):
    grid = cfg.grid
    dt = cfg['time']['dt']
    trajectory, u, f, k = _martingale_run(cfg, dt)
    residual, error = martingale_residual(trajectory, u, f)
    fine = _martingale_run(cfg, dt / 2)
    fine_residual, fine_error = martingale_residual(*fine[:3])
    # First-order bias at dt, from the change under halving.
    bias = 2. * abs(residual - fine_residual)
    perturbed = u + SampledField.from_function(
        grid, lambda t, x: np.cos(x @ k), u.times)
    control, control_error = martingale_residual(trajectory, perturbed, f)
    slack = cfg['verify']['tolerance'] or 0.
    threshold = 3 * error + bias + slack
    metrics = Table([['solution', 'solution', 'perturbed'],
                     [dt, dt / 2, dt], [residual, fine_residual, control],
                     [error, fine_error, control_error],
                     [bias, bias / 2, bias]],
                    names=('field', 'dt', 'residual', 'standard_error',
                           'bias'))
    return ScenarioResult(
        {'u': u}, {'metrics': metrics},
        {'martingale': _verdict(residual, threshold),
         'negative_control': _verdict(control,
                                      3 * control_error + bias + slack,
                                      below=False)})


RUNNERS = {
    'solve-pde': solve_pde,
    'solve-sqg': solve_sqg_scenario,
    'solve-ns2d': solve_ns2d,
    'run-particles': run_particles,
    'sample-stable': sample_stable,
    'verify-maxprinciple': verify_maxprinciple,
    'verify-harnack': verify_harnack,
    'verify-holder': verify_holder,
    'verify-scaling': verify_scaling,
    'verify-degiorgi': verify_degiorgi,
    'verify-krylov': verify_krylov,
    'verify-martingale': verify_martingale,
}
assert set(RUNNERS) == set(SCENARIOS)


def _sha256(path):
    with open(path, 'rb') as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _plain(value):
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    return float(value)


def run_scenario(cfg, out_dir):
    """Run the configured scenario and write its artifacts.

    Written are one ``<name>.field`` dump per field, one ``<name>.csv``
    per table (always ``metrics.csv``), ``verdicts.yaml``,
    ``provenance.yaml`` and ``checksums.yaml``.

    Parameters
    ----------
    cfg : `~fracflow.io.RunConfig`
        Validated configuration.
    out_dir : str or path-like
        Output directory; created if needed.

    Returns
    -------
    result : `ScenarioResult`
    """
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log.info("running scenario {} with seed {}".format(cfg.scenario,
                                                       cfg.seed))
    result = RUNNERS[cfg.scenario](cfg)
    written = []
    for name, field in sorted(result.fields.items()):
        path = out / (name + '.field')
        dump_field(field, path, scenario=cfg.scenario, name=name)
        written.append(path)
    for name, table in sorted(result.tables.items()):
        path = out / (name + '.csv')
        table.write(path, format='ascii.csv', overwrite=True)
        written.append(path)
    verdicts = {name: {'passed': bool(v.passed), 'value': _plain(v.value),
                       'threshold': _plain(v.threshold)}
                for name, v in result.verdicts.items()}
    provenance = {'scenario': cfg.scenario, 'seed': cfg.seed,
                  'version': __version__, 'config_sha256': cfg.checksum(),
                  'config': cfg.todict()}
    for name, content in (('verdicts', verdicts),
                          ('provenance', provenance)):
        path = out / (name + '.yaml')
        with open(path, 'w') as fh:
            fh.write(yaml.dump(content))
        written.append(path)
    checksums = {path.name: _sha256(path) for path in written}
    with open(out / 'checksums.yaml', 'w') as fh:
        fh.write(yaml.dump(checksums))
    failed = sorted(name for name, v in result.verdicts.items()
                    if not v.passed)
    if failed:
        log.warning("scenario {} failed checks: {}"
                    .format(cfg.scenario, ', '.join(failed)))
    else:
        log.info("scenario {} passed all checks".format(cfg.scenario))
    return result
