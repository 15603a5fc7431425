# Licensed under the GPLv3 - see LICENSE
import numpy as np
import pytest

from ..errors import BlowUpError, FracflowExperimentalWarning
from ..grid import PeriodicGrid, SampledField
from ..spectral import apply_multiplier
from ..solvers import SolverConfig, solve_ns_vorticity
from ..particles import (ParticleEnsemble, ParticleTrajectory,
                         InteractionKernel, MollifierSpec, InitialLaw,
                         mollify_kernel, em_step, simulate_ddsde,
                         empirical_density, density_standard_error,
                         interpolate, krylov_functional, martingale_residual,
                         simulate_ns_particles, sliced_wasserstein,
                         smoothed_l1, second_moment, standard_bump)
from .common import UseGrids, gaussian_bump, plane_wave


def two_bumps(grid):
    rho = (gaussian_bump(grid, 0.7, center=(-0.8, 0.))
           + gaussian_bump(grid, 0.7, center=(0.8, 0.3)))
    return rho * (1. / rho.integral()[0])


class TestEnsemble:
    def test_wrapping(self):
        ens = ParticleEnsemble([[4., 0.], [-4., 1.]])
        assert np.allclose(ens.positions[:, 0], [4. - 2 * np.pi,
                                                 2 * np.pi - 4.])
        assert ens.N == 2 and ens.d == 2 and len(ens) == 2
        assert np.isclose(ens.weights.sum(), 1.)

    def test_one_dimensional_input(self):
        ens = ParticleEnsemble(np.linspace(-1, 1, 5), time=0.5)
        assert ens.positions.shape == (5, 1)
        assert ens.time == 0.5

    def test_invalid(self):
        with pytest.raises(ValueError, match='N >= 2'):
            ParticleEnsemble([[0., 0.]])
        with pytest.raises(ValueError, match='non-finite'):
            ParticleEnsemble([[0., np.nan], [1., 1.]])
        with pytest.raises(ValueError, match='period'):
            ParticleEnsemble([[0.], [1.]], period=-1.)

    def test_trajectory(self):
        period = 2 * np.pi
        x = np.array([[[3.], [0.]], [[-3.], [0.5]], [[-2.5], [1.]]])
        traj = ParticleTrajectory([0., 1., 2.], x, period)
        assert traj.N == 2 and traj.d == 1 and len(traj) == 3
        assert traj[1].time == 1.
        unwrapped = traj.unwrapped()
        # Particle 0 crossed the boundary.
        assert np.allclose(unwrapped[:, 0, 0],
                           [3., 2 * np.pi - 3., 2 * np.pi - 2.5])
        assert np.allclose(second_moment(traj),
                           [0., ((2 * np.pi - 6.)**2 + 0.25) / 2,
                            ((2 * np.pi - 5.5)**2 + 1.) / 2])
        with pytest.raises(ValueError, match='snapshot'):
            ParticleTrajectory([0., 1.], x, period)


class TestKernels:
    def setup_class(cls):
        cls.rng = np.random.default_rng(123)

    def test_constant(self):
        kernel = InteractionKernel.constant([0.5, -1.])
        x = self.rng.uniform(-3, 3, size=(20, 2))
        assert np.allclose(kernel.pairwise_mean(0., x, 2 * np.pi),
                           [0.5, -1.])
        assert np.isclose(kernel.bound, np.sqrt(1.25))
        assert kernel.verify(0., x, x[::-1])

    def test_biot_savart(self):
        kernel = InteractionKernel.biot_savart()
        z = self.rng.normal(size=(50, 2))
        value = kernel(0., z, 0.)
        assert np.allclose(value, -kernel(0., -z, 0.))
        # Perpendicular to the displacement, magnitude 1/(2 pi r).
        assert np.allclose(np.sum(value * z, axis=-1), 0.)
        assert np.allclose(np.sqrt(np.sum(value**2, axis=-1)),
                           1. / (2 * np.pi * np.sqrt(np.sum(z**2, -1))))
        assert np.all(kernel(0., np.zeros(2), np.zeros(2)) == 0.)
        assert kernel.verify(0., z, np.zeros(2))

    def test_verify_fails(self):
        kernel = InteractionKernel(lambda t, z: 2. * z, 1,
                                   envelope=lambda t, z: np.abs(z[..., 0]))
        with pytest.raises(ValueError, match='envelope'):
            kernel.verify(0., np.ones((3, 1)), np.zeros((3, 1)))
        with pytest.raises(AttributeError):
            InteractionKernel(lambda t, z: z, 1).verify(0., 1., 0.)

    def test_antisymmetric_center_of_mass(self):
        kernel = mollify_kernel(InteractionKernel.biot_savart(),
                                MollifierSpec.standard(4))
        x = self.rng.uniform(-np.pi, np.pi, size=(300, 2))
        drift = kernel.pairwise_mean(0., x, 2 * np.pi)
        assert np.all(np.abs(drift.sum(0)) < 1e-9)

    def test_invalid(self):
        with pytest.raises(TypeError):
            InteractionKernel(None, 2)


class TestMollifier:
    def setup_class(cls):
        cls.moll = MollifierSpec.standard(4)

    def test_normalization(self):
        assert np.isclose(MollifierSpec.mass(self.moll.bump, 5), 1.,
                          rtol=0, atol=1e-8)
        with pytest.raises(ValueError, match='integrates'):
            MollifierSpec(standard_bump, 4)
        with pytest.raises(ValueError, match='level'):
            MollifierSpec.standard(0)

    def test_nodes(self):
        s, a, c, weights = self.moll.nodes(order=6)
        assert np.isclose(weights.sum(), 1.)
        assert np.all(s == 0.)
        assert np.all(np.sqrt(np.sum((a - c)**2, -1)) <= self.moll.reach)
        assert np.allclose(weights @ a, 0., atol=1e-14)

    def test_difference_cdf(self):
        reach = self.moll.reach
        r = np.linspace(0., 1.5 * reach, 50)
        cdf = self.moll.difference_cdf(r)
        assert cdf[0] == 0.
        assert np.all(np.diff(cdf) >= 0)
        assert np.isclose(self.moll.difference_cdf(reach), 1., atol=1e-6)
        assert np.all(cdf[r > reach] == 1.)

    def test_biot_savart_closed_form(self):
        kernel = InteractionKernel.biot_savart()
        mollified = mollify_kernel(kernel, self.moll)
        rng = np.random.default_rng(1)
        z = rng.uniform(-1., 1., size=(500, 2))
        value = mollified(0., z, 0.)
        magnitude = np.sqrt(np.sum(value**2, -1))
        assert np.all(magnitude <= mollified.bound * (1. + 1e-12))
        far = np.sqrt(np.sum(z**2, -1)) > self.moll.reach
        assert np.allclose(value[far], kernel(0., z[far], 0.))
        assert mollified.verify(0., z, 0.)

    def test_bound_scales_with_level(self):
        kernel = InteractionKernel.biot_savart()
        bounds = [mollify_kernel(kernel, MollifierSpec.standard(level)).bound
                  for level in (4, 8, 16)]
        assert np.allclose(np.diff(np.log2(bounds)), 1., rtol=1e-6)

    def test_constant_unchanged(self):
        kernel = InteractionKernel.constant([1., 2.])
        mollified = mollify_kernel(kernel, self.moll, order=4)
        z = np.random.default_rng(2).normal(size=(10, 2))
        assert np.allclose(mollified(0., z, 0.), [1., 2.], atol=1e-12)
        assert mollified.bound == kernel.bound

    def test_smooth_kernel_close(self):
        kernel = InteractionKernel(lambda t, z: np.sin(z), 2)
        mollified = mollify_kernel(kernel, self.moll, order=4)
        z = np.random.default_rng(3).uniform(-3, 3, size=(100, 2))
        distance = np.sqrt(np.sum((mollified(0., z, 0.)
                                   - kernel(0., z, 0.))**2, -1))
        assert np.all(distance <= 2 * self.moll.reach)
        assert np.isclose(mollified.bound, np.sqrt(2.), rtol=0.05)

    def test_time_mollification(self):
        moll = MollifierSpec.standard(4, time_mollify=True)
        kernel = InteractionKernel.constant([1., 0.])
        mollified = mollify_kernel(kernel, moll, order=4)
        z = np.zeros((3, 2))
        assert np.allclose(mollified(1., z, 0.), [1., 0.])
        assert np.all(mollified(-1., z, 0.) == 0.)

    def test_not_translation_invariant(self):
        kernel = InteractionKernel(lambda t, x, y: x, 2,
                                   translation_invariant=False)
        mollified = mollify_kernel(kernel, self.moll, order=4)
        x = np.array([[0.3, -0.2], [1., 2.]])
        assert np.allclose(mollified(0., x, np.zeros(2)), x, atol=1e-12)

    def test_invalid(self):
        with pytest.raises(TypeError):
            mollify_kernel(lambda t, z: z, self.moll)
        with pytest.raises(TypeError):
            mollify_kernel(InteractionKernel.biot_savart(), None)
        with pytest.raises(ValueError, match='dimension'):
            mollify_kernel(InteractionKernel.constant([1.]), self.moll)


class TestEMStep:
    def test_free(self):
        ens = ParticleEnsemble([[0., 0.], [1., 1.]])
        new = em_step(ens, None, 0.1)
        assert np.allclose(new.positions, ens.positions, rtol=0, atol=1e-15)
        assert np.isclose(new.time, 0.1)

    def test_constant_drift(self):
        ens = ParticleEnsemble([[3., 0.], [1., 1.]])
        new = em_step(ens, InteractionKernel.constant([1., 0.]), 0.5)
        assert np.allclose(new.positions, [[3.5 - 2 * np.pi, 0.],
                                           [1.5, 1.]])

    def test_increments(self):
        ens = ParticleEnsemble([[0.], [1.]])
        new = em_step(ens, None, 0.1, [[0.2], [-0.2]])
        assert np.allclose(new.positions[:, 0], [0.2, 0.8])
        with pytest.raises(ValueError, match='shape'):
            em_step(ens, None, 0.1, [0.2, -0.2, 0.])

    def test_blowup(self):
        ens = ParticleEnsemble([[0.], [1.]])
        with pytest.raises(BlowUpError, match='non-finite'):
            em_step(ens, None, 0.1, [[np.inf], [0.]])


class TestSimulate:
    def test_second_moment_gaussian(self):
        N = 2000
        traj = simulate_ddsde(np.zeros((N, 2)), None, 2., 0.5, N, 0.05,
                              seed=7)
        assert traj.positions.shape == (11, N, 2)
        assert np.allclose(traj.times, np.arange(11) * 0.05)
        msd = second_moment(traj)
        # |L_t|^2 / (2t) is chi^2 with 2 degrees of freedom.
        assert np.all(np.abs(msd[1:] - 4 * traj.times[1:])
                      <= 4 * 4 * traj.times[1:] / np.sqrt(N))

    def test_reproducible(self):
        law = InitialLaw.uniform(2)
        kernel = InteractionKernel.constant([0.1, 0.])
        a = simulate_ddsde(law, kernel, 1.5, 0.2, 50, 0.05, seed=11)
        b = simulate_ddsde(law, kernel, 1.5, 0.2, 50, 0.05, seed=11)
        c = simulate_ddsde(law, kernel, 1.5, 0.2, 50, 0.05, seed=12)
        assert a.positions.tobytes() == b.positions.tobytes()
        assert not np.allclose(a.positions, c.positions)

    def test_record_every(self):
        traj = simulate_ddsde(np.zeros((10, 1)), None, 1.5, 1., 10, 0.1,
                              seed=1, record_every=4)
        assert np.allclose(traj.times, [0., 0.4, 0.8, 1.])

    def test_exchangeable(self):
        N = 8
        rng = np.random.default_rng(5)
        x0 = rng.uniform(-2., 2., size=(N, 2))
        perm = rng.permutation(N)
        kernel = mollify_kernel(InteractionKernel.biot_savart(),
                                MollifierSpec.standard(2))
        a = simulate_ddsde(x0, kernel, 1.5, 0.3, N, 0.05, seed=3)
        b = simulate_ddsde(x0[perm], kernel, 1.5, 0.3, N, 0.05, seed=3,
                           streams=perm)
        assert np.allclose(b.positions, a.positions[:, perm], atol=1e-10)

    def test_invalid(self):
        with pytest.raises(ValueError, match='multiple'):
            simulate_ddsde(np.zeros((4, 1)), None, 1.5, 0.25, 4, 0.1, 1)
        with pytest.raises(ValueError, match='initial positions'):
            simulate_ddsde(np.zeros((4, 1)), None, 1.5, 0.2, 5, 0.1, 1)
        with pytest.raises(ValueError, match='stream'):
            simulate_ddsde(np.zeros((4, 1)), None, 1.5, 0.2, 4, 0.1, 1,
                           streams=[0, 1])


class TestInitialLaw(UseGrids):
    def test_uniform(self):
        x = InitialLaw.uniform(2).sample(1000, 1)
        assert x.shape == (1000, 2)
        assert np.all((x >= -np.pi) & (x < np.pi))

    def test_gaussian(self):
        x = InitialLaw.gaussian(1, 0.3, center=[1.]).sample(10000, 2)
        assert abs(x.mean() - 1.) < 4 * 0.3 / 100
        assert abs(x.std() - 0.3) < 0.01

    def test_from_density(self):
        rho = gaussian_bump(self.grid2, 0.5, center=(1., -1.))
        rho = rho * (1. / rho.integral()[0])
        x = InitialLaw.from_density(rho).sample(20000, 3)
        assert np.allclose(x.mean(0), [1., -1.], atol=0.02)

    def test_from_density_invalid(self):
        rho = gaussian_bump(self.grid2, 0.5)
        with pytest.raises(ValueError, match='integrate'):
            InitialLaw.from_density(rho)
        with pytest.raises(ValueError, match='non-negative'):
            InitialLaw.from_density(rho - 0.5)
        with pytest.raises(TypeError):
            InitialLaw.from_density(rho.values)


class TestDensity(UseGrids):
    def test_mass(self):
        ens = ParticleEnsemble(self.rng.normal(size=(500, 2)))
        density = empirical_density(ens, self.grid2, bandwidth=0.3)
        assert np.isclose(density.integral()[0], 1., rtol=0, atol=1e-12)
        ens1 = ParticleEnsemble(self.rng.normal(size=(500, 1)))
        density1 = empirical_density(ens1, self.grid1)
        assert np.isclose(density1.integral()[0], 1., rtol=0, atol=1e-12)

    def test_uniform(self):
        ens = ParticleEnsemble(InitialLaw.uniform(1).sample(20000, 4))
        density = empirical_density(ens, self.grid1, bandwidth=0.3)
        assert np.allclose(density.snapshot, 1. / (2 * np.pi), atol=0.015)

    def test_standard_error(self):
        law = InitialLaw.uniform(1)
        ens = ParticleEnsemble(law.sample(20000, 5))
        error = density_standard_error(ens, self.grid1, bandwidth=0.3)
        density = empirical_density(ens, self.grid1, bandwidth=0.3)
        deviation = (np.abs(density.snapshot - 1. / (2 * np.pi)).sum()
                     * self.grid1.cell_volume)
        assert 0. < deviation < 1.5 * error
        small = ParticleEnsemble(law.sample(5000, 5))
        ratio = error / density_standard_error(small, self.grid1,
                                               bandwidth=0.3)
        assert 0.45 < ratio < 0.55
        ens2 = ParticleEnsemble(self.rng.normal(size=(2000, 2)))
        assert density_standard_error(ens2, self.grid2, bandwidth=0.3) > 0.
        same = ParticleEnsemble(np.ones((10, 2)))
        assert np.isclose(density_standard_error(same, self.grid2,
                                                 bandwidth=0.3),
                          0., atol=1e-5)
        with pytest.raises(ValueError, match='grid'):
            density_standard_error(ens2, self.grid1)

    def test_time_stamp(self):
        ens = ParticleEnsemble(self.rng.normal(size=(50, 2)), time=0.7)
        assert empirical_density(ens, self.grid2).times[0] == 0.7

    def test_invalid(self):
        ens = ParticleEnsemble(self.rng.normal(size=(50, 2)))
        with pytest.raises(ValueError, match='bandwidth'):
            empirical_density(ens, self.grid2, bandwidth=0.01)
        with pytest.raises(ValueError, match='grid'):
            empirical_density(ens, self.grid1)


class TestInterpolate(UseGrids):
    def test_lattice_points(self):
        f = plane_wave(self.grid2, (1, 2))
        points = self.grid2.points.reshape(-1, 2)
        assert np.allclose(interpolate(self.grid2, f.snapshot, points),
                           f.snapshot.ravel())

    def test_midpoints(self):
        grid = self.grid1
        values = self.rng.normal(size=grid.shape)
        x = grid.points[:, 0] + grid.spacing / 2
        expected = (values + np.roll(values, -1)) / 2
        assert np.allclose(interpolate(grid, values, x[:, np.newaxis]),
                           expected)


class TestMonteCarlo(UseGrids):
    def setup_class(cls):
        UseGrids.setup_class(cls)
        cls.N = 4000
        cls.traj = simulate_ddsde(np.zeros((cls.N, 1)), None, 1.5, 1.,
                                  cls.N, 0.05, seed=17)

    def field(self, function):
        return SampledField.from_function(self.grid1, function,
                                          self.traj.times)

    def test_krylov(self):
        f = self.field(lambda t, x: np.cos(x[..., 0]))
        estimate, error = krylov_functional(self.traj, f)
        # E cos(L_t) = exp(-t) for every alpha.
        assert abs(estimate - (1. - np.exp(-1.))) <= 4 * error + 3e-3

    def test_krylov_times(self):
        f = SampledField.from_function(self.grid1,
                                       lambda t, x: np.cos(x[..., 0]))
        with pytest.raises(ValueError, match='times'):
            krylov_functional(self.traj, f)

    def test_martingale(self):
        u = self.field(lambda t, x: np.exp(t - 1.) * np.cos(x[..., 0]))
        f = self.field(lambda t, x: np.zeros(x.shape[:-1]))
        residual, error = martingale_residual(self.traj, u, f)
        assert residual <= 4 * error + 3e-3
        # Not a solution: E[cos X_1 - cos X_0.5] = e^-0.5 (e^-0.5 - 1).
        wrong = self.field(lambda t, x: np.cos(x[..., 0]))
        residual, error = martingale_residual(self.traj, wrong, f)
        assert residual > 10 * error
        assert abs(residual - np.exp(-0.5) * (1 - np.exp(-0.5))) < 0.05

    def test_martingale_invalid(self):
        u = self.field(lambda t, x: np.cos(x[..., 0]))
        with pytest.raises(ValueError, match='t0 < t1'):
            martingale_residual(self.traj, u, u, t0=0.5, t1=0.5)


class TestDistances(UseGrids):
    def test_sliced_wasserstein_1d(self):
        x = self.rng.uniform(-1., 1., size=(200, 1))
        a = ParticleEnsemble(x)
        assert sliced_wasserstein(a, a) == 0.
        assert np.isclose(sliced_wasserstein(a, ParticleEnsemble(x + 0.5)),
                          0.5)

    def test_sliced_wasserstein_2d(self):
        x = self.rng.uniform(-1., 1., size=(200, 2))
        shifted = ParticleEnsemble(x + [0.3, 0.])
        angles = np.pi * np.arange(64) / 64
        assert np.isclose(sliced_wasserstein(ParticleEnsemble(x), shifted),
                          0.3 * np.abs(np.cos(angles)).mean())
        with pytest.raises(ValueError, match='dimension'):
            sliced_wasserstein(ParticleEnsemble(x),
                               ParticleEnsemble(x[:, :1]))

    def test_smoothed_l1(self):
        rho = gaussian_bump(self.grid2, 0.5)
        assert np.all(smoothed_l1(rho, rho, 0.3) == 0.)
        other = gaussian_bump(self.grid2, 0.5, center=(1., 0.))
        assert np.all(smoothed_l1(rho, other, 0.3)
                      < smoothed_l1(rho, other, 0.))


class TestVortexParticles:
    def setup_class(cls):
        cls.grid = PeriodicGrid(2, 32)
        cls.rho0 = two_bumps(cls.grid)

    def test_against_vorticity_equation(self):
        h = 0.5
        traj, densities = simulate_ns_particles(
            self.rho0, 1.5, 0.5, 5000, level=16, dt=0.05, seed=2024,
            bandwidth=h)
        assert densities.ntimes == len(traj) == 11
        assert np.allclose(densities.integral(), 1.)
        rho = solve_ns_vorticity(self.rho0, 1.5,
                                 SolverConfig(1.5, 0.01, 0.5)).at(-1)
        smoothed = apply_multiplier(
            rho, np.exp(-0.5 * (self.grid.kabs * h)**2))
        distance = (np.abs(densities.values[-1] - smoothed.snapshot).sum()
                    * self.grid.cell_volume)
        assert distance < 0.1

    def test_experimental_alpha(self):
        with pytest.warns(FracflowExperimentalWarning, match='alpha'):
            simulate_ns_particles(self.rho0, 2., 0.1, 50, level=4, dt=0.05,
                                  seed=1, bandwidth=0.4)

    def test_invalid(self):
        rho = SampledField.constant(PeriodicGrid(1, 16), 1. / (2 * np.pi))
        with pytest.raises(ValueError, match='2-dimensional'):
            simulate_ns_particles(rho, 1.5, 0.1, 50, level=4, dt=0.05,
                                  seed=1)
