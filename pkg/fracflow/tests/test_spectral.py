# Licensed under the GPLv3 - see LICENSE
import numpy as np
import pytest
from scipy.special import dawsn

from ..grid import PeriodicGrid, SampledField
from .. import spectral
from .common import UseGrids, band_limited, gaussian_bump, plane_wave


class TestTransforms(UseGrids):
    def test_delta_flat_spectrum(self):
        values = np.zeros((1,) + self.grid2.shape)
        values[0, 16, 16] = 1.   # the origin
        modes = spectral.to_modes(SampledField(self.grid2, values))
        assert np.allclose(modes.modes, 1. / 32**2, atol=1e-15)

    def test_cosine_weights(self):
        f = plane_wave(self.grid1, (3,))
        modes = spectral.to_modes(f)
        assert np.isclose(modes[(3,)], 0.5)
        assert np.isclose(modes[(-3,)], 0.5)
        rest = np.delete(modes.modes, [3, 61])
        assert np.allclose(rest, 0., atol=1e-14)
        assert modes.is_hermitian()

    def test_round_trip(self):
        f = SampledField(self.grid2, self.rng.normal(size=(1, 32, 32)))
        back = spectral.from_modes(spectral.to_modes(f))
        assert np.allclose(back.values, f.values, rtol=0, atol=1e-12)

    def test_direct_dft(self):
        grid = PeriodicGrid(1, 8)
        values = self.rng.normal(size=8)
        modes = spectral.to_modes(SampledField(grid, values[np.newaxis]))
        x = grid.coordinates[0]
        k = grid.wavenumbers[0]
        direct = (values[np.newaxis, :]
                  * np.exp(-1j * k[:, np.newaxis] * x[np.newaxis, :])
                  ).sum(1) / 8
        assert np.allclose(modes.modes, direct, atol=1e-13)

    def test_vector_round_trip(self):
        v = band_limited(self.grid2, self.rng, vector=True)
        modes = spectral.to_modes(v)
        assert modes.components == 2
        back = spectral.from_modes(modes, time=1.5)
        assert back.times[0] == 1.5
        assert np.allclose(back.values, v.values, atol=1e-12)

    def test_parseval(self):
        f = SampledField(self.grid2, self.rng.normal(size=(1, 32, 32)))
        lattice = np.sqrt(np.sum(f.values**2) * self.grid2.cell_volume)
        assert np.isclose(spectral.to_modes(f).norm(), lattice,
                          rtol=1e-12)

    def test_single_time_required(self):
        f = SampledField.constant(self.grid1, 1., times=[0., 1.])
        with pytest.raises(ValueError, match='single time'):
            spectral.to_modes(f)
        with pytest.raises(TypeError):
            spectral.from_modes(np.zeros(64))


class TestFracLaplacian(UseGrids):
    @pytest.mark.parametrize('alpha', [0.5, 1., 1.5, 2.])
    def test_plane_wave(self, alpha):
        f = plane_wave(self.grid2, (3, -2))
        out = spectral.frac_laplacian(f, alpha)
        expected = -(13. ** (alpha / 2)) * f.values
        assert np.allclose(out.values, expected, rtol=0, atol=1e-12)

    def test_classical_limit(self):
        f = band_limited(self.grid2, self.rng)
        assert np.allclose(spectral.frac_laplacian(f, 2.).values,
                           spectral.laplacian(f).values, rtol=0, atol=1e-12)

    def test_zero_mode(self):
        f = SampledField.constant(self.grid1, 3.)
        assert np.allclose(spectral.frac_laplacian(f, 1.).values, 0.)

    @pytest.mark.parametrize('alpha', [0., -1., 2.5])
    def test_invalid_alpha(self, alpha):
        with pytest.raises(ValueError, match='alpha'):
            spectral.frac_laplacian(SampledField.constant(self.grid1, 1.),
                                    alpha)

    def test_gaussian_closed_form(self):
        # (-Δ)^{1/2} exp(-x^2) = (2/√π)(1 - 2x D(x)), D Dawson's integral;
        # the torus result is its periodization.
        grid = PeriodicGrid(1, 64, period=16.)
        f = gaussian_bump(grid, width=1.)
        out = spectral.frac_laplacian(f, 1.)
        x = grid.coordinates[0][:, np.newaxis]
        shifts = grid.period * np.arange(-4000, 4001)
        y = x + shifts
        expected = -(2. / np.sqrt(np.pi)
                     * (1. - 2. * y * dawsn(y))).sum(1)
        error = np.sqrt(np.sum((out.snapshot - expected)**2))
        assert error / np.sqrt(np.sum(expected**2)) < 1e-4

    def test_power_composition(self):
        f = band_limited(self.grid2, self.rng)
        alpha = 1.3
        twice = spectral.fractional_power(
            spectral.fractional_power(f, alpha / 4), alpha / 4)
        once = spectral.fractional_power(f, alpha / 2)
        scale = np.abs(once.values).max()
        assert np.allclose(twice.values, once.values,
                           rtol=0, atol=1e-13 * scale)

    def test_negative_power(self):
        f = plane_wave(self.grid1, (2,)) + 1.
        out = spectral.fractional_power(f, -1.)
        assert np.allclose(out.values, 0.5 * plane_wave(self.grid1,
                                                        (2,)).values)


class TestSemigroup(UseGrids):
    def test_identity(self):
        f = band_limited(self.grid2, self.rng)
        assert np.allclose(spectral.semigroup_apply(f, 0., 1.).values,
                           f.values, atol=1e-13)

    def test_decay(self):
        f = plane_wave(self.grid1, (4,))
        out = spectral.semigroup_apply(f, 0.3, 1.5)
        assert np.allclose(out.values, np.exp(-0.3 * 4**1.5) * f.values,
                           atol=1e-14)

    def test_composition(self):
        f = band_limited(self.grid2, self.rng)
        ps = spectral.semigroup_apply(spectral.semigroup_apply(f, 0.2, 0.7),
                                      0.3, 0.7)
        direct = spectral.semigroup_apply(f, 0.5, 0.7)
        assert np.allclose(ps.values, direct.values, rtol=0, atol=1e-13)

    def test_negative_time(self):
        with pytest.raises(ValueError, match='non-negative'):
            spectral.semigroup_apply(SampledField.constant(self.grid1, 1.),
                                     -1., 1.)


class TestVelocities(UseGrids):
    def test_riesz_cosine(self):
        grid = PeriodicGrid(2, 8)
        theta = plane_wave(grid, (1, 0))
        u = spectral.riesz_velocity(theta)
        x1 = grid.points[..., 0]
        assert np.allclose(u.snapshot[..., 0], 0., atol=1e-14)
        assert np.allclose(u.snapshot[..., 1], -np.sin(x1), atol=1e-14)

    def test_riesz_divergence_and_norm(self):
        theta = band_limited(self.grid2, self.rng) + 0.7
        u = spectral.riesz_velocity(theta)
        assert np.abs(spectral.divergence(u).values).max() < 1e-12
        norm_u = np.sqrt(np.sum(u.values**2))
        norm_theta = np.sqrt(np.sum((theta.values - theta.mean()[0])**2))
        assert np.isclose(norm_u, norm_theta, rtol=1e-12)

    def test_biot_savart_cosine(self):
        grid = PeriodicGrid(2, 8)
        rho = plane_wave(grid, (1, 0))
        u = spectral.biot_savart_velocity(rho)
        x1 = grid.points[..., 0]
        assert np.allclose(u.snapshot[..., 0], 0., atol=1e-14)
        assert np.allclose(u.snapshot[..., 1], np.sin(x1), atol=1e-14)

    def test_biot_savart_divergence_and_curl(self):
        rho = band_limited(self.grid2, self.rng) + 2.
        u = spectral.biot_savart_velocity(rho)
        assert np.abs(spectral.divergence(u).values).max() < 1e-12
        vorticity = spectral.curl(u)
        assert np.allclose(vorticity.values, rho.values - rho.mean()[0],
                           rtol=0, atol=1e-12)

    def test_riesz_from_biot_savart(self):
        theta = band_limited(self.grid2, self.rng)
        direct = spectral.riesz_velocity(theta)
        via = spectral.biot_savart_velocity(spectral.frac_laplacian(theta,
                                                                    1.))
        assert np.allclose(direct.values, via.values, rtol=0, atol=1e-12)

    def test_dimension_checks(self):
        f = SampledField.constant(self.grid1, 1.)
        with pytest.raises(ValueError, match='2-dimensional'):
            spectral.riesz_velocity(f)
        with pytest.raises(ValueError, match='2-dimensional'):
            spectral.biot_savart_velocity(f)


class TestK2:
    def test_values(self):
        assert np.allclose(spectral.k2_eval([1., 0.]), [0., 1. / (2 * np.pi)])
        assert np.allclose(spectral.k2_eval([0., 1.]),
                           [-1. / (2 * np.pi), 0.])

    def test_antisymmetry(self):
        x = np.random.default_rng(1).normal(size=(100, 2))
        assert np.allclose(spectral.k2_eval(-x), -spectral.k2_eval(x))

    def test_origin(self):
        with pytest.raises(ValueError, match='singular'):
            spectral.k2_eval([[1., 1.], [0., 0.]])

    def test_lattice_field(self):
        grid = PeriodicGrid(2, 16)
        kernel = spectral.kernel_k2_field(grid)
        assert kernel.shape == (16, 16, 2)
        assert np.all(kernel[0, 0] == 0.)
        h = grid.spacing
        assert np.allclose(kernel[1, 0], spectral.k2_eval([h, 0.]))
        assert np.allclose(kernel[15, 2], spectral.k2_eval([-h, 2 * h]))
        assert np.allclose(kernel[3, 5], -kernel[13, 11])
        with pytest.raises(ValueError, match="2 dimensions"):
            spectral.kernel_k2_field(PeriodicGrid(1, 16))


class TestDerivatives(UseGrids):
    def test_bessel_potential(self):
        f = plane_wave(self.grid2, (1, 2))
        out = spectral.bessel_potential(f, 1.5)
        assert np.allclose(out.values, 6. ** 0.75 * f.values, atol=1e-12)
        back = spectral.bessel_potential(out, -1.5)
        assert np.allclose(back.values, f.values, atol=1e-12)

    def test_gradient_constant(self):
        f = SampledField.constant(self.grid2, 4.)
        assert np.allclose(spectral.gradient(f).values, 0., atol=1e-14)

    def test_div_grad_cosine(self):
        f = plane_wave(self.grid2, (2, 3))
        out = spectral.divergence(spectral.gradient(f))
        assert np.allclose(out.values, -13. * f.values, atol=1e-12)

    def test_div_grad_laplacian(self):
        f = band_limited(self.grid2, self.rng)
        assert np.allclose(spectral.divergence(spectral.gradient(f)).values,
                           spectral.laplacian(f).values, rtol=0, atol=1e-11)

    def test_finite_difference_order(self):
        errors = []
        for n in (32, 64):
            grid = PeriodicGrid(1, n)
            f = SampledField.from_function(
                grid, lambda t, x: np.exp(np.sin(x[..., 0])))
            grad = spectral.gradient(f).snapshot[..., 0]
            fd = (np.roll(f.snapshot, -1) - np.roll(f.snapshot, 1)) / (
                2 * grid.spacing)
            errors.append(np.abs(fd - grad).max())
        assert 3.5 < errors[0] / errors[1] < 4.5

    def test_dealias(self):
        grid = PeriodicGrid(1, 32)
        mask = spectral.dealias_mask(grid)
        assert mask.sum() == 2 * 10 + 1
        f = plane_wave(grid, (8,))
        g = plane_wave(grid, (9,))
        product = spectral.dealiased_product(f, g)
        # cos 8x cos 9x = (cos x + cos 17x) / 2; 17 is aliased and dropped.
        assert np.allclose(product.values, 0.5 * plane_wave(grid, (1,)).values,
                           atol=1e-13)
        v = spectral.gradient(plane_wave(grid, (2,)))
        assert spectral.dealiased_product(f, v).is_vector
