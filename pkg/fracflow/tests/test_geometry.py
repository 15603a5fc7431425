# Licensed under the GPLv3 - see LICENSE
import numpy as np
import pytest

from ..grid import PeriodicGrid
from ..geometry import (Cylinder, KernelSpec, LocalizationSpec,
                        smooth_cutoff, fractional_constant)


class TestCylinder:
    def setup_class(cls):
        cls.grid = PeriodicGrid(2, 16)

    @pytest.mark.parametrize('kind, interval', [('two-sided', (1., 3.)),
                                                ('plus', (2., 3.)),
                                                ('minus', (1., 2.))])
    def test_time_interval(self, kind, interval):
        q = Cylinder(2., 1., kind)
        assert q.time_interval == interval
        assert np.all(q.time_mask(interval))
        assert not np.any(q.time_mask([interval[0] - 0.1,
                                       interval[1] + 0.1]))

    def test_mask(self):
        q = Cylinder(0., 1.)
        mask = q.mask(self.grid, [-2., 0., 0.5, 1.])
        assert mask.shape == (4,) + self.grid.shape
        assert not mask[0].any()
        assert np.all(mask[1] == mask[2])
        distance = np.sqrt(np.sum(self.grid.points**2, axis=-1))
        assert np.all(mask[1] == (distance <= 1.))
        # Origin is a lattice point for even n.
        assert mask[1][8, 8]

    def test_periodic_ball(self):
        q = Cylinder(0., 0.5, center=[np.pi - 0.1, 0.])
        ball = q.ball_mask(self.grid)
        # The ball wraps around the cell boundary at x1 = -pi.
        assert ball[0, 8]

    def test_shift_and_scale(self):
        q = Cylinder(0., 1., 'plus')
        moved = q.shifted(2., [0.5, 0.])
        assert moved.t0 == 2. and np.all(moved.center == [0.5, 0.])
        assert moved.kind == 'plus'
        assert q.scaled(2.).r == 2.
        assert q.shifted(0.) == q
        assert q != moved
        assert 'plus' in repr(q)

    def test_invalid(self):
        with pytest.raises(ValueError, match='radius'):
            Cylinder(0., 0.)
        with pytest.raises(ValueError, match='kind'):
            Cylinder(0., 1., 'sideways')
        with pytest.raises(ValueError, match='components'):
            Cylinder(0., 1., center=[0.]).ball_mask(self.grid)
        with pytest.raises(TypeError):
            Cylinder(0., 1.).mask(None, [0.])


class TestKernelSpec:
    def test_fractional_constant(self):
        assert np.isclose(fractional_constant(1., 1), 1. / np.pi)
        assert np.isclose(fractional_constant(1., 2), 1. / (2 * np.pi))

    def test_fractional(self):
        kernel = KernelSpec.fractional(1.5, 2)
        assert kernel.kappa0 == kernel.kappa1
        assert kernel.verify(2)
        y = np.array([[0.5, 0.], [0., 2.]])
        assert np.allclose(kernel(0., y),
                           kernel.kappa0 * np.array([0.5, 2.]) ** -3.5)

    def test_comparable_kernel(self):
        def profile(t, y):
            r = np.sqrt(np.sum(y**2, axis=-1))
            return ((1.5 + 0.5 * np.cos(t + y[..., 0] * y[..., -1]))
                    * r ** -(y.shape[-1] + 1.))
        kernel = KernelSpec(1., 1., 2., profile)
        assert kernel.verify(1, times=[0., 0.3, 1.])
        assert kernel.verify(2, times=[0., 0.3])

    def test_violations(self):
        def asymmetric(t, y):
            r = np.sqrt(np.sum(y**2, axis=-1))
            return (1.5 + 0.4 * np.tanh(y[..., 0])) * r**-2
        with pytest.raises(ValueError, match='symmetric'):
            KernelSpec(1., 1., 2., asymmetric).verify(1)
        with pytest.raises(ValueError, match='violates'):
            KernelSpec(1., 1., 2., lambda t, y: 3. * np.ones(y.shape[:-1])
                       ).verify(2)

    @pytest.mark.parametrize('alpha, kappa0, kappa1', [(2., 1., 1.),
                                                       (1., 2., 1.),
                                                       (1., 0., 1.)])
    def test_invalid(self, alpha, kappa0, kappa1):
        with pytest.raises(ValueError):
            KernelSpec(alpha, kappa0, kappa1)


class TestLocalization:
    def test_cutoff_profile(self):
        s = np.linspace(0, 3, 301)
        x = np.stack([s, np.zeros_like(s)], axis=-1)
        chi = smooth_cutoff(x)
        assert np.all((chi >= 0) & (chi <= 1))
        assert np.all(chi[s <= 1] == 1.)
        assert np.all(chi[s >= 2] == 0.)
        assert np.all(np.diff(chi) <= 0)

    def test_cutoff_matches_definition(self):
        grid = PeriodicGrid(2, 32)
        loc = LocalizationSpec(0.7, [[0.5, -1.]])
        values = loc.cutoff(grid, loc.centers[0])
        expected = smooth_cutoff((grid.points - [0.5, -1.]) / 0.7)
        assert np.allclose(values, expected)

    def test_covering(self):
        grid = PeriodicGrid(2, 32)
        loc = LocalizationSpec.covering(grid, np.pi / 2)
        assert len(loc) == 16
        assert loc.centers.shape == (16, 2)
        loc1 = LocalizationSpec.covering(PeriodicGrid(1, 32), 1.)
        assert loc1.centers.shape == (7, 1)

    def test_invalid(self):
        with pytest.raises(ValueError):
            LocalizationSpec(0., [[0.]])
