# Licensed under the GPLv3 - see LICENSE
import numpy as np
import pytest

from ...errors import ConfigError
from ...grid import PeriodicGrid
from ...solvers import SolverConfig
from ...data import CONFIGS
from ..config import RunConfig, load_config, SCENARIOS


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig(scenario='solve-pde')
        assert cfg.seed == 0
        assert cfg.alpha == 1.5
        assert cfg.grid == PeriodicGrid(2, 64, 2 * np.pi)
        assert cfg['time']['scheme'] == 'etd-rk2'
        assert cfg['drift']['kind'] == 'none'
        assert cfg['particles']['bandwidth'] is None
        assert cfg['particles']['level'] == 16
        assert isinstance(cfg['particles']['level'], int)
        assert cfg['particles']['sweep'] == []
        assert cfg['verify']['cases'] == 20
        assert cfg['verify']['exponents'] == [1., 2., np.inf]
        solver_config = cfg.solver_config()
        assert isinstance(solver_config, SolverConfig)
        assert solver_config.alpha == 1.5
        assert solver_config.dt == 0.01

    def test_sections(self):
        cfg = RunConfig(scenario='solve-pde', alpha=1,
                        grid={'d': 1, 'n': 16, 'period': 1.},
                        initial={'kind': 'plane-wave', 'k': 2})
        assert isinstance(cfg.alpha, float)
        assert cfg.grid == PeriodicGrid(1, 16, 1.)
        assert cfg['initial']['k'] == [2]

    def test_alpha_out_of_range(self):
        with pytest.raises(ConfigError, match='alpha') as excinfo:
            RunConfig(scenario='solve-pde', alpha=2.5)
        assert excinfo.value.path == 'alpha'
        assert 'in (0, 2]' in str(excinfo.value)

    @pytest.mark.parametrize('kwargs,path', [
        (dict(grid={'n': 31}), 'grid.n'),
        (dict(grid={'n': 12}), 'grid.n'),
        (dict(grid={'d': 3}), 'grid.d'),
        (dict(grid={'n': 'many'}), 'grid.n'),
        (dict(grid=[1, 2]), 'grid'),
        (dict(particles={'N': 1}), 'particles.N'),
        (dict(particles={'level': 2.5}), 'particles.level'),
        (dict(particles={'sweep': [4000, 1000]}), 'particles.sweep'),
        (dict(particles={'sweep': [1, 10]}), 'particles.sweep'),
        (dict(time={'scheme': 'rk4'}), 'time.scheme'),
        (dict(seed=-1), 'seed'),
        (dict(seed=True), 'seed'),
        (dict(verify={'levels': [0., 0.]}), 'verify.levels'),
        (dict(verify={'radii': [-1., 1.]}), 'verify.radii'),
        (dict(initial={'kind': 'plane-wave', 'k': [1]}), 'initial.k'),
        (dict(drift={'kind': 'divfree'}, grid={'d': 1}), 'drift.kind'),
        (dict(time={'dt': 0.3, 't_end': 1.}), 'time')])
    def test_invalid(self, kwargs, path):
        with pytest.raises(ConfigError) as excinfo:
            RunConfig(scenario='solve-pde', **kwargs)
        assert excinfo.value.path == path
        assert str(excinfo.value).startswith(path + ':')

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match='unknown key') as excinfo:
            RunConfig(scenario='solve-pde', grid={'N': 16})
        assert excinfo.value.path == 'grid.N'
        with pytest.raises(ConfigError, match='unknown key'):
            RunConfig(scenario='solve-pde', colour='blue')

    def test_scenario(self):
        with pytest.raises(ConfigError, match='required'):
            RunConfig()
        with pytest.raises(ConfigError, match='one of'):
            RunConfig(scenario='solve-everything')
        with pytest.raises(ConfigError, match='grid.d'):
            RunConfig(scenario='solve-sqg', grid={'d': 1})
        with pytest.raises(ConfigError, match='verify.lam'):
            RunConfig(scenario='verify-scaling', verify={'lam': 1.5})

    def test_immutable(self):
        cfg = RunConfig(scenario='solve-pde')
        with pytest.raises(TypeError, match='replace'):
            cfg['seed'] = 1
        other = cfg.replace(seed=5)
        assert other.seed == 5 and cfg.seed == 0

    def test_checksum(self):
        cfg = RunConfig(scenario='solve-pde', seed=3)
        assert cfg.checksum() == RunConfig(scenario='solve-pde',
                                           seed=3).checksum()
        assert cfg.checksum() != cfg.replace(seed=4).checksum()
        # Explicit defaults do not change the configuration.
        assert cfg.checksum() == RunConfig(scenario='solve-pde', seed=3,
                                           alpha=1.5).checksum()


class TestLoadConfig:
    def test_load(self, tmpdir):
        filename = str(tmpdir.join('run.yaml'))
        with open(filename, 'w') as fh:
            fh.write("scenario: solve-sqg\nalpha: 1.0\n"
                     "grid: {n: 32}\nverify: {q: .inf}\n")
        cfg = load_config(filename)
        assert cfg.scenario == 'solve-sqg'
        assert cfg.alpha == 1.
        assert cfg.grid.n == 32
        assert cfg['verify']['q'] == np.inf
        override = load_config(filename, seed=7, alpha=None)
        assert override.seed == 7 and override.alpha == 1.

    def test_errors(self, tmpdir):
        filename = str(tmpdir.join('bad.yaml'))
        with open(filename, 'w') as fh:
            fh.write("scenario: solve-pde\nalpha: 2.5\n")
        with pytest.raises(ConfigError, match='alpha'):
            load_config(filename)
        with open(filename, 'w') as fh:
            fh.write("- solve-pde\n")
        with pytest.raises(ConfigError, match='mapping'):
            load_config(filename)
        with open(filename, 'w') as fh:
            fh.write("scenario: [solve-pde\n")
        with pytest.raises(ConfigError, match='invalid yaml'):
            load_config(filename)
        with pytest.raises(ConfigError, match='cannot read'):
            load_config(str(tmpdir.join('missing.yaml')))

    @pytest.mark.parametrize('scenario', SCENARIOS)
    def test_samples(self, scenario):
        cfg = load_config(CONFIGS[scenario])
        assert cfg.scenario == scenario

    def test_particle_sample(self):
        cfg = load_config(CONFIGS['run-particles'])
        section = cfg['particles']
        assert isinstance(section['level'], int)
        assert section['level'] == 16 and section['N'] == 5000
        assert section['sweep'] == [1000, 4000, 16000]
        assert cfg['time']['t_end'] == 0.5
