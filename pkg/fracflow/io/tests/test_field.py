# Licensed under the GPLv3 - see LICENSE
import io

import numpy as np
import pytest

from ... import __version__
from ...grid import PeriodicGrid, SampledField
from ...tests.common import UseGrids, band_limited
from ..field import FieldDump, dump_field, load_field, END_MARKER


class TestHeader:
    def test_create(self):
        header = FieldDump(d=2, n=8, period=2., components=1,
                           times=[0., 0.5])
        assert header['count'] == 2 * 8 * 8
        assert header.shape == (2, 8, 8)
        assert header.grid == PeriodicGrid(2, 8, 2.)
        assert header.times == [0., 0.5]
        assert header['byteorder'] == 'little'
        assert header['dtype'] == '<f8'

    def test_vector(self):
        header = FieldDump(d=1, n=8, period=2., components=1,
                           times=[0.], vector=True)
        assert header.shape == (1, 8, 1)
        assert header['count'] == 8

    def test_invalid(self):
        with pytest.raises(ValueError, match="2 components, expected 1"):
            FieldDump(d=2, n=8, period=2., components=2, times=[0.])
        with pytest.raises(ValueError, match="count 10 does not match"):
            FieldDump(d=2, n=8, period=2., components=1, times=[0.],
                      count=10)
        with pytest.raises(ValueError, match="missing components, count"):
            FieldDump(d=2, n=8, period=2.)
        with pytest.raises(ValueError, match="not a fracflow-field"):
            FieldDump(d=2, n=8, period=2., components=1, times=[0.],
                      format_version=2)
        with pytest.raises(TypeError):
            FieldDump(d=2.5, n=8, period=2., components=1, times=[0.])
        # Incomplete headers can be built without verification.
        header = FieldDump(d=2, n=8, verify=False)
        assert 'count' not in header

    def test_immutable(self):
        header = FieldDump(d=2, n=8, period=2., components=1, times=[0.],
                           mutable=False)
        with pytest.raises(TypeError, match='immutable'):
            header['n'] = 16
        with pytest.raises(TypeError, match='immutable'):
            header.n = 16
        copy = header.copy()
        copy.update(n=16)
        assert copy['count'] == 256
        assert header.n == 8

    def test_file_round_trip(self):
        header = FieldDump(d=1, n=16, period=1., components=1,
                           times=[0., 1., 2.], description='trial')
        fh = io.BytesIO()
        header.tofile(fh)
        assert fh.getvalue().endswith(END_MARKER)
        fh.seek(0)
        header2 = FieldDump.fromfile(fh)
        assert header2 == header
        assert header2['description'] == 'trial'
        assert not header2.mutable

    def test_fromfile_errors(self):
        with pytest.raises(ValueError, match='end of header'):
            FieldDump.fromfile(io.BytesIO(b'd: 1\nn: 16\n'))
        with pytest.raises(ValueError, match='mapping'):
            FieldDump.fromfile(io.BytesIO(b'- 1\n- 2\n' + END_MARKER))


class TestDump(UseGrids):
    def test_round_trip(self, tmpdir):
        field = band_limited(self.grid2, self.rng, times=[0., 0.5, 1.])
        filename = str(tmpdir.join('trial.field'))
        header = dump_field(field, filename, description='random')
        assert header['version'] == __version__
        assert header['count'] == field.values.size
        loaded = load_field(filename)
        assert loaded.grid == field.grid
        assert np.all(loaded.times == field.times)
        assert not loaded.is_vector
        # Bitwise identical.
        assert loaded.values.tobytes() == field.values.tobytes()

    def test_vector_round_trip(self, tmpdir):
        field = band_limited(self.grid1, self.rng, vector=True)
        filename = str(tmpdir.join('vector.field'))
        dump_field(field, filename)
        loaded = load_field(filename)
        assert loaded.is_vector
        assert loaded.values.shape == (1, 64, 1)
        assert np.all(loaded.values == field.values)

    def test_layout(self, tmpdir):
        grid = PeriodicGrid(2, 4)
        values = np.arange(2 * 4 * 4 * 2, dtype=float).reshape(2, 4, 4, 2)
        field = SampledField(grid, values, [0., 1.])
        filename = str(tmpdir.join('layout.field'))
        dump_field(field, filename)
        with open(filename, 'rb') as fh:
            FieldDump.fromfile(fh)
            payload = fh.read()
        # Little-endian doubles in (time, x1, x2, component) order.
        assert np.all(np.frombuffer(payload, '<f8') == np.arange(64.))

    def test_corrupt_payload(self, tmpdir):
        field = band_limited(self.grid1, self.rng)
        filename = str(tmpdir.join('corrupt.field'))
        dump_field(field, filename)
        with open(filename, 'rb') as fh:
            content = bytearray(fh.read())
        content[-1] ^= 0xff
        with open(filename, 'wb') as fh:
            fh.write(content)
        with pytest.raises(ValueError, match='checksum'):
            load_field(filename)

    def test_truncated_payload(self, tmpdir):
        field = band_limited(self.grid1, self.rng)
        filename = str(tmpdir.join('truncated.field'))
        dump_field(field, filename)
        with open(filename, 'rb') as fh:
            content = fh.read()
        with open(filename, 'wb') as fh:
            fh.write(content[:-8])
        with pytest.raises(ValueError, match='declares 64 elements'):
            load_field(filename)

    def test_corrupt_header(self, tmpdir):
        field = band_limited(self.grid1, self.rng)
        filename = str(tmpdir.join('header.field'))
        dump_field(field, filename)
        with open(filename, 'rb') as fh:
            header = FieldDump.fromfile(fh)
            payload = fh.read()
        header = header.copy()
        header['byteorder'] = 'big'
        with open(filename, 'wb') as fh:
            header.tofile(fh)
            fh.write(payload)
        with pytest.raises(ValueError, match="little-endian"):
            load_field(filename)
