"""
Tests for binary state files
"""

import struct

import numpy as np
import pytest

from lib.state_io import FORMAT_VERSION, MAGIC, load_state, save_state
from lib.validators import ValidationError


class TestStateFiles:
    """Test saving and loading states"""

    def test_round_trip(self, tmp_path, grid_2x3, make_state):
        """Tensors, graph and metadata come back unchanged"""
        state = make_state(grid_2x3, bond_dim=3, seed=31)
        path = save_state(state, tmp_path / 'out' / 'state.tns', metadata={'chi': 3, 'fidelity': np.float64(0.5)})
        loaded, metadata = load_state(path)

        assert loaded.graph.edges == state.graph.edges
        assert metadata == {'chi': 3, 'fidelity': 0.5}
        for original, restored in zip(state.tensors, loaded.tensors):
            assert restored.labels == original.labels
            np.testing.assert_array_equal(restored.data, original.data)

    def test_header(self, tmp_path, chain4, zero_state):
        """Files start with the magic and the format version"""
        path = save_state(zero_state(chain4), tmp_path / 'state.tns')
        magic, version, _ = struct.unpack_from('<4sIQ', path.read_bytes())
        assert magic == MAGIC
        assert version == FORMAT_VERSION

    def test_bad_magic(self, tmp_path):
        """Other files are rejected"""
        path = tmp_path / 'state.tns'
        path.write_bytes(b'JUNK' + bytes(12))
        with pytest.raises(ValidationError, match='not a state file'):
            load_state(path)

    def test_unknown_version(self, tmp_path):
        """Newer format versions are rejected"""
        path = tmp_path / 'state.tns'
        path.write_bytes(struct.pack('<4sIQ', MAGIC, 99, 2) + b'{}')
        with pytest.raises(ValidationError, match='version 99'):
            load_state(path)

    def test_truncated(self, tmp_path, chain4, make_state):
        """Missing tensor data is reported"""
        path = save_state(make_state(chain4, seed=32), tmp_path / 'state.tns')
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValidationError, match='truncated'):
            load_state(path)

    def test_too_short(self, tmp_path):
        """Files shorter than the preamble are rejected"""
        path = tmp_path / 'state.tns'
        path.write_bytes(b'TNS')
        with pytest.raises(ValidationError):
            load_state(path)

    def test_missing_file(self, tmp_path):
        """Missing files raise ValidationError"""
        with pytest.raises(ValidationError):
            load_state(tmp_path / 'absent.tns')
