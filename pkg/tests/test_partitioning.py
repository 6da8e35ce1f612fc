"""
Tests for line partitions and Pauli-string observables
"""

import pytest

from lib.lattices import heavy_hex, preset
from lib.network import NetworkGraph
from lib.observables import PauliString, z_string
from lib.partitioning import PartitionError, Partitioning, partition_line
from lib.validators import ValidationError


class TestPartitionLine:
    """Test partition strategies"""

    def test_columns(self, grid_2x3):
        """Columns run left to right, members top to bottom"""
        partitioning = partition_line(grid_2x3, 'columns')
        assert partitioning.groups == ((0, 3), (1, 4), (2, 5))
        assert partitioning.cut_edges(0) == ((0, 1), (3, 4))
        assert partitioning.group_of(4) == 1
        assert partitioning.position(4) == 1

    def test_rows(self, grid_2x3):
        """Rows run top to bottom, members left to right"""
        partitioning = partition_line(grid_2x3, 'rows')
        assert partitioning.groups == ((0, 1, 2), (3, 4, 5))
        assert partitioning.cut_edges(0) == ((0, 3), (1, 4), (2, 5))

    def test_diagonal(self, grid_2x3):
        """Anti-diagonals of the grid form a line"""
        partitioning = partition_line(grid_2x3, 'diagonal')
        assert partitioning.groups == ((0,), (3, 1), (4, 2), (5,))

    def test_chain(self, chain4):
        """Each chain site is its own column"""
        assert partition_line(chain4).groups == ((0,), (1,), (2,), (3,))

    def test_heavy_hex(self):
        """Heavy-hex patches split into valid columns"""
        partitioning = partition_line(heavy_hex(2, 2), 'columns')
        assert partitioning.n_groups == 11
        assert sum(len(g) for g in partitioning.groups) == 35

    def test_preset_device(self):
        """The 164-qubit preset partitions into columns"""
        partitioning = partition_line(preset('heavyhex_164'), 'columns')
        assert max(len(cut) for cut in (partitioning.cut_edges(b) for b in range(partitioning.n_groups - 1))) <= 6

    def test_to_dict(self, grid_2x3):
        """Partitions serialize their strategy and groups"""
        assert partition_line(grid_2x3, 'rows').to_dict() == {'strategy': 'rows', 'groups': [[0, 1, 2], [3, 4, 5]]}


class TestPartitionValidation:
    """Test rejected groupings"""

    def test_missing_vertex(self, chain4):
        """Groups must cover every vertex once"""
        with pytest.raises(PartitionError, match='exactly once'):
            partition_line(chain4, 'custom', [[0, 1], [2]])

    def test_skipping_groups(self, chain4):
        """Edges may only join neighbouring groups"""
        with pytest.raises(PartitionError, match='non-adjacent'):
            partition_line(chain4, 'custom', [[0], [2], [1], [3]])

    def test_group_interior_must_be_path(self, grid_2x2):
        """Intra-group edges must join consecutive members"""
        with pytest.raises(PartitionError, match='consecutive'):
            Partitioning(grid_2x2, ((0, 3, 1, 2),)).validate()

    def test_disconnected_groups(self):
        """Consecutive groups must share an edge"""
        graph = NetworkGraph(n=3, edges=((0, 1),))
        with pytest.raises(PartitionError, match='No edges between groups 1 and 2'):
            partition_line(graph, 'custom', [[0], [1], [2]])

    def test_needs_coordinates(self):
        """Geometric strategies need coordinates"""
        graph = NetworkGraph(n=2, edges=((0, 1),))
        with pytest.raises(PartitionError, match='coordinates'):
            partition_line(graph, 'columns')

    def test_unknown_strategy(self, chain4):
        """Unknown strategies are rejected"""
        with pytest.raises(PartitionError):
            partition_line(chain4, 'spiral')
        with pytest.raises(PartitionError):
            partition_line(chain4, 'custom')


class TestPauliString:
    """Test observable parsing"""

    @pytest.mark.parametrize('text,label', [
        ('Z5', 'Z5'),
        ('Z6 Z5', 'Z5 Z6'),
        ('x0*y1', 'X0 Y1'),
        ('I3 Z1', 'Z1'),
    ])
    def test_parse(self, text, label):
        """Terms are upper-cased, sorted by site and identities dropped"""
        assert PauliString.parse(text).label == label

    @pytest.mark.parametrize('text', ['', 'Q1', 'Z', 'Z1 X1'])
    def test_parse_errors(self, text):
        """Malformed strings and repeated sites raise"""
        with pytest.raises(ValidationError):
            PauliString.parse(text)

    def test_value_on_bits(self):
        """Diagonal strings evaluate to the parity sign"""
        observable = z_string([0, 2])
        assert observable.value_on((1, 0, 0)) == -1.0
        assert observable.value_on((1, 1, 1)) == 1.0
        with pytest.raises(ValidationError):
            PauliString.parse('X0').value_on((0,))

    def test_check_sites(self):
        """Sites must fit the register"""
        with pytest.raises(ValidationError):
            PauliString.parse('Z9').check_sites(4)
