"""
Tests for graphs, lattices, primitive loops and tensor network states
"""

import json

import numpy as np
import pytest

from lib.lattices import (
    build_lattice,
    chain,
    diamond_grid,
    from_adjacency,
    heavy_hex,
    heavy_hex_ladder,
    preset,
    rotated_square,
)
from lib.network import (
    NetworkGraph,
    PlanarityError,
    TensorNetworkState,
    as_bitstring,
    bond_label,
    domain_wall,
    exact_norm,
    load_graph,
    memory_footprint,
    primitive_loops,
    product_state,
    save_graph,
    to_dense,
)
from lib.tensor_core import IndexedTensor
from lib.validators import ValidationError
from oracle import basis_vector

K5_EDGES = tuple((u, v) for u in range(5) for v in range(u + 1, 5))


class TestNetworkGraph:
    """Test graph construction"""

    def test_edges_normalized(self):
        """Edges are stored as sorted (u < v) pairs"""
        graph = NetworkGraph(n=3, edges=((2, 1), (1, 0)))
        assert graph.edges == ((0, 1), (1, 2))
        assert graph.has_edge(2, 1)
        assert graph.neighbors(1) == (0, 2)
        assert graph.is_tree

    @pytest.mark.parametrize('edges', [((0, 0),), ((0, 1), (1, 0)), ((0, 5),)])
    def test_invalid_edges(self, edges):
        """Self-loops, duplicates and out-of-range vertices are rejected"""
        with pytest.raises(ValidationError):
            NetworkGraph(n=3, edges=edges)

    def test_coordinate_count(self):
        """One coordinate pair per vertex"""
        with pytest.raises(ValidationError):
            NetworkGraph(n=2, edges=((0, 1),), coords=((0, 0),))

    def test_dict_form(self):
        """to_dict/from_dict keep edges, coordinates and name"""
        graph = rotated_square(2, 2)
        assert NetworkGraph.from_dict(graph.to_dict()) == graph

    def test_malformed_dict(self):
        """Missing keys raise a validation error"""
        with pytest.raises(ValidationError):
            NetworkGraph.from_dict({'edges': []})


class TestGraphFiles:
    """Test graph JSON loading"""

    def test_save_and_load(self, tmp_path, grid_2x3):
        """A saved lattice loads back unchanged"""
        path = save_graph(grid_2x3, tmp_path / 'grid.json')
        assert load_graph(path) == grid_2x3

    def test_name_from_file(self, tmp_path):
        """Unnamed graphs take the file stem as name"""
        path = tmp_path / 'triangle.json'
        path.write_text(json.dumps({'n': 3, 'edges': [[0, 1], [1, 2], [0, 2]]}))
        assert load_graph(path).name == 'triangle'

    def test_non_planar(self, tmp_path):
        """K5 is rejected with a Kuratowski certificate"""
        path = tmp_path / 'k5.json'
        path.write_text(json.dumps({'n': 5, 'edges': [list(e) for e in K5_EDGES]}))
        with pytest.raises(PlanarityError) as excinfo:
            load_graph(path)
        assert len(excinfo.value.certificate) > 0

    def test_disconnected(self, tmp_path):
        """Disconnected graphs are rejected"""
        path = tmp_path / 'split.json'
        path.write_text(json.dumps({'n': 4, 'edges': [[0, 1], [2, 3]]}))
        with pytest.raises(ValidationError):
            load_graph(path)

    def test_invalid_json(self, tmp_path):
        """Syntax errors report the line"""
        path = tmp_path / 'broken.json'
        path.write_text('{"n": 2,\n "edges": [[0, 1]\n')
        with pytest.raises(ValidationError, match='line'):
            load_graph(path)

    def test_missing_file(self, tmp_path):
        """Missing files raise a validation error"""
        with pytest.raises(ValidationError):
            load_graph(tmp_path / 'nope.json')


class TestLattices:
    """Test lattice builders"""

    def test_chain(self):
        """Chains are trees with coordination number 2"""
        graph = chain(5)
        assert graph.n == 5
        assert len(graph.edges) == 4
        assert graph.coordination_number == 2
        assert graph.is_tree

    def test_rotated_square(self):
        """Grid numbering is row-major from the top row"""
        graph = rotated_square(2, 3)
        assert graph.n == 6
        assert graph.edges == ((0, 1), (0, 3), (1, 2), (1, 4), (2, 5), (3, 4), (4, 5))
        assert rotated_square(3, 3).coordination_number == 4

    def test_heavy_hex_cell(self):
        """One heavy-hex cell is a 12-qubit ring"""
        graph = heavy_hex(1, 1)
        assert graph.n == 12
        assert len(graph.edges) == 12
        assert graph.coordination_number == 2

    def test_heavy_hex_patch(self):
        """A 2x2 patch has 35 qubits, 38 edges and degree-3 junctions"""
        graph = heavy_hex(2, 2)
        assert graph.n == 35
        assert len(graph.edges) == 38
        assert graph.coordination_number == 3

    @pytest.mark.parametrize('name,n', [('heavyhex_164', 164), ('willow_105', 105), ('n2_52', 52), ('fe4s4_72', 72)])
    def test_presets(self, name, n):
        """Presets have the advertised qubit counts"""
        graph = preset(name)
        assert graph.n == n
        assert graph.name == name

    def test_ladder_and_diamond(self):
        """Ladder bridges every fourth site; the diamond grid has z = 4"""
        assert heavy_hex_ladder(5).n == 12
        assert diamond_grid(3, 3).coordination_number == 4

    def test_custom_adjacency(self):
        """Adjacency mappings are symmetrized into edges"""
        graph = from_adjacency({'adjacency': {'0': [1], '1': [2], '2': [0]}})
        assert graph.edges == ((0, 1), (0, 2), (1, 2))

    def test_custom_adjacency_non_planar(self):
        """Non-planar adjacency is rejected"""
        adjacency = {str(v): [w for w in range(5) if w != v] for v in range(5)}
        with pytest.raises(PlanarityError):
            build_lattice('custom-adjacency', {'adjacency': {'adjacency': adjacency}})

    def test_build_lattice_errors(self):
        """Unknown kinds, presets and dimensions raise"""
        with pytest.raises(ValidationError):
            build_lattice('triangular', {})
        with pytest.raises(ValidationError):
            build_lattice('preset', {'name': 'unknown'})
        with pytest.raises(ValidationError):
            build_lattice('chain', {'n': 0})
        with pytest.raises(ValidationError):
            build_lattice('custom-adjacency', {})


class TestPrimitiveLoops:
    """Test face enumeration"""

    def test_tree_has_no_loops(self, chain4):
        """Trees have no primitive loops"""
        assert primitive_loops(chain4) == []

    def test_grid_loops(self, grid_2x3):
        """Each plaquette is one loop, starting at its smallest vertex"""
        loops = primitive_loops(grid_2x3)
        assert [loop.vertices for loop in loops] == [(0, 1, 4, 3), (1, 2, 5, 4)]
        assert loops[0].edges == ((0, 1), (1, 4), (3, 4), (0, 3))

    def test_euler_count(self, grid_3x3):
        """Loop count matches |E| - |V| + 1"""
        loops = primitive_loops(grid_3x3)
        assert len(loops) == len(grid_3x3.edges) - grid_3x3.n + 1
        assert all(len(loop) == 4 for loop in loops)

    def test_heavy_hex_loops(self):
        """Heavy-hex loops have twelve sites"""
        loops = primitive_loops(heavy_hex(2, 2))
        assert len(loops) == 4
        assert all(len(loop) == 12 for loop in loops)


class TestTensorNetworkState:
    """Test states on graphs"""

    def test_product_state(self, grid_2x3):
        """Product states have unit bonds and the right statevector"""
        bits = (0, 1, 1, 0, 0, 1)
        state = product_state(grid_2x3, bits)
        assert state.max_bond_dimension() == 1
        np.testing.assert_allclose(to_dense(state), basis_vector(bits))
        assert exact_norm(state) == pytest.approx(1.0)

    def test_bitstring_parsing(self):
        """Bitstrings are checked for length and alphabet"""
        assert as_bitstring('0110', 4) == (0, 1, 1, 0)
        with pytest.raises(ValidationError):
            as_bitstring('012', 3)
        with pytest.raises(ValidationError):
            as_bitstring([0, 1], 3)

    def test_domain_wall(self, chain4, grid_2x3):
        """Left half by x coordinate is 0, the rest 1"""
        assert domain_wall(chain4) == (0, 0, 1, 1)
        assert domain_wall(grid_2x3) == (0, 0, 1, 0, 1, 1)

    def test_memory_footprint(self, grid_2x3, make_state):
        """16 bytes per complex entry"""
        state = make_state(grid_2x3, bond_dim=2)
        assert memory_footprint(state) == 16 * sum(t.size for t in state.tensors)

    def test_wrong_labels(self, chain4):
        """Site tensors must carry exactly their canonical labels"""
        state = product_state(chain4, '0000')
        tensors = list(state.tensors)
        tensors[0] = IndexedTensor.from_array(['p0', 'x'], np.ones((2, 1)))
        with pytest.raises(ValidationError):
            TensorNetworkState(chain4, tuple(tensors))

    def test_bond_mismatch(self, chain4):
        """Both ends of a bond must agree on its dimension"""
        state = product_state(chain4, '0000')
        tensors = list(state.tensors)
        tensors[0] = IndexedTensor.from_array(['p0', bond_label(0, 1)], np.ones((2, 2)))
        with pytest.raises(ValidationError):
            TensorNetworkState(chain4, tuple(tensors))

    def test_replace_reorders_labels(self, chain4):
        """Replaced tensors are brought into canonical label order"""
        state = product_state(chain4, '0000')
        flipped = state.tensor(1).transpose(list(reversed(state.tensor(1).labels)))
        assert state.replace({1: flipped}).tensor(1).labels == state.tensor(1).labels
