"""
Tests for boundary-MPS norms, amplitudes and expectation values
"""

import numpy as np
import pytest

from lib.boundary_mps import (
    PartitionOperator,
    amplitude,
    contract_slabs,
    expectation,
    fit_mps_mpo,
    norm_environments,
    norm_value,
)
from lib.engine import run_circuit
from lib.lattices import rotated_square
from lib.network import bra, domain_wall, exact_norm, product_state, to_dense
from lib.observables import PauliString
from lib.partitioning import partition_line
from lib.trotter import heisenberg_trotter_circuit
from lib.validators import ValidationError
from oracle import basis_index, bits_of
from oracle import expectation as dense_expectation


class TestNorm:
    """Test norm messages"""

    @pytest.mark.parametrize('fixture', ['grid_2x3', 'grid_3x3', 'heavy_hex_cell'])
    def test_exact_at_full_rank(self, request, make_state, fixture):
        """With enough rank the boundary norm is exact"""
        graph = request.getfixturevalue(fixture)
        state = make_state(graph, bond_dim=2, seed=11)
        partitioning = partition_line(state, 'columns')
        env = norm_environments(state, partitioning, rank=64)
        assert not env.truncated
        assert norm_value(state, partitioning, env) == pytest.approx(exact_norm(state), rel=1e-10)

    def test_rows_partition(self, grid_3x3, make_state):
        """The partition strategy does not change the exact value"""
        state = make_state(grid_3x3, bond_dim=2, seed=12)
        partitioning = partition_line(state, 'rows')
        env = norm_environments(state, partitioning, rank=64)
        assert norm_value(state, partitioning, env) == pytest.approx(exact_norm(state), rel=1e-10)

    def test_truncated_rank(self, grid_3x3, make_state):
        """Low rank truncates and is refined by sweeps"""
        state = make_state(grid_3x3, bond_dim=2, seed=13)
        partitioning = partition_line(state, 'columns')
        env = norm_environments(state, partitioning, rank=1)
        assert env.truncated
        assert all(message.max_rank == 1 for message in env.right.values())
        fitted = [report for report in env.reports if report.truncated]
        assert fitted and all(report.sweeps >= 1 and len(report.history) >= 1 for report in fitted)
        assert np.isfinite(norm_value(state, partitioning, env))

    def test_error_shrinks_with_rank(self, grid_3x3, make_state):
        """The exact rank closes the gap left by rank one"""
        state = make_state(grid_3x3, bond_dim=2, seed=14)
        partitioning = partition_line(state, 'columns')
        exact = exact_norm(state)
        errors = [
            abs(norm_value(state, partitioning, norm_environments(state, partitioning, rank)) - exact) / exact
            for rank in (1, 16)
        ]
        assert errors[1] < 1e-10
        assert errors[1] < errors[0]

    def test_left_messages(self, grid_2x3, make_state):
        """Left-to-right messages close to the same norm"""
        state = make_state(grid_2x3, bond_dim=2, seed=15)
        partitioning = partition_line(state, 'columns')
        env = norm_environments(state, partitioning, rank=64, both_directions=True)
        last = partitioning.n_groups - 1
        assert sorted(env.left) == list(range(last))
        closing = PartitionOperator.norm(state, partitioning, last).slabs([env.left[last - 1]])
        assert contract_slabs(closing).item().real == pytest.approx(exact_norm(state), rel=1e-10)

    def test_boundary_mps_labels(self, grid_2x3, make_state):
        """Norm sites carry ket and bra legs of their cut edge; conj primes them"""
        state = make_state(grid_2x3, bond_dim=2)
        partitioning = partition_line(state, 'columns')
        message = norm_environments(state, partitioning, rank=8).right[0]
        assert message.edges == ((0, 1), (3, 4))
        assert message.open_labels == (('e0-1', 'e0-1*'), ('e3-4', 'e3-4*'))
        conj = message.conj()
        assert conj.bond_labels == tuple(bra(label) for label in message.bond_labels)
        np.testing.assert_allclose(conj.tensors[0].data, message.tensors[0].data.conj())

    @pytest.mark.parametrize('rank', [1, 2])
    def test_fit_objective_non_decreasing(self, grid_3x3, make_state, rank):
        """Every one-site sweep pair raises the overlap with the exact strip, up to roundoff"""
        state = make_state(grid_3x3, bond_dim=2, seed=16)
        partitioning = partition_line(state, 'columns')
        operator = PartitionOperator.norm(state, partitioning, 2)
        _, report = fit_mps_mpo(None, operator, toward=1, max_rank=rank, sweeps=6, tol=0.0)
        assert report.truncated
        assert len(report.history) == 6
        for before, after in zip(report.history, report.history[1:]):
            assert after >= before * (1.0 - 1e-12)
        assert report.objective == report.history[-1]

    def test_fit_arguments(self, grid_2x3, make_state):
        """Fits go to a neighbouring group with a positive rank"""
        state = make_state(grid_2x3)
        partitioning = partition_line(state, 'columns')
        operator = PartitionOperator.norm(state, partitioning, 1)
        with pytest.raises(ValidationError):
            fit_mps_mpo(None, operator, toward=1, max_rank=4)
        with pytest.raises(ValidationError):
            fit_mps_mpo(None, operator, toward=0, max_rank=0)


class TestAmplitude:
    """Test amplitude contraction"""

    def test_matches_statevector(self, grid_2x3, make_state):
        """Every amplitude agrees with the dense vector at full rank"""
        state = make_state(grid_2x3, bond_dim=2, seed=16)
        partitioning = partition_line(state, 'columns')
        dense = to_dense(state)
        for index in range(2 ** state.n_qubits):
            bits = bits_of(index, state.n_qubits)
            value = amplitude(state, bits, partitioning, rank=16)
            assert value == pytest.approx(dense[index], rel=1e-10, abs=1e-10 * np.abs(dense).max())

    def test_product_state(self, grid_2x3):
        """Basis states have amplitude one on their own bits and zero elsewhere"""
        bits = (1, 0, 1, 1, 0, 0)
        state = product_state(grid_2x3, bits)
        partitioning = partition_line(state, 'columns')
        assert amplitude(state, bits, partitioning, rank=2) == pytest.approx(1.0)
        assert amplitude(state, (1, 0, 1, 1, 0, 1), partitioning, rank=2) == 0.0

    def test_heavy_hex_amplitude(self, heavy_hex_cell, make_state):
        """Heavy-hex columns contract to the dense amplitude"""
        state = make_state(heavy_hex_cell, bond_dim=2, seed=17)
        partitioning = partition_line(state, 'columns')
        bits = (0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0)
        expected = to_dense(state)[basis_index(bits)]
        assert amplitude(state, bits, partitioning, rank=8) == pytest.approx(expected, rel=1e-9)

    def test_wrong_length(self, grid_2x3, zero_state):
        """Bitstrings must match the qubit count"""
        state = zero_state(grid_2x3)
        with pytest.raises(ValidationError):
            amplitude(state, (0, 0), partition_line(state), rank=2)


class TestExpectation:
    """Test Pauli-string expectation values"""

    @pytest.mark.parametrize('text', ['Z0', 'X4', 'Y2', 'Z0 Z1', 'Y3 X4', 'X1 Z2 Y5'])
    def test_matches_statevector(self, grid_2x3, make_state, text):
        """Expectation values agree with the dense vector at full rank"""
        state = make_state(grid_2x3, bond_dim=2, seed=18)
        partitioning = partition_line(state, 'columns')
        observable = PauliString.parse(text)
        value = expectation(state, observable, partitioning, rank=64)
        assert value == pytest.approx(dense_expectation(to_dense(state), observable), abs=1e-10)

    def test_product_state(self, grid_2x3):
        """Z on a basis state is the bit sign"""
        state = product_state(grid_2x3, (0, 1, 0, 0, 0, 0))
        partitioning = partition_line(state, 'columns')
        assert expectation(state, PauliString.parse('Z1'), partitioning, rank=2) == pytest.approx(-1.0)
        assert expectation(state, PauliString.parse('X1'), partitioning, rank=2) == pytest.approx(0.0)

    def test_identity(self, grid_2x3, zero_state):
        """The empty string has expectation one"""
        state = zero_state(grid_2x3)
        assert expectation(state, PauliString(()), partition_line(state), rank=2) == 1.0

    def test_reuses_environment(self, grid_2x3, make_state):
        """A matching environment gives the same value as a fresh one"""
        state = make_state(grid_2x3, bond_dim=2, seed=19)
        partitioning = partition_line(state, 'columns')
        env = norm_environments(state, partitioning, rank=32)
        observable = PauliString.parse('Z3 Z4')
        fresh = expectation(state, observable, partitioning, rank=32)
        assert expectation(state, observable, partitioning, rank=32, env=env) == pytest.approx(fresh, abs=1e-12)

    def test_non_adjacent_groups(self, grid_2x3, zero_state):
        """Strings over non-adjacent groups are rejected"""
        state = zero_state(grid_2x3)
        with pytest.raises(ValidationError, match='adjacent'):
            expectation(state, PauliString.parse('Z0 Z2'), partition_line(state), rank=2)


class TestPartitionStrategies:
    """Test expectation values on a 4x4 grid under both line orderings"""

    def test_columns_and_diagonal_agree(self, make_state):
        """At exact rank the column and diagonal orderings both give the dense value"""
        graph = rotated_square(4, 4)
        state = make_state(graph, bond_dim=2, seed=20)
        observable = PauliString.parse('Z5')
        exact = dense_expectation(to_dense(state), observable)
        values = {
            strategy: expectation(state, observable, partition_line(state, strategy), rank=64)
            for strategy in ('columns', 'diagonal')
        }
        assert values['columns'] == pytest.approx(exact, abs=1e-8)
        assert values['diagonal'] == pytest.approx(exact, abs=1e-8)
        assert abs(values['columns'] - values['diagonal']) < 1e-8

    def test_converges_in_rank(self):
        """<Z5> after three Heisenberg steps approaches the dense value as R grows"""
        graph = rotated_square(4, 4)
        circuit = heisenberg_trotter_circuit(graph, coupling=1.0, layers=3)
        state, _ = run_circuit(product_state(graph, domain_wall(graph)), circuit, chi=2)
        partitioning = partition_line(state, 'columns')
        observable = PauliString.parse('Z5')
        exact = dense_expectation(to_dense(state), observable)
        errors = [abs(expectation(state, observable, partitioning, rank=rank) - exact) for rank in (1, 2, 4, 16)]
        assert errors[-1] < 1e-6
        assert errors[-1] <= min(errors[:-1]) + 1e-9
